#pragma once

// Built-in problems: the delayed toggle switch with weak or strong fast
// forcing, and a scalar test equation whose fast modes depend on the delayed
// state.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "samdde/averaging.hpp"
#include "samdde/core.hpp"

namespace samdde {

struct ToggleParams {
  double alpha = 2.5;
  double beta = 2.0;
  double A = 0.1;
  double omega_slow = 0.1;
  double B = 4.0;
  double tau = 0.5;
  double B_hat = 0.1;
  double phi1 = 0.5;
  double phi2 = 2.0;
  double t_max = 2.0;

  void validate() const;
};

/// x1' = a/(1+x2^b) - y1 + A sin(w t) + B sin(theta), x2' = a/(1+x1^b) - y2.
OscillatoryProblem toggle_oscillatory(const ToggleParams& p = {});
/// Hand-averaged toggle; the -B/Omega term on x1 switches on at t = tau.
AveragedProblem toggle_averaged(const ToggleParams& p = {});
/// Toggle as a Fourier series with K = 1, state augmented by a clock s
/// (third component, s' = 1, s = t on the history interval).
FourierProblem toggle_fourier(const ToggleParams& p = {});

struct NewproParams {
  double tau = 0.5;
  double phi = 0.1;
  double t_max = 2.0;
};

struct NewproSet {
  OscillatoryProblem oscillatory;
  AveragedProblem averaged;
  FourierProblem fourier;
};

/// x' = y + (x - y) sin(theta) + (y/2) cos(2 theta).
NewproSet newpro_problem(const NewproParams& p = {});

struct GenePair {
  OscillatoryProblem oscillatory;
  AveragedProblem averaged;
};

/// Toggle with O(Omega) forcing B_hat Omega sin(theta) on x1. The averaged
/// system has a closed form only for beta = 2 (UnsupportedBeta otherwise).
GenePair geneproblem_pair(const ToggleParams& p = {});

/// x1 = X1 + B_hat (1 - cos(Omega t)) and its inverse.
double gene_transform(double X1, double t, double omega, double B_hat);
double gene_inverse(double x1, double t, double omega, double B_hat);
/// Theta-average of alpha / (1 + (X1 + B_hat (1 - cos theta))^2).
double gene_mean_x2_rate(double X1, double alpha, double B_hat);
/// Right-hand side of the transformed system, second component only, before
/// averaging: alpha / (1 + (X1 + B_hat (1 - cos theta))^beta) - Y2.
double gene_transformed_x2_rate(double X1, double Y2, double theta, const ToggleParams& p);

struct BuiltinProblem {
  std::string name;
  OscillatoryProblem oscillatory;
  AveragedProblem averaged;
  std::optional<FourierProblem> fourier;
  /// nu_max = c N, i.e. h = T / (c N).
  int nu_factor = 2;
};

using Overrides = std::map<std::string, double>;

/// toggle | toggle-gene | newpro. Unknown names or keys throw InvalidArgument.
BuiltinProblem make_problem(const std::string& name, const Overrides& overrides = {});
std::vector<std::string> problem_names();
std::vector<std::string> problem_keys(const std::string& name);

}  // namespace samdde
