#pragma once

// Averaged right-hand sides with O(1/Omega^2) accuracy for problems given as
// finite Fourier series f(x, y, theta) = sum_k exp(i k theta) f_k(x, y).
//
// Slow explicit time dependence must be removed beforehand by appending a
// clock component (dx_{D+1}/dt = 1) to the state.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "samdde/core.hpp"

namespace samdde {

using Cplx = std::complex<double>;
using CVec = std::vector<Cplx>;

struct FourierProblem {
  using Coeff = std::function<void(int k, ConstVec X, ConstVec Y, std::span<Cplx> out)>;
  /// (d f_k / d X) dir or (d f_k / d Y) dir.
  using JacAction = std::function<void(int k, ConstVec X, ConstVec Y, std::span<const Cplx> dir,
                                       std::span<Cplx> out)>;

  std::string name;
  std::size_t dim = 0;
  int K = 0;
  Coeff coeff;
  JacAction jac_x;  // empty: centered finite differences
  JacAction jac_y;
  double tau = 0.0;
  HistoryFunction history;
  bool declared_h1 = false;
  /// Box used by random probes; defaults to history(0) +- 0.5.
  State probe_lo;
  State probe_hi;
};

struct AveragedEval {
  State value;
  double imag_residual = 0.0;
  bool finite_difference_jacobians = false;
};

/// Thin evaluation helper around a FourierProblem.
class FourierTerms {
 public:
  FourierTerms(const FourierProblem& p, ConstVec X, ConstVec Y);

  [[nodiscard]] const CVec& f(int k) const;
  CVec jx(int k, std::span<const Cplx> dir) const;
  CVec jy(int k, std::span<const Cplx> dir) const;
  [[nodiscard]] bool used_fd() const noexcept { return fd_; }

 private:
  CVec fd_action(int k, std::span<const Cplx> dir, bool wrt_x) const;

  const FourierProblem& p_;
  State X_;
  State Y_;
  std::vector<CVec> coeffs_;  // index k + K
  bool fd_ = false;
};

State f0(const FourierProblem& problem, ConstVec X, ConstVec Y);
/// k = 0 coefficient recomputed by trapezoidal quadrature of the series in
/// theta over `points` nodes; independent of the coefficient indexing.
State f0_quadrature(const std::function<void(ConstVec X, ConstVec Y, double theta, MutVec out)>& rhs,
                    ConstVec X, ConstVec Y, int points);

/// [f_i, f_j] = (d f_j / dX) f_i - (d f_i / dX) f_j.
CVec commutator(const FourierProblem& problem, int i, int j, ConstVec X, ConstVec Y);

/// F^(1): valid on 0 <= t < tau; dphi is the history derivative at t - tau.
AveragedEval averaged_rhs_phase1(const FourierProblem& problem, ConstVec X, ConstVec Y,
                                 ConstVec dphi, double t, double omega);
/// F^(2): valid on t >= tau, with f_{k tau} = f_k(Y, Z).
AveragedEval averaged_rhs_phase2(const FourierProblem& problem, ConstVec X, ConstVec Y,
                                 ConstVec Z, double omega);

/// Wraps the evaluator as an AveragedProblem (throws NonRealResult when the
/// imaginary residual exceeds 1e-8).
AveragedProblem averaged_from_fourier(const FourierProblem& problem, double t_max = 2.0);

/// (H1): f_k, k != 0, independent of the delayed argument. Probes 50 random
/// states and directions; throws DeclarationMismatch when the probes
/// contradict `declared_h1`.
bool check_h1(const FourierProblem& problem, std::uint64_t seed = 0);
/// (H2): Omega tau / (2 pi) integer within relative 1e-9.
bool check_h2(double tau, double omega);

enum class SlopeCase {
  forward_before_tau = 1,   // n < N, forward difference
  central_before_tau = 2,   // n < N, central difference
  forward_after_tau = 3,    // n >= N, forward difference
  central_after_tau = 4,    // n > N, central difference
};

/// Leading terms of the difference quotients SAM forms at each kind of step
/// point. Case 4 omits the exp(i k Omega tau) factor that F^(2) carries, so
/// it agrees with F^(2) only under (H1) or (H2).
State slope_oracle(const FourierProblem& problem, SlopeCase which, ConstVec X, ConstVec Y,
                   ConstVec Z, ConstVec dphi, double omega);

}  // namespace samdde
