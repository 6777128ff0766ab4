#pragma once

// Domain types shared by the SAM integrator, the reference DDE solver,
// the averaged-system evaluator and the benchmark harness.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace samdde {

using State = std::vector<double>;
using ConstVec = std::span<const double>;
using MutVec = std::span<double>;

enum class ErrorCode {
  InvalidArgument,
  InfeasibleGrid,
  OutOfDomain,
  NonFiniteState,
  MissingHistory,
  StepSizeUnderflow,
  MaxStepsExceeded,
  NonRealResult,
  DeclarationMismatch,
  UnsupportedBeta,
  NonStroboscopicComparison,
  InsufficientDiagonal,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Initial function on [-tau, 0].
///
/// `derivative` may be left empty; `deriv()` then falls back to a centered
/// difference with delta = 1e-6 * max(1, |t|), one-sided at the endpoints.
struct HistoryFunction {
  using Fn = std::function<void(double t, MutVec out)>;

  std::size_t dim = 0;
  double tau = 0.0;
  Fn value;
  Fn derivative;

  static HistoryFunction constant(State v, double tau);

  [[nodiscard]] double domain_left() const noexcept { return -tau; }
  [[nodiscard]] bool has_derivative() const noexcept { return static_cast<bool>(derivative); }

  // Both throw OutOfDomain outside [-tau, 0]. Queries within 1e-12*tau of an
  // endpoint are clamped onto it.
  void eval(double t, MutVec out) const;
  [[nodiscard]] State operator()(double t) const;
  void deriv(double t, MutVec out) const;
};

/// rhs(x, y, t, theta, Omega) with y = x(t - tau); 2*pi-periodic in theta.
using OscillatoryRhs =
    std::function<void(ConstVec x, ConstVec y, double t, double theta, double omega, MutVec out)>;

struct OscillatoryProblem {
  std::string name;
  std::size_t dim = 0;
  OscillatoryRhs rhs;
  double tau = 0.0;
  HistoryFunction history;
  double t_max = 2.0;

  void validate() const;
};

/// Two-phase averaged right-hand side: phase 1 on [0, tau) sees the history
/// derivative at t - tau, phase 2 on [tau, inf) sees the second lag
/// Z = X(t - 2 tau).
struct AveragedProblem {
  using Phase1 =
      std::function<void(ConstVec X, ConstVec Y, ConstVec dphi, double t, double omega, MutVec out)>;
  using Phase2 =
      std::function<void(ConstVec X, ConstVec Y, ConstVec Z, double t, double omega, MutVec out)>;

  std::string name;
  std::size_t dim = 0;
  Phase1 rhs_phase1;
  Phase2 rhs_phase2;
  double tau = 0.0;
  HistoryFunction history;
  double t_max = 2.0;
};

struct FeasibilityRule {
  double min_ratio = 2.0;   // required H / T
  double rel_tol = 1e-2;    // slack on min_ratio
};

class GridParams {
 public:
  GridParams(int n, int nu_max, double omega, double tau);

  [[nodiscard]] int N() const noexcept { return n_; }
  [[nodiscard]] int nu_max() const noexcept { return nu_max_; }
  [[nodiscard]] double omega() const noexcept { return omega_; }
  [[nodiscard]] double tau() const noexcept { return tau_; }
  [[nodiscard]] double H() const noexcept { return H_; }
  [[nodiscard]] double T() const noexcept { return T_; }
  [[nodiscard]] double h() const noexcept { return h_; }

  /// t_n = n * tau / N, never accumulated.
  [[nodiscard]] double step_time(std::int64_t n) const noexcept;
  /// floor(t_max / H), robust to t_max being a multiple of H.
  [[nodiscard]] std::int64_t last_step(double t_max) const;
  [[nodiscard]] bool feasible(const FeasibilityRule& rule = {}) const noexcept;

 private:
  int n_;
  int nu_max_;
  double omega_;
  double tau_;
  double H_;
  double T_;
  double h_;
};

/// Throws InvalidArgument on bad inputs and InfeasibleGrid when H/T is below
/// the rule's threshold.
GridParams make_grid(int n, int nu_max, double omega, double tau, const FeasibilityRule& rule = {});

State history_value(const OscillatoryProblem& problem, double t);

/// Piecewise cubic Hermite trajectory produced by the reference solver.
/// Mesh points 0 = t_0 < ... < t_K; left of zero the history is used.
class DenseSolution {
 public:
  DenseSolution() = default;
  DenseSolution(std::size_t dim, HistoryFunction history);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] const std::vector<double>& mesh() const noexcept { return times_; }
  [[nodiscard]] const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  [[nodiscard]] double t_begin() const noexcept { return times_.empty() ? 0.0 : times_.front(); }
  [[nodiscard]] double t_end() const noexcept { return times_.empty() ? 0.0 : times_.back(); }
  [[nodiscard]] std::size_t segments() const noexcept {
    return times_.empty() ? 0 : times_.size() - 1;
  }
  [[nodiscard]] ConstVec state_at_mesh(std::size_t i) const;

  void eval(double t, MutVec out) const;
  [[nodiscard]] State eval(double t) const;

  // Builder interface used by the solver.
  void start(double t0, ConstVec y0);
  void push(double t1, ConstVec y1, ConstVec f_left, ConstVec f_right);
  void set_breakpoints(std::vector<double> bps) { breakpoints_ = std::move(bps); }

  struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
  };
  Stats stats;

 private:
  std::size_t dim_ = 0;
  HistoryFunction history_;
  std::vector<double> times_;
  std::vector<double> states_;   // (K+1) * dim
  std::vector<double> f_start_;  // K * dim, slope at segment start (right limit)
  std::vector<double> f_end_;    // K * dim, slope at segment end (left limit)
  std::vector<double> breakpoints_;
};

/// Evaluates rhs at random (x, y, t, theta) and at theta + 2 pi; returns the
/// largest relative discrepancy.
double theta_periodicity_defect(const OscillatoryProblem& problem, double omega, int samples,
                                std::uint64_t seed);

}  // namespace samdde
