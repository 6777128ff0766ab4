#pragma once

// Adaptive Bogacki-Shampine 3(2) solver for constant-lag DDEs, advanced by
// the method of steps with cubic Hermite dense output. Every multiple of
// each lag and every propagated jump time is an exact mesh point.

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "samdde/core.hpp"

namespace samdde {

struct SolverConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  std::size_t max_steps = 20'000'000;
  double initial_step = 0.0;  // 0 = automatic
  double max_step = std::numeric_limits<double>::infinity();
  /// > 0 switches to fixed steps (still clipped at breakpoints).
  double fixed_step = 0.0;
  int jump_depth = 4;
};

class DdeSolver;

/// Lazy access to x(t - lag_i) for the stage currently being evaluated.
class LagAccess {
 public:
  LagAccess(const DenseSolution& dense, const std::vector<double>& lags);

  void reset(double t) noexcept;
  /// Throws MissingHistory when t - lag lies left of the history domain.
  ConstVec operator()(std::size_t lag_index);

 private:
  const DenseSolution& dense_;
  const std::vector<double>& lags_;
  double t_ = 0.0;
  std::vector<double> values_;
  std::vector<char> ready_;
};

struct LaggedRHS {
  using Fn = std::function<void(double t, ConstVec x, LagAccess& lagged, MutVec out)>;

  std::size_t dim = 0;
  std::vector<double> lags;        // strictly positive, ascending
  Fn rhs;
  std::vector<double> jump_times;  // known discontinuities of the rhs in t

  void validate() const;
};

struct TimeSpan {
  double begin = 0.0;
  double end = 0.0;
};

/// Mesh points the solver must land on inside (begin, end]: all multiples of
/// each lag, the jump times, and jump times shifted by up to `depth` lags.
std::vector<double> mandatory_breakpoints(const LaggedRHS& rhs, TimeSpan span, int depth);

DenseSolution solve_dde(const LaggedRHS& rhs, const HistoryFunction& history, TimeSpan span,
                        const SolverConfig& config = {});

/// Oscillatory problem with theta = Omega t; steps capped at T/8.
DenseSolution solve_oscillatory(const OscillatoryProblem& problem, double omega,
                                const SolverConfig& config = {});
LaggedRHS oscillatory_as_lagged(const OscillatoryProblem& problem, double omega);

/// Averaged problem: lags {tau, 2 tau}, jump at t = tau.
DenseSolution solve_averaged(const AveragedProblem& problem, double omega,
                             const SolverConfig& config = {});
LaggedRHS averaged_as_lagged(const AveragedProblem& problem, double omega);

struct OrderEstimate {
  double order = 0.0;
  std::array<std::size_t, 3> steps{};
  std::array<double, 2> differences{};
};

/// Three configs from coarse to fine.
using RefinementLadder = std::array<SolverConfig, 3>;
RefinementLadder tolerance_ladder(double coarsest_rel_tol = 1e-5, double factor = 1e-2);
RefinementLadder step_ladder(double coarsest_step);

/// Self-convergence order from three refinement levels, measured against
/// accepted step counts (no exact solution needed). Differences are max
/// norms over 65 uniformly spaced sample times.
OrderEstimate self_convergence_order(const LaggedRHS& rhs, const HistoryFunction& history,
                                     TimeSpan span, const RefinementLadder& ladder = tolerance_ladder());

/// Least-squares slope of -log(error) against log(steps).
double observed_order(const std::vector<double>& errors, const std::vector<std::size_t>& steps);

}  // namespace samdde
