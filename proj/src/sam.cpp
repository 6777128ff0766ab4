#include "samdde/sam.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace samdde {

// ---------------------------------------------------------------------------
// MicroStore

MicroTrajectory& MicroStore::emplace(std::int64_t n, int nu_max, std::size_t dim) {
  if (!items_.empty() && n != items_.back().n + 1)
    throw Error(ErrorCode::InvalidArgument, "micro store indices must be consecutive");
  if (capacity_ != 0 && items_.size() == capacity_) {
    // Reuse the evicted buffer.
    MicroTrajectory recycled = std::move(items_.front());
    items_.pop_front();
    if (recycled.u.nu_max() != nu_max || recycled.u.dim() != dim) recycled.u = NuArray(nu_max, dim);
    items_.push_back(std::move(recycled));
  } else {
    items_.push_back(MicroTrajectory{});
    items_.back().u = NuArray(nu_max, dim);
  }
  MicroTrajectory& t = items_.back();
  t.n = n;
  t.has_forward = false;
  t.has_backward = false;
  return t;
}

const MicroTrajectory* MicroStore::find(std::int64_t n) const noexcept {
  if (items_.empty() || n < items_.front().n || n > items_.back().n) return nullptr;
  return &items_[static_cast<std::size_t>(n - items_.front().n)];
}

MicroTrajectory* MicroStore::find(std::int64_t n) noexcept {
  if (items_.empty() || n < items_.front().n || n > items_.back().n) return nullptr;
  return &items_[static_cast<std::size_t>(n - items_.front().n)];
}

const MicroTrajectory& MicroStore::require(std::int64_t n) const {
  if (const auto* t = find(n)) return *t;
  std::ostringstream os;
  os << "micro trajectory for macro index " << n << " is not retained";
  throw Error(ErrorCode::MissingHistory, os.str());
}

// ---------------------------------------------------------------------------
// History

NuArray history_supplier(std::int64_t n, const SamSolution& so_far,
                         const OscillatoryProblem& problem, const GridParams& grid) {
  const int nu_max = grid.nu_max();
  const std::int64_t N = grid.N();
  const double h = grid.h();
  NuArray v(nu_max, problem.dim);
  const int nu_lo = (n == 0 || so_far.forward_only) ? 0 : -nu_max;

  if (n < N) {
    const double base = -grid.tau() + grid.step_time(n);
    for (int nu = nu_lo; nu <= nu_max; ++nu) problem.history.eval(base + nu * h, v.at(nu));
    return v;
  }
  if (n == N) {
    const MicroTrajectory& u0 = so_far.micro_store.require(0);
    for (int nu = nu_lo; nu <= nu_max; ++nu) {
      if (nu < 0 && !u0.has_backward) {
        problem.history.eval(nu * h, v.at(nu));
      } else {
        const auto src = u0.u.at(nu);
        std::copy(src.begin(), src.end(), v.at(nu).begin());
      }
    }
    return v;
  }
  const MicroTrajectory& past = so_far.micro_store.require(n - N);
  if ((nu_lo < 0 && !past.has_backward) || !past.has_forward) {
    std::ostringstream os;
    os << "micro trajectory " << n - N << " lacks the legs needed at macro index " << n;
    throw Error(ErrorCode::MissingHistory, os.str());
  }
  for (int nu = nu_lo; nu <= nu_max; ++nu) {
    const auto src = past.u.at(nu);
    std::copy(src.begin(), src.end(), v.at(nu).begin());
  }
  return v;
}

// ---------------------------------------------------------------------------
// Micro-integration

namespace {

void check_finite(ConstVec u, std::int64_t n, int nu) {
  for (double x : u) {
    if (!std::isfinite(x)) {
      std::ostringstream os;
      os << "non-finite micro state at n=" << n << ", nu=" << nu;
      throw Error(ErrorCode::NonFiniteState, os.str());
    }
  }
}

}  // namespace

void integrate_forward(const OscillatoryProblem& problem, const GridParams& grid,
                       const NuArray& past, MicroTrajectory& traj, MutVec scratch) {
  const double h = grid.h();
  const double omega = grid.omega();
  const double tn = traj.anchor_time;
  const std::size_t d = problem.dim;
  for (int nu = 0; nu < grid.nu_max(); ++nu) {
    const ConstVec u = traj.u.at(nu);
    problem.rhs(u, past.at(nu), tn + nu * h, omega * nu * h, omega, scratch);
    MutVec next = traj.u.at(nu + 1);
    for (std::size_t i = 0; i < d; ++i) next[i] = u[i] + h * scratch[i];
    check_finite(next, traj.n, nu + 1);
  }
  traj.has_forward = true;
}

void integrate_backward(const OscillatoryProblem& problem, const GridParams& grid,
                        const NuArray& past, MicroTrajectory& traj, MutVec scratch) {
  const double h = grid.h();
  const double omega = grid.omega();
  const double tn = traj.anchor_time;
  const std::size_t d = problem.dim;
  for (int nu = 0; nu < grid.nu_max(); ++nu) {
    const ConstVec u = traj.u.at(-nu);
    problem.rhs(u, past.at(-nu), tn - nu * h, -omega * nu * h, omega, scratch);
    MutVec next = traj.u.at(-nu - 1);
    for (std::size_t i = 0; i < d; ++i) next[i] = u[i] - h * scratch[i];
    check_finite(next, traj.n, -nu - 1);
  }
  traj.has_backward = true;
}

namespace {

MicroTrajectory seeded(const GridParams& grid, std::int64_t n, ConstVec X_n) {
  MicroTrajectory t;
  t.n = n;
  t.anchor_time = grid.step_time(n);
  t.u = NuArray(grid.nu_max(), X_n.size());
  std::copy(X_n.begin(), X_n.end(), t.u.at(0).begin());
  return t;
}

}  // namespace

MicroTrajectory micro_forward(const OscillatoryProblem& problem, const GridParams& grid,
                              std::int64_t n, ConstVec X_n, const NuArray& past) {
  MicroTrajectory t = seeded(grid, n, X_n);
  State scratch(problem.dim);
  integrate_forward(problem, grid, past, t, scratch);
  return t;
}

MicroTrajectory micro_backward(const OscillatoryProblem& problem, const GridParams& grid,
                               std::int64_t n, ConstVec X_n, const NuArray& past) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "no backward leg at n = 0");
  MicroTrajectory t = seeded(grid, n, X_n);
  State scratch(problem.dim);
  integrate_backward(problem, grid, past, t, scratch);
  return t;
}

State slope_central(const MicroTrajectory& traj, double T) {
  if (!traj.has_forward || !traj.has_backward)
    throw Error(ErrorCode::InvalidArgument, "central slope needs both micro legs");
  const int m = traj.u.nu_max();
  const auto up = traj.u.at(m);
  const auto dn = traj.u.at(-m);
  State F(up.size());
  for (std::size_t i = 0; i < F.size(); ++i) F[i] = (up[i] - dn[i]) / (2.0 * T);
  return F;
}

State slope_forward(const MicroTrajectory& traj, double T) {
  if (!traj.has_forward) throw Error(ErrorCode::InvalidArgument, "forward slope needs forward leg");
  const int m = traj.u.nu_max();
  const auto up = traj.u.at(m);
  const auto u0 = traj.u.at(0);
  State F(up.size());
  for (std::size_t i = 0; i < F.size(); ++i) F[i] = (up[i] - u0[i]) / T;
  return F;
}

// ---------------------------------------------------------------------------
// Driver

SamSolution sam_solve(const OscillatoryProblem& problem, const GridParams& grid,
                      const SamOptions& options) {
  problem.validate();
  if (std::abs(grid.tau() - problem.tau) > 1e-14 * problem.tau)
    throw Error(ErrorCode::InvalidArgument, "grid delay differs from problem delay");

  const std::int64_t N = grid.N();
  const std::int64_t M = grid.last_step(problem.t_max);
  const int nu_max = grid.nu_max();
  const double H = grid.H();
  const double T = grid.T();
  const std::size_t d = problem.dim;

  SamSolution sol;
  sol.grid = grid;
  sol.forward_only = options.forward_only;
  sol.micro_store = MicroStore(options.retain_all_micro ? 0 : static_cast<std::size_t>(N + 1));
  sol.times.reserve(static_cast<std::size_t>(M + 1));
  sol.states.reserve(static_cast<std::size_t>(M + 1));
  sol.slopes.reserve(static_cast<std::size_t>(M + 1));

  State scratch(d);
  State X = problem.history(0.0);
  sol.times.push_back(0.0);
  sol.states.push_back(X);

  for (std::int64_t n = 0; n <= M; ++n) {
    if (n == N && !options.forward_only) {
      // Table 1: u_{0,-nu} = phi(-nu h), kept for the history of n = N.
      MicroTrajectory* u0 = sol.micro_store.find(0);
      if (u0 == nullptr) throw Error(ErrorCode::MissingHistory, "micro trajectory 0 evicted");
      for (int nu = 1; nu <= nu_max; ++nu) problem.history.eval(-nu * grid.h(), u0->u.at(-nu));
      u0->has_backward = true;
    }

    NuArray past;
    try {
      past = history_supplier(n, sol, problem, grid);
    } catch (const Error& e) {
      std::ostringstream os;
      os << e.what() << " [macro index " << n << "]";
      throw Error(e.code(), os.str());
    }

    MicroTrajectory& traj = sol.micro_store.emplace(n, nu_max, d);
    traj.anchor_time = grid.step_time(n);
    std::copy(X.begin(), X.end(), traj.u.at(0).begin());

    const bool forward_slope = options.forward_only || n == 0 || n == N;
    integrate_forward(problem, grid, past, traj, scratch);
    sol.eval_count += static_cast<std::uint64_t>(nu_max);
    if (n > 0 && !options.forward_only) {
      integrate_backward(problem, grid, past, traj, scratch);
      sol.eval_count += static_cast<std::uint64_t>(nu_max);
    }

    SlopeRecord rec;
    rec.kind = forward_slope ? SlopeKind::forward : SlopeKind::central;
    rec.F = forward_slope ? slope_forward(traj, T) : slope_central(traj, T);
    sol.slopes.push_back(std::move(rec));

    if (n == M) break;

    const State& F = sol.slopes[static_cast<std::size_t>(n)].F;
    if (n == 0 || n == N) {
      for (std::size_t i = 0; i < d; ++i) X[i] += H * F[i];
    } else {
      const State& Fp = sol.slopes[static_cast<std::size_t>(n - 1)].F;
      for (std::size_t i = 0; i < d; ++i) X[i] += 1.5 * H * F[i] - 0.5 * H * Fp[i];
    }
    sol.times.push_back(grid.step_time(n + 1));
    sol.states.push_back(X);
  }
  return sol;
}

std::uint64_t count_rhs_evals(const SamSolution& solution) { return solution.eval_count; }

std::uint64_t expected_rhs_evals(int n, int nu_max, double t_max, double tau, bool forward_only) {
  const GridParams g(n, nu_max, 1.0, tau);
  const auto M = static_cast<std::uint64_t>(g.last_step(t_max));
  const auto nu = static_cast<std::uint64_t>(nu_max);
  return forward_only ? nu * (M + 1) : nu + 2 * nu * M;
}

}  // namespace samdde
