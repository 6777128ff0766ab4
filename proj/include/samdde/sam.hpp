#pragma once

// Stroboscopic averaging method for constant-delay problems.
//
// The averaged solution X is advanced on the macro grid t_n = n tau / N with
// AB2 (Euler at n = 0 and n = N, where dX/dt jumps). Each slope F_n is the
// difference quotient of an Euler micro-integration of the oscillatory
// problem over one period forward (and one backward), started at phase 0.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

#include "samdde/core.hpp"

namespace samdde {

/// Values indexed by nu in [-nu_max, nu_max], each a vector in R^D.
class NuArray {
 public:
  NuArray() = default;
  NuArray(int nu_max, std::size_t dim)
      : nu_max_(nu_max), dim_(dim), data_((2 * static_cast<std::size_t>(nu_max) + 1) * dim, 0.0) {}

  [[nodiscard]] int nu_max() const noexcept { return nu_max_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

  [[nodiscard]] ConstVec at(int nu) const noexcept {
    return {data_.data() + offset(nu), dim_};
  }
  [[nodiscard]] MutVec at(int nu) noexcept { return {data_.data() + offset(nu), dim_}; }

 private:
  [[nodiscard]] std::size_t offset(int nu) const noexcept {
    return static_cast<std::size_t>(nu + nu_max_) * dim_;
  }

  int nu_max_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Euler micro-solution u_{n, nu} anchored at t_n, u_{n,0} = X_n.
struct MicroTrajectory {
  std::int64_t n = 0;
  double anchor_time = 0.0;
  NuArray u;
  bool has_forward = false;
  bool has_backward = false;
};

enum class SlopeKind { central, forward };

struct SlopeRecord {
  State F;
  SlopeKind kind = SlopeKind::central;
};

struct SamOptions {
  /// Forward differences at every step point, no backward legs. Converges
  /// like H^2 + 1/Omega without needing (H1) or (H2).
  bool forward_only = false;
  /// Keep every micro trajectory instead of the last N + 1.
  bool retain_all_micro = false;
};

/// Ring buffer of micro trajectories; holds indices (latest - capacity, latest].
class MicroStore {
 public:
  explicit MicroStore(std::size_t capacity = 0) : capacity_(capacity) {}

  /// Returns a slot for index n (must be latest + 1), evicting the oldest.
  MicroTrajectory& emplace(std::int64_t n, int nu_max, std::size_t dim);
  [[nodiscard]] const MicroTrajectory* find(std::int64_t n) const noexcept;
  [[nodiscard]] MicroTrajectory* find(std::int64_t n) noexcept;
  /// Throws MissingHistory when n has been evicted or never stored.
  [[nodiscard]] const MicroTrajectory& require(std::int64_t n) const;

  [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] std::int64_t oldest() const noexcept {
    return items_.empty() ? -1 : items_.front().n;
  }

 private:
  std::size_t capacity_;  // 0 = unbounded
  std::deque<MicroTrajectory> items_;
};

struct SamSolution {
  GridParams grid{1, 1, 1.0, 1.0};
  std::vector<double> times;   // t_0..t_M
  std::vector<State> states;   // X_0..X_M
  std::vector<SlopeRecord> slopes;  // F_0..F_M (F_M would advance to t_{M+1})
  MicroStore micro_store;
  std::uint64_t eval_count = 0;
  bool forward_only = false;
};

/// v_{n, nu}: past values fed to the micro-integration at macro index n.
/// For n = 0 only nu >= 0 is filled.
NuArray history_supplier(std::int64_t n, const SamSolution& so_far,
                         const OscillatoryProblem& problem, const GridParams& grid);

/// Forward Euler leg over one period from u_{n,0} = X_n, theta = Omega nu h.
MicroTrajectory micro_forward(const OscillatoryProblem& problem, const GridParams& grid,
                              std::int64_t n, ConstVec X_n, const NuArray& past);
/// Backward Euler leg over one period, theta = -Omega nu h.
MicroTrajectory micro_backward(const OscillatoryProblem& problem, const GridParams& grid,
                               std::int64_t n, ConstVec X_n, const NuArray& past);

// In-place variants; traj.u.at(0) must already hold X_n. Each performs
// exactly nu_max rhs evaluations.
void integrate_forward(const OscillatoryProblem& problem, const GridParams& grid,
                       const NuArray& past, MicroTrajectory& traj, MutVec scratch);
void integrate_backward(const OscillatoryProblem& problem, const GridParams& grid,
                        const NuArray& past, MicroTrajectory& traj, MutVec scratch);

State slope_central(const MicroTrajectory& traj, double T);
State slope_forward(const MicroTrajectory& traj, double T);

SamSolution sam_solve(const OscillatoryProblem& problem, const GridParams& grid,
                      const SamOptions& options = {});

std::uint64_t count_rhs_evals(const SamSolution& solution);
/// nu_max + 2 nu_max M with M = floor(t_max / H); nu_max (M + 1) when forward-only.
std::uint64_t expected_rhs_evals(int n, int nu_max, double t_max, double tau,
                                 bool forward_only = false);

}  // namespace samdde
