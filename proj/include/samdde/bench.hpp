#pragma once

// Error sweeps over (N, Omega), order and cost diagnostics, CSV output.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "samdde/core.hpp"
#include "samdde/problems.hpp"
#include "samdde/refsolve.hpp"
#include "samdde/sam.hpp"

namespace samdde {

enum class ReferenceKind { averaged, oscillatory };

const char* to_string(ReferenceKind kind);
ReferenceKind parse_reference_kind(const std::string& text);

struct SweepSpec {
  std::string problem = "toggle";
  Overrides overrides;
  std::vector<int> N_list;
  std::vector<double> omega_list;
  /// h = T / (c N); 0 picks the problem default (2, or 5 for newpro).
  int nu_factor = 0;
  ReferenceKind reference = ReferenceKind::averaged;
  std::size_t error_component = 0;
  SolverConfig ref_config{};
  FeasibilityRule rule{};
  bool forward_only = false;

  void validate() const;
};

struct Cell {
  int N = 0;
  double omega = 0.0;
  bool excluded = false;
  double error = 0.0;
  std::uint64_t evals = 0;
  double wall_ms = 0.0;
};

struct ErrorTable {
  SweepSpec spec;
  std::vector<int> N_list;
  std::vector<double> omega_list;
  std::vector<Cell> cells;  // row-major: N outer, Omega inner

  [[nodiscard]] const Cell& at(std::size_t row, std::size_t col) const {
    return cells[row * omega_list.size() + col];
  }
  [[nodiscard]] Cell& at(std::size_t row, std::size_t col) {
    return cells[row * omega_list.size() + col];
  }
};

/// Reference trajectories keyed by problem content, Omega bits, kind and
/// solver tolerances, so a table solves each reference once.
class ReferenceCache {
 public:
  std::shared_ptr<const DenseSolution> get(const SweepSpec& spec, const BuiltinProblem& problem,
                                           double omega);
  [[nodiscard]] std::size_t solves() const noexcept { return solves_; }
  [[nodiscard]] std::size_t hits() const noexcept { return hits_; }

  static std::string key(const SweepSpec& spec, double omega);

 private:
  std::map<std::string, std::shared_ptr<const DenseSolution>> store_;
  std::size_t solves_ = 0;
  std::size_t hits_ = 0;
};

/// max_n |X_n[c] - ref(t_n)[c]| over the step points.
double max_step_error(const SamSolution& sol, const DenseSolution& ref, std::size_t component);

/// True when the step points are stroboscopic times (tau Omega / (2 pi N)
/// integer to relative 1e-9).
bool stroboscopic_steps(int N, double omega, double tau);

ErrorTable run_sweep(const SweepSpec& spec, ReferenceCache* cache = nullptr);

/// Ratios e(i,i) / e(i+1,i+1) along the main diagonal. Throws
/// InsufficientDiagonal with fewer than three populated diagonal cells.
/// Errors at rounding level (< 1e-13) are reported as +inf (saturated).
std::vector<double> diagonal_ratios(const ErrorTable& table);
/// Ratios between consecutive populated cells of one column, top to bottom.
std::vector<double> column_ratios(const ErrorTable& table, std::size_t col);

struct ComplexityReport {
  bool equal = false;
  std::uint64_t count_a = 0;
  std::uint64_t count_b = 0;
  std::uint64_t closed_form = 0;  // for the first frequency
};

ComplexityReport complexity_probe(const OscillatoryProblem& problem, int N, int nu_max,
                                  std::pair<double, double> omegas);
/// Same, with nu_max chosen per frequency.
ComplexityReport complexity_probe(const OscillatoryProblem& problem, int N,
                                  const std::function<int(double omega)>& nu_rule,
                                  std::pair<double, double> omegas);

struct TimingReport {
  double speedup = 0.0;
  double sam_ms = 0.0;  // median
  double ref_ms = 0.0;  // median
  std::size_t ref_steps = 0;
  std::uint64_t sam_evals = 0;
};

/// Wall-time ratio: adaptive oscillatory reference over SAM on [0, t_max],
/// medians of `repeats` runs each.
TimingReport timing_compare(const OscillatoryProblem& problem, double omega, int N, int nu_max,
                            const SolverConfig& config = {}, int repeats = 3);

void write_csv(const ErrorTable& table, std::ostream& os);
void emit_csv(const ErrorTable& table, const std::string& path);
std::vector<Cell> parse_csv(std::istream& is);

/// gnuplot script: error against N on log-log axes, one line per Omega,
/// plus an N^-2 reference line.
void write_gnuplot(const ErrorTable& table, const std::string& csv_path, std::ostream& os);

}  // namespace samdde
