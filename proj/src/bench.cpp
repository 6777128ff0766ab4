#include "samdde/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace samdde {

const char* to_string(ReferenceKind kind) {
  return kind == ReferenceKind::averaged ? "averaged" : "oscillatory";
}

ReferenceKind parse_reference_kind(const std::string& text) {
  if (text == "averaged") return ReferenceKind::averaged;
  if (text == "oscillatory") return ReferenceKind::oscillatory;
  throw Error(ErrorCode::InvalidArgument, "reference must be averaged or oscillatory, got '" + text + "'");
}

void SweepSpec::validate() const {
  if (N_list.empty() || omega_list.empty())
    throw Error(ErrorCode::InvalidArgument, "sweep needs at least one N and one Omega");
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    if (N_list[i] < 1) throw Error(ErrorCode::InvalidArgument, "N must be >= 1");
    if (i > 0 && N_list[i] <= N_list[i - 1])
      throw Error(ErrorCode::InvalidArgument, "N list must be strictly ascending");
  }
  for (std::size_t i = 0; i < omega_list.size(); ++i) {
    if (!(omega_list[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "Omega must be > 0");
    if (i > 0 && omega_list[i] <= omega_list[i - 1])
      throw Error(ErrorCode::InvalidArgument, "Omega list must be strictly ascending");
  }
  if (nu_factor < 0) throw Error(ErrorCode::InvalidArgument, "nu factor must be >= 0");
}

// ---------------------------------------------------------------------------

namespace {

std::string hex_bits(double x) {
  std::uint64_t u = 0;
  std::memcpy(&u, &x, sizeof u);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, u);
  return buf;
}

}  // namespace

std::string ReferenceCache::key(const SweepSpec& spec, double omega) {
  std::ostringstream os;
  os << spec.problem << '|';
  for (const auto& [k, v] : spec.overrides) os << k << '=' << hex_bits(v) << ';';
  os << '|' << to_string(spec.reference) << '|' << hex_bits(omega) << '|'
     << hex_bits(spec.ref_config.rel_tol) << ',' << hex_bits(spec.ref_config.abs_tol) << ','
     << hex_bits(spec.ref_config.fixed_step);
  return os.str();
}

std::shared_ptr<const DenseSolution> ReferenceCache::get(const SweepSpec& spec,
                                                         const BuiltinProblem& problem,
                                                         double omega) {
  const std::string k = key(spec, omega);
  if (auto it = store_.find(k); it != store_.end()) {
    ++hits_;
    return it->second;
  }
  auto sol = std::make_shared<DenseSolution>(
      spec.reference == ReferenceKind::averaged
          ? solve_averaged(problem.averaged, omega, spec.ref_config)
          : solve_oscillatory(problem.oscillatory, omega, spec.ref_config));
  ++solves_;
  store_.emplace(k, sol);
  return sol;
}

double max_step_error(const SamSolution& sol, const DenseSolution& ref, std::size_t component) {
  double err = 0.0;
  State r(ref.dim());
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    ref.eval(sol.times[i], r);
    err = std::max(err, std::abs(sol.states[i][component] - r[component]));
  }
  return err;
}

bool stroboscopic_steps(int N, double omega, double tau) {
  const double r = tau * omega / (2.0 * std::numbers::pi * N);
  const double m = std::round(r);
  return m >= 1.0 && std::abs(r - m) <= 1e-9 * r;
}

ErrorTable run_sweep(const SweepSpec& spec, ReferenceCache* cache) {
  spec.validate();
  const BuiltinProblem problem = make_problem(spec.problem, spec.overrides);
  if (spec.error_component >= problem.oscillatory.dim)
    throw Error(ErrorCode::InvalidArgument, "error component out of range");
  const int c = spec.nu_factor > 0 ? spec.nu_factor : problem.nu_factor;
  const double tau = problem.oscillatory.tau;

  ErrorTable table;
  table.spec = spec;
  table.N_list = spec.N_list;
  table.omega_list = spec.omega_list;
  table.cells.resize(spec.N_list.size() * spec.omega_list.size());

  for (std::size_t i = 0; i < spec.N_list.size(); ++i) {
    for (std::size_t j = 0; j < spec.omega_list.size(); ++j) {
      Cell& cell = table.at(i, j);
      cell.N = spec.N_list[i];
      cell.omega = spec.omega_list[j];
      const GridParams grid(cell.N, c * cell.N, cell.omega, tau);
      cell.excluded = !grid.feasible(spec.rule);
      if (!cell.excluded && spec.reference == ReferenceKind::oscillatory &&
          !stroboscopic_steps(cell.N, cell.omega, tau)) {
        std::ostringstream os;
        os << "step points are not stroboscopic times at N=" << cell.N << ", Omega=" << cell.omega
           << "; compare against the averaged reference instead";
        throw Error(ErrorCode::NonStroboscopicComparison, os.str());
      }
    }
  }

  ReferenceCache local;
  ReferenceCache& refs = cache != nullptr ? *cache : local;
  SamOptions options;
  options.forward_only = spec.forward_only;

  for (Cell& cell : table.cells) {
    if (cell.excluded) continue;
    try {
      const auto ref = refs.get(spec, problem, cell.omega);
      const GridParams grid(cell.N, c * cell.N, cell.omega, tau);
      const auto t0 = std::chrono::steady_clock::now();
      const SamSolution sol = sam_solve(problem.oscillatory, grid, options);
      const auto t1 = std::chrono::steady_clock::now();
      cell.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      cell.evals = sol.eval_count;
      cell.error = max_step_error(sol, *ref, spec.error_component);
    } catch (const Error& e) {
      std::ostringstream os;
      os << e.what() << " (N=" << cell.N << ", Omega=" << cell.omega << ")";
      throw Error(e.code(), os.str());
    }
  }
  return table;
}

// ---------------------------------------------------------------------------

namespace {

double ratio(double a, double b) {
  if (a < 1e-13 || b < 1e-13) return std::numeric_limits<double>::infinity();
  return a / b;
}

}  // namespace

std::vector<double> diagonal_ratios(const ErrorTable& table) {
  const std::size_t n = std::min(table.N_list.size(), table.omega_list.size());
  std::vector<double> errs;
  for (std::size_t i = 0; i < n; ++i) {
    const Cell& c = table.at(i, i);
    if (!c.excluded) errs.push_back(c.error);
  }
  if (errs.size() < 3) {
    std::ostringstream os;
    os << "only " << errs.size() << " populated diagonal cells (need 3)";
    throw Error(ErrorCode::InsufficientDiagonal, os.str());
  }
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) out.push_back(ratio(errs[i], errs[i + 1]));
  return out;
}

std::vector<double> column_ratios(const ErrorTable& table, std::size_t col) {
  if (col >= table.omega_list.size()) throw Error(ErrorCode::InvalidArgument, "column out of range");
  std::vector<double> errs;
  for (std::size_t i = 0; i < table.N_list.size(); ++i) {
    const Cell& c = table.at(i, col);
    if (!c.excluded) errs.push_back(c.error);
  }
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) out.push_back(ratio(errs[i], errs[i + 1]));
  return out;
}

// ---------------------------------------------------------------------------

ComplexityReport complexity_probe(const OscillatoryProblem& problem, int N, int nu_max,
                                  std::pair<double, double> omegas) {
  return complexity_probe(problem, N, [nu_max](double) { return nu_max; }, omegas);
}

ComplexityReport complexity_probe(const OscillatoryProblem& problem, int N,
                                  const std::function<int(double)>& nu_rule,
                                  std::pair<double, double> omegas) {
  ComplexityReport r;
  const int nu_a = nu_rule(omegas.first);
  const int nu_b = nu_rule(omegas.second);
  r.count_a = sam_solve(problem, make_grid(N, nu_a, omegas.first, problem.tau)).eval_count;
  r.count_b = sam_solve(problem, make_grid(N, nu_b, omegas.second, problem.tau)).eval_count;
  r.closed_form = expected_rhs_evals(N, nu_a, problem.t_max, problem.tau);
  r.equal = r.count_a == r.count_b;
  return r;
}

TimingReport timing_compare(const OscillatoryProblem& problem, double omega, int N, int nu_max,
                            const SolverConfig& config, int repeats) {
  if (repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
  const GridParams grid = make_grid(N, nu_max, omega, problem.tau);
  using clock = std::chrono::steady_clock;
  std::vector<double> sam_ms, ref_ms;
  TimingReport rep;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = clock::now();
    const SamSolution sol = sam_solve(problem, grid);
    auto t1 = clock::now();
    sam_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    rep.sam_evals = sol.eval_count;

    t0 = clock::now();
    const DenseSolution ref = solve_oscillatory(problem, omega, config);
    t1 = clock::now();
    ref_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    rep.ref_steps = ref.stats.accepted;
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  rep.sam_ms = median(sam_ms);
  rep.ref_ms = median(ref_ms);
  rep.speedup = rep.ref_ms / std::max(rep.sam_ms, 1e-6);
  return rep;
}

// ---------------------------------------------------------------------------
// CSV

void write_csv(const ErrorTable& table, std::ostream& os) {
  os << "N,Omega,error,excluded,evals,wall_ms\n";
  char buf[160];
  for (const Cell& c : table.cells) {
    if (c.excluded) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,,1,0,0\n", c.N, c.omega);
    } else {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.9e,0,%" PRIu64 ",%.3f\n", c.N, c.omega, c.error,
                    c.evals, c.wall_ms);
    }
    os << buf;
  }
}

void emit_csv(const ErrorTable& table, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_csv(table, f);
  f.flush();
  if (!f) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

std::vector<Cell> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "N,Omega,error,excluded,evals,wall_ms")
    throw Error(ErrorCode::Io, "missing or unexpected CSV header");
  std::vector<Cell> cells;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() == 5 && !line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw Error(ErrorCode::Io, "bad CSV row: " + line);
    try {
      Cell c;
      c.N = std::stoi(f[0]);
      c.omega = std::stod(f[1]);
      c.excluded = f[3] == "1";
      c.error = f[2].empty() ? 0.0 : std::stod(f[2]);
      c.evals = std::stoull(f[4]);
      c.wall_ms = f[5].empty() ? 0.0 : std::stod(f[5]);
      cells.push_back(c);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::Io, "bad CSV row: " + line);
    }
  }
  return cells;
}

void write_gnuplot(const ErrorTable& table, const std::string& csv_path, std::ostream& os) {
  os << "set datafile separator ','\n"
     << "set logscale xy\n"
     << "set xlabel 'N'\n"
     << "set ylabel 'max error'\n"
     << "set key outside right\n";
  double e1 = 0.0;
  int n1 = 0;
  for (const Cell& c : table.cells) {
    if (!c.excluded && c.error > 0.0) {
      e1 = c.error;
      n1 = c.N;
      break;
    }
  }
  os << "plot";
  for (std::size_t j = 0; j < table.omega_list.size(); ++j) {
    char om[64];
    std::snprintf(om, sizeof om, "%.17g", table.omega_list[j]);
    os << (j == 0 ? " " : ", \\\n     ") << "'" << csv_path << "' every ::1 using "
       << "(($2==" << om << " && $4==0) ? $1 : 1/0):3 with linespoints title 'Omega=" << om << "'";
  }
  if (n1 > 0) {
    os << ", \\\n     " << e1 << "*(" << n1 << "/x)**2 with lines dashtype 2 title 'N^-2'";
  }
  os << "\n";
}

}  // namespace samdde
