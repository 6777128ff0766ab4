#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "samdde/averaging.hpp"
#include "samdde/bench.hpp"
#include "samdde/omega_expr.hpp"
#include "samdde/problems.hpp"
#include "samdde/refsolve.hpp"
#include "samdde/sam.hpp"

namespace samdde::cli {

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InfeasibleGrid:
    case ErrorCode::OutOfDomain:
    case ErrorCode::UnsupportedBeta:
    case ErrorCode::NonStroboscopicComparison:
    case ErrorCode::InsufficientDiagonal:
      return kValidation;
    case ErrorCode::DeclarationMismatch:
      return kVerification;
    default:
      return kSolver;
  }
}

struct Common {
  std::string problem = "toggle";
  std::vector<std::string> sets;
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 0;
};

Overrides parse_sets(const std::vector<std::string>& sets) {
  Overrides ov;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorCode::InvalidArgument, "--set expects key=value, got '" + s + "'");
    const std::string key = s.substr(0, eq);
    const std::string val = s.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(val, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != val.size() || val.empty())
      throw Error(ErrorCode::InvalidArgument, "value for '" + key + "' is not a number");
    ov[key] = v;
  }
  return ov;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != item.size())
      throw Error(ErrorCode::InvalidArgument, "bad integer '" + item + "' in list");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty integer list");
  return out;
}

/// Writes to --out when given, otherwise to `out`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
      os_ = file_.get();
    }
  }
  std::ostream& stream() { return *os_; }
  void finish() {
    os_->flush();
    if (!*os_) throw Error(ErrorCode::Io, "write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

void write_number(std::ostream& os, double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  os << buf;
}

void add_common(CLI::App* sub, Common& c, bool with_out = true) {
  sub->add_option("--problem", c.problem, "toggle | toggle-gene | newpro");
  sub->add_option("--set", c.sets, "parameter override key=value (repeatable)");
  if (with_out) {
    sub->add_option("--out", c.out_path, "output path (default stdout)");
    sub->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv"}));
  }
  sub->add_option("--seed", c.seed, "seed for random probes");
}

BuiltinProblem load_problem(const Common& c, std::optional<double> t_max) {
  Overrides ov = parse_sets(c.sets);
  if (t_max) ov["t_max"] = *t_max;
  return make_problem(c.problem, ov);
}

// ---------------------------------------------------------------------------

struct RunArgs {
  Common c;
  int N = 0;
  int nu_max = 0;
  int nu_factor = 0;
  std::string omega;
  std::optional<double> t_max;
  bool forward_only = false;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const BuiltinProblem p = load_problem(a.c, a.t_max);
  const double omega = parse_omega(a.omega);
  const int factor = a.nu_factor > 0 ? a.nu_factor : p.nu_factor;
  const int nu_max = a.nu_max > 0 ? a.nu_max : factor * a.N;
  const GridParams grid = make_grid(a.N, nu_max, omega, p.oscillatory.tau);
  SamOptions opt;
  opt.forward_only = a.forward_only;
  const auto t0 = std::chrono::steady_clock::now();
  const SamSolution sol = sam_solve(p.oscillatory, grid, opt);
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  Sink sink(a.c.out_path, out);
  std::ostream& os = sink.stream();
  os << 't';
  for (std::size_t i = 1; i <= p.oscillatory.dim; ++i) os << ",X_" << i;
  os << '\n';
  for (std::size_t n = 0; n < sol.times.size(); ++n) {
    write_number(os, sol.times[n]);
    for (double x : sol.states[n]) {
      os << ',';
      write_number(os, x);
    }
    os << '\n';
  }
  sink.finish();
  err << "evals " << sol.eval_count << ", wall " << ms << " ms\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct RefArgs {
  Common c;
  std::string omega;
  std::string kind = "averaged";
  std::optional<double> t_max;
  int points = 201;
  double rtol = 1e-8;
  double atol = 1e-10;
};

int cmd_reference(const RefArgs& a, std::ostream& out, std::ostream& err) {
  const BuiltinProblem p = load_problem(a.c, a.t_max);
  const double omega = parse_omega(a.omega);
  if (a.points < 2) throw Error(ErrorCode::InvalidArgument, "--points must be >= 2");
  SolverConfig cfg;
  cfg.rel_tol = a.rtol;
  cfg.abs_tol = a.atol;
  const ReferenceKind kind = parse_reference_kind(a.kind);
  const DenseSolution sol = kind == ReferenceKind::averaged
                                ? solve_averaged(p.averaged, omega, cfg)
                                : solve_oscillatory(p.oscillatory, omega, cfg);
  Sink sink(a.c.out_path, out);
  std::ostream& os = sink.stream();
  os << 't';
  for (std::size_t i = 1; i <= sol.dim(); ++i) os << ",x_" << i;
  os << '\n';
  const double tm = p.oscillatory.t_max;
  State x(sol.dim());
  for (int k = 0; k < a.points; ++k) {
    const double t = tm * k / (a.points - 1);
    sol.eval(t, x);
    write_number(os, t);
    for (double v : x) {
      os << ',';
      write_number(os, v);
    }
    os << '\n';
  }
  sink.finish();
  err << "accepted " << sol.stats.accepted << ", rejected " << sol.stats.rejected << ", rhs evals "
      << sol.stats.rhs_evals << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct TableArgs {
  Common c;
  std::string N_list = "1,2,4,8,16,32,64,128";
  std::string omega;
  std::string omega_list;
  std::string reference = "averaged";
  int nu_factor = 0;
  std::size_t component = 1;
  std::optional<double> t_max;
  std::string gnuplot;
  bool wall_time = false;
  bool forward_only = false;
};

SweepSpec sweep_from(const TableArgs& a) {
  SweepSpec s;
  s.problem = a.c.problem;
  s.overrides = parse_sets(a.c.sets);
  if (a.t_max) s.overrides["t_max"] = *a.t_max;
  s.N_list = parse_int_list(a.N_list);
  if (!a.omega.empty() && !a.omega_list.empty())
    throw Error(ErrorCode::InvalidArgument, "give either --omega or --omega-list");
  if (!a.omega.empty()) {
    s.omega_list = parse_omega_list(a.omega);
  } else {
    s.omega_list = builtin_omega_list(a.omega_list.empty() ? "tab4" : a.omega_list);
  }
  s.reference = parse_reference_kind(a.reference);
  s.nu_factor = a.nu_factor;
  if (a.component < 1) throw Error(ErrorCode::InvalidArgument, "--component is 1-based");
  s.error_component = a.component - 1;
  s.forward_only = a.forward_only;
  return s;
}

int cmd_table(const TableArgs& a, std::ostream& out, std::ostream& err) {
  ErrorTable table = run_sweep(sweep_from(a));
  if (!a.wall_time)
    for (Cell& c : table.cells) c.wall_ms = 0.0;
  Sink sink(a.c.out_path, out);
  write_csv(table, sink.stream());
  sink.finish();
  if (!a.gnuplot.empty()) {
    std::ofstream g(a.gnuplot);
    if (!g) throw Error(ErrorCode::Io, "cannot open '" + a.gnuplot + "'");
    write_gnuplot(table, a.c.out_path.empty() ? "table.csv" : a.c.out_path, g);
  }
  std::size_t populated = 0;
  for (const Cell& c : table.cells) populated += c.excluded ? 0 : 1;
  err << table.N_list.size() << "x" << table.omega_list.size() << " table, " << populated
      << " populated cells\n";
  return kOk;
}

int cmd_ratios(const TableArgs& a, std::ostream& out, std::ostream&) {
  const ErrorTable table = run_sweep(sweep_from(a));
  auto print = [&out](const char* label, const std::vector<double>& r) {
    out << label;
    for (std::size_t i = 0; i < r.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4g", r[i]);
      out << (i == 0 ? " " : ",") << buf;
    }
    out << '\n';
  };
  print("diagonal", diagonal_ratios(table));
  for (std::size_t j = 0; j < table.omega_list.size(); ++j) {
    char label[64];
    std::snprintf(label, sizeof label, "column Omega=%.6g", table.omega_list[j]);
    print(label, column_ratios(table, j));
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct AvgArgs {
  Common c;
  std::string omega = "60";
  int samples = 100;
};

int cmd_avg_check(const AvgArgs& a, std::ostream& out, std::ostream& err) {
  const BuiltinProblem p = load_problem(a.c, std::nullopt);
  if (!p.fourier) {
    err << "problem '" << p.name << "' has no Fourier description\n";
    return kValidation;
  }
  if (a.samples < 1) throw Error(ErrorCode::InvalidArgument, "--samples must be >= 1");
  const FourierProblem& fp = *p.fourier;
  const AveragedProblem& hand = p.averaged;
  const double omega = parse_omega(a.omega);
  const double tau = fp.tau;
  const double t_max = hand.t_max;
  const std::size_t d = hand.dim;
  const bool clock = fp.dim == d + 1;
  if (!clock && fp.dim != d)
    throw Error(ErrorCode::InvalidArgument, "Fourier and averaged dimensions disagree");

  const bool h1 = check_h1(fp, a.c.seed);
  const bool h2 = check_h2(tau, omega);

  std::mt19937_64 rng(a.c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  State lo = fp.probe_lo, hi = fp.probe_hi;
  if (lo.size() != fp.dim) {
    lo.assign(fp.dim, -1.0);
    hi.assign(fp.dim, 1.0);
  }
  auto draw = [&](State& v) {
    for (std::size_t i = 0; i < d; ++i) v[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
  };
  State X(fp.dim), Y(fp.dim), Z(fp.dim), dphi(fp.dim), ref(d);
  double dev1 = 0.0, dev2 = 0.0, imag = 0.0;
  bool fd = false;
  for (int s = 0; s < a.samples; ++s) {
    draw(X);
    draw(Y);
    draw(Z);
    for (std::size_t i = 0; i < d; ++i) dphi[i] = 2.0 * unit(rng) - 1.0;
    const double t1 = tau * unit(rng);
    const double t2 = tau + (std::max(t_max, tau) - tau) * unit(rng);

    if (clock) {
      X[d] = t1;
      Y[d] = t1 - tau;
      dphi[d] = 1.0;
    }
    const AveragedEval e1 = averaged_rhs_phase1(fp, X, Y, dphi, t1, omega);
    hand.rhs_phase1(ConstVec(X).first(d), ConstVec(Y).first(d), ConstVec(dphi).first(d), t1, omega,
                    ref);
    for (std::size_t i = 0; i < d; ++i) dev1 = std::max(dev1, std::abs(e1.value[i] - ref[i]));

    if (clock) {
      X[d] = t2;
      Y[d] = t2 - tau;
      Z[d] = t2 - 2.0 * tau;
    }
    const AveragedEval e2 = averaged_rhs_phase2(fp, X, Y, Z, omega);
    hand.rhs_phase2(ConstVec(X).first(d), ConstVec(Y).first(d), ConstVec(Z).first(d), t2, omega,
                    ref);
    for (std::size_t i = 0; i < d; ++i) dev2 = std::max(dev2, std::abs(e2.value[i] - ref[i]));
    imag = std::max({imag, e1.imag_residual, e2.imag_residual});
    fd = fd || e1.finite_difference_jacobians || e2.finite_difference_jacobians;
  }
  const double dev = std::max(dev1, dev2);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "problem %s, Omega %.10g, samples %d\n"
                "max deviation phase1 %.3e, phase2 %.3e\n"
                "imag residual %.3e\n"
                "jacobians %s\n",
                p.name.c_str(), omega, a.samples, dev1, dev2, imag, fd ? "finite-difference" : "analytic");
  out << buf << "H1=" << (h1 ? "true" : "false") << '\n' << "H2=" << (h2 ? "true" : "false") << '\n';
  const double limit = fd ? 1e-5 : 1e-8;
  if (!(dev <= limit)) {
    err << "deviation " << dev << " exceeds " << limit << '\n';
    return kVerification;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct TimingArgs {
  Common c;
  std::string omega = "1024pi";
  int N = 128;
  int nu_max = 0;
  int repeats = 3;
  double rtol = 1e-8;
  double atol = 1e-10;
};

int cmd_timing(const TimingArgs& a, std::ostream& out, std::ostream&) {
  const BuiltinProblem p = load_problem(a.c, std::nullopt);
  const double omega = parse_omega(a.omega);
  SolverConfig cfg;
  cfg.rel_tol = a.rtol;
  cfg.abs_tol = a.atol;
  const int nu = a.nu_max > 0 ? a.nu_max : p.nu_factor * a.N;
  const TimingReport r = timing_compare(p.oscillatory, omega, a.N, nu, cfg, a.repeats);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "sam %.3f ms (%llu evals)\nreference %.3f ms (%zu steps)\nspeedup %.2f\n", r.sam_ms,
                static_cast<unsigned long long>(r.sam_evals), r.ref_ms, r.ref_steps, r.speedup);
  out << buf;
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stroboscopic averaging for delay equations with fast periodic forcing", "samdde"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for all subcommands");

  RunArgs run;
  auto* s_run = app.add_subcommand("run", "integrate one problem with SAM, write t,X_1..X_D");
  add_common(s_run, run.c);
  s_run->add_option("--N", run.N, "macro steps per delay")->required()->check(CLI::PositiveNumber);
  s_run->add_option("--nu-max", run.nu_max, "micro steps per period (default c N)");
  s_run->add_option("--nu-factor", run.nu_factor, "c in h = T/(c N)");
  s_run->add_option("--omega", run.omega, "fast frequency, e.g. 200 or 64pi")->required();
  s_run->add_option("--tmax", run.t_max, "end time");
  s_run->add_flag("--forward-only", run.forward_only, "forward differences only");

  RefArgs ref;
  auto* s_ref = app.add_subcommand("reference", "solve the averaged or oscillatory problem adaptively");
  add_common(s_ref, ref.c);
  s_ref->add_option("--omega", ref.omega, "fast frequency")->required();
  s_ref->add_option("--kind", ref.kind, "averaged | oscillatory");
  s_ref->add_option("--tmax", ref.t_max, "end time");
  s_ref->add_option("--points", ref.points, "uniform output samples");
  s_ref->add_option("--rtol", ref.rtol, "relative tolerance");
  s_ref->add_option("--atol", ref.atol, "absolute tolerance");

  TableArgs table;
  auto* s_table = app.add_subcommand("table", "error table over N and Omega (CSV)");
  TableArgs ratios;
  auto* s_ratios = app.add_subcommand("ratios", "diagonal and column error ratios");
  for (auto [sub, t] : {std::pair{s_table, &table}, std::pair{s_ratios, &ratios}}) {
    add_common(sub, t->c, sub == s_table);
    sub->add_option("--N", t->N_list, "comma list of N");
    sub->add_option("--omega", t->omega, "comma list of frequencies or a built-in list name");
    sub->add_option("--omega-list", t->omega_list, "tab4 | tab2 | tab3 | gene | h2 | noh2");
    sub->add_option("--reference", t->reference, "averaged | oscillatory");
    sub->add_option("--nu-factor", t->nu_factor, "c in h = T/(c N)");
    sub->add_option("--component", t->component, "1-based error component");
    sub->add_option("--tmax", t->t_max, "end time");
    sub->add_flag("--forward-only", t->forward_only, "forward differences only");
  }
  s_table->add_option("--gnuplot", table.gnuplot, "also write a gnuplot script here");
  s_table->add_flag("--wall-time", table.wall_time, "fill the wall_ms column");

  AvgArgs avg;
  auto* s_avg = app.add_subcommand("avg-check", "compare the Fourier evaluator with the hand-averaged rhs");
  add_common(s_avg, avg.c, false);
  s_avg->add_option("--omega", avg.omega, "fast frequency");
  s_avg->add_option("--samples", avg.samples, "random states");

  TimingArgs tim;
  auto* s_tim = app.add_subcommand("timing", "wall-time ratio reference / SAM");
  add_common(s_tim, tim.c, false);
  s_tim->add_option("--omega", tim.omega, "fast frequency");
  s_tim->add_option("--N", tim.N, "macro steps per delay");
  s_tim->add_option("--nu-max", tim.nu_max, "micro steps per period");
  s_tim->add_option("--repeats", tim.repeats, "runs per side (median)");
  s_tim->add_option("--rtol", tim.rtol, "reference relative tolerance");
  s_tim->add_option("--atol", tim.atol, "reference absolute tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }

  try {
    if (s_run->parsed()) return cmd_run(run, out, err);
    if (s_ref->parsed()) return cmd_reference(ref, out, err);
    if (s_table->parsed()) return cmd_table(table, out, err);
    if (s_ratios->parsed()) return cmd_ratios(ratios, out, err);
    if (s_avg->parsed()) return cmd_avg_check(avg, out, err);
    if (s_tim->parsed()) return cmd_timing(tim, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolver;
  }
  return kValidation;
}

}  // namespace samdde::cli
