#include "samdde/refsolve.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

namespace samdde {

// ---------------------------------------------------------------------------
// LagAccess

LagAccess::LagAccess(const DenseSolution& dense, const std::vector<double>& lags)
    : dense_(dense), lags_(lags), values_(lags.size() * dense.dim()), ready_(lags.size(), 0) {}

void LagAccess::reset(double t) noexcept {
  t_ = t;
  std::fill(ready_.begin(), ready_.end(), 0);
}

ConstVec LagAccess::operator()(std::size_t lag_index) {
  const std::size_t d = dense_.dim();
  MutVec slot(values_.data() + lag_index * d, d);
  if (!ready_[lag_index]) {
    try {
      dense_.eval(t_ - lags_[lag_index], slot);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::OutOfDomain) throw;
      std::ostringstream os;
      os << "lag " << lags_[lag_index] << " at t=" << t_ << ": " << e.what();
      throw Error(ErrorCode::MissingHistory, os.str());
    }
    ready_[lag_index] = 1;
  }
  return slot;
}

void LaggedRHS::validate() const {
  if (dim == 0 || !rhs) throw Error(ErrorCode::InvalidArgument, "lagged rhs is empty");
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (!(lags[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "lags must be positive");
    if (i > 0 && !(lags[i] > lags[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "lags must be strictly ascending");
  }
}

// ---------------------------------------------------------------------------
// Breakpoints

std::vector<double> mandatory_breakpoints(const LaggedRHS& rhs, TimeSpan span, int depth) {
  std::vector<double> all;
  for (double lag : rhs.lags) {
    for (long m = 1;; ++m) {
      const double t = span.begin + static_cast<double>(m) * lag;
      if (t > span.end) break;
      all.push_back(t);
    }
  }
  std::vector<double> generation = rhs.jump_times;
  all.insert(all.end(), generation.begin(), generation.end());
  for (int g = 0; g < depth && !generation.empty(); ++g) {
    std::vector<double> next;
    for (double b : generation)
      for (double lag : rhs.lags)
        if (b + lag <= span.end) next.push_back(b + lag);
    all.insert(all.end(), next.begin(), next.end());
    generation = std::move(next);
  }
  all.push_back(span.end);
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double t : all) {
    if (t <= span.begin || t > span.end) continue;
    if (!out.empty() && t - out.back() <= 1e-12 * std::max(1.0, std::abs(t))) continue;
    out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

// Bogacki-Shampine 3(2), FSAL.
constexpr double kB1 = 2.0 / 9.0, kB2 = 1.0 / 3.0, kB3 = 4.0 / 9.0;
constexpr double kE1 = -5.0 / 72.0, kE2 = 1.0 / 12.0, kE3 = 1.0 / 9.0, kE4 = -1.0 / 8.0;
constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 5.0;

class Stepper {
 public:
  Stepper(const LaggedRHS& rhs, DenseSolution& dense)
      : rhs_(rhs), dense_(dense), lag_(dense, rhs.lags) {}

  void eval(double t, ConstVec x, MutVec out) {
    lag_.reset(t);
    rhs_.rhs(t, x, lag_, out);
    ++dense_.stats.rhs_evals;
  }

 private:
  const LaggedRHS& rhs_;
  DenseSolution& dense_;
  LagAccess lag_;
};

double scaled_max(ConstVec v, ConstVec y0, ConstVec y1, double rtol, double atol) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    m = std::max(m, std::abs(v[i]) / sc);
  }
  return m;
}

bool all_finite(ConstVec v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

DenseSolution solve_dde(const LaggedRHS& rhs, const HistoryFunction& history, TimeSpan span,
                        const SolverConfig& config) {
  rhs.validate();
  if (span.begin != 0.0)
    throw Error(ErrorCode::InvalidArgument, "integration must start at t = 0 (end of history)");
  if (!(span.end > span.begin)) throw Error(ErrorCode::InvalidArgument, "empty time span");
  if (!(config.rel_tol > 0.0) || !(config.abs_tol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  if (history.dim != rhs.dim) throw Error(ErrorCode::InvalidArgument, "history dimension mismatch");

  const std::size_t d = rhs.dim;
  DenseSolution dense(d, history);
  const std::vector<double> bps = mandatory_breakpoints(rhs, span, config.jump_depth);
  dense.set_breakpoints(bps);
  Stepper stepper(rhs, dense);

  double h_cap = config.max_step;
  if (!rhs.lags.empty()) h_cap = std::min(h_cap, rhs.lags.front());

  State y = history(0.0);
  dense.start(span.begin, y);
  State f(d), k2(d), k3(d), k4(d), ytmp(d), ynew(d), err(d);
  double t = span.begin;
  stepper.eval(t, y, f);

  const bool fixed = config.fixed_step > 0.0;
  double h;
  if (fixed) {
    h = config.fixed_step;
  } else if (config.initial_step > 0.0) {
    h = config.initial_step;
  } else {
    // Hairer-Norsett-Wanner starting step.
    const double d0 = scaled_max(y, y, y, config.rel_tol, config.abs_tol);
    const double d1 = scaled_max(f, y, y, config.rel_tol, config.abs_tol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, h_cap);
    for (std::size_t i = 0; i < d; ++i) ytmp[i] = y[i] + h0 * f[i];
    stepper.eval(t + h0, ytmp, k2);
    for (std::size_t i = 0; i < d; ++i) err[i] = (k2[i] - f[i]) / h0;
    const double d2 = scaled_max(err, y, y, config.rel_tol, config.abs_tol);
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::cbrt(0.01 / dm);
    h = std::min(100.0 * h0, h1);
  }

  std::size_t ib = 0;
  double prev_norm = 1.0;
  bool last_rejected = false;
  std::size_t attempts = 0;

  while (ib < bps.size()) {
    if (++attempts > config.max_steps) {
      std::ostringstream os;
      os << "exceeded " << config.max_steps << " steps at t=" << t;
      throw Error(ErrorCode::MaxStepsExceeded, os.str());
    }
    const double bp = bps[ib];
    h = std::min(h, h_cap);
    const double h_proposed = h;
    bool land = false;
    if (t + h >= bp - 1e-12 * std::max(1.0, std::abs(bp))) {
      h = bp - t;
      land = true;
    } else if (!fixed && t + 2.0 * h > bp) {
      h = 0.5 * (bp - t);
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "step size " << h << " underflow at t=" << t;
      throw Error(ErrorCode::StepSizeUnderflow, os.str());
    }

    for (std::size_t i = 0; i < d; ++i) ytmp[i] = y[i] + 0.5 * h * f[i];
    stepper.eval(t + 0.5 * h, ytmp, k2);
    for (std::size_t i = 0; i < d; ++i) ytmp[i] = y[i] + 0.75 * h * k2[i];
    stepper.eval(t + 0.75 * h, ytmp, k3);
    for (std::size_t i = 0; i < d; ++i) ynew[i] = y[i] + h * (kB1 * f[i] + kB2 * k2[i] + kB3 * k3[i]);
    const double t_new = land ? bp : t + h;
    // Left limit at a breakpoint: the rhs may jump there.
    stepper.eval(land ? std::nextafter(t_new, t) : t_new, ynew, k4);
    for (std::size_t i = 0; i < d; ++i)
      err[i] = h * (kE1 * f[i] + kE2 * k2[i] + kE3 * k3[i] + kE4 * k4[i]);

    double norm = scaled_max(err, y, ynew, config.rel_tol, config.abs_tol);
    if (!all_finite(ynew) || !std::isfinite(norm)) {
      if (fixed) throw Error(ErrorCode::NonFiniteState, "non-finite state in fixed-step solve");
      norm = 1e10;
    }

    if (fixed || norm <= 1.0) {
      dense.push(t_new, ynew, k4, f);
      ++dense.stats.accepted;
      t = t_new;
      y.swap(ynew);
      if (land) {
        ++ib;
        if (ib < bps.size()) stepper.eval(t, y, f);
      } else {
        f.swap(k4);
      }
      if (fixed) {
        h = config.fixed_step;
      } else {
        const double nrm = std::max(norm, 1e-10);
        double fac = kSafety * std::pow(nrm, -0.7 / 3.0) * std::pow(prev_norm, 0.4 / 3.0);
        fac = std::clamp(fac, kFacMin, kFacMax);
        if (last_rejected) fac = std::min(fac, 1.0);
        // A step shortened to hit a breakpoint says little about the next one.
        h = land ? std::max(h * fac, h_proposed) : h * fac;
        prev_norm = nrm;
        last_rejected = false;
      }
    } else {
      ++dense.stats.rejected;
      h *= std::max(kFacMin, kSafety * std::pow(norm, -1.0 / 3.0));
      last_rejected = true;
    }
  }
  return dense;
}

// ---------------------------------------------------------------------------
// Problem adapters

LaggedRHS oscillatory_as_lagged(const OscillatoryProblem& problem, double omega) {
  LaggedRHS r;
  r.dim = problem.dim;
  r.lags = {problem.tau};
  auto f = problem.rhs;
  r.rhs = [f, omega](double t, ConstVec x, LagAccess& lag, MutVec out) {
    f(x, lag(0), t, omega * t, omega, out);
  };
  return r;
}

DenseSolution solve_oscillatory(const OscillatoryProblem& problem, double omega,
                                const SolverConfig& config) {
  problem.validate();
  SolverConfig c = config;
  c.max_step = std::min(c.max_step, 2.0 * std::numbers::pi / omega / 8.0);
  return solve_dde(oscillatory_as_lagged(problem, omega), problem.history, {0.0, problem.t_max}, c);
}

LaggedRHS averaged_as_lagged(const AveragedProblem& problem, double omega) {
  LaggedRHS r;
  r.dim = problem.dim;
  r.lags = {problem.tau, 2.0 * problem.tau};
  r.jump_times = {problem.tau};
  const double tau = problem.tau;
  auto p1 = problem.rhs_phase1;
  auto p2 = problem.rhs_phase2;
  const HistoryFunction hist = problem.history;
  auto dphi = std::make_shared<State>(problem.dim);
  r.rhs = [=](double t, ConstVec x, LagAccess& lag, MutVec out) {
    if (t < tau) {
      hist.deriv(t - tau, *dphi);
      p1(x, lag(0), *dphi, t, omega, out);
    } else {
      p2(x, lag(0), lag(1), t, omega, out);
    }
  };
  return r;
}

DenseSolution solve_averaged(const AveragedProblem& problem, double omega,
                             const SolverConfig& config) {
  return solve_dde(averaged_as_lagged(problem, omega), problem.history, {0.0, problem.t_max},
                   config);
}

// ---------------------------------------------------------------------------
// Convergence diagnostics

RefinementLadder tolerance_ladder(double coarsest_rel_tol, double factor) {
  RefinementLadder l;
  double tol = coarsest_rel_tol;
  for (auto& c : l) {
    c.rel_tol = tol;
    c.abs_tol = tol;
    tol *= factor;
  }
  return l;
}

RefinementLadder step_ladder(double coarsest_step) {
  RefinementLadder l;
  double h = coarsest_step;
  for (auto& c : l) {
    c.fixed_step = h;
    h *= 0.5;
  }
  return l;
}

OrderEstimate self_convergence_order(const LaggedRHS& rhs, const HistoryFunction& history,
                                     TimeSpan span, const RefinementLadder& ladder) {
  constexpr int kSamples = 65;
  std::array<std::vector<State>, 3> samples;
  OrderEstimate est;
  for (std::size_t level = 0; level < 3; ++level) {
    const DenseSolution sol = solve_dde(rhs, history, span, ladder[level]);
    est.steps[level] = sol.stats.accepted;
    for (int s = 0; s < kSamples; ++s) {
      const double t = span.begin + (span.end - span.begin) * s / (kSamples - 1);
      samples[level].push_back(sol.eval(t));
    }
  }
  for (std::size_t k = 0; k < 2; ++k) {
    double m = 0.0;
    for (int s = 0; s < kSamples; ++s)
      for (std::size_t i = 0; i < rhs.dim; ++i)
        m = std::max(m, std::abs(samples[k][s][i] - samples[k + 1][s][i]));
    est.differences[k] = m;
  }
  // Solve (n1^-p - n2^-p) / (n2^-p - n3^-p) = d1 / d2 for p by bisection.
  const double n1 = static_cast<double>(est.steps[0]);
  const double n2 = static_cast<double>(est.steps[1]);
  const double n3 = static_cast<double>(est.steps[2]);
  const double target = est.differences[0] / est.differences[1];
  auto ratio = [&](double p) {
    return (std::pow(n1, -p) - std::pow(n2, -p)) / (std::pow(n2, -p) - std::pow(n3, -p));
  };
  double lo = 0.01, hi = 12.0;
  if (!(target > ratio(lo))) {
    est.order = lo;
  } else if (target >= ratio(hi)) {
    est.order = hi;
  } else {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ratio(mid) < target ? lo : hi) = mid;
    }
    est.order = 0.5 * (lo + hi);
  }
  return est;
}

double observed_order(const std::vector<double>& errors, const std::vector<std::size_t>& steps) {
  if (errors.size() != steps.size() || errors.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "need at least two (error, steps) pairs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double x = std::log(static_cast<double>(steps[i]));
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace samdde
