#include "samdde/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace samdde {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InfeasibleGrid: return "InfeasibleGrid";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::MissingHistory: return "MissingHistory";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::MaxStepsExceeded: return "MaxStepsExceeded";
    case ErrorCode::NonRealResult: return "NonRealResult";
    case ErrorCode::DeclarationMismatch: return "DeclarationMismatch";
    case ErrorCode::UnsupportedBeta: return "UnsupportedBeta";
    case ErrorCode::NonStroboscopicComparison: return "NonStroboscopicComparison";
    case ErrorCode::InsufficientDiagonal: return "InsufficientDiagonal";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

// ---------------------------------------------------------------------------
// HistoryFunction

HistoryFunction HistoryFunction::constant(State v, double tau) {
  HistoryFunction h;
  h.dim = v.size();
  h.tau = tau;
  h.value = [v](double, MutVec out) { std::copy(v.begin(), v.end(), out.begin()); };
  h.derivative = [](double, MutVec out) { std::fill(out.begin(), out.end(), 0.0); };
  return h;
}

namespace {

double clamp_to_domain(double t, double tau) {
  const double slack = 1e-12 * std::max(1.0, tau);
  if (t > 0.0) {
    if (t <= slack) return 0.0;
  } else if (t < -tau) {
    if (t >= -tau - slack) return -tau;
  } else {
    return t;
  }
  std::ostringstream os;
  os << "history queried at t=" << t << " outside [" << -tau << ", 0]";
  throw Error(ErrorCode::OutOfDomain, os.str());
}

}  // namespace

void HistoryFunction::eval(double t, MutVec out) const {
  value(clamp_to_domain(t, tau), out);
}

State HistoryFunction::operator()(double t) const {
  State out(dim);
  eval(t, out);
  return out;
}

void HistoryFunction::deriv(double t, MutVec out) const {
  t = clamp_to_domain(t, tau);
  if (derivative) {
    derivative(t, out);
    return;
  }
  const double delta = 1e-6 * std::max(1.0, std::abs(t));
  double lo = t - delta;
  double hi = t + delta;
  if (lo < -tau) lo = t;
  if (hi > 0.0) hi = t;
  State a(dim), b(dim);
  value(lo, a);
  value(hi, b);
  for (std::size_t i = 0; i < dim; ++i) out[i] = (b[i] - a[i]) / (hi - lo);
}

void OscillatoryProblem::validate() const {
  if (dim == 0 || !rhs) throw Error(ErrorCode::InvalidArgument, "problem has no rhs");
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "delay must be positive");
  if (!(t_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_max must be positive");
  if (history.dim != dim || !history.value)
    throw Error(ErrorCode::InvalidArgument, "history dimension does not match problem");
}

State history_value(const OscillatoryProblem& problem, double t) { return problem.history(t); }

// ---------------------------------------------------------------------------
// GridParams

GridParams::GridParams(int n, int nu_max, double omega, double tau)
    : n_(n),
      nu_max_(nu_max),
      omega_(omega),
      tau_(tau),
      H_(tau / n),
      T_(2.0 * std::numbers::pi / omega),
      h_(T_ / nu_max) {}

double GridParams::step_time(std::int64_t n) const noexcept {
  return static_cast<double>(n) * tau_ / n_;
}

std::int64_t GridParams::last_step(double t_max) const {
  const double ratio = t_max * n_ / tau_;
  return static_cast<std::int64_t>(std::floor(ratio * (1.0 + 1e-12)));
}

bool GridParams::feasible(const FeasibilityRule& rule) const noexcept {
  return H_ / T_ >= rule.min_ratio * (1.0 - rule.rel_tol);
}

GridParams make_grid(int n, int nu_max, double omega, double tau, const FeasibilityRule& rule) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "N must be >= 1");
  if (nu_max < 1) throw Error(ErrorCode::InvalidArgument, "nu_max must be >= 1");
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw Error(ErrorCode::InvalidArgument, "Omega must be positive");
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  GridParams g(n, nu_max, omega, tau);
  if (!g.feasible(rule)) {
    std::ostringstream os;
    os << "H/T = " << g.H() / g.T() << " below " << rule.min_ratio << " (N=" << n
       << ", Omega=" << omega << ")";
    throw Error(ErrorCode::InfeasibleGrid, os.str());
  }
  return g;
}

// ---------------------------------------------------------------------------
// DenseSolution

DenseSolution::DenseSolution(std::size_t dim, HistoryFunction history)
    : dim_(dim), history_(std::move(history)) {}

void DenseSolution::start(double t0, ConstVec y0) {
  times_.assign(1, t0);
  states_.assign(y0.begin(), y0.end());
  f_start_.clear();
  f_end_.clear();
}

void DenseSolution::push(double t1, ConstVec y1, ConstVec f_left, ConstVec f_right) {
  times_.push_back(t1);
  states_.insert(states_.end(), y1.begin(), y1.end());
  f_start_.insert(f_start_.end(), f_right.begin(), f_right.end());
  f_end_.insert(f_end_.end(), f_left.begin(), f_left.end());
}

ConstVec DenseSolution::state_at_mesh(std::size_t i) const {
  return ConstVec(states_).subspan(i * dim_, dim_);
}

void DenseSolution::eval(double t, MutVec out) const {
  if (times_.empty() || t < times_.front()) {
    history_.eval(t, out);
    return;
  }
  const double t_last = times_.back();
  if (t > t_last) {
    if (t - t_last > 1e-12 * std::max(1.0, std::abs(t_last))) {
      std::ostringstream os;
      os << "dense output queried at t=" << t << " beyond " << t_last;
      throw Error(ErrorCode::OutOfDomain, os.str());
    }
    t = t_last;
  }
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t seg = static_cast<std::size_t>(it - times_.begin());
  // seg is the index of the first mesh point strictly greater than t.
  if (seg == 0) seg = 1;
  const std::size_t i0 = seg - 1;
  if (times_[i0] == t) {
    const auto y = state_at_mesh(i0);
    std::copy(y.begin(), y.end(), out.begin());
    return;
  }
  const double t0 = times_[i0];
  const double t1 = times_[seg];
  const double dt = t1 - t0;
  const double s = (t - t0) / dt;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  const double* y0 = &states_[i0 * dim_];
  const double* y1 = &states_[seg * dim_];
  const double* f0 = &f_start_[i0 * dim_];
  const double* f1 = &f_end_[i0 * dim_];
  for (std::size_t d = 0; d < dim_; ++d)
    out[d] = h00 * y0[d] + h10 * dt * f0[d] + h01 * y1[d] + h11 * dt * f1[d];
}

State DenseSolution::eval(double t) const {
  State out(dim_);
  eval(t, out);
  return out;
}

// ---------------------------------------------------------------------------

double theta_periodicity_defect(const OscillatoryProblem& problem, double omega, int samples,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> slow(0.0, problem.t_max);
  const State center = problem.history(0.0);
  const std::size_t d = problem.dim;
  State x(d), y(d), a(d), b(d);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = center[i] + unit(rng);
      y[i] = center[i] + unit(rng);
    }
    const double t = slow(rng);
    const double theta = phase(rng);
    problem.rhs(x, y, t, theta, omega, a);
    problem.rhs(x, y, t, theta + 2.0 * std::numbers::pi, omega, b);
    for (std::size_t i = 0; i < d; ++i)
      worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
  }
  return worst;
}

}  // namespace samdde
