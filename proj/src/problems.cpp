#include "samdde/problems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace samdde {

namespace {

// x^beta with an exact path for the common beta = 2.
struct Power {
  double beta;
  [[nodiscard]] double operator()(double x) const {
    return beta == 2.0 ? x * x : std::pow(x, beta);
  }
  // d/dx x^beta
  [[nodiscard]] double d(double x) const {
    return beta == 2.0 ? 2.0 * x : beta * std::pow(x, beta - 1.0);
  }
};

double hill(double alpha, const Power& pw, double x) { return alpha / (1.0 + pw(x)); }

double hill_d(double alpha, const Power& pw, double x) {
  const double q = 1.0 + pw(x);
  return -alpha * pw.d(x) / (q * q);
}

HistoryFunction toggle_history(const ToggleParams& p) {
  return HistoryFunction::constant({p.phi1, p.phi2}, p.tau);
}

}  // namespace

void ToggleParams::validate() const {
  if (!(beta >= 1.0)) throw Error(ErrorCode::InvalidArgument, "toggle: beta must be >= 1");
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "toggle: tau must be > 0");
  if (!(t_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "toggle: t_max must be > 0");
}

OscillatoryProblem toggle_oscillatory(const ToggleParams& p) {
  p.validate();
  OscillatoryProblem prob;
  prob.name = "toggle";
  prob.dim = 2;
  prob.tau = p.tau;
  prob.t_max = p.t_max;
  prob.history = toggle_history(p);
  const Power pw{p.beta};
  prob.rhs = [p, pw](ConstVec x, ConstVec y, double t, double theta, double, MutVec out) {
    out[0] = hill(p.alpha, pw, x[1]) - y[0] + p.A * std::sin(p.omega_slow * t) + p.B * std::sin(theta);
    out[1] = hill(p.alpha, pw, x[0]) - y[1];
  };
  return prob;
}

AveragedProblem toggle_averaged(const ToggleParams& p) {
  p.validate();
  AveragedProblem prob;
  prob.name = "toggle-averaged";
  prob.dim = 2;
  prob.tau = p.tau;
  prob.t_max = p.t_max;
  prob.history = toggle_history(p);
  const Power pw{p.beta};
  auto common = [p, pw](ConstVec X, ConstVec Y, double t, double omega, MutVec out) {
    out[0] = hill(p.alpha, pw, X[1]) - Y[0] + p.A * std::sin(p.omega_slow * t);
    out[1] = hill(p.alpha, pw, X[0]) - Y[1] + (p.B / omega) * hill_d(p.alpha, pw, X[0]);
  };
  prob.rhs_phase1 = [common](ConstVec X, ConstVec Y, ConstVec, double t, double omega, MutVec out) {
    common(X, Y, t, omega, out);
  };
  prob.rhs_phase2 = [common, B = p.B](ConstVec X, ConstVec Y, ConstVec, double t, double omega,
                                      MutVec out) {
    common(X, Y, t, omega, out);
    out[0] -= B / omega;
  };
  return prob;
}

FourierProblem toggle_fourier(const ToggleParams& p) {
  p.validate();
  FourierProblem fp;
  fp.name = "toggle";
  fp.dim = 3;
  fp.K = 1;
  fp.tau = p.tau;
  fp.declared_h1 = true;
  fp.history.dim = 3;
  fp.history.tau = p.tau;
  fp.history.value = [p](double t, MutVec out) {
    out[0] = p.phi1;
    out[1] = p.phi2;
    out[2] = t;
  };
  fp.history.derivative = [](double, MutVec out) {
    out[0] = 0.0;
    out[1] = 0.0;
    out[2] = 1.0;
  };
  const Power pw{p.beta};
  fp.coeff = [p, pw](int k, ConstVec X, ConstVec Y, std::span<Cplx> out) {
    std::fill(out.begin(), out.end(), Cplx{});
    if (k == 0) {
      out[0] = hill(p.alpha, pw, X[1]) - Y[0] + p.A * std::sin(p.omega_slow * X[2]);
      out[1] = hill(p.alpha, pw, X[0]) - Y[1];
      out[2] = 1.0;
    } else if (k == 1) {
      out[0] = Cplx{0.0, -0.5 * p.B};
    } else if (k == -1) {
      out[0] = Cplx{0.0, 0.5 * p.B};
    }
  };
  fp.jac_x = [p, pw](int k, ConstVec X, ConstVec, std::span<const Cplx> d, std::span<Cplx> out) {
    std::fill(out.begin(), out.end(), Cplx{});
    if (k != 0) return;
    out[0] = hill_d(p.alpha, pw, X[1]) * d[1] + p.A * p.omega_slow * std::cos(p.omega_slow * X[2]) * d[2];
    out[1] = hill_d(p.alpha, pw, X[0]) * d[0];
  };
  fp.jac_y = [](int k, ConstVec, ConstVec, std::span<const Cplx> d, std::span<Cplx> out) {
    std::fill(out.begin(), out.end(), Cplx{});
    if (k != 0) return;
    out[0] = -d[0];
    out[1] = -d[1];
  };
  fp.probe_lo = {0.1, 0.5, 0.0};
  fp.probe_hi = {3.0, 3.0, 2.0};
  return fp;
}

// ---------------------------------------------------------------------------

NewproSet newpro_problem(const NewproParams& p) {
  if (!(p.tau > 0.0) || !(p.t_max > 0.0))
    throw Error(ErrorCode::InvalidArgument, "newpro: tau and t_max must be > 0");
  NewproSet s;
  const HistoryFunction hist = HistoryFunction::constant({p.phi}, p.tau);

  auto& osc = s.oscillatory;
  osc.name = "newpro";
  osc.dim = 1;
  osc.tau = p.tau;
  osc.t_max = p.t_max;
  osc.history = hist;
  osc.rhs = [](ConstVec x, ConstVec y, double, double theta, double, MutVec out) {
    out[0] = y[0] + (x[0] - y[0]) * std::sin(theta) + 0.5 * y[0] * std::cos(2.0 * theta);
  };

  auto& avg = s.averaged;
  avg.name = "newpro-averaged";
  avg.dim = 1;
  avg.tau = p.tau;
  avg.t_max = p.t_max;
  avg.history = hist;
  avg.rhs_phase1 = [](ConstVec, ConstVec Y, ConstVec dphi, double, double omega, MutVec out) {
    out[0] = Y[0] - Y[0] / omega + dphi[0] / omega;
  };
  avg.rhs_phase2 = [tau = p.tau](ConstVec, ConstVec Y, ConstVec Z, double, double omega,
                                 MutVec out) {
    out[0] = Y[0] + (Y[0] - Z[0]) * std::sin(omega * tau) / (2.0 * omega) -
             Z[0] * std::sin(2.0 * omega * tau) / (16.0 * omega);
  };

  auto& fp = s.fourier;
  fp.name = "newpro";
  fp.dim = 1;
  fp.K = 2;
  fp.tau = p.tau;
  fp.history = hist;
  fp.declared_h1 = false;
  fp.coeff = [](int k, ConstVec X, ConstVec Y, std::span<Cplx> out) {
    const double dxy = X[0] - Y[0];
    switch (k) {
      case 0: out[0] = Y[0]; break;
      case 1: out[0] = Cplx{0.0, -0.5 * dxy}; break;
      case -1: out[0] = Cplx{0.0, 0.5 * dxy}; break;
      case 2:
      case -2: out[0] = 0.25 * Y[0]; break;
      default: out[0] = 0.0;
    }
  };
  fp.jac_x = [](int k, ConstVec, ConstVec, std::span<const Cplx> d, std::span<Cplx> out) {
    switch (k) {
      case 1: out[0] = Cplx{0.0, -0.5} * d[0]; break;
      case -1: out[0] = Cplx{0.0, 0.5} * d[0]; break;
      default: out[0] = 0.0;
    }
  };
  fp.jac_y = [](int k, ConstVec, ConstVec, std::span<const Cplx> d, std::span<Cplx> out) {
    switch (k) {
      case 0: out[0] = d[0]; break;
      case 1: out[0] = Cplx{0.0, 0.5} * d[0]; break;
      case -1: out[0] = Cplx{0.0, -0.5} * d[0]; break;
      case 2:
      case -2: out[0] = 0.25 * d[0]; break;
      default: out[0] = 0.0;
    }
  };
  fp.probe_lo = {-1.0};
  fp.probe_hi = {1.0};
  return s;
}

// ---------------------------------------------------------------------------

double gene_transform(double X1, double t, double omega, double B_hat) {
  return X1 + B_hat * (1.0 - std::cos(omega * t));
}

double gene_inverse(double x1, double t, double omega, double B_hat) {
  return x1 - B_hat * (1.0 - std::cos(omega * t));
}

double gene_mean_x2_rate(double X1, double alpha, double B_hat) {
  // The average is even in X1 + B_hat; the closed form is written for c >= 0.
  const double c = std::abs(X1 + B_hat);
  const double M = X1 * X1 + 2.0 * B_hat * X1 - 1.0;
  const double sqN = std::sqrt(M * M + 4.0 * c * c);
  double minus = -0.5 * M + 0.5 * sqN;
  if (minus < 0.0 && minus > -1e-12) minus = 0.0;
  const double plus = 0.5 * M + 0.5 * sqN;
  const double num = std::sqrt(minus) + c * std::sqrt(plus);
  const double den = plus * plus + c * c + sqN;
  return alpha * num / den;
}

double gene_transformed_x2_rate(double X1, double Y2, double theta, const ToggleParams& p) {
  const double x1 = X1 + p.B_hat * (1.0 - std::cos(theta));
  return hill(p.alpha, Power{p.beta}, x1) - Y2;
}

GenePair geneproblem_pair(const ToggleParams& p) {
  p.validate();
  if (p.beta != 2.0) {
    std::ostringstream os;
    os << "toggle-gene: averaged form requires beta = 2 (got " << p.beta << ")";
    throw Error(ErrorCode::UnsupportedBeta, os.str());
  }
  GenePair g;
  auto& osc = g.oscillatory;
  osc.name = "toggle-gene";
  osc.dim = 2;
  osc.tau = p.tau;
  osc.t_max = p.t_max;
  osc.history = toggle_history(p);
  const Power pw{p.beta};
  osc.rhs = [p, pw](ConstVec x, ConstVec y, double t, double theta, double omega, MutVec out) {
    out[0] = hill(p.alpha, pw, x[1]) - y[0] + p.A * std::sin(p.omega_slow * t) +
             p.B_hat * omega * std::sin(theta);
    out[1] = hill(p.alpha, pw, x[0]) - y[1];
  };

  auto& avg = g.averaged;
  avg.name = "toggle-gene-averaged";
  avg.dim = 2;
  avg.tau = p.tau;
  avg.t_max = p.t_max;
  avg.history = toggle_history(p);
  auto common = [p](ConstVec X, ConstVec Y, double t, MutVec out) {
    out[0] = p.alpha / (1.0 + X[1] * X[1]) - Y[0] + p.A * std::sin(p.omega_slow * t);
    out[1] = gene_mean_x2_rate(X[0], p.alpha, p.B_hat) - Y[1];
  };
  avg.rhs_phase1 = [common](ConstVec X, ConstVec Y, ConstVec, double t, double, MutVec out) {
    common(X, Y, t, out);
  };
  avg.rhs_phase2 = [common, b = p.B_hat](ConstVec X, ConstVec Y, ConstVec, double t, double,
                                         MutVec out) {
    common(X, Y, t, out);
    out[0] -= b;
  };
  return g;
}

// ---------------------------------------------------------------------------
// Registry

namespace {

const std::vector<std::string> kToggleKeys = {"alpha", "beta", "A",    "omega_slow", "B",
                                              "tau",   "phi1", "phi2", "t_max"};
const std::vector<std::string> kGeneKeys = {"alpha", "beta", "A",    "omega_slow", "B_hat",
                                            "tau",   "phi1", "phi2", "t_max"};
const std::vector<std::string> kNewproKeys = {"tau", "phi", "t_max"};

void check_keys(const std::string& name, const Overrides& ov, const std::vector<std::string>& keys) {
  for (const auto& [k, v] : ov) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      std::ostringstream os;
      os << "unknown parameter '" << k << "' for problem " << name;
      throw Error(ErrorCode::InvalidArgument, os.str());
    }
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "parameter " + k + " not finite");
  }
}

ToggleParams toggle_from(const Overrides& ov) {
  ToggleParams p;
  const std::map<std::string, double*> fields = {
      {"alpha", &p.alpha}, {"beta", &p.beta}, {"A", &p.A},       {"omega_slow", &p.omega_slow},
      {"B", &p.B},         {"tau", &p.tau},   {"B_hat", &p.B_hat}, {"phi1", &p.phi1},
      {"phi2", &p.phi2},   {"t_max", &p.t_max}};
  for (const auto& [k, v] : ov) *fields.at(k) = v;
  return p;
}

}  // namespace

std::vector<std::string> problem_names() { return {"toggle", "toggle-gene", "newpro"}; }

std::vector<std::string> problem_keys(const std::string& name) {
  if (name == "toggle") return kToggleKeys;
  if (name == "toggle-gene") return kGeneKeys;
  if (name == "newpro") return kNewproKeys;
  throw Error(ErrorCode::InvalidArgument, "unknown problem '" + name + "'");
}

BuiltinProblem make_problem(const std::string& name, const Overrides& overrides) {
  check_keys(name, overrides, problem_keys(name));
  BuiltinProblem b;
  b.name = name;
  if (name == "toggle") {
    const ToggleParams p = toggle_from(overrides);
    b.oscillatory = toggle_oscillatory(p);
    b.averaged = toggle_averaged(p);
    b.fourier = toggle_fourier(p);
    b.nu_factor = 2;
  } else if (name == "toggle-gene") {
    const ToggleParams p = toggle_from(overrides);
    GenePair g = geneproblem_pair(p);
    b.oscillatory = std::move(g.oscillatory);
    b.averaged = std::move(g.averaged);
    b.nu_factor = 2;
  } else {
    NewproParams p;
    if (auto it = overrides.find("tau"); it != overrides.end()) p.tau = it->second;
    if (auto it = overrides.find("phi"); it != overrides.end()) p.phi = it->second;
    if (auto it = overrides.find("t_max"); it != overrides.end()) p.t_max = it->second;
    NewproSet s = newpro_problem(p);
    b.oscillatory = std::move(s.oscillatory);
    b.averaged = std::move(s.averaged);
    b.fourier = std::move(s.fourier);
    b.nu_factor = 5;
  }
  return b;
}

}  // namespace samdde
