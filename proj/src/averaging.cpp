#include "samdde/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace samdde {

namespace {

constexpr Cplx kI{0.0, 1.0};
constexpr double kMaxImag = 1e-8;

void axpy(CVec& acc, Cplx a, const CVec& x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a * x[i];
}

CVec sub(const CVec& a, const CVec& b) {
  CVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

CVec to_complex(ConstVec v) { return CVec(v.begin(), v.end()); }

AveragedEval finish(const CVec& acc, bool fd) {
  AveragedEval out;
  out.value.resize(acc.size());
  out.finite_difference_jacobians = fd;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out.value[i] = acc[i].real();
    out.imag_residual = std::max(out.imag_residual, std::abs(acc[i].imag()));
  }
  if (out.imag_residual > kMaxImag) {
    std::ostringstream os;
    os << "imaginary residual " << out.imag_residual << " (coefficients not Hermitian?)";
    throw Error(ErrorCode::NonRealResult, os.str());
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// FourierTerms

FourierTerms::FourierTerms(const FourierProblem& p, ConstVec X, ConstVec Y)
    : p_(p), X_(X.begin(), X.end()), Y_(Y.begin(), Y.end()) {
  coeffs_.resize(2 * static_cast<std::size_t>(p.K) + 1, CVec(p.dim));
  for (int k = -p.K; k <= p.K; ++k) p.coeff(k, X_, Y_, coeffs_[static_cast<std::size_t>(k + p.K)]);
  fd_ = !p.jac_x || !p.jac_y;
}

const CVec& FourierTerms::f(int k) const {
  if (k < -p_.K || k > p_.K) throw Error(ErrorCode::InvalidArgument, "harmonic out of range");
  return coeffs_[static_cast<std::size_t>(k + p_.K)];
}

CVec FourierTerms::jx(int k, std::span<const Cplx> dir) const {
  if (!p_.jac_x) return fd_action(k, dir, true);
  CVec out(p_.dim);
  p_.jac_x(k, X_, Y_, dir, out);
  return out;
}

CVec FourierTerms::jy(int k, std::span<const Cplx> dir) const {
  if (!p_.jac_y) return fd_action(k, dir, false);
  CVec out(p_.dim);
  p_.jac_y(k, X_, Y_, dir, out);
  return out;
}

CVec FourierTerms::fd_action(int k, std::span<const Cplx> dir, bool wrt_x) const {
  const std::size_t d = p_.dim;
  const State& base = wrt_x ? X_ : Y_;
  double scale = 1.0;
  for (double v : base) scale = std::max(scale, std::abs(v));
  CVec result(d, Cplx{});
  // J (a + i b) = J a + i J b with real a, b.
  for (int part = 0; part < 2; ++part) {
    State v(d);
    double vnorm = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      v[i] = part == 0 ? dir[i].real() : dir[i].imag();
      vnorm = std::max(vnorm, std::abs(v[i]));
    }
    if (vnorm == 0.0) continue;
    const double delta = 1e-6 * scale / vnorm;
    State plus = base, minus = base;
    for (std::size_t i = 0; i < d; ++i) {
      plus[i] += delta * v[i];
      minus[i] -= delta * v[i];
    }
    CVec fp(d), fm(d);
    if (wrt_x) {
      p_.coeff(k, plus, Y_, fp);
      p_.coeff(k, minus, Y_, fm);
    } else {
      p_.coeff(k, X_, plus, fp);
      p_.coeff(k, X_, minus, fm);
    }
    const Cplx w = part == 0 ? Cplx{1.0, 0.0} : kI;
    for (std::size_t i = 0; i < d; ++i) result[i] += w * (fp[i] - fm[i]) / (2.0 * delta);
  }
  return result;
}

// ---------------------------------------------------------------------------

State f0(const FourierProblem& problem, ConstVec X, ConstVec Y) {
  CVec c(problem.dim);
  problem.coeff(0, X, Y, c);
  State out(problem.dim);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c[i].real();
  return out;
}

State f0_quadrature(const std::function<void(ConstVec X, ConstVec Y, double theta, MutVec out)>& rhs,
                    ConstVec X, ConstVec Y, int points) {
  State acc(X.size(), 0.0), tmp(X.size());
  for (int j = 0; j < points; ++j) {
    rhs(X, Y, 2.0 * std::numbers::pi * j / points, tmp);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += tmp[i];
  }
  for (double& a : acc) a /= points;
  return acc;
}

CVec commutator(const FourierProblem& problem, int i, int j, ConstVec X, ConstVec Y) {
  const FourierTerms terms(problem, X, Y);
  return sub(terms.jx(j, terms.f(i)), terms.jx(i, terms.f(j)));
}

namespace {

// f_0 + sum_{k>0} i/(k Omega) ([f_k - f_{-k}, f_0] + [f_{-k}, f_k])
CVec bracket_part(const FourierProblem& p, const FourierTerms& tx, double omega) {
  CVec acc = tx.f(0);
  for (int k = 1; k <= p.K; ++k) {
    const CVec& fk = tx.f(k);
    const CVec& fmk = tx.f(-k);
    const CVec diff = sub(fk, fmk);
    // [f_k - f_{-k}, f_0] = J_0 (f_k - f_{-k}) - (J_k - J_{-k}) f_0
    CVec term = tx.jx(0, diff);
    const CVec jk_f0 = tx.jx(k, tx.f(0));
    const CVec jmk_f0 = tx.jx(-k, tx.f(0));
    // [f_{-k}, f_k] = J_k f_{-k} - J_{-k} f_k
    const CVec jk_fmk = tx.jx(k, fmk);
    const CVec jmk_fk = tx.jx(-k, fk);
    for (std::size_t i = 0; i < term.size(); ++i)
      term[i] += -(jk_f0[i] - jmk_f0[i]) + jk_fmk[i] - jmk_fk[i];
    axpy(acc, kI / (k * omega), term);
  }
  return acc;
}

// - sum_{k != 0} i/(k Omega) (d f_k / dY) w
void subtract_delay_drift(const FourierProblem& p, const FourierTerms& tx, const CVec& w,
                          double omega, CVec& acc) {
  for (int k = -p.K; k <= p.K; ++k) {
    if (k == 0) continue;
    axpy(acc, -kI / (k * omega), tx.jy(k, w));
  }
}

// sum_{k!=0} i/(kΩ) (df_0/dY) f_{kτ} + sum_{k!=0} i e^{ikΩτ}/(kΩ) (df_k/dY) f_{-kτ}
void add_lagged_terms(const FourierProblem& p, const FourierTerms& tx, const FourierTerms& ty,
                      double omega, bool phase_factor, CVec& acc) {
  for (int k = -p.K; k <= p.K; ++k) {
    if (k == 0) continue;
    axpy(acc, kI / (k * omega), tx.jy(0, ty.f(k)));
    const Cplx factor =
        phase_factor ? std::exp(kI * (static_cast<double>(k) * omega * p.tau)) : Cplx{1.0, 0.0};
    axpy(acc, kI * factor / (k * omega), tx.jy(k, ty.f(-k)));
  }
}

CVec phase2_terms(const FourierProblem& p, ConstVec X, ConstVec Y, ConstVec Z, double omega,
                  bool phase_factor, bool& fd) {
  const FourierTerms tx(p, X, Y);
  const FourierTerms ty(p, Y, Z);
  CVec acc = bracket_part(p, tx, omega);
  subtract_delay_drift(p, tx, ty.f(0), omega, acc);
  add_lagged_terms(p, tx, ty, omega, phase_factor, acc);
  fd = tx.used_fd();
  return acc;
}

}  // namespace

AveragedEval averaged_rhs_phase1(const FourierProblem& problem, ConstVec X, ConstVec Y,
                                 ConstVec dphi, double /*t*/, double omega) {
  const FourierTerms tx(problem, X, Y);
  CVec acc = bracket_part(problem, tx, omega);
  subtract_delay_drift(problem, tx, to_complex(dphi), omega, acc);
  return finish(acc, tx.used_fd());
}

AveragedEval averaged_rhs_phase2(const FourierProblem& problem, ConstVec X, ConstVec Y,
                                 ConstVec Z, double omega) {
  bool fd = false;
  const CVec acc = phase2_terms(problem, X, Y, Z, omega, true, fd);
  return finish(acc, fd);
}

AveragedProblem averaged_from_fourier(const FourierProblem& problem, double t_max) {
  AveragedProblem a;
  a.name = problem.name + "-fourier";
  a.dim = problem.dim;
  a.tau = problem.tau;
  a.history = problem.history;
  a.t_max = t_max;
  a.rhs_phase1 = [problem](ConstVec X, ConstVec Y, ConstVec dphi, double t, double omega,
                           MutVec out) {
    const auto r = averaged_rhs_phase1(problem, X, Y, dphi, t, omega);
    std::copy(r.value.begin(), r.value.end(), out.begin());
  };
  a.rhs_phase2 = [problem](ConstVec X, ConstVec Y, ConstVec Z, double, double omega, MutVec out) {
    const auto r = averaged_rhs_phase2(problem, X, Y, Z, omega);
    std::copy(r.value.begin(), r.value.end(), out.begin());
  };
  return a;
}

// ---------------------------------------------------------------------------
// Hypotheses

bool check_h1(const FourierProblem& problem, std::uint64_t seed) {
  const std::size_t d = problem.dim;
  State lo = problem.probe_lo, hi = problem.probe_hi;
  if (lo.size() != d || hi.size() != d) {
    const State c = problem.history(0.0);
    lo.resize(d);
    hi.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      lo[i] = c[i] - 0.5;
      hi[i] = c[i] + 0.5;
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool independent = true;
  State X(d), Y(d);
  CVec dir(d);
  for (int probe = 0; probe < 50 && independent; ++probe) {
    for (std::size_t i = 0; i < d; ++i) {
      X[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
      Y[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
      dir[i] = Cplx{2.0 * unit(rng) - 1.0, 0.0};
    }
    const FourierTerms tx(problem, X, Y);
    for (int k = -problem.K; k <= problem.K && independent; ++k) {
      if (k == 0) continue;
      const CVec a = tx.jy(k, dir);
      double nrm = 0.0;
      for (const Cplx& c : a) nrm = std::max(nrm, std::abs(c));
      if (nrm > 1e-10) independent = false;
    }
  }
  if (independent != problem.declared_h1) {
    std::ostringstream os;
    os << problem.name << ": declared_h1=" << problem.declared_h1 << " but probes say "
       << independent;
    throw Error(ErrorCode::DeclarationMismatch, os.str());
  }
  return independent;
}

bool check_h2(double tau, double omega) {
  const double r = omega * tau / (2.0 * std::numbers::pi);
  const double m = std::round(r);
  return m >= 1.0 && std::abs(r - m) <= 1e-9 * std::max(1.0, std::abs(r));
}

State slope_oracle(const FourierProblem& problem, SlopeCase which, ConstVec X, ConstVec Y,
                   ConstVec Z, ConstVec dphi, double omega) {
  switch (which) {
    case SlopeCase::forward_before_tau:
    case SlopeCase::forward_after_tau:
      return f0(problem, X, Y);
    case SlopeCase::central_before_tau:
      return averaged_rhs_phase1(problem, X, Y, dphi, 0.0, omega).value;
    case SlopeCase::central_after_tau: {
      bool fd = false;
      return finish(phase2_terms(problem, X, Y, Z, omega, false, fd), fd).value;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown slope case");
}

}  // namespace samdde
