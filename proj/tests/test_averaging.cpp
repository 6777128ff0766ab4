#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "samdde/averaging.hpp"
#include "samdde/problems.hpp"
#include "samdde/refsolve.hpp"

using namespace samdde;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

struct Sampler {
  std::mt19937_64 rng{12345};
  double operator()(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
};

// Toggle written directly as a function of theta, with the clock in X[2].
void toggle_theta_rhs(const ToggleParams& p, ConstVec X, ConstVec Y, double theta, MutVec out) {
  out[0] = p.alpha / (1.0 + X[1] * X[1]) - Y[0] + p.A * std::sin(p.omega_slow * X[2]) + p.B * std::sin(theta);
  out[1] = p.alpha / (1.0 + X[0] * X[0]) - Y[1];
  out[2] = 1.0;
}

void newpro_theta_rhs(ConstVec X, ConstVec Y, double theta, MutVec out) {
  out[0] = Y[0] + (X[0] - Y[0]) * std::sin(theta) + 0.5 * Y[0] * std::cos(2.0 * theta);
}

double newpro_phase1(double Y, double dphi, double omega) { return Y - Y / omega + dphi / omega; }
double newpro_phase2(double Y, double Z, double omega, double tau) {
  return Y + (Y - Z) * std::sin(omega * tau) / (2.0 * omega) - Z * std::sin(2.0 * omega * tau) / (16.0 * omega);
}

// x' = -x + x sin(theta) + cos(theta): no delayed argument.
FourierProblem plain_ode() {
  FourierProblem fp;
  fp.name = "ode";
  fp.dim = 1;
  fp.K = 1;
  fp.tau = 0.5;
  fp.history = HistoryFunction::constant({0.2}, 0.5);
  fp.coeff = [](int k, ConstVec X, ConstVec, std::span<Cplx> out) {
    const Cplx i{0.0, 1.0};
    if (k == 0) out[0] = -X[0];
    else out[0] = static_cast<double>(k) * (-i * X[0] / 2.0) + 0.5;
  };
  fp.declared_h1 = true;
  return fp;
}

}  // namespace

TEST_CASE("f0 agrees with quadrature of the series") {
  const ToggleParams tp;
  const FourierProblem toggle = toggle_fourier(tp);
  const FourierProblem np = newpro_problem().fourier;
  Sampler s;
  for (int i = 0; i < 50; ++i) {
    const State X{s(0.1, 3), s(0.5, 3), s(0, 2)}, Y{s(0.1, 3), s(0.5, 3), s(-0.5, 1.5)};
    const State a = f0(toggle, X, Y);
    const State b = f0_quadrature([&](ConstVec x, ConstVec y, double th, MutVec o) { toggle_theta_rhs(tp, x, y, th, o); },
                                  X, Y, 16);
    for (int j = 0; j < 3; ++j) CHECK(a[j] == Approx(b[j]).margin(1e-12));

    const State x1{s(-1, 1)}, y1{s(-1, 1)};
    CHECK(f0(np, x1, y1)[0] == Approx(f0_quadrature(newpro_theta_rhs, x1, y1, 16)[0]).margin(1e-12));
    CHECK(f0(np, x1, y1)[0] == Approx(y1[0]).margin(1e-15));
  }
}

TEST_CASE("Fourier coefficients are Hermitian and reconstruct the field") {
  const ToggleParams tp;
  const FourierProblem toggle = toggle_fourier(tp);
  const FourierProblem np = newpro_problem().fourier;
  Sampler s;
  for (int i = 0; i < 30; ++i) {
    const double theta = s(0, 2 * kPi);
    {
      const State X{s(0.1, 3), s(0.5, 3), s(0, 2)}, Y{s(0.1, 3), s(0.5, 3), s(-0.5, 1.5)};
      const FourierTerms ft(toggle, X, Y);
      State direct(3);
      toggle_theta_rhs(tp, X, Y, theta, direct);
      for (int j = 0; j < 3; ++j) {
        Cplx sum = ft.f(0)[j];
        for (int k = 1; k <= toggle.K; ++k) {
          CHECK(std::abs(ft.f(-k)[j] - std::conj(ft.f(k)[j])) <= 1e-15);
          sum += ft.f(k)[j] * std::polar(1.0, k * theta) + ft.f(-k)[j] * std::polar(1.0, -k * theta);
        }
        CHECK(sum.real() == Approx(direct[j]).margin(1e-12));
        CHECK(std::abs(sum.imag()) <= 1e-12);
      }
    }
    {
      const State X{s(-1, 1)}, Y{s(-1, 1)};
      const FourierTerms ft(np, X, Y);
      State direct(1);
      newpro_theta_rhs(X, Y, theta, direct);
      Cplx sum = ft.f(0)[0];
      for (int k = 1; k <= np.K; ++k) {
        CHECK(std::abs(ft.f(-k)[0] - std::conj(ft.f(k)[0])) <= 1e-15);
        sum += ft.f(k)[0] * std::polar(1.0, k * theta) + ft.f(-k)[0] * std::polar(1.0, -k * theta);
      }
      CHECK(sum.real() == Approx(direct[0]).margin(1e-12));
    }
  }
}

TEST_CASE("commutator properties and a hand-computed toggle bracket") {
  const ToggleParams tp;
  const FourierProblem fp = toggle_fourier(tp);
  const State X{0.5, 2.0, 0.0}, Y{0.5, 2.0, -0.5};
  for (int i = -1; i <= 1; ++i) {
    const CVec self = commutator(fp, i, i, X, Y);
    for (const Cplx& c : self) CHECK(std::abs(c) <= 1e-14);
    for (int j = -1; j <= 1; ++j) {
      const CVec a = commutator(fp, i, j, X, Y), b = commutator(fp, j, i, X, Y);
      for (std::size_t m = 0; m < a.size(); ++m) CHECK(std::abs(a[m] + b[m]) <= 1e-14);
    }
  }
  // f_1 = -i B/2 e_1 is constant, so [f_1, f_0] = J_0 f_1 = -i B/2 (0, h'(X1), 0)
  // with h'(0.5) = -2.5 / 1.25^2 = -1.6.
  const CVec c = commutator(fp, 1, 0, X, Y);
  CHECK(std::abs(c[0]) <= 1e-15);
  CHECK(c[1].real() == Approx(0.0).margin(1e-14));
  CHECK(c[1].imag() == Approx(3.2).epsilon(1e-14));
  CHECK(std::abs(c[2]) <= 1e-15);
}

TEST_CASE("toggle averaged values at the initial state") {
  const FourierProblem fp = toggle_fourier();
  const State X{0.5, 2.0, 0.0}, Y{0.5, 2.0, -0.5}, dphi{0.0, 0.0, 1.0};
  const AveragedEval p1 = averaged_rhs_phase1(fp, X, Y, dphi, 0.0, 60.0);
  CHECK(p1.value[0] == Approx(0.0).margin(1e-14));
  CHECK(p1.value[1] == Approx(-0.1066666667).margin(1e-9));
  CHECK(p1.value[2] == Approx(1.0).margin(1e-15));
  CHECK(p1.imag_residual <= 1e-14);
  CHECK_FALSE(p1.finite_difference_jacobians);

  const AveragedEval p2 = averaged_rhs_phase2(fp, X, Y, Y, 60.0);
  CHECK(p2.value[0] == Approx(-4.0 / 60.0).margin(1e-14));
  CHECK(p2.value[1] == Approx(-0.1066666667).margin(1e-9));
}

TEST_CASE("general evaluator matches the hand-averaged forms") {
  const ToggleParams tp;
  const FourierProblem fp = toggle_fourier(tp);
  const AveragedProblem hand = toggle_averaged(tp);
  const NewproSet np = newpro_problem();
  Sampler s;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double omega = s(20, 2000);
    const double t = s(0, 2);
    const State X{s(0.1, 3), s(0.5, 3), t}, Y{s(0.1, 3), s(0.5, 3), t - 0.5}, Z{s(0.1, 3), s(0.5, 3), t - 1.0};
    const State dphi{0.0, 0.0, 1.0};
    State h1(2), h2(2);
    hand.rhs_phase1(X, Y, dphi, t, omega, h1);
    hand.rhs_phase2(X, Y, Z, t, omega, h2);
    const State g1 = averaged_rhs_phase1(fp, X, Y, dphi, t, omega).value;
    const State g2 = averaged_rhs_phase2(fp, X, Y, Z, omega).value;
    for (int j = 0; j < 2; ++j) worst = std::max({worst, std::abs(g1[j] - h1[j]), std::abs(g2[j] - h2[j])});

    const State x{s(-1, 1)}, y{s(-1, 1)}, z{s(-1, 1)}, dp{s(-1, 1)};
    const double a1 = averaged_rhs_phase1(np.fourier, x, y, dp, t, omega).value[0];
    const double a2 = averaged_rhs_phase2(np.fourier, x, y, z, omega).value[0];
    worst = std::max(worst, std::abs(a1 - newpro_phase1(y[0], dp[0], omega)));
    worst = std::max(worst, std::abs(a2 - newpro_phase2(y[0], z[0], omega, 0.5)));
    State n1(1), n2(1);
    np.averaged.rhs_phase1(x, y, dp, t, omega, n1);
    np.averaged.rhs_phase2(x, y, z, t, omega, n2);
    worst = std::max({worst, std::abs(a1 - n1[0]), std::abs(a2 - n2[0])});
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("newpro averaged values by hand") {
  const FourierProblem fp = newpro_problem().fourier;
  const State x{0.1}, y{0.1}, dphi{0.0};
  CHECK(averaged_rhs_phase1(fp, x, y, dphi, 0.2, 10.0).value[0] == Approx(0.1 - 0.01).epsilon(1e-13));
  // Under (H2) the sin terms vanish and phase 2 reduces to Y.
  CHECK(averaged_rhs_phase2(fp, x, State{0.3}, State{0.7}, 8 * kPi).value[0] == Approx(0.3).epsilon(1e-13));
  const double om = 9 * kPi;  // Omega tau / (2 pi) = 2.25
  CHECK(averaged_rhs_phase2(fp, x, State{0.3}, State{0.7}, om).value[0] ==
        Approx(0.3 + (0.3 - 0.7) / (2 * om)).epsilon(1e-13));
}

TEST_CASE("H1 probing") {
  CHECK(check_h1(toggle_fourier()));
  CHECK_FALSE(check_h1(newpro_problem().fourier));
  CHECK(check_h1(plain_ode()));

  FourierProblem lying = newpro_problem().fourier;
  lying.declared_h1 = true;
  try {
    (void)check_h1(lying);
    FAIL("expected DeclarationMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DeclarationMismatch);
  }
  FourierProblem shy = toggle_fourier();
  shy.declared_h1 = false;
  CHECK_THROWS_AS(check_h1(shy), Error);
}

TEST_CASE("H2 check") {
  CHECK(check_h2(0.5, 8 * kPi));
  CHECK(check_h2(0.5, 1024 * kPi));
  CHECK_FALSE(check_h2(0.5, 9 * kPi));
  CHECK_FALSE(check_h2(0.5, 25.1327));
  CHECK_FALSE(check_h2(0.5, 25.0));
  CHECK_FALSE(check_h2(0.5, (512 + 8) * kPi + kPi / 64));
}

TEST_CASE("slope oracles per step-point case") {
  const FourierProblem toggle = toggle_fourier();
  const FourierProblem np = newpro_problem().fourier;
  Sampler s;
  for (int i = 0; i < 20; ++i) {
    const double omega = s(50, 500);
    const State x{s(-1, 1)}, y{s(-1, 1)}, z{s(-1, 1)}, dp{s(-1, 1)};
    const double f = f0(np, x, y)[0];
    CHECK(slope_oracle(np, SlopeCase::forward_before_tau, x, y, z, dp, omega)[0] == f);
    CHECK(slope_oracle(np, SlopeCase::forward_after_tau, x, y, z, dp, omega)[0] == f);
    CHECK(slope_oracle(np, SlopeCase::central_before_tau, x, y, z, dp, omega)[0] ==
          Approx(averaged_rhs_phase1(np, x, y, dp, 0.0, omega).value[0]).margin(1e-14));

    // Case 4 equals F^(2) under (H2) and differs without it.
    const double om_h2 = 8 * kPi * (1 + i % 4);
    CHECK(slope_oracle(np, SlopeCase::central_after_tau, x, y, z, dp, om_h2)[0] ==
          Approx(averaged_rhs_phase2(np, x, y, z, om_h2).value[0]).margin(1e-14));
    const double om_no = om_h2 + kPi;
    const double gap = slope_oracle(np, SlopeCase::central_after_tau, x, y, z, dp, om_no)[0] -
                       averaged_rhs_phase2(np, x, y, z, om_no).value[0];
    if (std::abs(y[0] - z[0]) > 0.05) CHECK(std::abs(gap) > 1e-5);

    // Under (H1) case 4 always equals F^(2).
    const State X{s(0.1, 3), s(0.5, 3), 1.0}, Y{s(0.1, 3), s(0.5, 3), 0.5}, Z{s(0.1, 3), s(0.5, 3), 0.0};
    const State d3{0, 0, 1};
    const State c4 = slope_oracle(toggle, SlopeCase::central_after_tau, X, Y, Z, d3, om_no);
    const State f2 = averaged_rhs_phase2(toggle, X, Y, Z, om_no).value;
    for (int j = 0; j < 3; ++j) CHECK(c4[j] == Approx(f2[j]).margin(1e-14));
  }
}

TEST_CASE("correction to f0 decays like 1/Omega") {
  const FourierProblem fp = toggle_fourier();
  const State X{0.8, 1.4, 0.3}, Y{0.6, 1.9, -0.2}, dphi{0, 0, 1};
  std::vector<double> lx, ly;
  const State base = f0(fp, X, Y);
  for (double omega = 50; omega < 1e5; omega *= 2) {
    const State v = averaged_rhs_phase1(fp, X, Y, dphi, 0.3, omega).value;
    double d = 0.0;
    for (int j = 0; j < 3; ++j) d = std::max(d, std::abs(v[j] - base[j]));
    lx.push_back(std::log(omega));
    ly.push_back(std::log(d));
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope >= -1.1);
  CHECK(slope <= -0.9);
}

TEST_CASE("without a delayed argument both phases coincide") {
  const FourierProblem fp = plain_ode();
  Sampler s;
  for (int i = 0; i < 20; ++i) {
    const State X{s(-2, 2)}, Y{s(-2, 2)}, Z{s(-2, 2)}, dp{s(-2, 2)};
    const double omega = s(10, 1000);
    const double a = averaged_rhs_phase1(fp, X, Y, dp, 0.1, omega).value[0];
    const double b = averaged_rhs_phase2(fp, X, Y, Z, omega).value[0];
    CHECK(a == Approx(b).margin(1e-14));
  }
}

TEST_CASE("non-Hermitian coefficients produce NonRealResult") {
  FourierProblem fp;
  fp.name = "bad";
  fp.dim = 1;
  fp.K = 1;
  fp.tau = 0.5;
  fp.history = HistoryFunction::constant({1.0}, 0.5);
  fp.coeff = [](int k, ConstVec X, ConstVec, std::span<Cplx> out) {
    out[0] = k == 0 ? Cplx(-X[0]) : k == 1 ? Cplx(X[0] * X[0]) : Cplx{};
  };
  try {
    (void)averaged_rhs_phase1(fp, State{1.0}, State{1.0}, State{0.0}, 0.0, 10.0);
    FAIL("expected NonRealResult");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NonRealResult);
    CHECK(std::string(err.what()).find("0.1") != std::string::npos);
  }
  const AveragedProblem ap = averaged_from_fourier(fp);
  State out(1);
  try {
    ap.rhs_phase1(State{1.0}, State{1.0}, State{0.0}, 0.0, 10.0, out);
    FAIL("expected NonRealResult");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::NonRealResult);
  }
}

TEST_CASE("finite-difference Jacobians are flagged and accurate") {
  const FourierProblem exact = toggle_fourier();
  FourierProblem fd = exact;
  fd.jac_x = nullptr;
  fd.jac_y = nullptr;
  const State X{0.7, 1.6, 0.4}, Y{0.4, 2.2, -0.1}, Z{1.0, 1.0, -0.6};
  const AveragedEval a = averaged_rhs_phase2(exact, X, Y, Z, 300.0);
  const AveragedEval b = averaged_rhs_phase2(fd, X, Y, Z, 300.0);
  CHECK_FALSE(a.finite_difference_jacobians);
  CHECK(b.finite_difference_jacobians);
  for (int j = 0; j < 3; ++j) CHECK(b.value[j] == Approx(a.value[j]).margin(1e-8));
}

TEST_CASE("averaged_from_fourier solves like the hand system") {
  const NewproSet np = newpro_problem();
  const AveragedProblem gen = averaged_from_fourier(np.fourier);
  const double omega = 9 * kPi;
  const auto a = solve_averaged(gen, omega);
  const auto b = solve_averaged(np.averaged, omega);
  for (double t : {0.25, 0.5, 1.0, 1.7, 2.0}) CHECK(a.eval(t)[0] == Approx(b.eval(t)[0]).margin(1e-9));
}
