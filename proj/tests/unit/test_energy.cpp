#include <doctest.h>

#include <cmath>

#include "hopfcl/approximation.hpp"
#include "hopfcl/energy.hpp"

using namespace hopfcl;

namespace {

NormalizedCoefficients toy_normalized() { return normalize(derive_coefficients_toy(1.0)); }

Field constant(const SpectralGrid& g, cplx c) {
  return Field::from_function(g, [c](double) { return c; });
}

}  // namespace

TEST_CASE("level-0 functional of constant A") {
  const SpectralGrid g = slow_grid(32);
  CHECK(lyapunov_level0(constant(g, 1.0), Field::zeros(g), 1.0) == doctest::Approx(2 * M_PI).epsilon(1e-14));
}

TEST_CASE("level-0 functional of B = cos X is the integral of sin^2") {
  const SpectralGrid g = slow_grid(32);
  const Field B = Field::from_function(g, [](double X) { return cplx(std::cos(X), 0.0); });
  CHECK(lyapunov_level0(Field::zeros(g), B, 1.0) == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK(lyapunov_level0(Field::zeros(g), B, 2.5) == doctest::Approx(2.5 * M_PI).epsilon(1e-14));
}

TEST_CASE("level-0 functional with q = 0 is the plain L2 norm") {
  const SpectralGrid g = slow_grid(64);
  const Field A = Field::from_function(g, [](double X) { return cplx(std::sin(2 * X), 0.5 + std::cos(X)); });
  const Field B = Field::from_function(g, [](double X) { return cplx(std::sin(3 * X), 0.0); });
  double quad = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) quad += std::norm(A[i]);
  quad *= g.dx();
  CHECK(lyapunov_level0(A, B, 0.0) == doctest::Approx(quad).epsilon(1e-13));
}

TEST_CASE("level-0 functional requires zero-mean B") {
  const SpectralGrid g = slow_grid(32);
  CHECK_THROWS_AS(lyapunov_level0(Field::zeros(g), constant(g, 0.1), 1.0), std::invalid_argument);
}

TEST_CASE("level-0 functional is gauge invariant") {
  const SpectralGrid g = slow_grid(64);
  const AmplitudeState s = random_amplitude_state(g, 7.0, 1.3, 11);
  for (double phi : {0.3, 1.7, -2.9}) {
    Field A = s.A;
    A *= std::polar(1.0, phi);
    CHECK(lyapunov_level0(A, s.B, 1.3) == doctest::Approx(lyapunov_level0(s.A, s.B, 1.3)).epsilon(1e-13));
  }
}

TEST_CASE("level-1 functional of a single mode") {
  const SpectralGrid g = slow_grid(32);
  const Field A = Field::from_function(g, [](double X) { return std::polar(1.0, 2 * X); });
  const Field B = Field::from_function(g, [](double X) { return cplx(std::cos(X), 0.0); });
  CHECK(lyapunov_level1(A, B, 0.5) == doctest::Approx(4 * 2 * M_PI + 0.5 * M_PI).epsilon(1e-13));
}

TEST_CASE("absorbing bound for positive beta") {
  const AbsorbingBound b = absorbing_bound(2 * M_PI, 1.0, 1.0);
  CHECK(b.C_inf0 == doctest::Approx(2 * M_PI));
  CHECK(b.q == 1.0);
  CHECK(b.r == 1.0);
  CHECK(absorbing_bound(2 * M_PI, 4.0, 1.0).C_inf0 == doctest::Approx(2 * M_PI));
  const AbsorbingBound wide = absorbing_bound(4 * M_PI, 1.0, 0.2);
  CHECK(wide.C_inf0 == doctest::Approx(4 * M_PI * 4.0));
  CHECK(wide.q == 0.2);
}

TEST_CASE("absorbing bound for negative beta searches the radius grid") {
  const AbsorbingBound b = absorbing_bound(2 * M_PI, 1.0, -0.5);
  CHECK(b.q == doctest::Approx(1.5));
  CHECK(b.r > 0.0);
  CHECK(condition_d_check(b.q, b.r, 1.0, -0.5).ok);
  CHECK(std::log2(b.r) == doctest::Approx(std::round(std::log2(b.r))));
  if (b.r < 0.5) CHECK_FALSE(condition_d_check(b.q, 2 * b.r, 1.0, -0.5).ok);
  CHECK(b.C_inf0 >= 2 * M_PI / b.r);
}

TEST_CASE("absorbing bound rejects the violated coefficient condition") {
  CHECK_THROWS_AS(absorbing_bound(2 * M_PI, 1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(absorbing_bound(2 * M_PI, 1.0, -2.0), std::invalid_argument);
  CHECK_THROWS_AS(absorbing_bound(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("absorbing bound near the boundary of the coefficient condition finds no grid radius") {
  CHECK(condition_d_rmax(2.0 * 1.0 - 1.0 + 1e-6, 1.0, -1.0 + 1e-6) < 2e-3);
  CHECK_THROWS_AS(absorbing_bound(2 * M_PI, 1.0, -1.0 + 1e-6), std::runtime_error);
}

TEST_CASE("sign condition with q = beta holds with zero margin") {
  const ConditionD c = condition_d_check(0.7, 1.0, 1.0, 0.7);
  CHECK(c.ok);
  CHECK(c.worst_margin == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("sign condition for alpha = 1, beta = 0, q = 2") {
  const double rmax = condition_d_rmax(2.0, 1.0, 0.0);
  CHECK(rmax == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
  CHECK(condition_d_check(2.0, 0.25, 1.0, 0.0).ok);
  CHECK_FALSE(condition_d_check(2.0, 0.5, 1.0, 0.0).ok);
  CHECK(condition_d_check(2.0, rmax - 1e-6, 1.0, 0.0).ok);
  CHECK_FALSE(condition_d_check(2.0, rmax + 1e-3, 1.0, 0.0).ok);
}

TEST_CASE("sign condition matches the closed-form radius") {
  for (double beta : {-0.9, -0.5, -0.1, 0.0}) {
    const double alpha = 1.0, q = 2 * alpha + beta;
    const double rmax = condition_d_rmax(q, alpha, beta);
    CHECK(rmax > 0.0);
    CHECK(condition_d_check(q, 0.98 * rmax, alpha, beta).ok);
    CHECK_FALSE(condition_d_check(q, std::min(1.0, 1.02 * rmax + 1e-6), alpha, beta).ok);
  }
}

TEST_CASE("sign condition is homogeneous of degree two") {
  const double q = 1.5, r = 0.1, alpha = 1.0, beta = -0.5;
  auto margin = [&](double a2, double B) {
    return (1 - r) * alpha * q * B * B + (1 - r) * a2 * a2 - (q - beta) * B * a2;
  };
  for (double s : {0.1, 3.0, 40.0}) CHECK(margin(s * 0.4, s * 0.3) == doctest::Approx(s * s * margin(0.4, 0.3)));
  const ConditionD c = condition_d_check(q, r, alpha, beta);
  CHECK(c.worst_A2 * c.worst_A2 + c.worst_B * c.worst_B == doctest::Approx(1.0));
  CHECK(c.worst_margin == doctest::Approx(margin(c.worst_A2, c.worst_B)));
}

TEST_CASE("level-0 rate is the exact derivative along the flow") {
  const NormalizedCoefficients n = toy_normalized();
  const SpectralGrid g = slow_grid(64);
  const AmplitudeState s = random_amplitude_state(g, 10.0, n.beta, 5);
  AmplitudeSolver solver(n.as_raw(), g, 1e-4);
  const double r = level0_rate(s, solver.rhs(s), n.beta);
  auto forward = [&](double h) {
    AmplitudeState a = s;
    AmplitudeSolver(n.as_raw(), g, h).step(a);
    return (lyapunov_level0(a.A, a.B, n.beta) - lyapunov_level0(s.A, s.B, n.beta)) / h;
  };
  const double fd = 2.0 * forward(5e-6) - forward(1e-5);
  CHECK(r == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("level-0 rate never exceeds the majorant for positive beta") {
  const NormalizedCoefficients n = toy_normalized();
  REQUIRE(n.beta > 0.0);
  const SpectralGrid g = slow_grid(64);
  const AbsorbingBound bound = absorbing_bound(g.length(), n.alpha, n.beta);
  AmplitudeSolver solver(n.as_raw(), g, 1e-3);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const AmplitudeState s = random_amplitude_state(g, 0.5 + seed, bound.q, seed);
    CHECK(level0_rate(s, solver.rhs(s), bound.q) <= level0_majorant(s, n.alpha, bound) + kMajorantTol);
  }
}

TEST_CASE("random amplitude state hits its energy target") {
  const SpectralGrid g = slow_grid(64);
  for (double E0 : {4.0, 12.5, 25.0}) {
    const AmplitudeState s = random_amplitude_state(g, E0, 0.8, 42);
    CHECK(lyapunov_level0(s.A, s.B, 0.8) == doctest::Approx(E0).epsilon(1e-12));
    CHECK(std::abs(mean(s.B)) < 1e-14);
    CHECK(s.B.imag_residue() == 0.0);
  }
  const AmplitudeState a = random_amplitude_state(g, 5.0, 1.0, 3), b = random_amplitude_state(g, 5.0, 1.0, 3);
  CHECK(sup_norm(a.A - b.A) == 0.0);
  CHECK_THROWS(random_amplitude_state(g, 0.0, 1.0, 3));
}

TEST_CASE("data inside the ball stays inside") {
  const NormalizedCoefficients n = toy_normalized();
  const SpectralGrid g = slow_grid(64);
  const AbsorbingBound bound = absorbing_bound(g.length(), n.alpha, n.beta);
  const AmplitudeState s = random_amplitude_state(g, 0.5 * bound.C_inf0, bound.q, 9, 2.0);
  EnergyRunConfig cfg;
  cfg.T_end = 50.0;
  cfg.dT = 2e-3;
  cfg.checkpoint = 0.1;
  const EnergyReport r = energy_run(n, s, cfg);
  CHECK(r.ok());
  REQUIRE(r.entry_time);
  CHECK(*r.entry_time == 0.0);
  for (double e : r.E0) CHECK(e <= 1.05 * bound.C_inf0);
  CHECK(r.majorant_ok);
}

TEST_CASE("data of norm five outside the ball enters in finite time") {
  const NormalizedCoefficients n = toy_normalized();
  const SpectralGrid g = slow_grid(64);
  const AbsorbingBound bound = absorbing_bound(g.length(), n.alpha, n.beta);
  const double E0 = 25.0 * g.length();
  REQUIRE(E0 > 1.05 * bound.C_inf0);
  const AmplitudeState s = random_amplitude_state(g, E0, bound.q, 17, 2.0);
  EnergyRunConfig cfg;
  cfg.T_end = 20.0;
  cfg.dT = 1e-3;
  const EnergyReport r = energy_run(n, s, cfg);
  REQUIRE(r.entry_time);
  CHECK(*r.entry_time > 0.0);
  CHECK(*r.entry_time < 20.0);
  CHECK(r.ok());
  CHECK(r.asymptotic_radius <= 1.05 * bound.C_inf0);
  CHECK(r.gamma_found);
  CHECK(std::log2(r.gamma) == doctest::Approx(std::round(std::log2(r.gamma))));
}

TEST_CASE("special periodic solution sits on the ball level") {
  const NormalizedCoefficients n = toy_normalized();
  const SpectralGrid g = slow_grid(32);
  const SpecialSolution sp = special_periodic_solution(0.0, n);
  REQUIRE(sp.oscillating);
  std::vector<AmplitudeState> traj;
  AmplitudeState s{constant(g, sp.A_hat), Field::zeros(g), 0.0};
  AmplitudeSolver solver(n.as_raw(), g, 1e-3);
  for (int i = 0; i < 20; ++i) {
    traj.push_back(s);
    solver.advance(s, 100);
  }
  const EnergyReport r = dissipation_check(traj, n);
  for (double e : r.E0) CHECK(e == doctest::Approx(g.length()).epsilon(1e-9));
  CHECK(r.bound.C_inf0 >= g.length());
  CHECK(r.ok());
}

TEST_CASE("dissipation check flags a trajectory that leaves the ball") {
  const NormalizedCoefficients n = toy_normalized();
  const SpectralGrid g = slow_grid(32);
  const double C = absorbing_bound(g.length(), n.alpha, n.beta).C_inf0;
  std::vector<AmplitudeState> traj;
  for (double level : {0.5, 0.5, 3.0, 0.5}) {
    AmplitudeState s{constant(g, std::sqrt(level * C / g.length())), Field::zeros(g), 0.1 * traj.size()};
    traj.push_back(s);
  }
  const EnergyReport r = dissipation_check(traj, n);
  CHECK_FALSE(r.ball_ok);
  REQUIRE_FALSE(r.violations.empty());
  bool found = false;
  for (const auto& v : r.violations) found = found || (v.kind == "ball_reexit" && v.T == doctest::Approx(0.2));
  CHECK(found);
  CHECK_THROWS(dissipation_check({}, n));
}
