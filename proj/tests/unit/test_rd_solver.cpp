#include <doctest.h>

#include <cmath>

#include "hopfcl/approximation.hpp"
#include "hopfcl/rd_solver.hpp"

using namespace hopfcl;

namespace {

RDModel pure_diffusion() {
  RDModel m;
  m.name = "heat";
  m.d = 2;
  m.diffusion = {0.5, 2.0};
  m.d_v = 1.0;
  m.f.resize(2);
  return m;
}

RDModel linear_toy(double w0, double eps) {
  RDModel m = toy_model(w0, eps);
  for (auto& f : m.f) f = f.linear_u_part();
  m.g = Polynomial{};
  return m;
}

RDState small_state(const RDModel& m, const SpectralGrid& g, double amp, std::uint64_t seed) {
  std::vector<Field> u;
  for (int c = 0; c < m.d; ++c) {
    Field f = random_band_field(g, 1.0, seed + static_cast<std::uint64_t>(c));
    f *= amp / sup_norm(f);
    u.push_back(f);
  }
  Field v = random_band_field(g, 1.0, seed + 100);
  v *= amp / sup_norm(v);
  return RDState::make(std::move(u), std::move(v));
}

double state_diff(const RDState& a, const RDState& b) {
  double m = sup_norm(a.v - b.v);
  for (std::size_t c = 0; c < a.u.size(); ++c) m = std::max(m, sup_norm(a.u[c] - b.u[c]));
  return m;
}

}  // namespace

TEST_CASE("pure diffusion step is the exact heat decay") {
  const RDModel m = pure_diffusion();
  const SpectralGrid g = make_grid(32, 2.0 * M_PI);
  const double dt = 0.3;
  for (int j = 0; j < 2; ++j) {
    std::vector<Field> u(2, Field::zeros(g));
    u[static_cast<std::size_t>(j)] = Field::from_function(g, [](double x) { return cplx(std::sin(x), 0.0); });
    const RDState out = step(m, RDState::make(u, Field::zeros(g)), dt);
    const double decay = std::exp(-m.diffusion[static_cast<std::size_t>(j)] * dt);
    const Field want = Field::from_function(g, [&](double x) { return cplx(decay * std::sin(x), 0.0); });
    CHECK(sup_norm(out.u[static_cast<std::size_t>(j)] - want) < 1e-10);
    CHECK(sup_norm(out.u[static_cast<std::size_t>(1 - j)]) < 1e-14);
  }
}

TEST_CASE("zero state stays zero") {
  const RDModel m = toy_model(1.0, 0.1);
  const SpectralGrid g = make_grid(64, 20.0);
  const RDState z = RDState::zeros(m, g);
  const RDState out = step(m, z, 0.05);
  CHECK(state_diff(out, z) == 0.0);
}

TEST_CASE("mass of v is unchanged over a thousand toy steps") {
  const RDModel m = toy_model(1.0, 0.05);
  const SpectralGrid g = make_grid(128, 2.0 * M_PI / 0.05);
  RDState s = small_state(m, g, 0.05, 3);
  s.v += Field::from_function(g, [](double) { return cplx(0.01, 0.0); });
  const double m0 = conserved_mass(s);
  RDSolver solver(m, g, 0.01);
  solver.advance(s, 1000);
  CHECK(std::abs(conserved_mass(s) - m0) <= 1e-10 * std::abs(m0));
}

TEST_CASE("mass drift stays below 1e-10 over ten thousand steps for shipped models") {
  for (const RDModel& m : {toy_model(1.0, 0.1), brusselator_cl(1.0, 2.02, 1.0, 1.0, 1.0)}) {
    const SpectralGrid g = make_grid(64, 2.0 * M_PI / 0.1);
    RDState s = small_state(m, g, 0.05, 9);
    s.v += Field::from_function(g, [](double) { return cplx(0.02, 0.0); });
    const double m0 = conserved_mass(s);
    RDSolver solver(m, g, 0.01);
    solver.advance(s, 10000);
    CHECK(std::abs(conserved_mass(s) - m0) <= 1e-10 * std::abs(m0));
    CHECK(solver.last_imag_residue() < 1e-10);
  }
}

TEST_CASE("integration to t = 0 returns the initial state only") {
  const RDModel m = toy_model(1.0, 0.1);
  const SpectralGrid g = make_grid(32, 10.0);
  const RDState s = small_state(m, g, 0.1, 1);
  const Trajectory tr = integrate(m, s, 0.0, 0.01, {{"mass", [](const RDState& x) { return conserved_mass(x); }}});
  CHECK(tr.t.size() == 1);
  CHECK(tr.steps == 0);
  CHECK(state_diff(tr.final_state, s) == 0.0);
}

TEST_CASE("observer stride of 10 over 100 steps gives 11 samples") {
  const RDModel m = toy_model(1.0, 0.1);
  const SpectralGrid g = make_grid(32, 10.0);
  const Trajectory tr = integrate(m, small_state(m, g, 0.1, 2), 1.0, 0.01,
                                  {{"mass", [](const RDState& x) { return conserved_mass(x); }}}, 10);
  CHECK(tr.steps == 100);
  CHECK(tr.t.size() == 11);
  CHECK(tr.series.at("mass").size() == 11);
  CHECK(tr.t.back() == doctest::Approx(1.0));
}

TEST_CASE("linear toy integration matches the semigroup") {
  const double w0 = 1.0, eps = 0.2;
  const RDModel m = linear_toy(w0, eps);
  const SpectralGrid g = make_grid(64, 2.0 * M_PI / 0.1);
  const RDState s = small_state(m, g, 0.1, 4);
  const Trajectory tr = integrate(m, s, 1.0, 0.05);
  CVec u0(s.u[0].size());
  for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = s.u[0][i] + cplx(0, 1) * s.u[1][i];
  const Symbol sym = [&](double k) { return cplx(eps * eps - k * k, w0); };
  const Field want = apply_semigroup(Field(g, u0), sym, 1.0).to_physical();
  const Field p = tr.final_state.u[0].to_physical(), q = tr.final_state.u[1].to_physical();
  double err = 0.0;
  for (std::size_t i = 0; i < u0.size(); ++i) err = std::max(err, std::abs(p[i] + cplx(0, 1) * q[i] - want[i]));
  CHECK(err < 1e-9);
  const Field vwant = apply_semigroup(s.v, [](double k) { return cplx(-k * k, 0.0); }, 1.0);
  CHECK(sup_norm(tr.final_state.v - vwant) < 1e-9);
}

TEST_CASE("self-convergence under dt halving is fourth order") {
  const RDModel m = toy_model(1.0, 0.3);
  const SpectralGrid g = make_grid(64, 2.0 * M_PI / 0.2);
  const RDState s = small_state(m, g, 0.3, 5);
  auto run = [&](double dt) { return integrate(m, s, 2.0, dt).final_state; };
  const RDState a = run(0.2), b = run(0.1), c = run(0.05);
  const double order = std::log2(state_diff(a, b) / state_diff(b, c));
  CHECK(order >= 3.5);
}

TEST_CASE("mass of elementary v fields") {
  const double L = 7.5;
  const SpectralGrid g = make_grid(32, L);
  const RDModel m = toy_model(1.0, 0.0);
  RDState s = RDState::zeros(m, g);
  s.v = Field::from_function(g, [](double) { return cplx(0.4, 0.0); });
  CHECK(conserved_mass(s) == doctest::Approx(0.4 * L).epsilon(1e-14));
  s.v = Field::from_function(g, [&](double x) { return cplx(std::sin(2 * M_PI * x / L), 0.0); });
  CHECK(std::abs(conserved_mass(s)) < 1e-14);
}

TEST_CASE("step rejects non-positive time steps") {
  const RDModel m = toy_model(1.0, 0.0);
  const SpectralGrid g = make_grid(16, 1.0);
  CHECK_THROWS(step(m, RDState::zeros(m, g), 0.0));
  CHECK_THROWS(integrate(m, RDState::zeros(m, g), -1.0, 0.1));
}

TEST_CASE("normal form kernels for w0 = 1") {
  const NormalFormKernels b = normal_form_kernels(1.0);
  CHECK(std::abs(b.b11 - (-1.0 / cplx(0.0, 1.0))) < 1e-15);
  CHECK(std::abs(b.b11 - cplx(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(b.b1m1 - cplx(0.0, -1.0)) < 1e-15);
  CHECK(std::abs(b.bm1m1 - 1.0 / cplx(0.0, 3.0)) < 1e-15);
  const NormalFormKernels b2 = normal_form_kernels(2.0, 3.0);
  CHECK(std::abs(b2.b11 - (-3.0 / cplx(0.0, 2.0))) < 1e-15);
}

TEST_CASE("normal form of the zero state is zero") {
  const RDModel m = toy_model(1.0, 0.0);
  const SpectralGrid g = make_grid(16, 3.0);
  const RDState z = RDState::zeros(m, g);
  CHECK(state_diff(normal_form_toy(z, 1.0, Direction::forward), z) == 0.0);
  CHECK(state_diff(normal_form_toy(z, 1.0, Direction::inverse), z) == 0.0);
}

TEST_CASE("normal form round trip at amplitude 0.1") {
  const RDModel m = toy_model(1.0, 0.0);
  const SpectralGrid g = make_grid(64, 2.0 * M_PI / 0.1);
  const RDState s = small_state(m, g, 0.1, 8);
  const RDState back = normal_form_toy(normal_form_toy(s, 1.0, Direction::forward), 1.0, Direction::inverse);
  CHECK(state_diff(back, s) < 1e-10);
}

TEST_CASE("fast grid resolves 24 points per unit of 1/delta") {
  const SpectralGrid g = fast_grid(0.05);
  CHECK(g.size() == 480);
  CHECK(g.length() == doctest::Approx(2.0 * M_PI / 0.05));
  CHECK(fast_grid(0.5).size() == 128);
}
