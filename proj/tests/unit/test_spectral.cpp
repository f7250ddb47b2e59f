#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "hopfcl/spectral.hpp"

using namespace hopfcl;

namespace {

Field random_field(const SpectralGrid& g, std::uint64_t seed, int max_mode) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Field h = Field::zeros(g, Space::fourier);
  for (int j = -max_mode; j <= max_mode; ++j) h[static_cast<std::size_t>(g.index(j))] = cplx(n(rng), n(rng));
  return h.to_physical();
}

double max_diff(const Field& a, const Field& b) {
  const Field pa = a.to_physical(), pb = b.to_physical();
  double m = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) m = std::max(m, std::abs(pa[i] - pb[i]));
  return m;
}

}  // namespace

TEST_CASE("grid of 16 points on 2pi carries wavenumbers -7..8") {
  const SpectralGrid g = make_grid(16, 2.0 * M_PI);
  std::set<int> ks;
  for (int i = 0; i < g.size(); ++i) ks.insert(static_cast<int>(std::lround(g.wavenumber(i))));
  CHECK(ks.size() == 16);
  CHECK(*ks.begin() == -7);
  CHECK(*ks.rbegin() == 8);
}

TEST_CASE("long grid has its smallest wavenumber at 2pi over the length") {
  const SpectralGrid g = make_grid(64, 2.0 * M_PI / 0.1);
  double smallest = 1e300;
  for (int i = 0; i < g.size(); ++i)
    if (g.wavenumber(i) != 0.0) smallest = std::min(smallest, std::abs(g.wavenumber(i)));
  CHECK(smallest == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("odd and degenerate grids are rejected") {
  CHECK_THROWS(make_grid(17, 2.0 * M_PI));
  CHECK_THROWS(make_grid(0, 2.0 * M_PI));
  CHECK_THROWS(make_grid(16, -1.0));
}

TEST_CASE("second derivative of sin is -sin") {
  const SpectralGrid g = make_grid(32, 2.0 * M_PI);
  const Field f = Field::from_function(g, [](double x) { return cplx(std::sin(x), 0.0); });
  const Field want = Field::from_function(g, [](double x) { return cplx(-std::sin(x), 0.0); });
  CHECK(max_diff(derivative(f, 2), want) < 1e-12);
}

TEST_CASE("derivative of a constant vanishes") {
  const SpectralGrid g = make_grid(32, 5.0);
  const Field f = Field::from_function(g, [](double) { return cplx(3.0, -1.0); });
  CHECK(sup_norm(derivative(f, 1)) < 1e-13);
}

TEST_CASE("second derivative of e^{3ix} is -9 e^{3ix}") {
  const SpectralGrid g = make_grid(32, 2.0 * M_PI);
  const Field f = Field::from_function(g, [](double x) { return std::polar(1.0, 3.0 * x); });
  const Field want = Field::from_function(g, [](double x) { return -9.0 * std::polar(1.0, 3.0 * x); });
  CHECK(max_diff(derivative(f, 2), want) < 1e-11);
}

TEST_CASE("antiderivative of cos is sin") {
  const SpectralGrid g = make_grid(32, 2.0 * M_PI);
  const Field f = Field::from_function(g, [](double x) { return cplx(std::cos(x), 0.0); });
  const Field want = Field::from_function(g, [](double x) { return cplx(std::sin(x), 0.0); });
  CHECK(max_diff(antiderivative(f), want) < 1e-13);
  CHECK(sup_norm(antiderivative(Field::zeros(g))) == 0.0);
}

TEST_CASE("antiderivative integrates a two-mode signal term by term") {
  const SpectralGrid g = make_grid(32, 2.0 * M_PI);
  const Field f = Field::from_function(g, [](double x) { return cplx(std::cos(2 * x) + std::sin(3 * x), 0.0); });
  const Field want =
      Field::from_function(g, [](double x) { return cplx(std::sin(2 * x) / 2 - std::cos(3 * x) / 3, 0.0); });
  CHECK(max_diff(antiderivative(f), want) < 1e-13);
}

TEST_CASE("antiderivative rejects a nonzero mean") {
  const SpectralGrid g = make_grid(16, 2.0 * M_PI);
  const Field f = Field::from_function(g, [](double x) { return cplx(1.0 + std::cos(x), 0.0); });
  CHECK_THROWS(antiderivative(f));
}

TEST_CASE("heat semigroup damps sin by e^{-t}") {
  const SpectralGrid g = make_grid(32, 2.0 * M_PI);
  const Field f = Field::from_function(g, [](double x) { return cplx(std::sin(x), 0.0); });
  const Symbol heat = [](double k) { return cplx(-k * k, 0.0); };
  const Field want = Field::from_function(g, [](double x) { return cplx(std::exp(-1.0) * std::sin(x), 0.0); });
  CHECK(max_diff(apply_semigroup(f, heat, 1.0), want) < 1e-14);
  CHECK(max_diff(apply_semigroup(f, heat, 0.0), f) < 1e-15);
}

TEST_CASE("oscillatory semigroup acts as a scalar exponential on one mode") {
  const double w0 = 1.3;
  const SpectralGrid g = make_grid(32, 2.0 * M_PI);
  const Field f = Field::from_function(g, [](double x) { return std::polar(1.0, x); });
  const Symbol sym = [w0](double k) { return cplx(-k * k, w0); };
  const cplx factor = std::exp(cplx(-1.0, w0) * 0.5);
  const Field want = Field::from_function(g, [&](double x) { return factor * std::polar(1.0, x); });
  CHECK(max_diff(apply_semigroup(f, sym, 0.5), want) < 1e-14);
}

TEST_CASE("semigroup composes over split times") {
  const SpectralGrid g = make_grid(64, 10.0);
  const Field f = random_field(g, 3, 12);
  const Symbol sym = [](double k) { return cplx(-0.3 * k * k + 0.1, 0.7 - k); };
  const Field once = apply_semigroup(f, sym, 0.9);
  const Field twice = apply_semigroup(apply_semigroup(f, sym, 0.4), sym, 0.5);
  CHECK(max_diff(once, twice) < 1e-12);
}

TEST_CASE("mode filter keeps the plateau and removes the far band") {
  const double dt = 0.5;
  const double L = 2.0 * M_PI / 0.05;
  const SpectralGrid g = make_grid(256, L);
  // wavenumbers 0.3 dt and 0.7 dt lie on the grid for this length
  const double k_low = 0.3 * dt, k_high = 0.7 * dt;
  const Field low = Field::from_function(g, [&](double x) { return std::polar(1.0, k_low * x); });
  const Field high = Field::from_function(g, [&](double x) { return std::polar(1.0, k_high * x); });
  CHECK(max_diff(mode_filter(low, dt), low) < 1e-14);
  CHECK(sup_norm(mode_filter(high, dt)) < 1e-14);
  CHECK(max_diff(mode_filter(low + high, dt), low) < 1e-14);
}

TEST_CASE("mode filter is idempotent away from the transition band") {
  const double dt = 0.5;
  const SpectralGrid g = make_grid(256, 2.0 * M_PI / 0.05);
  Field h = random_field(g, 9, 60).to_fourier();
  for (int i = 0; i < g.size(); ++i) {
    const double k = std::abs(g.wavenumber(i));
    if (k > 0.45 * dt && k < 0.55 * dt) h[static_cast<std::size_t>(i)] = 0.0;
  }
  const Field once = mode_filter(h, dt);
  CHECK(max_diff(mode_filter(once, dt), once) < 1e-13);
}

TEST_CASE("Sobolev norms of elementary signals") {
  const double L = 7.0;
  const SpectralGrid g = make_grid(32, L);
  const Field one = Field::from_function(g, [](double) { return cplx(1.0, 0.0); });
  for (double s : {0.0, 1.0, 2.5}) CHECK(sobolev_norm(one, s) == doctest::Approx(std::sqrt(L)).epsilon(1e-14));

  const SpectralGrid g2 = make_grid(64, 2.0 * M_PI);
  const Field sn = Field::from_function(g2, [](double x) { return cplx(std::sin(x), 0.0); });
  CHECK(sobolev_norm(sn, 0.0) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));

  // H^1 by quadrature of f^2 + f'^2 with the trapezoid rule, exact for trigonometric data
  const int M = 4096;
  double q = 0.0;
  for (int i = 0; i < M; ++i) {
    const double x = 2.0 * M_PI * i / M;
    q += (std::sin(x) * std::sin(x) + std::cos(x) * std::cos(x)) * (2.0 * M_PI / M);
  }
  CHECK(sobolev_norm(sn, 1.0) == doctest::Approx(std::sqrt(q)).epsilon(1e-13));
}

TEST_CASE("Parseval holds for random fields") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SpectralGrid g = make_grid(128, 3.0 + static_cast<double>(seed));
    const Field f = random_field(g, seed, 40);
    double quad = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) quad += std::norm(f[i]) * g.dx();
    CHECK(sobolev_norm(f, 0.0) == doctest::Approx(std::sqrt(quad)).epsilon(1e-10));
    CHECK(l2_norm(f) == doctest::Approx(std::sqrt(quad)).epsilon(1e-10));
  }
}

TEST_CASE("differentiation inverts antidifferentiation on zero-mean fields") {
  const SpectralGrid g = make_grid(128, 9.0);
  Field h = random_field(g, 21, 50).to_fourier();
  h[0] = 0.0;
  const Field f = h.to_physical();
  CHECK(max_diff(derivative(antiderivative(f), 1), f) < 1e-10);
}

TEST_CASE("transforms round trip and report realness") {
  const SpectralGrid g = make_grid(64, 4.0);
  const Field f = random_field(g, 5, 20);
  CHECK(max_diff(f.to_fourier().to_physical(), f) < 1e-13);
  const Field r = f.real_part();
  CHECK(r.imag_residue() == 0.0);
  CHECK(r.to_fourier().hermitian_defect() < 1e-14);
}

TEST_CASE("fields on different grids cannot be combined") {
  const Field a = Field::zeros(make_grid(16, 1.0));
  const Field b = Field::zeros(make_grid(32, 1.0));
  CHECK_THROWS(a + b);
}

TEST_CASE("resampling keeps mode numbers") {
  const SpectralGrid coarse = make_grid(32, 2.0 * M_PI);
  const SpectralGrid fine = make_grid(128, 2.0 * M_PI);
  const Field f = Field::from_function(coarse, [](double x) { return cplx(std::cos(3 * x), std::sin(5 * x)); });
  const Field want = Field::from_function(fine, [](double x) { return cplx(std::cos(3 * x), std::sin(5 * x)); });
  CHECK(max_diff(resample(f, fine), want) < 1e-13);
}

TEST_CASE("dealiasing mask keeps a third of the spectrum") {
  const int n = 48;
  CVec c(n, cplx(1.0, 0.0));
  dealias(c);
  for (int i = 0; i < n; ++i) {
    const int j = i <= n / 2 ? i : i - n;
    CHECK(std::abs(c[static_cast<std::size_t>(i)]) == (std::abs(j) <= n / 3 ? 1.0 : 0.0));
  }
}

TEST_CASE("uniformly local norm of a constant equals the window root") {
  const SpectralGrid g = make_grid(64, 8.0);
  const Field one = Field::from_function(g, [](double) { return cplx(2.0, 0.0); });
  CHECK(ul_norm(one, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ul_norm(one, 2) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("field dump has a metadata header and one row per node") {
  const SpectralGrid g = make_grid(16, 1.0);
  std::ostringstream os;
  write_csv(os, Field::zeros(g));
  std::string line;
  std::istringstream is(os.str());
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 18);
}
