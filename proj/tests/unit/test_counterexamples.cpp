#include <doctest.h>

#include <cmath>
#include <sstream>

#include "coulomb_lab/counterexamples.hpp"
#include "coulomb_lab/csv.hpp"

using namespace clab;

namespace {

// D(phi, phi) of the radial base bump by nested 1D quadrature
double radial_coulomb_energy() {
  const int m = 20000;
  const double dr = 1.0 / m;
  std::vector<double> inner(m + 1, 0.0), outer(m + 1, 0.0);
  auto rho = [](double r) { return bump_profile(r); };
  for (int i = 1; i <= m; ++i) {
    const double a = (i - 1) * dr, b = i * dr, c = 0.5 * (a + b);
    inner[i] = inner[i - 1] + dr / 6 * (rho(a) * a * a + 4 * rho(c) * c * c + rho(b) * b * b);
  }
  for (int i = m - 1; i >= 0; --i) {
    const double a = i * dr, b = (i + 1) * dr, c = 0.5 * (a + b);
    outer[i] = outer[i + 1] + dr / 6 * (rho(a) * a + 4 * rho(c) * c + rho(b) * b);
  }
  auto integrand = [&](int i) {
    const double r = i * dr;
    const double v = 4 * kPi * ((i ? inner[i] / r : 0.0) + outer[i]);
    return rho(r) * v * r * r;
  };
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += 0.5 * dr * (integrand(i) + integrand(i + 1));
  return 4 * kPi * s;
}

double max_abs_on(const ScalarField& u, int sign) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] * sign > 0) m = std::max(m, std::abs(u[i]));
  return m;
}

}  // namespace

TEST_CASE("base bump") {
  double s = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double r = (i + 0.5) / m;
    s += 4 * kPi * r * r * bump_profile(r) * bump_profile(r) / m;
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(bump_profile(0.0) == bump_sup());
  CHECK(bump_profile(1.0) == 0.0);
  CHECK(bump_profile(1.7) == 0.0);
  // unit L2 norm on B_1 forces a sup above 1
  CHECK(bump_sup() == doctest::Approx(1.8709).epsilon(1e-4));
}

TEST_CASE("scaling sequence") {
  Grid g(96, 1.1);
  const CoulombKernel k(g);
  const auto phi = scaling_sequence(g, 1.0);
  CHECK(std::abs(l2_norm(phi) - 1.0) <= 1e-10);
  for (std::size_t i = 0; i < g.size(); i += 97) {
    const Vec3 x = g.point(i);
    CHECK(phi[i] == doctest::Approx(bump_profile(std::hypot(x[0], x[1], x[2]))).epsilon(2e-3));
  }
  const double d1 = coulomb_energy(phi, k);
  CHECK(d1 == doctest::Approx(radial_coulomb_energy()).epsilon(0.01));
  for (double eps : {0.5, 0.25}) {
    const auto u = scaling_sequence(g, eps, {0.1, -0.2, 0.05});
    CHECK(std::abs(l2_norm(u) - 1.0) <= 1e-10);
    CHECK(coulomb_energy(u, k) / d1 == doctest::Approx(eps * eps).epsilon(0.03));
  }
  CHECK_THROWS_AS(scaling_sequence(g, 0.05), ResolutionError);
  CHECK_THROWS_AS(scaling_sequence(g, 1.5), UsageError);
  CHECK_THROWS_AS(scaling_sequence(g, 0.0), UsageError);
  CHECK_THROWS_AS(scaling_sequence(g, 0.5, {0.8, 0, 0}), GeometryError);
}

TEST_CASE("multibump sequence") {
  for (int n : {1, 2, 4}) {
    const auto spec = multibump_spec(n, 8 * std::cbrt(1.0 / (2 * n)));
    REQUIRE(spec.centers.size() == static_cast<std::size_t>(2 * n));
    int plus = 0;
    for (int s : spec.signs) plus += s > 0;
    CHECK(plus == n);
    for (std::size_t i = 0; i < spec.centers.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) {
        const auto& a = spec.centers[i];
        const auto& b = spec.centers[j];
        CHECK(std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]) > 2 * spec.eps);
      }
    const Grid g = fitting_grid(spec, 8);
    const auto u = assemble(g, spec);
    CHECK(std::abs(l2_norm(u) - 1.0) <= 1e-10);
    CHECK(support_volume(u) == doctest::Approx(kUnitBallVolume).epsilon(0.05));
    // disjoint supports: no value exceeds the largest single bump
    const double top = std::max(max_abs_on(u, 1), max_abs_on(u, -1));
    CHECK(u.max_abs() <= top + 1e-12);
    CHECK(u.max_abs() <= bump_sup() * 1.01);
    if (n == 1) {
      CHECK(max_abs_on(u, 1) > 0.0);
      CHECK(max_abs_on(u, -1) > 0.0);
    }
  }
  Grid g(64, 2.0);
  CHECK_THROWS_AS(multibump_sequence(g, 2, 1.0), UsageError);
  CHECK_THROWS_AS(multibump_sequence(g, 2, 4.0), GeometryError);
  CHECK_THROWS_AS(multibump_sequence(g, 0, 2.0), UsageError);
  CHECK_THROWS_AS(fitting_grid(multibump_spec(1, 2.0), 3), ResolutionError);
}

TEST_CASE("decay of the Coulomb energy") {
  const double base = base_coulomb_energy(6);
  const auto rows = decay_report({1, 2, 4}, {6.4}, 6);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    CHECK(6.4 >= 8 * r.eps);
    CHECK(r.D > 0.0);
    CHECK(r.D <= r.bound);
    CHECK(r.self_term == doctest::Approx(r.self_prediction).epsilon(1e-3));
    CHECK(r.bound == doctest::Approx(std::sqrt(r.n) * std::pow(2.0 * r.n, -2.0 / 3) * base));
    if (i > 0) CHECK(r.D < rows[i - 1].D);
  }

  // at fixed n the pairing of opposite bumps fades with the distance
  const auto far = decay_report({1}, {2.0, 4.0, 8.0}, 6);
  for (std::size_t i = 1; i < far.size(); ++i)
    CHECK(std::abs(far[i].cross_share) < std::abs(far[i - 1].cross_share));
  CHECK(std::abs(far.back().cross_share) < 0.1);

  // the infimum 0 is approached but D stays positive
  double least = 1e300;
  for (int n : {8, 16, 32, 64}) {
    const double eps = std::cbrt(1.0 / (2 * n));
    const auto r = decay_report({n}, {3 * eps}, 6).front();
    CHECK(r.D > 0.0);
    least = std::min(least, r.D);
  }
  CHECK(least < 0.05 * base);
}

TEST_CASE("cross term against direct summation") {
  const auto spec = multibump_spec(1, 2.0);
  const Grid g = fitting_grid(spec, 4);
  const auto u = assemble(g, spec);
  ScalarField pos(g), neg(g);
  std::vector<std::size_t> ip, in;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (u[i] > 0) {
      pos[i] = u[i];
      ip.push_back(i);
    } else if (u[i] < 0) {
      neg[i] = u[i];
      in.push_back(i);
    }
  }
  const CoulombKernel k(g);
  const double fft_cross = coulomb_energy(u, k) - coulomb_energy(pos, k) - coulomb_energy(neg, k);
  double direct = 0.0;
  const double h6 = g.cell_volume() * g.cell_volume();
  for (std::size_t a : ip) {
    const Vec3 x = g.point(a);
    for (std::size_t b : in) {
      const Vec3 y = g.point(b);
      direct += u[a] * u[b] * h6 / std::hypot(x[0] - y[0], x[1] - y[1], x[2] - y[2]);
    }
  }
  direct *= 2;
  CHECK(direct < 0.0);
  CHECK(fft_cross == doctest::Approx(direct).epsilon(0.01));
}

TEST_CASE("decay table CSV") {
  const auto rows = decay_report({1, 2}, {3.0}, 4);
  std::stringstream ss;
  write_decay_csv(ss, rows);
  const std::string text = ss.str();
  CHECK(text.rfind("n,separation,eps,D,self_term,self_prediction,bound,cross_share\n", 0) == 0);
  const auto t = csv::read(ss);
  REQUIRE(t.rows.size() == 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(t.value(i, "D") == rows[i].D);
    CHECK(t.value(i, "cross_share") == rows[i].cross_share);
    CHECK(t.value(i, "n") == rows[i].n);
  }
  std::stringstream again;
  write_decay_csv(again, decay_report({1, 2}, {3.0}, 4));
  CHECK(again.str() == text);
  std::stringstream bad("a,b\n1\n");
  CHECK_THROWS_AS(csv::read(bad), FormatError);
}
