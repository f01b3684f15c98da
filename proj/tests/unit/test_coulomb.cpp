#include <doctest.h>

#include <cmath>
#include <random>

#include "coulomb_lab/coulomb.hpp"

using namespace clab;

namespace {

ScalarField random_blob(const Grid& g, unsigned seed, int margin) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ScalarField f(g);
  const int n = g.n();
  for (int k = margin; k < n - margin; ++k)
    for (int j = margin; j < n - margin; ++j)
      for (int i = margin; i < n - margin; ++i) f.at(i, j, k) = dist(rng);
  return f;
}

ScalarField ball_indicator(const Grid& g, const Vec3& c = {0, 0, 0}) {
  return ScalarField::sample(g, [c](const Vec3& x) {
    const double r2 = (x[0] - c[0]) * (x[0] - c[0]) + (x[1] - c[1]) * (x[1] - c[1]) +
                      (x[2] - c[2]) * (x[2] - c[2]);
    return r2 < 1.0 ? 1.0 : 0.0;
  });
}

}  // namespace

TEST_CASE("self-cell constant") {
  // closed form of int_{[-1/2,1/2]^3} dx/|x|
  const double s3 = std::sqrt(3.0);
  const double exact = 3.0 * std::log((s3 + 1.0) / (s3 - 1.0)) - kPi / 2.0;
  CHECK(self_cell_constant() == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("zero input") {
  Grid g(16, 1.0);
  CoulombKernel k(g);
  CHECK(coulomb_potential(ScalarField(g), k).max_abs() == 0.0);
  CHECK(coulomb_energy(ScalarField(g), k) == 0.0);
}

TEST_CASE("uniform ball: potential and self-energy") {
  Grid g(128, 2.0);
  CoulombKernel k(g);
  const auto chi = ball_indicator(g);
  const auto v = coulomb_potential(chi, k);
  // v(0) = 2 pi; the center lies between cells, average the 8 around it
  double v0 = 0.0;
  for (int dk : {63, 64})
    for (int dj : {63, 64})
      for (int di : {63, 64}) v0 += v.at(di, dj, dk) / 8.0;
  CHECK(std::abs(v0 / (2 * kPi) - 1.0) < 0.01);
  const double far = sample_trilinear(v, {1.5, 0.0, 0.0});
  CHECK(std::abs(far / (4 * kPi / 3 / 1.5) - 1.0) < 0.01);
  const double diag = sample_trilinear(v, {1.5 / std::sqrt(3.0), 1.5 / std::sqrt(3.0),
                                           1.5 / std::sqrt(3.0)});
  CHECK(std::abs(diag / (4 * kPi / 3 / 1.5) - 1.0) < 0.01);
  CHECK(std::abs(coulomb_energy(chi, k) / (32 * kPi * kPi / 15) - 1.0) < 0.01);
}

TEST_CASE("translation equivariance") {
  Grid g(32, 1.0);
  CoulombKernel k(g);
  auto u = random_blob(g, 11, 10);
  ScalarField shifted(g);
  for (int kk = 0; kk < 32; ++kk)
    for (int j = 0; j < 32; ++j)
      for (int i = 1; i < 32; ++i) shifted.at(i, j, kk) = u.at(i - 1, j, kk);
  const auto v = coulomb_potential(u, k);
  const auto vs = coulomb_potential(shifted, k);
  double worst = 0.0;
  for (int kk = 0; kk < 32; ++kk)
    for (int j = 0; j < 32; ++j)
      for (int i = 1; i < 32; ++i)
        worst = std::max(worst, std::abs(vs.at(i, j, kk) - v.at(i - 1, j, kk)));
  CHECK(worst < 1e-12 * v.max_abs());
}

TEST_CASE("sub-box potential agrees with the full grid") {
  Grid g(40, 1.0);
  CoulombKernel k(g);
  auto u = random_blob(g, 2, 12);
  const auto full = coulomb_potential(u, k);
  const Box box = support_box(u);
  const auto part = coulomb_potential(u, k, box);
  for (int kk = box.lo[2]; kk < box.hi[2]; ++kk)
    for (int j = box.lo[1]; j < box.hi[1]; ++j)
      for (int i = box.lo[0]; i < box.hi[0]; ++i)
        CHECK(part.at(i, j, kk) == doctest::Approx(full.at(i, j, kk)).epsilon(1e-10));
}

TEST_CASE("direct summation oracle on a coarse grid") {
  Grid g(10, 1.0);
  CoulombKernel k(g);
  auto u = random_blob(g, 5, 1);
  const auto v = coulomb_potential(u, k);
  const double h3 = g.cell_volume();
  const double h = g.h();
  for (std::size_t a = 0; a < g.size(); a += 37) {
    const auto pa = g.point(a);
    double s = 0.0;
    for (std::size_t b = 0; b < g.size(); ++b) {
      const auto pb = g.point(b);
      const double r = std::hypot(pa[0] - pb[0], pa[1] - pb[1], pa[2] - pb[2]);
      s += u[b] * (a == b ? self_cell_constant() / h * h3 : h3 / r);
    }
    CHECK(v[a] == doctest::Approx(s).epsilon(1e-11));
  }
}

TEST_CASE("bilinear form properties") {
  Grid g(24, 1.0);
  for (KernelMode mode : {KernelMode::tabulated, KernelMode::spectral}) {
    CoulombKernel k(g, mode);
    for (unsigned seed = 1; seed <= 4; ++seed) {
      const auto f = random_blob(g, seed, 3);
      const auto h = random_blob(g, seed + 100, 5);
      const double fh = coulomb_pairing(f, h, k), hf = coulomb_pairing(h, f, k);
      CHECK(std::abs(fh - hf) <= 1e-10 * (1.0 + std::abs(fh)));
      const double dff = coulomb_energy(f, k), dhh = coulomb_energy(h, k);
      CHECK(dff >= -1e-10);
      const auto mid = 0.5 * (f + h);
      CHECK(coulomb_energy(mid, k) < 0.5 * dff + 0.5 * dhh);
    }
  }
}

TEST_CASE("continuity in L2") {
  Grid g(24, 1.0);
  CoulombKernel k(g);
  const auto u = random_blob(g, 9, 4);
  const auto d = random_blob(g, 10, 4);
  const double base = coulomb_energy(u, k);
  const double dd = coulomb_energy(d, k);
  // Cauchy-Schwarz for the positive form gives a first-order bound
  const double slope = 2.0 * std::sqrt(base * dd) + dd;
  double prev = 1e300;
  for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double change = std::abs(coulomb_energy(u + t * d, k) - base);
    CHECK(change <= slope * t * (1 + 1e-9));
    CHECK(change < prev);
    prev = change;
  }
}

TEST_CASE("scaling law") {
  // u_t(y) = t^{-3/2} u(y / t) has D(u_t, u_t) = t^2 D(u, u)
  Grid g(96, 2.0);
  CoulombKernel k(g);
  auto gauss = [](double t) {
    return [t](const Vec3& x) {
      const double r2 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (t * t);
      return std::pow(t, -1.5) * std::exp(-r2 / (2 * 0.15));
    };
  };
  const double d1 = coulomb_energy(ScalarField::sample(g, gauss(1.0)), k);
  for (double t : {0.5, 0.75}) {
    const double dt = coulomb_energy(ScalarField::sample(g, gauss(t)), k);
    CHECK(std::abs(dt / (t * t * d1) - 1.0) < 0.01);
  }
}
