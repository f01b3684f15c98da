#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "coulomb_lab/ground_state.hpp"
#include "coulomb_lab/radial.hpp"
#include "coulomb_lab/shapes.hpp"

using namespace clab;

TEST_CASE("ball at q = 0 matches the radial eigenvalue") {
  Grid g(96, 1.5);
  const auto mask = shapes::mask(g, shapes::ball({0, 0, 0}, 1.0));
  const auto t0 = std::chrono::steady_clock::now();
  const auto gs = solve_ground_state(mask, 0.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("lambda = " << gs.lambda << " in " << gs.iterations << " iterations, " << secs << " s");
  CHECK(std::abs(gs.lambda / radial::dirichlet_eigen_ball().lambda - 1.0) < 0.02);
  CHECK(l2_norm(gs.u) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(gs.lambda - gs.dirichlet) <= 1e-8 * gs.lambda);
  CHECK(gs.residual <= 1e-6 * gs.lambda);
  CHECK(el_residual(gs, mask, 0.0) <= gs.residual * (1 + 1e-9));
  std::size_t leaks = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!mask.inside(i) && gs.u[i] != 0.0) ++leaks;
  CHECK(leaks == 0);
  // Rayleigh-Ritz never increases the energy
  for (std::size_t k = 1; k < gs.history.size(); ++k)
    CHECK(gs.history[k] <= gs.history[k - 1] * (1 + 1e-12));
}

TEST_CASE("ball at q = 0.05 matches the radial ground state") {
  Grid g(64, 1.5);
  const auto mask = shapes::mask(g, shapes::ball({0, 0, 0}, 1.0));
  const double q = 0.05;
  const auto gs = solve_ground_state(mask, q);
  const auto ref = radial::ball_ground_state(q);
  CHECK(std::abs(gs.lambda / ref.energy - 1.0) < 0.02);
  CHECK(std::abs(gs.lambda - (gs.dirichlet + 0.5 * q * gs.coulomb)) <= 1e-8 * gs.lambda);
  CHECK(gs.lambda >= dirichlet_eigenvalue(mask) - 1e-9);
}

TEST_CASE("cube of side 1") {
  // faces on cell centers keep the box boundary exact
  Grid g(65, 65.0 / 64.0);
  std::vector<std::uint8_t> inside(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.point(i);
    inside[i] = std::abs(x[0]) < 0.5 - 1e-9 && std::abs(x[1]) < 0.5 - 1e-9 &&
                std::abs(x[2]) < 0.5 - 1e-9;
  }
  std::vector<double> level(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.point(i);
    level[i] = std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])}) - 0.5;
  }
  const auto mask = DomainMask::from_level(g, level);
  const auto gs = solve_ground_state(mask, 0.0);
  CHECK(std::abs(gs.lambda / (3 * kPi * kPi) - 1.0) < 0.02);
}

TEST_CASE("residual study and minimality of the converged state") {
  const auto eig = radial::dirichlet_eigen_ball();
  double prev = 1e300;
  for (int n : {32, 64}) {
    Grid g(n, 1.5);
    const auto mask = shapes::mask(g, shapes::ball({0, 0, 0}, 1.0));
    auto u = restrict_to(radial::sample(eig.profile, g), mask);
    u *= 1.0 / l2_norm(u);
    const double r = el_residual(u, eig.lambda, mask, 0.0);
    CHECK(r < prev);
    prev = r;
  }
  Grid g(40, 1.5);
  const auto mask = shapes::mask(g, shapes::ball({0, 0, 0}, 1.0));
  const auto gs = solve_ground_state(mask, 0.1);
  auto bumped = gs.u;
  std::uint64_t state = 7;
  for (const std::size_t idx : mask.cells()) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    bumped[idx] += 0.1 * (double(state >> 11) / double(1ULL << 53) - 0.5);
  }
  CHECK(el_residual(bumped, gs.lambda, mask, 0.1) > el_residual(gs, mask, 0.1));
}

TEST_CASE("nested masks, random start and determinism") {
  Grid g(40, 1.5);
  const auto small = shapes::mask(g, shapes::ball({0, 0, 0}, 0.8));
  const auto big = shapes::mask(g, shapes::ball({0, 0, 0}, 1.0));
  const double q = 0.2;
  const auto es = solve_ground_state(small, q).lambda;
  const auto eb = solve_ground_state(big, q).lambda;
  CHECK(eb <= es * (1 + 1e-3));

  GroundStateOptions opts;
  opts.random_start = true;
  opts.seed = 5;
  const auto a = solve_ground_state(big, q, opts);
  const auto b = solve_ground_state(big, q, opts);
  CHECK(a.lambda == b.lambda);
  CHECK(std::equal(a.u.values().begin(), a.u.values().end(), b.u.values().begin()));
  CHECK(a.lambda == doctest::Approx(eb).epsilon(1e-6));
  CHECK_THROWS_AS(solve_ground_state(DomainMask::from_inside(g, std::vector<std::uint8_t>(g.size(), 0)), q),
                  GeometryError);
}

TEST_CASE("L-infinity bounds along a q sweep") {
  Grid g(40, 2.0);
  const auto mask = shapes::mask(g, shapes::make(shapes::Ellipsoid{}));
  CoulombKernel k(g);
  for (double q : {0.0, 0.25, 0.5, 1.0}) {
    const auto gs = solve_ground_state(mask, q);
    CHECK(gs.u.max_abs() < 3.0);
    CHECK(coulomb_potential(gs.u, k).max_abs() < 10.0);
    CHECK(gs.u.min() >= -1e-12);
  }
}
