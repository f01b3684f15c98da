#include <doctest.h>

#include <cmath>

#include "coulomb_lab/diagnostics.hpp"
#include "coulomb_lab/ground_state.hpp"
#include "coulomb_lab/radial.hpp"
#include "coulomb_lab/surgery.hpp"

using namespace clab;
using namespace clab::surgery;

TEST_CASE("slice profiles of the unit ball") {
  Grid g(96, 1.5);
  const auto ball = shapes::mask(g, shapes::ball({0, 0, 0}, 1.0));
  const auto u = restrict_to(radial::sample(radial::dirichlet_eigen_ball().profile, g), ball);
  const auto p = slice_profiles(ball, u, 1);
  const double h = g.h();
  for (std::size_t s = 0; s < p.t.size(); ++s) {
    const double t = p.t[s];
    if (std::abs(t) <= 0.8) CHECK(p.eps[s] == doctest::Approx(kPi * (1 - t * t)).epsilon(0.03));
    if (std::abs(t) > 1.0 + h) {
      CHECK(p.eps[s] == 0.0);
      CHECK(p.delta[s] == 0.0);
      CHECK(p.mu[s] == 0.0);
    }
    CHECK(p.eps[s] >= 0.0);
    CHECK(p.delta[s] >= 0.0);
    CHECK(p.mu[s] >= 0.0);
    if (s > 0) {
      CHECK(p.m[s] >= p.m[s - 1]);
      // m' = eps by the trapezoid rule between slice centers
      CHECK(std::abs((p.m[s] - p.m[s - 1]) / h - 0.5 * (p.eps[s] + p.eps[s - 1])) <= 1e-12);
    }
  }
  // t = 0 sits between the two middle slices
  const std::size_t mid = p.index_of(0.0);
  CHECK(std::abs(p.t[mid]) == doctest::Approx(h / 2));
  const double m0 = 0.5 * (p.m[g.n() / 2 - 1] + p.m[g.n() / 2]);
  CHECK(m0 == doctest::Approx(2 * kPi / 3).epsilon(0.03));

  double sd = 0.0, smu = 0.0;
  for (std::size_t s = 0; s < p.t.size(); ++s) {
    sd += h * p.delta[s];
    smu += h * p.mu[s];
  }
  CHECK(sd == doctest::Approx(dirichlet_energy(u)).epsilon(1e-12));
  CHECK(smu == doctest::Approx(inner(u, u)).epsilon(1e-12));

  // other axes see the same ball
  const auto pz = slice_profiles(ball, u, 3);
  for (std::size_t s = 0; s < p.t.size(); ++s) CHECK(pz.eps[s] == doctest::Approx(p.eps[s]));
  CHECK_THROWS_AS(slice_profiles(ball, u, 0), UsageError);
  CHECK_THROWS_AS(slice_profiles(ball, u, 4), UsageError);
}

TEST_CASE("cylinder graft") {
  Grid g(64, 2.5);
  const double q = 0.01;
  for (const auto& preset : tail_family()) {
    const auto mask = shapes::mask(g, shapes::make(preset));
    const auto gs = solve_ground_state(mask, q);
    const auto prof = slice_profiles(mask, gs.u, 1);
    const std::size_t s = prof.index_of(-1.2);
    REQUIRE(prof.eps[s] > 0.0);
    const auto tr = build_truncation(mask, gs.u, 1, prof.t[s]);
    CHECK(tr.sigma == doctest::Approx(std::sqrt(prof.eps[s])));
    const double base = std::sqrt(prof.eps[s]) * prof.delta[s];
    const double c2g = tr.graft_dirichlet / base;
    const double c2m = tr.graft_mass / (prof.eps[s] * base);
    MESSAGE(shapes::describe(preset) << ": C2 " << c2g << ", " << c2m);
    CHECK(std::isfinite(c2g));
    CHECK(std::isfinite(c2m));
    CHECK(c2g > 0.0);

    // above the cut nothing changes; below it only the graft remains
    std::size_t changed = 0, below = 0;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const double x = g.point(idx)[0];
      if (x > tr.t + 1e-12) {
        changed += tr.mask.inside(idx) != mask.inside(idx) || tr.u[idx] != gs.u[idx];
      } else if (tr.mask.inside(idx)) {
        CHECK(x > tr.t - tr.sigma - 1e-12);
        ++below;
      } else {
        CHECK(tr.u[idx] == 0.0);
      }
    }
    CHECK(changed == 0);
    CHECK(below > 0);
    // only the part below the cut is replaced, by a cylinder of volume eps sigma
    CHECK(std::abs(tr.mask.volume() - mask.volume()) <=
          prof.m[s] + prof.eps[s] * tr.sigma + 1e-2 * mask.volume());
  }

  // a cut below the whole shape keeps it; an empty slice with cells below fails
  const auto mask = shapes::mask(g, shapes::make(tail_preset()));
  const auto u = shapes::bump(mask);
  const auto same = build_truncation(mask, u, 1, -2.4);
  CHECK(same.sigma == 0.0);
  CHECK(same.mask.count() == mask.count());
  const auto two = shapes::mask(
      g, shapes::unite(shapes::ball({-1.5, 0, 0}, 0.5), shapes::ball({1.0, 0, 0}, 0.8)));
  CHECK_THROWS_AS(build_truncation(two, shapes::bump(two), 1, -0.5), GeometryError);
}

TEST_CASE("volume rescaling") {
  Grid g(64, 2.0);
  const auto unit = shapes::mask(g, shapes::ball({0, 0, 0}, 1.0));
  const auto gu = solve_ground_state(unit, 0.0);
  const auto same = rescale_competitor(unit, gu.u);
  CHECK(same.scale == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(l2_norm(same.u - gu.u) < 0.02);

  const auto small = shapes::mask(g, shapes::ball({0.1, 0, 0}, 0.8));
  const auto gs = solve_ground_state(small, 0.0);
  const auto r = rescale_competitor(small, gs.u);
  const double s = r.scale;
  CHECK(s == doctest::Approx(1.25).epsilon(0.01));
  CHECK(r.mask.volume() == doctest::Approx(kUnitBallVolume).epsilon(0.01));
  CHECK(l2_norm(r.u) == doctest::Approx(l2_norm(gs.u)).epsilon(0.01));
  CHECK(dirichlet_energy(r.u, r.mask) ==
        doctest::Approx(dirichlet_energy(gs.u, small) / (s * s)).epsilon(0.03));
  const CoulombKernel k(g);
  CHECK(coulomb_energy(r.u, k) == doctest::Approx(s * s * coulomb_energy(gs.u, k)).epsilon(0.03));
}

TEST_CASE("trichotomy scan") {
  Grid g(64, 2.5);
  const double q = 0.01;

  SUBCASE("ball") {
    const auto mask = shapes::mask(g, shapes::make(shapes::Ball{}));
    const auto gs = solve_ground_state(mask, q);
    ScanOptions opts;
    opts.t_max = 0.0;
    const auto out = trichotomy_scan(mask, gs.u, q, opts);
    CHECK(!out.empty());
    for (const auto& o : out) {
      CHECK(o.condition != Condition::cond3);
      if (o.m == 0.0) CHECK(o.condition == Condition::cond2);
    }
  }

  SUBCASE("thin tail") {
    const auto mask = shapes::mask(g, shapes::make(tail_preset()));
    const auto gs = solve_ground_state(mask, q);
    const auto out = trichotomy_scan(mask, gs.u, q);
    int found = 0;
    for (const auto& o : out) {
      if (o.condition != Condition::cond3) continue;
      REQUIRE(o.competitor.has_value());
      const auto& c = *o.competitor;
      CHECK(c.energy_after < o.energy_before - 1e-3 * std::abs(o.energy_before));
      CHECK(std::isfinite(c.c_grad));
      CHECK(std::isfinite(c.c_mass));
      CHECK(o.c4_ratio > 2.0);
      ++found;
    }
    CHECK(found >= 1);
  }
}
