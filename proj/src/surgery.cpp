#include "coulomb_lab/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coulomb_lab/diagnostics.hpp"
#include "coulomb_lab/ground_state.hpp"

namespace clab::surgery {

namespace {

int axis_index(int axis) {
  if (axis < 1 || axis > 3) throw UsageError("axis must be 1, 2 or 3");
  return axis - 1;
}

int slice_of(const Grid& g, double t) {
  const int s = static_cast<int>(std::lround((t + g.R()) / g.h() - 0.5));
  return std::clamp(s, 0, g.n() - 1);
}

}  // namespace

std::size_t TailProfile::index_of(double x) const {
  const auto it = std::lower_bound(t.begin(), t.end(), x);
  if (it == t.begin()) return 0;
  if (it == t.end()) return t.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - t.begin());
  return (x - t[hi - 1] <= t[hi] - x) ? hi - 1 : hi;
}

TailProfile slice_profiles(const DomainMask& mask, const ScalarField& u, int axis) {
  const int a = axis_index(axis);
  require_same_grid(mask.grid(), u.grid());
  const Grid& g = mask.grid();
  const int n = g.n();
  const double h = g.h(), h2 = h * h;

  TailProfile p;
  p.axis = axis;
  p.t.resize(n);
  for (int s = 0; s < n; ++s) p.t[s] = g.coord(s);
  p.eps.assign(n, 0.0);
  p.delta.assign(n, 0.0);
  p.delta_tangential.assign(n, 0.0);
  p.mu.assign(n, 0.0);
  p.m.assign(n, 0.0);

  auto value = [&](std::array<int, 3> c) {
    for (int b = 0; b < 3; ++b)
      if (c[b] < 0 || c[b] >= n) return 0.0;
    return u[g.index(c[0], c[1], c[2])];
  };
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::array<int, 3> c{i, j, k};
        const int s = c[a];
        const double ui = u[g.index(i, j, k)];
        if (mask.inside(g.index(i, j, k))) p.eps[s] += h2;
        p.mu[s] += h2 * ui * ui;
        for (int b = 0; b < 3; ++b) {
          auto up = c, dn = c;
          ++up[b];
          --dn[b];
          const double f = (value(up) - ui) / h;
          const double r = (ui - value(dn)) / h;
          const double g2 = 0.5 * h2 * (f * f + r * r);
          p.delta[s] += g2;
          if (b != a) p.delta_tangential[s] += g2;
        }
      }
  double below = 0.0;
  for (int s = 0; s < n; ++s) {
    p.m[s] = h * (below + 0.5 * p.eps[s]);
    below += p.eps[s];
  }
  return p;
}

Truncation build_truncation(const DomainMask& mask, const ScalarField& u, int axis, double t) {
  const int a = axis_index(axis);
  require_same_grid(mask.grid(), u.grid());
  const Grid& g = mask.grid();
  const int n = g.n();
  const int js = slice_of(g, t);
  const double tc = g.coord(js);

  std::size_t count = 0;
  std::vector<double> cross(static_cast<std::size_t>(n) * n);  // level on the cut slice
  std::vector<double> cross_u(cross.size());
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      std::array<int, 3> c{};
      c[a] = js;
      c[(a + 1) % 3] = x;
      c[(a + 2) % 3] = y;
      const std::size_t idx = g.index(c[0], c[1], c[2]);
      cross[x + static_cast<std::size_t>(n) * y] = mask.level()[idx];
      cross_u[x + static_cast<std::size_t>(n) * y] = mask.inside(idx) ? u[idx] : 0.0;
      count += mask.inside(idx);
    }
  if (count == 0) {
    bool below = false;
    for (std::size_t idx : mask.cells()) below = below || g.unravel(idx)[a] <= js;
    if (below) throw GeometryError("empty slice at t = " + std::to_string(tc));
    // nothing at or below the cut: the shape is kept as it is
    return Truncation{mask, restrict_to(u, mask), tc, 0.0, 0.0, 0.0};
  }
  const double eps = g.h() * g.h() * static_cast<double>(count);
  const double sigma = std::sqrt(eps);

  std::vector<double> level(mask.level().begin(), mask.level().end());
  std::vector<double> taper(g.size(), 0.0);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto c = g.unravel(idx);
    if (c[a] > js) {
      taper[idx] = mask.inside(idx) ? u[idx] : 0.0;
      continue;
    }
    const std::size_t p = c[(a + 1) % 3] + static_cast<std::size_t>(n) * c[(a + 2) % 3];
    const double x = g.coord(c[a]);
    level[idx] = std::max(cross[p], (tc - sigma) - x);
    taper[idx] = std::clamp((x - tc + sigma) / sigma, 0.0, 1.0) * cross_u[p];
  }
  DomainMask tilde = DomainMask::from_level(g, std::move(level));
  ScalarField ut = restrict_to(ScalarField(g, std::move(taper)), tilde);

  const TailProfile prof = slice_profiles(mask, u, axis);
  const double mu = prof.mu[js], dt = prof.delta_tangential[js];
  return Truncation{std::move(tilde), std::move(ut), tc, sigma,
                    mu / sigma + sigma * dt / 3.0, sigma * mu / 3.0};
}

Rescaled rescale_competitor(const DomainMask& mask, const ScalarField& u) {
  require_same_grid(mask.grid(), u.grid());
  if (mask.empty()) throw GeometryError("cannot rescale an empty shape");
  const Grid& g = mask.grid();
  const double s = std::cbrt(kUnitBallVolume / mask.volume());
  const Vec3 c = barycenter(mask);
  const ScalarField lf = mask.level_field();
  const double edge = g.R() - 0.5 * g.h();

  std::vector<double> level(g.size());
  ScalarField uh(g);
  const double amp = std::pow(s, -1.5);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Vec3 x = g.point(idx);
    Vec3 p;
    bool inside_box = true;
    for (int a = 0; a < 3; ++a) {
      p[a] = c[a] + (x[a] - c[a]) / s;
      inside_box = inside_box && std::abs(p[a]) <= edge;
    }
    level[idx] = inside_box ? s * sample_trilinear(lf, p) : g.R();
    uh[idx] = inside_box ? amp * sample_trilinear(u, p) : 0.0;
  }
  DomainMask hat = DomainMask::from_level(g, std::move(level));
  return Rescaled{hat, restrict_to(uh, hat), s};
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::cond1: return "COND1";
    case Condition::cond2: return "COND2";
    case Condition::cond3: return "COND3";
  }
  return "?";
}

std::vector<SurgeryOutcome> trichotomy_scan(const DomainMask& mask, const ScalarField& u,
                                            double q, const ScanOptions& opts) {
  const TailProfile prof = slice_profiles(mask, u, opts.axis);
  const CoulombKernel kernel(mask.grid(), opts.kernel);
  const double dirichlet = dirichlet_energy(u, mask);
  const double before = dirichlet + (q > 0.0 ? 0.5 * q * coulomb_energy(u, kernel) : 0.0);

  std::vector<SurgeryOutcome> out;
  for (std::size_t s = 0; s < prof.t.size(); ++s) {
    if (prof.t[s] > opts.t_max) break;
    const double eps = prof.eps[s], delta = prof.delta[s], m = prof.m[s];
    SurgeryOutcome o{prof.t[s], eps, delta, prof.mu[s], m, Condition::cond2, 0.0, before, {}};
    const double scale = (eps + delta) * std::sqrt(eps);
    o.c4_ratio = scale > 0.0 ? m / scale : (m > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (eps == 0.0) {
      if (m > 0.0) continue;
      out.push_back(o);
      continue;
    }
    if (std::max(eps, delta) > 1.0) {
      o.condition = Condition::cond1;
    } else if (m <= opts.c4_ref * scale) {
      o.condition = Condition::cond2;
    } else {
      o.condition = Condition::cond3;
      const Truncation tr = build_truncation(mask, u, opts.axis, prof.t[s]);
      const Rescaled rs = rescale_competitor(tr.mask, tr.u);
      GroundStateOptions gopts;
      gopts.tol = opts.ground_tol;
      gopts.kernel = opts.kernel;
      gopts.initial = rs.u;
      const GroundState gs = solve_ground_state(rs.mask, q, gopts);

      Competitor c{};
      c.sigma = tr.sigma;
      c.tilde_volume = tr.mask.volume();
      c.hat_dirichlet = dirichlet_energy(rs.u, rs.mask);
      c.hat_coulomb = coulomb_energy(rs.u, kernel);
      c.rayleigh_hat = c.hat_dirichlet / inner(rs.u, rs.u);
      c.energy_after = gs.lambda;
      c.decreased = gs.lambda < before;
      const double base = std::sqrt(eps) * delta;
      c.c_grad = (dirichlet_energy(tr.u, tr.mask) - dirichlet) / base;
      c.c_mass = (inner(u, u) - inner(tr.u, tr.u)) / (base + q * m);
      c.c2_grad = tr.graft_dirichlet / base;
      c.c2_mass = tr.graft_mass / (eps * base);
      o.competitor = c;
    }
    out.push_back(o);
  }
  return out;
}

shapes::Dumbbell tail_preset() { return {1.0, 0.2, 1.6, 0.0}; }

std::vector<shapes::Dumbbell> tail_family() {
  return {{1.0, 0.2, 1.6, 0.0}, {1.0, 0.25, 1.4, 0.0}, {1.0, 0.3, 1.2, 0.0}};
}

}  // namespace clab::surgery
