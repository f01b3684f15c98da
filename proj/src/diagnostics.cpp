#include "coulomb_lab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <json.hpp>

#include "coulomb_lab/ground_state.hpp"

namespace clab {

namespace {

double dist(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double ball_radius(double volume) { return std::cbrt(volume / kUnitBallVolume); }

void require_nonempty(const DomainMask& mask) {
  if (mask.empty()) throw GeometryError("mask is empty");
}

}  // namespace

Vec3 barycenter(const DomainMask& mask) {
  require_nonempty(mask);
  Vec3 c{0, 0, 0};
  for (std::size_t idx : mask.cells()) {
    const Vec3 p = mask.grid().point(idx);
    for (int a = 0; a < 3; ++a) c[a] += p[a];
  }
  for (int a = 0; a < 3; ++a) c[a] /= static_cast<double>(mask.count());
  return c;
}

Components components(const DomainMask& mask) {
  const Grid& g = mask.grid();
  const int n = g.n();
  Components out;
  out.label.assign(g.size(), -1);
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < g.size(); ++seed) {
    if (!mask.inside(seed) || out.label[seed] >= 0) continue;
    const int id = out.count();
    out.sizes.push_back(0);
    out.label[seed] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      ++out.sizes[id];
      const auto c = g.unravel(idx);
      for (int a = 0; a < 3; ++a)
        for (int s : {-1, 1}) {
          auto d = c;
          d[a] += s;
          if (d[a] < 0 || d[a] >= n) continue;
          const std::size_t nb = g.index(d[0], d[1], d[2]);
          if (mask.inside(nb) && out.label[nb] < 0) {
            out.label[nb] = id;
            stack.push_back(nb);
          }
        }
    }
  }
  return out;
}

namespace {

// Symmetric difference volume between the mask and the ball (c, r), both
// counted by cell centers.
class SymmetricDifference {
 public:
  explicit SymmetricDifference(const DomainMask& mask)
      : mask_(mask), r_(ball_radius(mask.volume())), cells_(mask.cells()) {}

  double radius() const { return r_; }

  double operator()(const Vec3& c) const {
    const Grid& g = mask_.grid();
    const double h = g.h();
    const int n = g.n();
    std::size_t both = 0;
    for (std::size_t idx : cells_) both += in_ball(g.point(idx), c);
    std::size_t ball = 0;
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, static_cast<int>(std::floor((c[a] - r_ - h + g.R()) / h)));
      hi[a] = std::min(n, static_cast<int>(std::ceil((c[a] + r_ + h + g.R()) / h)) + 1);
    }
    for (int k = lo[2]; k < hi[2]; ++k)
      for (int j = lo[1]; j < hi[1]; ++j)
        for (int i = lo[0]; i < hi[0]; ++i) ball += in_ball(g.point(i, j, k), c);
    return static_cast<double>(cells_.size() + ball - 2 * both) * g.cell_volume();
  }

 private:
  bool in_ball(const Vec3& p, const Vec3& c) const { return dist(p, c) < r_; }

  const DomainMask& mask_;
  double r_;
  std::vector<std::size_t> cells_;
};

}  // namespace

Asymmetry fraenkel_asymmetry(const DomainMask& mask) {
  require_nonempty(mask);
  const double h = mask.grid().h();
  const SymmetricDifference sd(mask);

  std::vector<Vec3> starts;
  const Vec3 bc = barycenter(mask);
  starts.push_back(bc);
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) starts.push_back({bc[0] + sx * h, bc[1] + sy * h, bc[2] + sz * h});
  // disconnected shapes: the barycenter may sit between the pieces
  const Components comp = components(mask);
  if (comp.count() > 1) {
    std::vector<int> order(comp.count());
    for (int i = 0; i < comp.count(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return comp.sizes[a] > comp.sizes[b]; });
    order.resize(std::min<std::size_t>(order.size(), 4));
    std::vector<Vec3> centers(comp.count(), Vec3{0, 0, 0});
    for (std::size_t idx = 0; idx < comp.label.size(); ++idx) {
      const int l = comp.label[idx];
      if (l < 0) continue;
      const Vec3 p = mask.grid().point(idx);
      for (int a = 0; a < 3; ++a) centers[l][a] += p[a];
    }
    for (int l : order) {
      for (int a = 0; a < 3; ++a) centers[l][a] /= static_cast<double>(comp.sizes[l]);
      starts.push_back(centers[l]);
    }
  }

  Asymmetry best{std::numeric_limits<double>::infinity(), bc};
  for (const Vec3& s : starts) {
    Vec3 c = s;
    double val = sd(c);
    for (double step = 4.0 * h; step >= 0.25 * h - 1e-12; step *= 0.5) {
      for (bool improved = true; improved;) {
        improved = false;
        for (int a = 0; a < 3; ++a)
          for (int dir : {-1, 1}) {
            Vec3 t = c;
            t[a] += dir * step;
            const double v = sd(t);
            if (v < val - 1e-14) {
              val = v;
              c = t;
              improved = true;
            }
          }
      }
    }
    if (val < best.value) best = {val, c};
  }
  best.value = std::clamp(best.value / mask.volume(), 0.0, 2.0);
  return best;
}

double fk_deficit(const DomainMask& mask, double tol) {
  require_nonempty(mask);
  const double lambda = dirichlet_eigenvalue(mask, tol);
  return std::pow(mask.volume(), 2.0 / 3.0) * lambda -
         std::pow(kUnitBallVolume, 2.0 / 3.0) * kPi * kPi;
}

std::vector<Vec3> fibonacci_sphere(int count) {
  std::vector<Vec3> out(count);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double t = golden * i;
    out[i] = {rho * std::cos(t), rho * std::sin(t), z};
  }
  return out;
}

namespace {

// level < 0 inside
RadialGraph radial_graph(const Grid& g, const std::function<double(const Vec3&)>& level,
                         const Vec3& center, double volume, int rays) {
  const double h = g.h();
  RadialGraph out;
  out.center = center;
  out.radius = ball_radius(volume);
  out.directions = fibonacci_sphere(rays);
  out.phi.resize(rays);
  if (level(center) >= 0.0) throw GeometryError("barycenter lies outside the shape");

  const double limit = g.R() - 0.5 * h;
  const double step = 0.25 * h;
  for (int r = 0; r < rays; ++r) {
    const Vec3& d = out.directions[r];
    auto at = [&](double t) {
      return level({center[0] + t * d[0], center[1] + t * d[1], center[2] + t * d[2]});
    };
    double tmax = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a)
      if (d[a] != 0.0) tmax = std::min(tmax, ((d[a] > 0 ? limit : -limit) - center[a]) / d[a]);
    double crossing = -1.0;
    int changes = 0;
    double prev_t = 0.0, prev = at(0.0);
    for (double t = step; t <= tmax; t += step) {
      const double cur = at(t);
      if ((prev < 0.0) != (cur < 0.0)) {
        ++changes;
        if (changes == 1) {
          double a = prev_t, b = t;
          for (int it = 0; it < 40; ++it) {
            const double m = 0.5 * (a + b);
            (at(m) < 0.0 ? a : b) = m;
          }
          crossing = 0.5 * (a + b);
        }
      }
      prev = cur;
      prev_t = t;
    }
    if (changes != 1) {
      throw GeometryError("not star-shaped about the barycenter: ray " + std::to_string(r) +
                          " in direction (" + std::to_string(d[0]) + ", " +
                          std::to_string(d[1]) + ", " + std::to_string(d[2]) + ") crosses " +
                          std::to_string(changes) + " times");
    }
    out.phi[r] = crossing - out.radius;
    out.sup = std::max(out.sup, std::abs(out.phi[r]));
  }

  // surface gradient against the six nearest directions
  for (int i = 0; i < rays; ++i) {
    std::vector<std::pair<double, int>> near;
    near.reserve(rays);
    for (int j = 0; j < rays; ++j) {
      if (j == i) continue;
      const auto& a = out.directions[i];
      const auto& b = out.directions[j];
      const double c = std::clamp(a[0] * b[0] + a[1] * b[1] + a[2] * b[2], -1.0, 1.0);
      near.emplace_back(std::acos(c), j);
    }
    std::partial_sort(near.begin(), near.begin() + std::min<std::size_t>(6, near.size()),
                      near.end());
    for (std::size_t k = 0; k < std::min<std::size_t>(6, near.size()); ++k)
      out.grad_sup = std::max(out.grad_sup,
                              std::abs(out.phi[i] - out.phi[near[k].second]) / near[k].first);
  }
  return out;
}

}  // namespace

RadialGraph extract_radial_graph(const DomainMask& mask, int rays) {
  const ScalarField level = mask.level_field();
  return radial_graph(
      mask.grid(), [&](const Vec3& x) { return sample_trilinear(level, x); }, barycenter(mask),
      mask.volume(), rays);
}

RadialGraph extract_radial_graph(const ScalarField& u, double tau, int rays) {
  const DomainMask support = DomainMask::support_of(u, tau);
  require_nonempty(support);
  // restrict to the positive superlevel set
  std::vector<std::uint8_t> inside(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) inside[i] = u[i] > tau;
  const DomainMask mask = DomainMask::from_inside(u.grid(), inside);
  require_nonempty(mask);
  return radial_graph(
      u.grid(), [&](const Vec3& x) { return tau - sample_trilinear(u, x); }, barycenter(mask),
      mask.volume(), rays);
}

double perimeter_estimate(const DomainMask& mask) {
  const Grid& g = mask.grid();
  const int n = g.n();
  std::size_t faces = 0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const bool in = mask.inside(g.index(i, j, k));
        if (i + 1 < n) faces += in != mask.inside(g.index(i + 1, j, k));
        if (j + 1 < n) faces += in != mask.inside(g.index(i, j + 1, k));
        if (k + 1 < n) faces += in != mask.inside(g.index(i, j, k + 1));
      }
  return g.h() * g.h() * static_cast<double>(faces);
}

GradientStats boundary_gradient_stats(const ScalarField& u, const DomainMask& mask) {
  const auto faces = boundary_faces(mask);
  if (faces.empty()) throw GeometryError("mask has no boundary faces");
  const auto grad = boundary_gradient(u, mask, faces);
  double s = 0.0;
  for (double v : grad) s += v;
  const double mean = s / grad.size();
  double var = 0.0;
  for (double v : grad) var += (v - mean) * (v - mean);
  var /= grad.size();
  return {mean, mean != 0.0 ? std::sqrt(var) / std::abs(mean) : 0.0, faces.size()};
}

SignStats sign_stats(const ScalarField& u) {
  double neg = 0.0, total = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = u[i];
    total += v * v;
    if (v < 0.0) neg += v * v;
  }
  return {u.min(), total > 0.0 ? neg / total : 0.0};
}

double hausdorff_to_ball(const DomainMask& mask, const Vec3& center) {
  require_nonempty(mask);
  const auto faces = boundary_faces(mask);
  const double r = ball_radius(mask.volume());
  double d1 = 0.0;
  for (const auto& f : faces) d1 = std::max(d1, std::abs(dist(f.point, center) - r));
  double d2 = 0.0;
  for (const Vec3& d : fibonacci_sphere(2000)) {
    const Vec3 p{center[0] + r * d[0], center[1] + r * d[1], center[2] + r * d[2]};
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : faces) best = std::min(best, dist(f.point, p));
    d2 = std::max(d2, best);
  }
  return std::max(d1, d2);
}

double hausdorff_to_ball(const DomainMask& mask) {
  return hausdorff_to_ball(mask, fraenkel_asymmetry(mask).center);
}

ShapeReport shape_report(const DomainMask& mask, const ScalarField& u, const ReportOptions& opts) {
  require_nonempty(mask);
  require_same_grid(mask.grid(), u.grid());
  ShapeReport rep;
  rep.volume = mask.volume();
  rep.perimeter = perimeter_estimate(mask);
  rep.barycenter = barycenter(mask);
  const Asymmetry a = fraenkel_asymmetry(mask);
  rep.asymmetry = a.value;
  rep.asymmetry_center = a.center;
  if (opts.with_fk_deficit) rep.fk_deficit = fk_deficit(mask, opts.fk_tol);
  try {
    const RadialGraph graph = extract_radial_graph(mask);
    rep.phi_sup = graph.sup;
    rep.phi_grad_sup = graph.grad_sup;
  } catch (const GeometryError&) {
  }
  const SignStats s = sign_stats(u);
  rep.min_u = s.min_u;
  rep.neg_mass_fraction = s.neg_mass_fraction;
  const GradientStats gst = boundary_gradient_stats(u, mask);
  rep.boundary_grad_mean = gst.mean;
  rep.boundary_grad_relstd = gst.relstd;
  rep.hausdorff_to_ball = hausdorff_to_ball(mask, a.center);
  rep.components = components(mask).count();
  return rep;
}

namespace {

using nlohmann::json;

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::string to_json(const ShapeReport& r) {
  json j;
  j["volume"] = r.volume;
  j["perimeter"] = r.perimeter;
  j["barycenter"] = r.barycenter;
  j["asymmetry"] = r.asymmetry;
  j["asymmetry_center"] = r.asymmetry_center;
  j["fk_deficit"] = opt(r.fk_deficit);
  j["phi_sup"] = opt(r.phi_sup);
  j["phi_grad_sup"] = opt(r.phi_grad_sup);
  j["min_u"] = r.min_u;
  j["neg_mass_fraction"] = r.neg_mass_fraction;
  j["boundary_grad_mean"] = r.boundary_grad_mean;
  j["boundary_grad_relstd"] = r.boundary_grad_relstd;
  j["hausdorff_to_ball"] = r.hausdorff_to_ball;
  j["components"] = r.components;
  return j.dump(2);
}

ShapeReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ShapeReport r;
    r.volume = j.at("volume").get<double>();
    r.perimeter = j.at("perimeter").get<double>();
    r.barycenter = j.at("barycenter").get<Vec3>();
    r.asymmetry = j.at("asymmetry").get<double>();
    r.asymmetry_center = j.at("asymmetry_center").get<Vec3>();
    r.fk_deficit = get_opt(j, "fk_deficit");
    r.phi_sup = get_opt(j, "phi_sup");
    r.phi_grad_sup = get_opt(j, "phi_grad_sup");
    r.min_u = j.at("min_u").get<double>();
    r.neg_mass_fraction = j.at("neg_mass_fraction").get<double>();
    r.boundary_grad_mean = j.at("boundary_grad_mean").get<double>();
    r.boundary_grad_relstd = j.at("boundary_grad_relstd").get<double>();
    r.hausdorff_to_ball = j.at("hausdorff_to_ball").get<double>();
    r.components = j.at("components").get<int>();
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed shape report: ") + e.what());
  }
}

}  // namespace clab
