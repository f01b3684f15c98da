#include "coulomb_lab/shapes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "coulomb_lab/level_set.hpp"

namespace clab::shapes {
namespace {

double norm(const Vec3& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

// Scales about the origin to volume |B_1|.
Sdf normalize(Sdf f, double volume) {
  return dilate(std::move(f), std::cbrt(kUnitBallVolume / volume));
}

std::vector<double> parse_args(const std::string& body, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw UsageError("");
    } catch (const std::exception&) {
      throw UsageError("bad number in shape '" + text + "'");
    }
  }
  return out;
}

}  // namespace

Sdf ball(const Vec3& center, double radius) {
  return [=](const Vec3& x) { return norm(sub(x, center)) - radius; };
}

Sdf ellipsoid(const Vec3& center, const Vec3& semi_axes) {
  const double m = std::min({semi_axes[0], semi_axes[1], semi_axes[2]});
  return [=](const Vec3& x) {
    const Vec3 d = sub(x, center);
    const Vec3 y{d[0] / semi_axes[0], d[1] / semi_axes[1], d[2] / semi_axes[2]};
    return (norm(y) - 1.0) * m;
  };
}

Sdf cube(const Vec3& center, double side) {
  return [=](const Vec3& x) {
    const Vec3 d = sub(x, center);
    const Vec3 q{std::abs(d[0]) - side / 2, std::abs(d[1]) - side / 2, std::abs(d[2]) - side / 2};
    const Vec3 pos{std::max(q[0], 0.0), std::max(q[1], 0.0), std::max(q[2], 0.0)};
    return norm(pos) + std::min(std::max({q[0], q[1], q[2]}), 0.0);
  };
}

Sdf capsule(const Vec3& a, const Vec3& b, double radius) {
  return [=](const Vec3& x) {
    const Vec3 ab = sub(b, a), ax = sub(x, a);
    const double len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    double t = len2 > 0 ? (ax[0] * ab[0] + ax[1] * ab[1] + ax[2] * ab[2]) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec3 p{a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]};
    return norm(sub(x, p)) - radius;
  };
}

Sdf unite(Sdf a, Sdf b) {
  return [a = std::move(a), b = std::move(b)](const Vec3& x) { return std::min(a(x), b(x)); };
}

Sdf dilate(Sdf f, double s, const Vec3& center) {
  return [f = std::move(f), s, center](const Vec3& x) {
    const Vec3 y{center[0] + (x[0] - center[0]) / s, center[1] + (x[1] - center[1]) / s,
                 center[2] + (x[2] - center[2]) / s};
    return s * f(y);
  };
}

Sdf translate(Sdf f, const Vec3& shift) {
  return [f = std::move(f), shift](const Vec3& x) { return f(sub(x, shift)); };
}

double volume_of(const Sdf& f, double half_width, int samples) {
  const double d = 2.0 * half_width / samples;
  std::size_t count = 0;
  for (int k = 0; k < samples; ++k)
    for (int j = 0; j < samples; ++j)
      for (int i = 0; i < samples; ++i) {
        const Vec3 x{-half_width + (i + 0.5) * d, -half_width + (j + 0.5) * d,
                     -half_width + (k + 0.5) * d};
        if (f(x) < 0.0) ++count;
      }
  return static_cast<double>(count) * d * d * d;
}

Sdf make(const Preset& preset) {
  struct Visitor {
    Sdf operator()(const Ball&) const { return ball({0, 0, 0}, 1.0); }
    Sdf operator()(const Ellipsoid& e) const {
      const double s = std::cbrt(1.0 / (e.a * e.b * e.c));
      return ellipsoid({0, 0, 0}, {e.a * s, e.b * s, e.c * s});
    }
    Sdf operator()(const Dumbbell& d) const {
      if (d.bulb <= 0 || d.neck <= 0 || d.length < 0 || d.ratio < 0)
        throw UsageError("dumbbell parameters must be positive");
      const double x1 = d.length / 2 + d.bulb;
      Sdf f = ball({x1, 0, 0}, d.bulb);
      double xmin;
      if (d.ratio > 0) {
        const double r2 = d.ratio * d.bulb;
        const double x2 = -(d.length / 2 + r2);
        f = unite(std::move(f), ball({x2, 0, 0}, r2));
        f = unite(std::move(f), capsule({x2, 0, 0}, {x1, 0, 0}, d.neck));
        xmin = x2 - std::max(r2, d.neck);
      } else {
        f = unite(std::move(f), capsule({-d.length / 2, 0, 0}, {x1, 0, 0}, d.neck));
        xmin = -d.length / 2 - d.neck;
      }
      const double xmax = x1 + d.bulb;
      const double shift = -(xmin + xmax) / 2;
      f = translate(std::move(f), {shift, 0, 0});
      const double hw = (xmax - xmin) / 2 + 0.05;
      return normalize(f, volume_of(f, hw, 256));
    }
    Sdf operator()(const TwoBalls& t) const {
      if (t.gap < 0 || t.ratio <= 0) throw UsageError("two_balls parameters must be positive");
      const double c1 = t.gap / 2 + 1.0, c2 = -(t.gap / 2 + t.ratio);
      const double shift = -((c1 + 1.0) + (c2 - t.ratio)) / 2;
      Sdf f = unite(ball({c1 + shift, 0, 0}, 1.0), ball({c2 + shift, 0, 0}, t.ratio));
      const double volume = kUnitBallVolume * (1.0 + t.ratio * t.ratio * t.ratio);
      return normalize(std::move(f), volume);
    }
    Sdf operator()(const Cube& c) const { return cube({0, 0, 0}, c.side); }
  };
  return std::visit(Visitor{}, preset);
}

std::string describe(const Preset& preset) {
  struct Visitor {
    std::string operator()(const Ball&) const { return "ball"; }
    std::string operator()(const Ellipsoid& e) const {
      std::ostringstream os;
      os << "ellipsoid(" << e.a << "," << e.b << "," << e.c << ")";
      return os.str();
    }
    std::string operator()(const Dumbbell& d) const {
      std::ostringstream os;
      os << "dumbbell(" << d.bulb << "," << d.neck << "," << d.length << "," << d.ratio << ")";
      return os.str();
    }
    std::string operator()(const TwoBalls& t) const {
      std::ostringstream os;
      os << "two_balls(" << t.gap << "," << t.ratio << ")";
      return os.str();
    }
    std::string operator()(const Cube& c) const {
      std::ostringstream os;
      os << "cube(" << c.side << ")";
      return os.str();
    }
  };
  return std::visit(Visitor{}, preset);
}

Preset parse(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c)))
      s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto open = s.find('(');
  const std::string name = s.substr(0, open);
  std::vector<double> args;
  if (open != std::string::npos) {
    if (s.back() != ')') throw UsageError("missing ')' in shape '" + text + "'");
    args = parse_args(s.substr(open + 1, s.size() - open - 2), text);
  }
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi)
      throw UsageError("wrong number of arguments in shape '" + text + "'");
  };
  if (name == "ball") {
    need(0, 0);
    return Ball{};
  }
  if (name == "ellipsoid") {
    if (args.empty()) return Ellipsoid{};
    need(3, 3);
    if (args[0] <= 0 || args[1] <= 0 || args[2] <= 0)
      throw UsageError("ellipsoid axes must be positive");
    return Ellipsoid{args[0], args[1], args[2]};
  }
  if (name == "dumbbell") {
    if (args.empty()) return Dumbbell{};
    need(3, 4);
    Dumbbell d{args[0], args[1], args[2]};
    if (args.size() == 4) d.ratio = args[3];
    return d;
  }
  if (name == "two_balls") {
    if (args.empty()) return TwoBalls{};
    need(1, 2);
    TwoBalls t{args[0]};
    if (args.size() == 2) t.ratio = args[1];
    return t;
  }
  if (name == "cube") {
    if (args.empty()) return Cube{};
    need(1, 1);
    if (args[0] <= 0) throw UsageError("cube side must be positive");
    return Cube{args[0]};
  }
  throw UsageError("unknown shape '" + text + "'");
}

DomainMask mask(const Grid& grid, const Sdf& f) { return DomainMask::from_level_set(grid, f); }

ScalarField bump(const DomainMask& mask) {
  const auto sd = level_set::signed_distance(mask.grid(), mask.inside_flags());
  ScalarField out(mask.grid());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask.inside(i)) out[i] = -sd[i];
  return out;
}

}  // namespace clab::shapes
