#pragma once

// Analytic shapes as signed distance functions (negative inside) and the
// volume-normalized presets used by the experiments.

#include <functional>
#include <string>
#include <variant>

#include "coulomb_lab/field.hpp"
#include "coulomb_lab/mask.hpp"

namespace clab::shapes {

using Sdf = std::function<double(const Vec3&)>;

Sdf ball(const Vec3& center, double radius);
/// Scaled implicit function; exact distance only for spheres.
Sdf ellipsoid(const Vec3& center, const Vec3& semi_axes);
/// Axis-aligned cube of the given side.
Sdf cube(const Vec3& center, double side);
Sdf capsule(const Vec3& a, const Vec3& b, double radius);
Sdf unite(Sdf a, Sdf b);
/// Dilation about `center` by factor s.
Sdf dilate(Sdf f, double s, const Vec3& center = {0, 0, 0});
Sdf translate(Sdf f, const Vec3& shift);

/// Volume of {f < 0} inside the cube [-half_width, half_width]^3 by
/// midpoint counting on samples^3 points.
double volume_of(const Sdf& f, double half_width, int samples = 192);

struct Ball {};
struct Ellipsoid {
  double a = 1.2, b = 1.0, c = 1.0 / 1.2;
};
/// Main bulb of radius `bulb` at the +x end, a capsule neck of radius
/// `neck` running `length` along -x, optionally ending in a second bulb of
/// radius ratio*bulb. ratio = 0 gives a bulb with a thin tail.
struct Dumbbell {
  double bulb = 1.0, neck = 0.3, length = 0.8, ratio = 0.8;
};
/// Two balls with radii 1 and `ratio`, surfaces `gap` apart along x.
struct TwoBalls {
  double gap = 0.6, ratio = 0.8;
};
struct Cube {
  double side = 1.0;
};

using Preset = std::variant<Ball, Ellipsoid, Dumbbell, TwoBalls, Cube>;

/// Signed distance of the preset. Every preset except Cube is dilated about
/// the origin to volume |B_1|.
Sdf make(const Preset& preset);
std::string describe(const Preset& preset);
/// Parses "ball", "ellipsoid(1.2,1,0.8333)", "dumbbell(1,0.3,0.8[,0.8])",
/// "two_balls(0.6[,0.8])", "cube(1)". Throws UsageError.
Preset parse(const std::string& text);

DomainMask mask(const Grid& grid, const Sdf& f);

/// Positive bump vanishing outside the mask: distance to the boundary
/// (clamped to the interior), evaluated from the level function.
ScalarField bump(const DomainMask& mask);

}  // namespace clab::shapes
