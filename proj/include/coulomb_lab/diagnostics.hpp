#pragma once

// Shape metrics for masks and fields: asymmetry, Faber-Krahn deficit,
// radial graph over the sphere, perimeter, sign and boundary statistics.

#include <optional>
#include <string>
#include <vector>

#include "coulomb_lab/field.hpp"
#include "coulomb_lab/mask.hpp"

namespace clab {

Vec3 barycenter(const DomainMask& mask);

/// 6-connected components of the mask.
struct Components {
  std::vector<int> label;  // -1 outside
  std::vector<std::size_t> sizes;
  int count() const { return static_cast<int>(sizes.size()); }
};
Components components(const DomainMask& mask);

struct Asymmetry {
  double value;
  Vec3 center;
};

/// |E sym-diff (B + x)| / |E| for the ball B of volume |E|, minimized over x
/// by coordinate descent refined down to h/4. Starts from the barycenter,
/// the 8 cells around it and the barycenters of the largest components.
Asymmetry fraenkel_asymmetry(const DomainMask& mask);

/// |E|^{2/3} lambda_0(E) - |B_1|^{2/3} pi^2, with lambda_0 from the grid solver.
double fk_deficit(const DomainMask& mask, double tol = 1e-7);

struct RadialGraph {
  Vec3 center;
  double radius;  // radius of the ball with the same volume
  std::vector<Vec3> directions;
  std::vector<double> phi;  // boundary distance along each direction minus radius
  double sup = 0.0;
  /// Largest |phi_i - phi_j| / angle(i, j) over the nearest directions.
  double grad_sup = 0.0;
};

/// Unit directions of a spherical Fibonacci set.
std::vector<Vec3> fibonacci_sphere(int count);

/// Zero crossing of the trilinearly interpolated level function along 1000
/// rays from the barycenter. Throws GeometryError naming the first ray that
/// crosses more than once.
RadialGraph extract_radial_graph(const DomainMask& mask, int rays = 1000);
/// Same for the superlevel set {u > tau}.
RadialGraph extract_radial_graph(const ScalarField& u, double tau, int rays = 1000);

/// h^2 times the number of inside/outside face pairs.
double perimeter_estimate(const DomainMask& mask);

struct GradientStats {
  double mean;
  double relstd;
  std::size_t faces;
};
/// |grad u| over the boundary faces. Throws GeometryError without faces.
GradientStats boundary_gradient_stats(const ScalarField& u, const DomainMask& mask);

struct SignStats {
  double min_u;
  double neg_mass_fraction;  // int u_-^2 / int u^2
};
SignStats sign_stats(const ScalarField& u);

/// Two-sided Hausdorff distance between the boundary crossings of the mask
/// and the volume-matched sphere about `center`.
double hausdorff_to_ball(const DomainMask& mask, const Vec3& center);
/// Uses the Fraenkel center.
double hausdorff_to_ball(const DomainMask& mask);

struct ShapeReport {
  double volume = 0.0;
  double perimeter = 0.0;
  Vec3 barycenter{0, 0, 0};
  double asymmetry = 0.0;
  Vec3 asymmetry_center{0, 0, 0};
  std::optional<double> fk_deficit;
  /// Empty when the boundary is not star-shaped about the barycenter.
  std::optional<double> phi_sup;
  std::optional<double> phi_grad_sup;
  double min_u = 0.0;
  double neg_mass_fraction = 0.0;
  double boundary_grad_mean = 0.0;
  double boundary_grad_relstd = 0.0;
  double hausdorff_to_ball = 0.0;
  int components = 0;
};

struct ReportOptions {
  bool with_fk_deficit = true;
  double fk_tol = 1e-7;
};

ShapeReport shape_report(const DomainMask& mask, const ScalarField& u,
                         const ReportOptions& opts = {});

std::string to_json(const ShapeReport& report);
/// Throws FormatError on malformed input.
ShapeReport report_from_json(const std::string& text);

}  // namespace clab
