#pragma once

// Domain masks. A mask always carries a level function (negative inside);
// its sign gives the cell membership and, along each axis, its linear
// interpolation locates the boundary between an inside cell and an outside
// neighbour. Masks built from plain booleans get level = -+h/2, which puts
// the boundary on the cell faces.

#include <cstdint>
#include <span>
#include <vector>

#include "coulomb_lab/field.hpp"

namespace clab {

class DomainMask {
 public:
  /// Smallest boundary fraction used by the cut-cell stencil.
  static constexpr double kMinFraction = 0.01;

  static DomainMask from_level(const Grid& grid, std::vector<double> level);
  static DomainMask from_inside(const Grid& grid, std::span<const std::uint8_t> inside);
  /// Cells with |f| > tau.
  static DomainMask support_of(const ScalarField& f, double tau = 0.0);

  template <class F>
  static DomainMask from_level_set(const Grid& grid, F&& phi) {
    std::vector<double> level(grid.size());
    for (std::size_t idx = 0; idx < level.size(); ++idx) level[idx] = phi(grid.point(idx));
    return from_level(grid, std::move(level));
  }

  const Grid& grid() const { return grid_; }
  bool inside(std::size_t idx) const { return inside_[idx] != 0; }
  std::span<const std::uint8_t> inside_flags() const { return inside_; }
  std::span<const double> level() const { return level_; }

  std::size_t count() const { return count_; }
  bool empty() const { return count_ == 0; }
  double volume() const { return grid_.cell_volume() * static_cast<double>(count_); }

  /// Position of the boundary between inside cell `in` and its axis
  /// neighbour `out`, as a fraction of h measured from `in`.
  double boundary_fraction(std::size_t in, std::size_t out) const;

  ScalarField indicator() const;
  ScalarField level_field() const { return ScalarField(grid_, level_); }
  std::vector<std::size_t> cells() const;

 private:
  DomainMask(const Grid& grid, std::vector<double> level);

  Grid grid_;
  std::vector<double> level_;
  std::vector<std::uint8_t> inside_;
  std::size_t count_ = 0;
};

/// Cut-cell Dirichlet energy of u restricted to the mask (u taken as zero
/// outside, boundary faces weighted by 1/fraction).
double dirichlet_energy(const ScalarField& u, const DomainMask& mask);

/// The operator whose quadratic form is dirichlet_energy(u, mask);
/// zero outside the mask.
ScalarField apply_laplacian(const ScalarField& u, const DomainMask& mask);

/// Copy of u with every cell outside the mask zeroed.
ScalarField restrict_to(const ScalarField& u, const DomainMask& mask);

/// An axis face between an inside cell and an outside neighbour, with the
/// interpolated crossing point of the level function.
struct BoundaryFace {
  std::size_t in;
  std::size_t out;
  int axis;
  int dir;  // +1 or -1
  double fraction;
  Vec3 point;
};

std::vector<BoundaryFace> boundary_faces(const DomainMask& mask);

/// |grad u| at every boundary face crossing. The normal-axis component is a
/// one-sided quadratic fit through the two cells behind the face and the zero
/// boundary value; the tangential components are taken at the inside cell.
std::vector<double> boundary_gradient(const ScalarField& u, const DomainMask& mask,
                                      const std::vector<BoundaryFace>& faces);

}  // namespace clab
