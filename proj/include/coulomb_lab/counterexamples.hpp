#pragma once

// Concentrating and sign-alternating bump sequences along which the Coulomb
// energy alone tends to zero at fixed L2 norm.

#include <iosfwd>
#include <vector>

#include "coulomb_lab/coulomb.hpp"
#include "coulomb_lab/field.hpp"

namespace clab {

/// (1 - r^2)^3 on the unit ball, scaled to unit L2 norm.
double bump_profile(double r);
/// Normalizing constant of the base bump, also its sup (about 1.871).
double bump_sup();

struct BumpSpec {
  std::vector<Vec3> centers;
  std::vector<int> signs;  // +1 or -1
  double eps = 1.0;
};

/// Each bump is sampled, normalized on the grid to L2 share 1 / count and
/// multiplied by its sign, so the sum has unit norm up to rounding.
/// Throws UsageError on overlapping supports, ResolutionError when eps spans
/// fewer than 4 cells and GeometryError when a bump leaves the grid.
ScalarField assemble(const Grid& grid, const BumpSpec& spec);

/// eps^{-3/2} phi((x - x0) / eps); eps in (0, 1].
ScalarField scaling_sequence(const Grid& grid, double eps, const Vec3& center = {0, 0, 0});

/// 2n centers on a centered cubic lattice of the given spacing with
/// checkerboard signs; eps = (2n)^{-1/3}.
BumpSpec multibump_spec(int n, double separation);
ScalarField multibump_sequence(const Grid& grid, int n, double separation);

/// h^3 times the number of cells where f is nonzero.
double support_volume(const ScalarField& f);

inline constexpr int kMaxFittingCells = 320;

/// Smallest grid holding the spec with `cells` cells per bump radius.
/// Throws ResolutionError beyond kMaxFittingCells per side.
Grid fitting_grid(const BumpSpec& spec, int cells);

/// D(phi, phi) on a grid with `cells` cells per unit radius.
double base_coulomb_energy(int cells, KernelMode mode = KernelMode::tabulated);

struct DecayRow {
  int n;
  double separation;
  double eps;
  double D;
  /// D of a single rescaled bump at the same eps and grid: the sum of the
  /// disjoint self terms.
  double self_term;
  double self_prediction;  // (2n)^{-2/3} D(phi, phi)
  double bound;            // n^{1/2} (2n)^{-2/3} D(phi, phi)
  double cross_share;      // (D - self_term) / D
};

/// One row per (n, separation) pair, each on its own fitting grid.
std::vector<DecayRow> decay_report(const std::vector<int>& n_list,
                                   const std::vector<double>& separation_list, int cells = 6,
                                   KernelMode mode = KernelMode::tabulated);

void write_decay_csv(std::ostream& out, const std::vector<DecayRow>& rows);

}  // namespace clab
