#pragma once

// Level-set utilities on the cell-centered grid: distance transforms,
// reinitialization, upwind transport, and extension of boundary data.
// Levels are negative inside and measured in length units.

#include <cstdint>
#include <span>
#include <vector>

#include "coulomb_lab/field.hpp"

namespace clab::level_set {

/// Squared Euclidean distance (in cell units) from every cell to the nearest
/// cell with feature != 0; +inf when there is no feature cell.
std::vector<double> squared_distance_transform(const Grid& grid,
                                               std::span<const std::uint8_t> feature);

/// Signed distance whose zero level sits on the faces between inside and
/// outside cells.
std::vector<double> signed_distance(const Grid& grid, std::span<const std::uint8_t> inside);

/// Rebuilds |grad level| = 1 away from the interface while keeping the
/// interface-adjacent values (fast sweeping). With margin >= 0 only the
/// bounding box of the interface grown by `margin` cells is rebuilt.
void reinitialize(const Grid& grid, std::vector<double>& level, int margin = -1);

/// One forward-Euler step of level_t + speed |grad level| = 0 with Godunov
/// upwinding. Positive speed moves the zero level outward.
void advect(const Grid& grid, std::vector<double>& level, std::span<const double> speed,
            double dt);

/// Extends values given on `seeded` cells outward by `rings` layers of
/// 26-neighbour averaging. Cells never reached get 0.
std::vector<double> extend(const Grid& grid, std::span<const double> values,
                           std::span<const std::uint8_t> seeded, int rings);

}  // namespace clab::level_set
