#pragma once

#include <vector>

#include "qpath/grid_world.hpp"

namespace qpath::kernels {

/// turn_feature for every cell of `occupancy`, row-major. Blocked cells get
/// their window density as well. OpenMP over rows, using a summed-area table.
std::vector<double> density_field(const BoolGrid& occupancy, int window_radius);

/// Reference: turn_feature evaluated cell by cell.
std::vector<double> density_field_serial(const BoolGrid& occupancy, int window_radius);

}  // namespace qpath::kernels
