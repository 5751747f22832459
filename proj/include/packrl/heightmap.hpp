#pragma once

#include <optional>
#include <vector>

#include "packrl/geometry.hpp"

namespace packrl {

// Per-floor-cell record of the current top height. Discrete mode uses one
// cell per unit; continuous mode uses a finer advisory grid (candidates
// there snap to exact EMS coordinates, not cell centers).
class Heightmap {
 public:
  Heightmap(const Container& c, int rx, int ry);

  int rx() const { return rx_; }
  int ry() const { return ry_; }
  double cell(int ix, int iy) const { return h_[static_cast<std::size_t>(iy) * rx_ + ix]; }

  // Max cell height under the footprint [x, x+l) x [y, y+w). Throws
  // std::out_of_range if the footprint leaves the floor rectangle.
  double support_height(double x, double y, double l, double w) const;

  // Resting placement for `dim` at (x, y): z = support height. Returns
  // nullopt (infeasible) when z + h exceeds the container height; an
  // out-of-bounds footprint still throws.
  std::optional<Placement> place_at(const Dim3& dim, double x, double y) const;

  // Fraction of footprint cells whose height equals the resting height z
  // (within tolerance); 1.0 means the base is fully supported.
  double support_fraction(double x, double y, double l, double w, double z) const;

  // Raise every cell under the box footprint to at least its top.
  void commit(const PlacedBox& b);

  double max_height() const;
  // Mean absolute deviation of cell heights; a flatness measure.
  double mean_abs_deviation() const;

 private:
  void footprint_range(double lo, double len, double cell, int cells,
                       int& begin, int& end) const;

  int rx_, ry_;
  double cell_x_, cell_y_;
  double floor_l_, floor_w_, height_;
  std::vector<double> h_;
};

}  // namespace packrl
