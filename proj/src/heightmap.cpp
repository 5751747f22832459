#include "packrl/heightmap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace packrl {

Heightmap::Heightmap(const Container& c, int rx, int ry)
    : rx_(rx),
      ry_(ry),
      cell_x_(c.dim.l / rx),
      cell_y_(c.dim.w / ry),
      floor_l_(c.dim.l),
      floor_w_(c.dim.w),
      height_(c.dim.h),
      h_(static_cast<std::size_t>(rx) * ry, 0.0) {
  if (rx <= 0 || ry <= 0) throw std::invalid_argument("Heightmap: resolution must be positive");
}

void Heightmap::footprint_range(double lo, double len, double cell, int cells,
                                int& begin, int& end) const {
  // Cells overlapping the half-open interval [lo, lo+len).
  begin = static_cast<int>(std::floor((lo + kGeomEps) / cell));
  end = static_cast<int>(std::ceil((lo + len - kGeomEps) / cell));
  begin = std::max(begin, 0);
  end = std::min(end, cells);
}

double Heightmap::support_height(double x, double y, double l, double w) const {
  if (x < -kGeomEps || y < -kGeomEps || x + l > floor_l_ + kGeomEps ||
      y + w > floor_w_ + kGeomEps) {
    throw std::out_of_range("Heightmap: footprint outside floor");
  }
  int ix0, ix1, iy0, iy1;
  footprint_range(x, l, cell_x_, rx_, ix0, ix1);
  footprint_range(y, w, cell_y_, ry_, iy0, iy1);
  double z = 0.0;
  for (int iy = iy0; iy < iy1; ++iy)
    for (int ix = ix0; ix < ix1; ++ix) z = std::max(z, cell(ix, iy));
  return z;
}

std::optional<Placement> Heightmap::place_at(const Dim3& dim, double x, double y) const {
  double z = support_height(x, y, dim.l, dim.w);
  if (z + dim.h > height_ + kGeomEps) return std::nullopt;
  return Placement{x, y, z};
}

double Heightmap::support_fraction(double x, double y, double l, double w, double z) const {
  int ix0, ix1, iy0, iy1;
  footprint_range(x, l, cell_x_, rx_, ix0, ix1);
  footprint_range(y, w, cell_y_, ry_, iy0, iy1);
  int total = 0, supported = 0;
  for (int iy = iy0; iy < iy1; ++iy) {
    for (int ix = ix0; ix < ix1; ++ix) {
      ++total;
      if (cell(ix, iy) >= z - 1e-7) ++supported;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(supported) / total;
}

void Heightmap::commit(const PlacedBox& b) {
  int ix0, ix1, iy0, iy1;
  footprint_range(b.pos.x, b.dim.l, cell_x_, rx_, ix0, ix1);
  footprint_range(b.pos.y, b.dim.w, cell_y_, ry_, iy0, iy1);
  double top = b.z1();
  for (int iy = iy0; iy < iy1; ++iy) {
    for (int ix = ix0; ix < ix1; ++ix) {
      double& cell_h = h_[static_cast<std::size_t>(iy) * rx_ + ix];
      cell_h = std::max(cell_h, top);
    }
  }
}

double Heightmap::max_height() const {
  double m = 0.0;
  for (double v : h_) m = std::max(m, v);
  return m;
}

double Heightmap::mean_abs_deviation() const {
  double mean = 0.0;
  for (double v : h_) mean += v;
  mean /= static_cast<double>(h_.size());
  double mad = 0.0;
  for (double v : h_) mad += std::abs(v - mean);
  return mad / static_cast<double>(h_.size());
}

}  // namespace packrl
