#pragma once

#include <vector>

#include "packrl/geometry.hpp"

namespace packrl {

// An empty axis-aligned box that cannot be grown on any face without
// hitting a placed box or a container wall.
struct EmptySpace {
  double x0{}, y0{}, z0{};
  double x1{}, y1{}, z1{};

  double dx() const { return x1 - x0; }
  double dy() const { return y1 - y0; }
  double dz() const { return z1 - z0; }
  double volume() const { return dx() * dy() * dz(); }

  bool valid() const {
    return dx() > kGeomEps && dy() > kGeomEps && dz() > kGeomEps;
  }

  // Closed containment with tolerance; equal spaces contain each other.
  bool contains(const EmptySpace& o) const {
    return x0 <= o.x0 + kGeomEps && o.x1 <= x1 + kGeomEps &&
           y0 <= o.y0 + kGeomEps && o.y1 <= y1 + kGeomEps &&
           z0 <= o.z0 + kGeomEps && o.z1 <= z1 + kGeomEps;
  }

  bool contains_box(const PlacedBox& b) const {
    return x0 <= b.pos.x + kGeomEps && b.x1() <= x1 + kGeomEps &&
           y0 <= b.pos.y + kGeomEps && b.y1() <= y1 + kGeomEps &&
           z0 <= b.pos.z + kGeomEps && b.z1() <= z1 + kGeomEps;
  }

  bool interior_intersects(const PlacedBox& b) const {
    return x0 + kGeomEps < b.x1() && b.pos.x + kGeomEps < x1 &&
           y0 + kGeomEps < b.y1() && b.pos.y + kGeomEps < y1 &&
           z0 + kGeomEps < b.z1() && b.pos.z + kGeomEps < z1;
  }

  bool operator==(const EmptySpace&) const = default;
};

inline EmptySpace whole_container(const Container& c) {
  return EmptySpace{0, 0, 0, c.dim.l, c.dim.w, c.dim.h};
}

// Incremental maintenance of the maximal empty-space set. `spaces` must be
// the full maximal cover of the empty region before `placed` is committed;
// the result is the full maximal cover afterwards. Each intersected space
// is split into <= 6 sub-boxes and results contained in another space are
// pruned. Throws std::invalid_argument if `placed` is not contained in any
// space (caller bug: the placement was not feasible).
std::vector<EmptySpace> ems_update(const std::vector<EmptySpace>& spaces,
                                   const PlacedBox& placed);

}  // namespace packrl
