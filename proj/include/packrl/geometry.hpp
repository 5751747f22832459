#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace packrl {

// Absolute tolerance for all <= comparisons in continuous mode. Discrete
// mode stores exact small integers in doubles, so comparisons are exact
// there and the tolerance is harmless.
inline constexpr double kGeomEps = 1e-9;

struct Dim3 {
  double l{}, w{}, h{};

  double volume() const { return l * w * h; }
  bool operator==(const Dim3&) const = default;
};

// Minimum corner of an axis-aligned box.
struct Placement {
  double x{}, y{}, z{};

  bool operator==(const Placement&) const = default;
};

// Occupies the half-open region [x, x+l) x [y, y+w) x [z, z+h).
struct PlacedBox {
  Dim3 dim;
  Placement pos;

  double x1() const { return pos.x + dim.l; }
  double y1() const { return pos.y + dim.w; }
  double z1() const { return pos.z + dim.h; }
  bool operator==(const PlacedBox&) const = default;
};

struct Container {
  Dim3 dim;

  double volume() const { return dim.volume(); }
};

inline Container make_cube(double edge) { return Container{{edge, edge, edge}}; }

// True iff the open interiors intersect. Face, edge or corner contact is
// not overlap.
inline bool boxes_overlap(const PlacedBox& a, const PlacedBox& b) {
  return a.pos.x + kGeomEps < b.x1() && b.pos.x + kGeomEps < a.x1() &&
         a.pos.y + kGeomEps < b.y1() && b.pos.y + kGeomEps < a.y1() &&
         a.pos.z + kGeomEps < b.z1() && b.pos.z + kGeomEps < a.z1();
}

// Closed containment: boundary contact with the container walls is legal.
inline bool box_inside(const PlacedBox& b, const Container& c) {
  return b.pos.x >= -kGeomEps && b.pos.y >= -kGeomEps && b.pos.z >= -kGeomEps &&
         b.x1() <= c.dim.l + kGeomEps && b.y1() <= c.dim.w + kGeomEps &&
         b.z1() <= c.dim.h + kGeomEps;
}

// Packed volume divided by container volume. Meaningful (and <= 1) only
// when the boxes are pairwise non-overlapping and inside the container.
inline double utilization(std::span<const PlacedBox> packed, const Container& c) {
  double vol = 0.0;
  for (const auto& b : packed) vol += b.dim.volume();
  return vol / c.volume();
}

inline double utilization(const std::vector<PlacedBox>& packed, const Container& c) {
  return utilization(std::span<const PlacedBox>(packed), c);
}

}  // namespace packrl
