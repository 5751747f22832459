#include "packrl/ems.hpp"

#include <stdexcept>

namespace packrl {

std::vector<EmptySpace> ems_update(const std::vector<EmptySpace>& spaces,
                                   const PlacedBox& placed) {
  bool covered = false;
  for (const auto& s : spaces) {
    if (s.contains_box(placed)) {
      covered = true;
      break;
    }
  }
  if (!covered) {
    throw std::invalid_argument(
        "ems_update: placed box is not contained in any empty space");
  }

  std::vector<EmptySpace> out;
  out.reserve(spaces.size() + 6);
  const double px0 = placed.pos.x, px1 = placed.x1();
  const double py0 = placed.pos.y, py1 = placed.y1();
  const double pz0 = placed.pos.z, pz1 = placed.z1();

  for (const auto& s : spaces) {
    if (!s.interior_intersects(placed)) {
      out.push_back(s);
      continue;
    }
    // One slab per face of the placed box, full extent on the other axes.
    EmptySpace pieces[6] = {
        {s.x0, s.y0, s.z0, px0, s.y1, s.z1},   // -x
        {px1, s.y0, s.z0, s.x1, s.y1, s.z1},   // +x
        {s.x0, s.y0, s.z0, s.x1, py0, s.z1},   // -y
        {s.x0, py1, s.z0, s.x1, s.y1, s.z1},   // +y
        {s.x0, s.y0, s.z0, s.x1, s.y1, pz0},   // -z
        {s.x0, s.y0, pz1, s.x1, s.y1, s.z1},   // +z
    };
    for (const auto& p : pieces) {
      if (p.valid()) out.push_back(p);
    }
  }

  // Global containment pruning keeps exactly the maximal spaces: every
  // maximal empty box of the new region is among the generated pieces, so
  // any non-maximal piece is contained in a kept one.
  std::vector<EmptySpace> pruned;
  pruned.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < out.size() && !dominated; ++j) {
      if (i == j) continue;
      if (out[j].contains(out[i])) {
        // Tie-break duplicates: keep the earliest.
        if (out[i].contains(out[j]) && i < j) continue;
        dominated = true;
      }
    }
    if (!dominated) pruned.push_back(out[i]);
  }
  return pruned;
}

}  // namespace packrl
