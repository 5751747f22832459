#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "packrl/ems.hpp"
#include "packrl/geometry.hpp"
#include "packrl/heightmap.hpp"

namespace packrl {

enum class Mode { Discrete, Continuous };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);

enum class Heuristic : unsigned {
  EmsCorner = 1u << 0,
  CornerPoint = 1u << 1,
  ExtremePoint = 1u << 2,
  HeightmapMin = 1u << 3,
};

inline unsigned operator|(Heuristic a, Heuristic b) {
  return static_cast<unsigned>(a) | static_cast<unsigned>(b);
}

struct PackConfig {
  Mode mode = Mode::Discrete;
  unsigned heuristics = static_cast<unsigned>(Heuristic::EmsCorner);
  int max_candidates = 50;       // 50 discrete, 100 continuous
  int heightmap_rx = 20;         // 1 cell per unit discrete, 40 continuous
  int heightmap_ry = 20;
  double support_fraction = 0.0; // 0 disables the support requirement
  bool allow_rotation = false;   // 2 horizontal rotations when enabled

  static PackConfig discrete(double container_edge = 20.0);
  static PackConfig continuous(double container_edge = 20.0);
};

struct CandidateAction {
  Placement placement;
  Dim3 dim;            // item dims as placed (differs from the item only under rotation)
  Heuristic source = Heuristic::EmsCorner;
  bool feasible = true;
};

// Feasibility-filtered, deduplicated, (z, y, x)-ordered, truncated to the
// configured cap. Empty set signals episode termination.
struct CandidateSet {
  std::vector<CandidateAction> actions;

  std::size_t size() const { return actions.size(); }
  bool empty() const { return actions.empty(); }
  const CandidateAction& operator[](std::size_t i) const { return actions[i]; }
};

CandidateSet generate_candidates(const Container& container,
                                 const std::vector<PlacedBox>& packed,
                                 const std::vector<EmptySpace>& spaces,
                                 const Heightmap& heightmap, const Dim3& item,
                                 const PackConfig& cfg);

}  // namespace packrl
