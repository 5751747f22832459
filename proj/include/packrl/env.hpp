#pragma once

#include <optional>
#include <vector>

#include "packrl/candidates.hpp"
#include "packrl/ems.hpp"
#include "packrl/geometry.hpp"
#include "packrl/heightmap.hpp"
#include "packrl/instances.hpp"

namespace packrl {

// The online-packing MDP state. Candidate generation for the current item
// is evaluated eagerly, so a non-terminal state always carries a non-empty
// candidate set and trajectories never contain dead states.
struct PackingState {
  Container container;
  PackConfig config;
  std::vector<PlacedBox> packed;
  Heightmap heightmap;
  std::vector<EmptySpace> spaces;
  std::vector<Dim3> items;
  std::size_t cursor = 0;  // index of the item after current_item
  int t = 0;
  std::optional<Dim3> current_item;
  CandidateSet candidates;
  bool terminal = false;

  double packed_volume() const;
  double uti() const { return utilization(packed, container); }
};

PackingState reset(const Instance& instance, const Container& container,
                   const PackConfig& config);

// Commit the candidate at `action_index` and advance to the next item.
// Throws std::out_of_range on a foreign index and std::logic_error on a
// terminal state.
void step(PackingState& state, std::size_t action_index);

// Terminal utilization; the undiscounted episode return. Throws
// std::logic_error on a non-terminal state.
double final_reward(const PackingState& state);

struct EpisodeResult {
  double uti = 0.0;
  int num_packed = 0;
};

}  // namespace packrl
