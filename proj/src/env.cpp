#include "packrl/env.hpp"

#include <stdexcept>

namespace packrl {

double PackingState::packed_volume() const {
  double v = 0.0;
  for (const auto& b : packed) v += b.dim.volume();
  return v;
}

namespace {

// Advance to the next placeable situation: load the item at the cursor,
// generate its candidates, and mark terminal if the stream ended or no
// feasible candidate exists.
void advance(PackingState& s) {
  if (s.cursor >= s.items.size()) {
    s.current_item.reset();
    s.candidates.actions.clear();
    s.terminal = true;
    return;
  }
  s.current_item = s.items[s.cursor];
  ++s.cursor;
  s.candidates = generate_candidates(s.container, s.packed, s.spaces, s.heightmap,
                                     *s.current_item, s.config);
  if (s.candidates.empty()) {
    s.terminal = true;
  }
}

}  // namespace

PackingState reset(const Instance& instance, const Container& container,
                   const PackConfig& config) {
  if (instance.items.empty()) throw std::invalid_argument("reset: empty instance");
  PackingState s{container,
                 config,
                 {},
                 Heightmap(container, config.heightmap_rx, config.heightmap_ry),
                 {whole_container(container)},
                 instance.items,
                 0,
                 0,
                 std::nullopt,
                 {},
                 false};
  advance(s);
  return s;
}

void step(PackingState& s, std::size_t action_index) {
  if (s.terminal) throw std::logic_error("step: state is terminal");
  if (action_index >= s.candidates.size())
    throw std::out_of_range("step: action index outside candidate set");
  const CandidateAction& a = s.candidates[action_index];

  PlacedBox b{a.dim, a.placement};
  if (!box_inside(b, s.container))
    throw std::logic_error("step: candidate violates containment");
  for (const auto& p : s.packed) {
    if (boxes_overlap(b, p)) throw std::logic_error("step: candidate overlaps packing");
  }

  s.spaces = ems_update(s.spaces, b);
  s.heightmap.commit(b);
  s.packed.push_back(b);
  ++s.t;
  advance(s);
}

double final_reward(const PackingState& s) {
  if (!s.terminal) throw std::logic_error("final_reward: state is not terminal");
  return s.uti();
}

}  // namespace packrl
