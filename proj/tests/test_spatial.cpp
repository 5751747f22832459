#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "packrl/candidates.hpp"
#include "packrl/ems.hpp"
#include "packrl/heightmap.hpp"

using namespace packrl;

TEST_CASE("empty container has a single whole-container space") {
  Container c = make_cube(20);
  std::vector<EmptySpace> spaces{whole_container(c)};
  CHECK(spaces.size() == 1);
  CHECK(spaces[0] == EmptySpace{0, 0, 0, 20, 20, 20});
}

TEST_CASE("ems_update splits the corner placement into three slabs") {
  Container c = make_cube(20);
  auto spaces = ems_update({whole_container(c)}, PlacedBox{{10, 10, 10}, {0, 0, 0}});
  auto expected = testing::brute_force_maximal_spaces(
      20, {PlacedBox{{10, 10, 10}, {0, 0, 0}}});
  CHECK(spaces.size() == 3);
  CHECK(testing::same_space_sets(spaces, expected));
  // the three slabs by hand
  std::vector<EmptySpace> manual{{10, 0, 0, 20, 20, 20},
                                 {0, 10, 0, 20, 20, 20},
                                 {0, 0, 10, 20, 20, 20}};
  CHECK(testing::same_space_sets(spaces, manual));
}

TEST_CASE("ems_update matches grid enumeration on a two-box 6^3 packing") {
  std::vector<PlacedBox> packed{{{6, 6, 3}, {0, 0, 0}}, {{6, 3, 3}, {0, 0, 3}}};
  std::vector<EmptySpace> spaces{whole_container(make_cube(6))};
  for (const auto& b : packed) spaces = ems_update(spaces, b);
  CHECK(testing::same_space_sets(spaces, testing::brute_force_maximal_spaces(6, packed)));
}

TEST_CASE("ems_update rejects placements outside the empty region") {
  Container c = make_cube(6);
  auto spaces = ems_update({whole_container(c)}, PlacedBox{{6, 6, 3}, {0, 0, 0}});
  CHECK_THROWS_AS(ems_update(spaces, PlacedBox{{2, 2, 2}, {0, 0, 0}}),
                  std::invalid_argument);
}

TEST_CASE("ems incremental set equals brute force over random packings") {
  int mismatches = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto packed = testing::random_integer_packing(6, 5, 4, 1000 + seed);
    std::vector<EmptySpace> spaces{whole_container(make_cube(6))};
    for (const auto& b : packed) {
      spaces = ems_update(spaces, b);
      // emptiness invariant on every update
      for (const auto& s : spaces) {
        for (const auto& q : packed) {
          if (&q > &b) break;
          CHECK_FALSE(s.interior_intersects(q));
        }
      }
    }
    if (!testing::same_space_sets(spaces, testing::brute_force_maximal_spaces(6, packed)))
      ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("heightmap resting heights") {
  Container c = make_cube(20);
  Heightmap hm(c, 20, 20);
  auto p = hm.place_at({2, 2, 2}, 0, 0);
  REQUIRE(p.has_value());
  CHECK(p->z == 0.0);

  hm.commit(PlacedBox{{10, 10, 10}, {0, 0, 0}});
  p = hm.place_at({2, 2, 2}, 0, 0);
  REQUIRE(p.has_value());
  CHECK(p->z == 10.0);

  // footprint straddles the box edge; max over cells wins
  p = hm.place_at({2, 2, 2}, 9, 9);
  REQUIRE(p.has_value());
  CHECK(p->z == 10.0);

  hm.commit(PlacedBox{{20, 20, 11}, {0, 0, 0}});
  CHECK_FALSE(hm.place_at({2, 2, 10}, 0, 0).has_value());
  CHECK_THROWS_AS(hm.place_at({2, 2, 2}, 19.5, 0), std::out_of_range);
}

namespace {

CandidateSet candidates_for(const Container& c, const std::vector<PlacedBox>& packed,
                            const Dim3& item, const PackConfig& cfg) {
  Heightmap hm(c, cfg.heightmap_rx, cfg.heightmap_ry);
  std::vector<EmptySpace> spaces{whole_container(c)};
  for (const auto& b : packed) {
    spaces = ems_update(spaces, b);
    hm.commit(b);
  }
  return generate_candidates(c, packed, spaces, hm, item, cfg);
}

}  // namespace

TEST_CASE("candidate generation on the empty container") {
  Container c = make_cube(20);
  PackConfig cfg = PackConfig::discrete();

  auto full = candidates_for(c, {}, {20, 20, 20}, cfg);
  REQUIRE(full.size() == 1);
  CHECK(full[0].placement == Placement{0, 0, 0});

  auto quad = candidates_for(c, {}, {10, 10, 10}, cfg);
  REQUIRE(quad.size() == 4);
  CHECK(quad[0].placement == Placement{0, 0, 0});
  CHECK(quad[1].placement == Placement{10, 0, 0});
  CHECK(quad[2].placement == Placement{0, 10, 0});
  CHECK(quad[3].placement == Placement{10, 10, 0});

  CHECK(candidates_for(c, {}, {21, 5, 5}, cfg).empty());
}

TEST_CASE("candidates are feasible, ordered and deterministic") {
  Container c = make_cube(12);
  PackConfig cfg = PackConfig::discrete(12);
  cfg.heuristics = Heuristic::EmsCorner | Heuristic::CornerPoint |
                   static_cast<unsigned>(Heuristic::ExtremePoint) |
                   static_cast<unsigned>(Heuristic::HeightmapMin);

  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto packed = testing::random_integer_packing(12, 4, 6, rng.next_u64());
    Dim3 item{2, 3, 2};
    auto set = candidates_for(c, packed, item, cfg);
    auto again = candidates_for(c, packed, item, cfg);
    REQUIRE(set.size() == again.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
      CHECK(set[i].placement == again[i].placement);
      PlacedBox b{set[i].dim, set[i].placement};
      CHECK(box_inside(b, c));
      for (const auto& q : packed) CHECK_FALSE(boxes_overlap(b, q));
      if (i > 0) {
        auto key = [](const CandidateAction& a) {
          return std::array<double, 3>{a.placement.z, a.placement.y, a.placement.x};
        };
        CHECK(key(set[i - 1]) <= key(set[i]));
      }
    }
  }
}

TEST_CASE("EMS bottom corners agree with heightmap support when flush") {
  Container c = make_cube(12);
  PackConfig cfg = PackConfig::discrete(12);
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    auto packed = testing::random_integer_packing(12, 4, 5, rng.next_u64());
    Heightmap hm(c, 12, 12);
    std::vector<EmptySpace> spaces{whole_container(c)};
    for (const auto& b : packed) {
      spaces = ems_update(spaces, b);
      hm.commit(b);
    }
    Dim3 item{2, 2, 2};
    auto set = generate_candidates(c, packed, spaces, hm, item, cfg);
    for (const auto& cand : set.actions) {
      double support = hm.support_height(cand.placement.x, cand.placement.y, item.l, item.w);
      if (std::abs(cand.placement.z - support) < 1e-9) {
        auto p = hm.place_at(item, cand.placement.x, cand.placement.y);
        REQUIRE(p.has_value());
        CHECK(p->z == doctest::Approx(cand.placement.z));
      }
    }
  }
}
