#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "packrl/candidates.hpp"
#include "packrl/geometry.hpp"
#include "packrl/rng.hpp"

namespace packrl {

// Per-axis value grid an item subset draws from. In continuous mode the
// same grid is used as a base and each axis gets uniform [-0.5, 0.5] noise.
struct ItemSet {
  std::string name;
  std::vector<int> values;

  // Item types are the full 3D cross-product of the value grid, in
  // (l, w, h) lexicographic order.
  std::size_t num_types() const {
    return values.size() * values.size() * values.size();
  }
  Dim3 type_dims(std::size_t type) const;
};

// Default {2,4,6,8,10}; ID-Large {6,8,10}; ID-Medium {4,6,8};
// ID-Small {2,4,6}; OOD {1..11}; OOD-Large {6..11}; OOD-Small {1..6}.
// Throws on unknown names.
ItemSet item_set_for(const std::string& subset);
const std::vector<std::string>& all_subsets();

// Categorical distribution over the item-type cross-product.
struct DistributionSpec {
  std::string item_set;
  std::vector<double> probs;
  std::uint64_t seed = 0;
};

struct Instance {
  int dist_index = 0;
  int inst_index = 0;
  std::vector<Dim3> items;
};

struct Dataset {
  std::string subset;
  Mode mode = Mode::Discrete;
  std::uint64_t seed = 0;
  int episode_len = 70;
  std::vector<DistributionSpec> dists;
  std::vector<std::vector<Instance>> instances;  // [dist][instance]

  std::size_t total_instances() const;
};

// Flat Dirichlet(1) over the item types, reproducible from the seed.
DistributionSpec sample_distribution(const ItemSet& set, std::uint64_t seed);

// len i.i.d. categorical draws; continuous mode adds independent uniform
// [-0.5, 0.5] noise to every axis.
Instance sample_instance(const DistributionSpec& spec, const ItemSet& set, int len,
                         Mode mode, std::uint64_t seed);

Dataset build_dataset(const std::string& subset, Mode mode, std::uint64_t seed,
                      int n_dists = 100, int n_instances = 64, int episode_len = 70);

// JSON-lines: a self-describing header record, then one record per instance.
void write_dataset_jsonl(const Dataset& ds, const std::string& path);
Dataset read_dataset_jsonl(const std::string& path);

}  // namespace packrl
