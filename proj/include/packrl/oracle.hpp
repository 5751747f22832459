#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "packrl/env.hpp"
#include "packrl/policy.hpp"
#include "packrl/rng.hpp"
#include "packrl/training.hpp"

namespace packrl {

struct MctsConfig {
  int simulations = 2000;
  double exploration = 1.4142135623730951;  // UCB constant c
  int num_futures = 64;                     // sampled item sequences per evaluation
  std::uint64_t seed = 0;
};

// Draws a future item sequence for the steps after the current item.
using FutureSampler = std::function<std::vector<Dim3>(Rng&)>;

// A sampler that always returns the instance's actual remaining items;
// makes the search deterministic for oracle-equivalence tests.
FutureSampler fixed_future(std::vector<Dim3> remaining);

// Futures drawn i.i.d. from a distribution spec.
FutureSampler distribution_future(const DistributionSpec& spec, const ItemSet& set,
                                  int len, Mode mode);

// Rollout policy for simulations: a trained proposal/selection pair, or the
// greedy lowest-(z,y,x) candidate when no parameters are given.
struct RolloutPolicy {
  const PolicyParams* proposal = nullptr;
  const PolicyParams* selection = nullptr;
  int k = 3;
};

// Per-root-candidate empirical probability of being the best action.
struct FrequencyTable {
  std::vector<double> freq;
  int samples = 0;
};

struct MctsResult {
  std::size_t best_index = 0;
  FrequencyTable table;
};

// UCT over the root candidate set with sampled futures, plus the optimal
// frequency estimate: for each sampled future sequence, every root action
// is tried and rolled out, and the best one receives a count. When
// `restrict_root` is given, root children are limited to those candidate
// indices. Throws std::logic_error on a terminal state.
MctsResult mcts_decide(const PackingState& state, const FutureSampler& sampler,
                       const MctsConfig& cfg, const RolloutPolicy& rollout = {},
                       const std::vector<std::size_t>* restrict_root = nullptr);

struct ExhaustiveResult {
  std::size_t best_index = 0;
  double best_return = 0.0;
};

// Exact maximum over all candidate-action sequences for the items already
// in the state's stream. Ties broken by the deterministic (z, y, x)
// candidate order at every depth. Throws std::runtime_error when more than
// `node_guard` search nodes would be expanded.
ExhaustiveResult exhaustive_best(const PackingState& state,
                                 std::size_t node_guard = 1000000);

// Exact best achievable return through each root candidate.
std::vector<double> exhaustive_root_values(const PackingState& state,
                                           std::size_t node_guard = 1000000);

// Aggregated analyses over the decision points of a dataset slice; episodes
// are driven by the argmax composed policy. Produces both the
// inclusion-rate table (oracle-best action in the top-k proposal, per k)
// and the paired rank curves (mean policy probability and mean optimal
// frequency by rank of choice).
struct OracleAnalysis {
  std::vector<int> ks;
  std::vector<double> inclusion;
  std::vector<double> policy_prob;
  std::vector<double> optimal_freq;
  int decisions = 0;
};

OracleAnalysis analyze_oracle(const PolicyParams& proposal, const PolicyParams& selection,
                              const std::vector<Instance>& instances,
                              const DistributionSpec& spec, const ItemSet& set,
                              const TrainContext& ctx, const MctsConfig& cfg,
                              const std::vector<int>& ks);

}  // namespace packrl
