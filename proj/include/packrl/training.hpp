#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <utility>
#include <vector>

#include "packrl/env.hpp"
#include "packrl/instances.hpp"
#include "packrl/policy.hpp"

namespace packrl {

enum class Role { Proposal, Selection };

// Everything needed to recompute both policies' log-prob gradients at
// update time; parameters are immutable snapshots during a rollout.
struct StepData {
  FeatureMatrix cand_feats;
  std::vector<std::size_t> proposal;  // candidate indices retained by pi^p
  std::size_t chosen = 0;             // into the full candidate set
  std::size_t chosen_prop = 0;        // into the proposal set
};

struct Trajectory {
  std::vector<StepData> steps;
  double ret = 0.0;  // terminal utilization; the undiscounted return
  int num_packed = 0;
};

struct MetaConfig {
  double alpha = 3e-3;  // inner step size
  double beta = 3e-3;   // outer step size
  int tasks_per_batch = 4;
  int inner_instances = 4;
};

struct TrainSchedule {
  int pre_epochs = 25;
  int post_epochs = 5;
  int batches_per_epoch = 20;
  int batch_size = 16;
  int adaptation_batches = 50;
  double post_lr = 1e-3;
  double adapt_lr = 1e-3;

  static TrainSchedule desk();
  static TrainSchedule paper_scale();
};

struct TrainContext {
  Container container = make_cube(20.0);
  PackConfig pack = PackConfig::discrete();
  ItemSet item_set;       // training item set
  int episode_len = 70;
  int k = 3;              // proposal set size; >= candidate cap disables pruning
  bool meta_post = true;  // wrap post-training batches in the meta loop
  bool keep_steps = true; // false drops per-step records (evaluation only)
};

// Exponential moving average of episode returns; the advantage baseline.
struct EmaBaseline {
  double decay = 0.99;
  double value = 0.0;
  bool initialized = false;

  void observe(double r) {
    value = initialized ? decay * value + (1.0 - decay) * r : r;
    initialized = true;
  }
  double get(double fallback) const { return initialized ? value : fallback; }
};

// Plain gradient-descent step theta - lr * grad.
std::vector<double> sgd_step(const std::vector<double>& theta,
                             const std::vector<double>& grad, double lr);

using EpochCallback =
    std::function<void(int epoch, double mean_uti, double mean_num, double grad_norm)>;

Trajectory rollout_episode(const PolicyParams& proposal, const PolicyParams& selection,
                           const Instance& instance, const TrainContext& ctx,
                           SelectMode mode, Rng& rng);

// One trajectory per instance; episode i uses the child seed mix_seed(seed, i),
// so any worker partition reproduces the serial result exactly.
std::vector<Trajectory> rollout_batch(const PolicyParams& proposal,
                                      const PolicyParams& selection,
                                      const std::vector<Instance>& instances,
                                      const TrainContext& ctx, std::uint64_t seed,
                                      SelectMode mode = SelectMode::Sample);

// Mean advantage-weighted log-prob gradient (ascent direction) for one role.
std::vector<double> policy_gradient(const PolicyParams& params,
                                    const std::vector<Trajectory>& trajectories,
                                    Role role, double baseline);

// One ascent step; throws std::runtime_error on a non-finite gradient.
PolicyParams policy_gradient_update(const PolicyParams& params,
                                    const std::vector<Trajectory>& trajectories,
                                    Role role, double lr, double baseline);

// First-order MAML over distribution tasks: inner policy-gradient step per
// task, outer update from trajectories collected under the adapted weights.
PolicyParams maml_pretrain(const PolicyParams& init, const TrainContext& ctx,
                           const MetaConfig& meta, const TrainSchedule& schedule,
                           std::uint64_t seed, const EpochCallback& on_epoch = {});

// Decoupled fine-tuning of the policy pair, alternating the updated role
// per batch; both should start from the same pre-trained vector.
std::pair<PolicyParams, PolicyParams> post_train(const PolicyParams& proposal,
                                                 const PolicyParams& selection,
                                                 const TrainContext& ctx,
                                                 const MetaConfig& meta,
                                                 const TrainSchedule& schedule,
                                                 std::uint64_t seed,
                                                 const EpochCallback& on_epoch = {});

// Selection-only fine-tuning on a test distribution; the proposal policy
// is read-only throughout.
PolicyParams adapt_online(const PolicyParams& proposal_fixed, PolicyParams selection,
                          const std::vector<DistributionSpec>& test_dists,
                          const ItemSet& test_set, const TrainContext& ctx,
                          int adaptation_batches, int batch_size, double lr,
                          std::uint64_t seed);

EpisodeResult run_episode_argmax(const PolicyParams& proposal,
                                 const PolicyParams& selection,
                                 const Instance& instance, const TrainContext& ctx);

// Argmax-mode evaluation over every instance of a dataset; worker count > 1
// fans episodes out to threads, results are ordered by episode index.
std::vector<EpisodeResult> evaluate_dataset(const PolicyParams& proposal,
                                            const PolicyParams& selection,
                                            const Dataset& ds, const TrainContext& ctx,
                                            int workers = 1);

double mean_uti(const std::vector<EpisodeResult>& results);
double mean_num(const std::vector<EpisodeResult>& results);

}  // namespace packrl
