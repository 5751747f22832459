#include "packrl/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace packrl {

TrainSchedule TrainSchedule::desk() { return TrainSchedule{}; }

TrainSchedule TrainSchedule::paper_scale() {
  TrainSchedule s;
  s.pre_epochs = 250;
  s.post_epochs = 50;
  s.batches_per_epoch = 200;
  s.batch_size = 64;
  s.adaptation_batches = 200;
  return s;
}

std::vector<double> sgd_step(const std::vector<double>& theta,
                             const std::vector<double>& grad, double lr) {
  if (theta.size() != grad.size()) throw std::invalid_argument("sgd_step: size mismatch");
  std::vector<double> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] - lr * grad[i];
  return out;
}

Trajectory rollout_episode(const PolicyParams& proposal, const PolicyParams& selection,
                           const Instance& instance, const TrainContext& ctx,
                           SelectMode mode, Rng& rng) {
  PackingState state = reset(instance, ctx.container, ctx.pack);
  Trajectory traj;
  while (!state.terminal) {
    FeatureMatrix feats = featurize_all(state);
    ProposalSet ps = propose(proposal, feats, ctx.k);
    Choice choice = select(selection, feats, ps, mode, rng);
    if (ctx.keep_steps) {
      traj.steps.push_back(
          StepData{feats, ps.indices, choice.cand_index, choice.prop_index});
    }
    step(state, choice.cand_index);
  }
  traj.ret = final_reward(state);
  traj.num_packed = static_cast<int>(state.packed.size());
  return traj;
}

std::vector<Trajectory> rollout_batch(const PolicyParams& proposal,
                                      const PolicyParams& selection,
                                      const std::vector<Instance>& instances,
                                      const TrainContext& ctx, std::uint64_t seed,
                                      SelectMode mode) {
  if (instances.empty()) throw std::invalid_argument("rollout_batch: empty batch");
  std::vector<Trajectory> out(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    Rng rng(mix_seed(seed, i));
    out[i] = rollout_episode(proposal, selection, instances[i], ctx, mode, rng);
  }
  return out;
}

std::vector<double> policy_gradient(const PolicyParams& params,
                                    const std::vector<Trajectory>& trajectories,
                                    Role role, double baseline) {
  std::vector<double> grad(params.theta.size(), 0.0);
  std::size_t n_steps = 0;
  for (const auto& traj : trajectories) {
    double advantage = traj.ret - baseline;
    for (const auto& s : traj.steps) {
      std::vector<double> g;
      if (role == Role::Proposal) {
        g = log_prob_grad(params, s.cand_feats, s.chosen);
      } else {
        FeatureMatrix sub;
        sub.reserve(s.proposal.size());
        for (std::size_t idx : s.proposal) sub.push_back(s.cand_feats[idx]);
        g = log_prob_grad(params, sub, s.chosen_prop);
      }
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += advantage * g[i];
      ++n_steps;
    }
  }
  if (n_steps > 0) {
    for (double& v : grad) v /= static_cast<double>(n_steps);
  }
  return grad;
}

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::runtime_error(std::string("non-finite ") + what);
  }
}

double batch_mean_return(const std::vector<Trajectory>& trajs) {
  double s = 0.0;
  for (const auto& t : trajs) s += t.ret;
  return s / static_cast<double>(trajs.size());
}

std::vector<Instance> sample_task_instances(const DistributionSpec& spec,
                                            const ItemSet& set, const TrainContext& ctx,
                                            int n, std::uint64_t seed) {
  std::vector<Instance> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.push_back(sample_instance(spec, set, ctx.episode_len, ctx.pack.mode,
                                  mix_seed(seed, static_cast<std::uint64_t>(i))));
  }
  return out;
}

}  // namespace

PolicyParams policy_gradient_update(const PolicyParams& params,
                                    const std::vector<Trajectory>& trajectories,
                                    Role role, double lr, double baseline) {
  auto grad = policy_gradient(params, trajectories, role, baseline);
  check_finite(grad, "gradient in policy_gradient_update");
  PolicyParams out = params;
  for (std::size_t i = 0; i < out.theta.size(); ++i) out.theta[i] += lr * grad[i];
  return out;
}

PolicyParams maml_pretrain(const PolicyParams& init, const TrainContext& ctx,
                           const MetaConfig& meta, const TrainSchedule& schedule,
                           std::uint64_t seed, const EpochCallback& on_epoch) {
  PolicyParams theta = init;
  // Proposal pruning is disabled during pre-training: one policy acts over
  // the full candidate set.
  TrainContext pre = ctx;
  pre.k = std::numeric_limits<int>::max();

  double peak_return = -1.0;
  int stalled = 0;
  std::uint64_t iter = 0;

  for (int epoch = 0; epoch < schedule.pre_epochs; ++epoch) {
    double epoch_uti = 0.0, epoch_num = 0.0, epoch_gnorm = 0.0;
    int epoch_eps = 0;
    for (int b = 0; b < schedule.batches_per_epoch; ++b, ++iter) {
      std::vector<double> outer(theta.theta.size(), 0.0);
      double iter_return = 0.0;
      for (int task = 0; task < meta.tasks_per_batch; ++task) {
        std::uint64_t task_seed = mix_seed(seed, iter * 1000 + task);
        DistributionSpec spec = sample_distribution(ctx.item_set, task_seed);

        auto inner_x = sample_task_instances(spec, ctx.item_set, pre,
                                             meta.inner_instances, mix_seed(task_seed, 1));
        auto inner_trajs = rollout_batch(theta, theta, inner_x, pre, mix_seed(task_seed, 2));
        double inner_base = batch_mean_return(inner_trajs);
        auto inner_grad = policy_gradient(theta, inner_trajs, Role::Selection, inner_base);
        // Ascent on return == descent on the surrogate loss.
        PolicyParams adapted = theta;
        for (std::size_t i = 0; i < adapted.theta.size(); ++i)
          adapted.theta[i] += meta.alpha * inner_grad[i];

        auto outer_x = sample_task_instances(spec, ctx.item_set, pre,
                                             meta.inner_instances, mix_seed(task_seed, 3));
        auto outer_trajs =
            rollout_batch(adapted, adapted, outer_x, pre, mix_seed(task_seed, 4));
        double outer_base = batch_mean_return(outer_trajs);
        // First-order approximation: gradient evaluated at the adapted
        // weights, chain rule through the inner step dropped.
        auto g = policy_gradient(adapted, outer_trajs, Role::Selection, outer_base);
        for (std::size_t i = 0; i < outer.size(); ++i) outer[i] += g[i];

        for (const auto& t : outer_trajs) {
          epoch_uti += t.ret;
          epoch_num += t.num_packed;
          ++epoch_eps;
          iter_return += t.ret;
        }
      }
      check_finite(outer, "gradient in maml_pretrain");
      double scale = meta.beta / meta.tasks_per_batch;
      for (std::size_t i = 0; i < theta.theta.size(); ++i) theta.theta[i] += scale * outer[i];
      epoch_gnorm += norm2(outer) * scale;

      iter_return /= static_cast<double>(meta.tasks_per_batch * meta.inner_instances);
      peak_return = std::max(peak_return, iter_return);
      if (peak_return > 0.0 && iter_return < 0.1 * peak_return) {
        if (++stalled >= 20)
          throw std::runtime_error("maml_pretrain: diverged (mean return below 10% of peak"
                                   " for 20 consecutive meta-iterations)");
      } else {
        stalled = 0;
      }
    }
    if (on_epoch && epoch_eps > 0) {
      on_epoch(epoch, epoch_uti / epoch_eps, epoch_num / epoch_eps,
               epoch_gnorm / schedule.batches_per_epoch);
    }
  }
  return theta;
}

namespace {

// One decoupled update of `role` on a freshly sampled task distribution,
// optionally wrapped in the same two-stage meta scheme as pre-training.
void post_train_batch(PolicyParams& proposal, PolicyParams& selection, Role role,
                      const TrainContext& ctx, const MetaConfig& meta,
                      const TrainSchedule& schedule, EmaBaseline& baseline,
                      std::uint64_t batch_seed, double& uti_acc, double& num_acc,
                      int& eps_acc, double& gnorm_acc) {
  PolicyParams& active = (role == Role::Proposal) ? proposal : selection;

  auto do_update = [&](const DistributionSpec& spec, int n, std::uint64_t s,
                       PolicyParams& params, double lr) {
    auto x = sample_task_instances(spec, ctx.item_set, ctx, n, mix_seed(s, 11));
    const PolicyParams& p = (role == Role::Proposal) ? params : proposal;
    const PolicyParams& q = (role == Role::Proposal) ? selection : params;
    auto trajs = rollout_batch(p, q, x, ctx, mix_seed(s, 12));
    double mean_ret = batch_mean_return(trajs);
    double base = baseline.get(mean_ret);
    auto grad = policy_gradient(params, trajs, role, base);
    check_finite(grad, "gradient in post_train");
    baseline.observe(mean_ret);
    for (std::size_t i = 0; i < params.theta.size(); ++i) params.theta[i] += lr * grad[i];
    for (const auto& t : trajs) {
      uti_acc += t.ret;
      num_acc += t.num_packed;
      ++eps_acc;
    }
    gnorm_acc += norm2(grad) * lr;
  };

  if (!ctx.meta_post) {
    DistributionSpec spec = sample_distribution(ctx.item_set, mix_seed(batch_seed, 1));
    do_update(spec, schedule.batch_size, batch_seed, active, schedule.post_lr);
    return;
  }

  // Meta wrapper: inner-adapt the active role per task, outer grads taken
  // at the adapted weights (first order), averaged over tasks.
  std::vector<double> outer(active.theta.size(), 0.0);
  for (int task = 0; task < meta.tasks_per_batch; ++task) {
    std::uint64_t task_seed = mix_seed(batch_seed, 100 + task);
    DistributionSpec spec = sample_distribution(ctx.item_set, task_seed);

    PolicyParams adapted = active;
    {
      auto x = sample_task_instances(spec, ctx.item_set, ctx, meta.inner_instances,
                                     mix_seed(task_seed, 21));
      const PolicyParams& p = (role == Role::Proposal) ? adapted : proposal;
      const PolicyParams& q = (role == Role::Proposal) ? selection : adapted;
      auto trajs = rollout_batch(p, q, x, ctx, mix_seed(task_seed, 22));
      auto grad = policy_gradient(adapted, trajs, role, batch_mean_return(trajs));
      for (std::size_t i = 0; i < adapted.theta.size(); ++i)
        adapted.theta[i] += meta.alpha * grad[i];
    }
    {
      auto x = sample_task_instances(spec, ctx.item_set, ctx, meta.inner_instances,
                                     mix_seed(task_seed, 23));
      const PolicyParams& p = (role == Role::Proposal) ? adapted : proposal;
      const PolicyParams& q = (role == Role::Proposal) ? selection : adapted;
      auto trajs = rollout_batch(p, q, x, ctx, mix_seed(task_seed, 24));
      double mean_ret = batch_mean_return(trajs);
      auto g = policy_gradient(adapted, trajs, role, baseline.get(mean_ret));
      baseline.observe(mean_ret);
      for (std::size_t i = 0; i < outer.size(); ++i) outer[i] += g[i];
      for (const auto& t : trajs) {
        uti_acc += t.ret;
        num_acc += t.num_packed;
        ++eps_acc;
      }
    }
  }
  check_finite(outer, "gradient in post_train (meta)");
  double scale = schedule.post_lr / meta.tasks_per_batch;
  for (std::size_t i = 0; i < active.theta.size(); ++i) active.theta[i] += scale * outer[i];
  gnorm_acc += norm2(outer) * scale;
}

}  // namespace

std::pair<PolicyParams, PolicyParams> post_train(const PolicyParams& proposal_in,
                                                 const PolicyParams& selection_in,
                                                 const TrainContext& ctx,
                                                 const MetaConfig& meta,
                                                 const TrainSchedule& schedule,
                                                 std::uint64_t seed,
                                                 const EpochCallback& on_epoch) {
  PolicyParams proposal = proposal_in;
  PolicyParams selection = selection_in;
  EmaBaseline baseline;
  std::uint64_t iter = 0;
  for (int epoch = 0; epoch < schedule.post_epochs; ++epoch) {
    double uti = 0.0, num = 0.0, gnorm = 0.0;
    int eps = 0;
    for (int b = 0; b < schedule.batches_per_epoch; ++b, ++iter) {
      Role role = (iter % 2 == 0) ? Role::Proposal : Role::Selection;
      post_train_batch(proposal, selection, role, ctx, meta, schedule, baseline,
                       mix_seed(seed, iter), uti, num, eps, gnorm);
    }
    if (on_epoch && eps > 0)
      on_epoch(epoch, uti / eps, num / eps, gnorm / schedule.batches_per_epoch);
  }
  return {proposal, selection};
}

PolicyParams adapt_online(const PolicyParams& proposal_fixed, PolicyParams selection,
                          const std::vector<DistributionSpec>& test_dists,
                          const ItemSet& test_set, const TrainContext& ctx,
                          int adaptation_batches, int batch_size, double lr,
                          std::uint64_t seed) {
  if (test_dists.empty()) throw std::invalid_argument("adapt_online: no distributions");
  EmaBaseline baseline;
  for (int b = 0; b < adaptation_batches; ++b) {
    const DistributionSpec& spec = test_dists[b % test_dists.size()];
    std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(b));
    std::vector<Instance> x;
    x.reserve(batch_size);
    for (int i = 0; i < batch_size; ++i) {
      x.push_back(sample_instance(spec, test_set, ctx.episode_len, ctx.pack.mode,
                                  mix_seed(s, static_cast<std::uint64_t>(i))));
    }
    auto trajs = rollout_batch(proposal_fixed, selection, x, ctx, mix_seed(s, 777));
    double mean_ret = batch_mean_return(trajs);
    selection = policy_gradient_update(selection, trajs, Role::Selection, lr,
                                       baseline.get(mean_ret));
    baseline.observe(mean_ret);
  }
  return selection;
}

EpisodeResult run_episode_argmax(const PolicyParams& proposal,
                                 const PolicyParams& selection,
                                 const Instance& instance, const TrainContext& ctx) {
  TrainContext eval_ctx = ctx;
  eval_ctx.keep_steps = false;
  Rng rng(1);  // argmax mode draws nothing
  Trajectory t = rollout_episode(proposal, selection, instance, eval_ctx,
                                 SelectMode::Argmax, rng);
  return EpisodeResult{t.ret, t.num_packed};
}

std::vector<EpisodeResult> evaluate_dataset(const PolicyParams& proposal,
                                            const PolicyParams& selection,
                                            const Dataset& ds, const TrainContext& ctx,
                                            int workers) {
  std::vector<const Instance*> flat;
  for (const auto& v : ds.instances)
    for (const auto& inst : v) flat.push_back(&inst);
  std::vector<EpisodeResult> results(flat.size());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      results[i] = run_episode_argmax(proposal, selection, *flat[i], ctx);
  };

  workers = std::max(1, workers);
  if (workers == 1 || flat.size() < 2) {
    work(0, flat.size());
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (flat.size() + workers - 1) / workers;
    for (int wi = 0; wi < workers; ++wi) {
      std::size_t begin = wi * chunk;
      std::size_t end = std::min(flat.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(work, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return results;
}

double mean_uti(const std::vector<EpisodeResult>& results) {
  double s = 0.0;
  for (const auto& r : results) s += r.uti;
  return results.empty() ? 0.0 : s / results.size();
}

double mean_num(const std::vector<EpisodeResult>& results) {
  double s = 0.0;
  for (const auto& r : results) s += r.num_packed;
  return results.empty() ? 0.0 : s / results.size();
}

}  // namespace packrl
