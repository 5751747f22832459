#include "packrl/oracle.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace packrl {

FutureSampler fixed_future(std::vector<Dim3> remaining) {
  return [remaining = std::move(remaining)](Rng&) { return remaining; };
}

FutureSampler distribution_future(const DistributionSpec& spec, const ItemSet& set,
                                  int len, Mode mode) {
  return [spec, set, len, mode](Rng& rng) {
    std::vector<Dim3> items;
    items.reserve(len);
    for (int i = 0; i < len; ++i) {
      Dim3 d = set.type_dims(rng.categorical(spec.probs));
      if (mode == Mode::Continuous) {
        d.l += rng.uniform(-0.5, 0.5);
        d.w += rng.uniform(-0.5, 0.5);
        d.h += rng.uniform(-0.5, 0.5);
      }
      items.push_back(d);
    }
    return items;
  };
}

namespace {

// Replace the unseen tail of the item stream with a sampled future.
PackingState with_future(const PackingState& state, const std::vector<Dim3>& future) {
  PackingState st = state;
  st.items.resize(st.cursor);
  st.items.insert(st.items.end(), future.begin(), future.end());
  return st;
}

std::size_t rollout_action(const PackingState& st, const RolloutPolicy& policy) {
  if (policy.proposal == nullptr || policy.selection == nullptr) {
    return 0;  // greedy lowest-(z, y, x) candidate
  }
  FeatureMatrix feats = featurize_all(st);
  ProposalSet ps = propose(*policy.proposal, feats, policy.k);
  Rng dummy(1);
  Choice c = select(*policy.selection, feats, ps, SelectMode::Argmax, dummy);
  return c.cand_index;
}

double rollout_to_terminal(PackingState st, const RolloutPolicy& policy) {
  while (!st.terminal) step(st, rollout_action(st, policy));
  return final_reward(st);
}

struct Node {
  std::unordered_map<std::size_t, std::unique_ptr<Node>> children;
  std::unordered_map<std::size_t, int> n;
  std::unordered_map<std::size_t, double> w;
  int visits = 0;
};

}  // namespace

MctsResult mcts_decide(const PackingState& state, const FutureSampler& sampler,
                       const MctsConfig& cfg, const RolloutPolicy& rollout,
                       const std::vector<std::size_t>* restrict_root) {
  if (state.terminal) throw std::logic_error("mcts_decide: state is terminal");
  if (cfg.simulations < 1) throw std::invalid_argument("mcts_decide: simulations < 1");

  const std::size_t n_root = state.candidates.size();
  auto root_allowed = [&](std::size_t i) {
    if (restrict_root == nullptr) return i < n_root;
    return std::find(restrict_root->begin(), restrict_root->end(), i) !=
           restrict_root->end();
  };

  Rng rng(cfg.seed ? cfg.seed : 0x6f7261636c65ULL);

  // Optimal frequency: per sampled future sequence, count the root action
  // that achieves the best rollout return.
  FrequencyTable table;
  table.freq.assign(n_root, 0.0);
  table.samples = cfg.num_futures;
  for (int f = 0; f < cfg.num_futures; ++f) {
    PackingState st = with_future(state, sampler(rng));
    double best_v = -1.0;
    std::size_t best_a = 0;
    for (std::size_t a = 0; a < n_root; ++a) {
      if (!root_allowed(a)) continue;
      PackingState child = st;
      step(child, a);
      double v = rollout_to_terminal(std::move(child), rollout);
      if (v > best_v + 1e-12) {
        best_v = v;
        best_a = a;
      }
    }
    table.freq[best_a] += 1.0;
  }
  for (double& v : table.freq) v /= static_cast<double>(cfg.num_futures);

  // UCT: every simulation draws a fresh future, descends by UCB, expands
  // one child, rolls out, and backs up the terminal utilization.
  Node root;
  for (int sim = 0; sim < cfg.simulations; ++sim) {
    PackingState st = with_future(state, sampler(rng));
    std::vector<std::pair<Node*, std::size_t>> path;
    Node* node = &root;
    double value = 0.0;
    while (true) {
      if (st.terminal) {
        value = final_reward(st);
        break;
      }
      std::vector<std::size_t> allowed;
      for (std::size_t a = 0; a < st.candidates.size(); ++a) {
        if (node != &root || root_allowed(a)) allowed.push_back(a);
      }
      if (allowed.empty()) {
        value = st.uti();
        break;
      }
      constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
      std::size_t pick = kNone;
      for (std::size_t a : allowed) {
        if (node->n.find(a) == node->n.end()) {
          pick = a;
          break;
        }
      }
      if (pick != kNone) {
        // expand
        path.emplace_back(node, pick);
        step(st, pick);
        value = rollout_to_terminal(std::move(st), rollout);
        break;
      }
      double best_ucb = -std::numeric_limits<double>::infinity();
      std::size_t best_a = allowed.front();
      for (std::size_t a : allowed) {
        int na = node->n.at(a);
        double mean = node->w.at(a) / na;
        double ucb = mean + cfg.exploration *
                                std::sqrt(std::log(std::max(node->visits, 1)) / na);
        if (ucb > best_ucb + 1e-15) {
          best_ucb = ucb;
          best_a = a;
        }
      }
      path.emplace_back(node, best_a);
      step(st, best_a);
      auto& child = node->children[best_a];
      if (!child) child = std::make_unique<Node>();
      node = child.get();
    }
    for (auto& [nd, a] : path) {
      nd->visits += 1;
      nd->n[a] += 1;
      nd->w[a] += value;
    }
  }

  MctsResult result;
  result.table = std::move(table);
  double best_mean = -std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  bool found = false;
  for (std::size_t a = 0; a < n_root; ++a) {
    if (!root_allowed(a)) continue;
    auto it = root.n.find(a);
    if (it == root.n.end()) continue;
    double mean = root.w.at(a) / it->second;
    if (mean > best_mean + 1e-12) {
      best_mean = mean;
      best = a;
      found = true;
    }
  }
  if (!found) {
    for (std::size_t a = 0; a < n_root; ++a) {
      if (root_allowed(a)) {
        best = a;
        break;
      }
    }
  }
  result.best_index = best;
  return result;
}

namespace {

double exhaustive_value(const PackingState& st, std::size_t& nodes, std::size_t guard) {
  if (st.terminal) return final_reward(st);
  double best = -1.0;
  for (std::size_t a = 0; a < st.candidates.size(); ++a) {
    if (++nodes > guard) throw std::runtime_error("exhaustive search: node guard exceeded");
    PackingState child = st;
    step(child, a);
    double v = exhaustive_value(child, nodes, guard);
    if (v > best + 1e-12) best = v;
  }
  return best;
}

}  // namespace

std::vector<double> exhaustive_root_values(const PackingState& state,
                                           std::size_t node_guard) {
  if (state.terminal) throw std::logic_error("exhaustive_root_values: terminal state");
  std::size_t nodes = 0;
  std::vector<double> values(state.candidates.size());
  for (std::size_t a = 0; a < state.candidates.size(); ++a) {
    if (++nodes > node_guard) throw std::runtime_error("exhaustive search: node guard exceeded");
    PackingState child = state;
    step(child, a);
    values[a] = exhaustive_value(child, nodes, node_guard);
  }
  return values;
}

ExhaustiveResult exhaustive_best(const PackingState& state, std::size_t node_guard) {
  auto values = exhaustive_root_values(state, node_guard);
  ExhaustiveResult r;
  r.best_return = -1.0;
  for (std::size_t a = 0; a < values.size(); ++a) {
    if (values[a] > r.best_return + 1e-12) {
      r.best_return = values[a];
      r.best_index = a;
    }
  }
  return r;
}

OracleAnalysis analyze_oracle(const PolicyParams& proposal, const PolicyParams& selection,
                              const std::vector<Instance>& instances,
                              const DistributionSpec& spec, const ItemSet& set,
                              const TrainContext& ctx, const MctsConfig& cfg,
                              const std::vector<int>& ks) {
  OracleAnalysis out;
  out.ks = ks;
  out.inclusion.assign(ks.size(), 0.0);
  RolloutPolicy rollout{&proposal, &selection, ctx.k};

  for (const auto& inst : instances) {
    PackingState state = reset(inst, ctx.container, ctx.pack);
    while (!state.terminal) {
      FeatureMatrix feats = featurize_all(state);
      auto probs = score_and_softmax(proposal, feats);

      int horizon = static_cast<int>(state.items.size() - state.cursor);
      MctsConfig step_cfg = cfg;
      step_cfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(out.decisions) + 1);
      FutureSampler sampler =
          horizon > 0 ? distribution_future(spec, set, horizon, ctx.pack.mode)
                      : fixed_future({});
      MctsResult mcts = mcts_decide(state, sampler, step_cfg, rollout);

      for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        auto ps = propose(proposal, feats, ks[ki]);
        if (std::find(ps.indices.begin(), ps.indices.end(), mcts.best_index) !=
            ps.indices.end())
          out.inclusion[ki] += 1.0;
      }

      // Rank candidates by policy probability; accumulate both curves.
      std::vector<std::size_t> order(probs.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
      if (order.size() > out.policy_prob.size()) {
        out.policy_prob.resize(order.size(), 0.0);
        out.optimal_freq.resize(order.size(), 0.0);
      }
      for (std::size_t r = 0; r < order.size(); ++r) {
        out.policy_prob[r] += probs[order[r]];
        out.optimal_freq[r] += mcts.table.freq[order[r]];
      }
      ++out.decisions;

      ProposalSet ps = propose(proposal, feats, ctx.k);
      Rng dummy(1);
      Choice c = select(selection, feats, ps, SelectMode::Argmax, dummy);
      step(state, c.cand_index);
    }
  }

  if (out.decisions > 0) {
    for (double& v : out.inclusion) v /= out.decisions;
    for (double& v : out.policy_prob) v /= out.decisions;
    for (double& v : out.optimal_freq) v /= out.decisions;
  }
  return out;
}

}  // namespace packrl
