#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "packrl/env.hpp"
#include "packrl/rng.hpp"

namespace packrl {

// Fixed per-candidate feature list; all length features are normalized by
// the container edge. See featurize() for the ordering.
inline constexpr int kFeatureDim = 13;

struct ScorerArch {
  int feature_dim = kFeatureDim;
  int hidden = 32;
  int layers = 1;  // 0 = linear scorer, 1 = one-hidden-layer tanh perceptron

  int param_count() const {
    if (layers == 0) return feature_dim + 1;
    return hidden * feature_dim + hidden + hidden + 1;
  }
  bool operator==(const ScorerArch&) const = default;
};

// Flat parameter vector of a differentiable scorer. The proposal and
// selection policies are two instances of this type; they never share
// storage.
struct PolicyParams {
  ScorerArch arch;
  std::vector<double> theta;
  std::string version = "packrl-policy-1";
};

PolicyParams init_params(const ScorerArch& arch, std::uint64_t seed, double scale = 0.1);

std::uint64_t params_digest(const PolicyParams& p);

// Versioned JSON checkpoint with a content digest.
void save_checkpoint(const PolicyParams& p, const std::string& path);
PolicyParams load_checkpoint(const std::string& path);

using FeatureVector = std::vector<double>;
using FeatureMatrix = std::vector<FeatureVector>;

// Features, in order:
//  0..2  placement x, y, z / edge
//  3..5  item l, w, h / edge
//  6     fill ratio after placement
//  7     support fraction under the footprint at the resting height
//  8     wasted height: mean gap between z and the surface under the footprint, / H
//  9     resulting max height / H
// 10     empty-space count after hypothetical placement / 64
// 11     total empty-space volume after hypothetical placement / container volume
// 12     heightmap flatness delta (mean abs deviation after - before) / H
FeatureVector featurize(const PackingState& state, const CandidateAction& cand);
FeatureMatrix featurize_all(const PackingState& state);

std::vector<double> score_logits(const PolicyParams& p, const FeatureMatrix& feats);
std::vector<double> softmax(const std::vector<double>& logits);
std::vector<double> score_and_softmax(const PolicyParams& p, const FeatureMatrix& feats);

// Analytic gradient of log softmax(logits)[chosen] w.r.t. all parameters.
std::vector<double> log_prob_grad(const PolicyParams& p, const FeatureMatrix& feats,
                                  std::size_t chosen);

// The k highest-probability candidates under the proposal policy, in
// candidate order; ties broken by the deterministic (z, y, x) order.
struct ProposalSet {
  std::vector<std::size_t> indices;  // into the candidate set, ascending
  std::vector<double> probs;         // renormalized selection probabilities
};

ProposalSet propose(const PolicyParams& proposal_params, const FeatureMatrix& feats,
                    int k);

enum class SelectMode { Sample, Argmax };

struct Choice {
  std::size_t cand_index = 0;  // into the full candidate set
  std::size_t prop_index = 0;  // into the proposal set
  double logp_proposal = 0.0;  // log pi^p(a | full candidate set)
  double logp_selection = 0.0; // log pi^s(a | proposal set)
};

// Fills the proposal probabilities with the selection policy's softmax over
// the proposal subset, then samples (training) or takes the argmax
// (evaluation).
Choice select(const PolicyParams& selection_params, const FeatureMatrix& feats,
              ProposalSet& proposal, SelectMode mode, Rng& rng,
              const PolicyParams* proposal_params = nullptr);

}  // namespace packrl
