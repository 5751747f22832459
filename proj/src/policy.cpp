#include "packrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "packrl/digest.hpp"

namespace packrl {

using nlohmann::json;

PolicyParams init_params(const ScorerArch& arch, std::uint64_t seed, double scale) {
  Rng rng(seed);
  PolicyParams p;
  p.arch = arch;
  p.theta.resize(arch.param_count());
  for (double& v : p.theta) v = scale * rng.normal();
  return p;
}

std::uint64_t params_digest(const PolicyParams& p) {
  std::uint64_t h = fnv1a(&p.arch.feature_dim, sizeof(int));
  h = fnv1a(&p.arch.hidden, sizeof(int), h);
  h = fnv1a(&p.arch.layers, sizeof(int), h);
  if (!p.theta.empty()) h = fnv1a(p.theta.data(), p.theta.size() * sizeof(double), h);
  return h;
}

void save_checkpoint(const PolicyParams& p, const std::string& path) {
  json j = {{"version", p.version},
            {"arch",
             {{"feature_dim", p.arch.feature_dim},
              {"hidden", p.arch.hidden},
              {"layers", p.arch.layers}}},
            {"theta", p.theta},
            {"digest", digest_hex(params_digest(p))}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump(2) << "\n";
}

PolicyParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  json j = json::parse(in);
  PolicyParams p;
  p.version = j.at("version").get<std::string>();
  p.arch.feature_dim = j.at("arch").at("feature_dim").get<int>();
  p.arch.hidden = j.at("arch").at("hidden").get<int>();
  p.arch.layers = j.at("arch").at("layers").get<int>();
  p.theta = j.at("theta").get<std::vector<double>>();
  if (static_cast<int>(p.theta.size()) != p.arch.param_count())
    throw std::runtime_error("checkpoint parameter count does not match architecture");
  if (j.contains("digest") && j.at("digest").get<std::string>() != digest_hex(params_digest(p)))
    throw std::runtime_error("checkpoint digest mismatch: " + path);
  return p;
}

FeatureVector featurize(const PackingState& state, const CandidateAction& cand) {
  const double L = state.container.dim.l;
  const double W = state.container.dim.w;
  const double H = state.container.dim.h;
  const Dim3& d = cand.dim;
  const Placement& pos = cand.placement;

  FeatureVector f(kFeatureDim);
  f[0] = pos.x / L;
  f[1] = pos.y / W;
  f[2] = pos.z / H;
  f[3] = d.l / L;
  f[4] = d.w / W;
  f[5] = d.h / H;
  f[6] = (state.packed_volume() + d.volume()) / state.container.volume();
  f[7] = pos.z <= kGeomEps
             ? 1.0
             : state.heightmap.support_fraction(pos.x, pos.y, d.l, d.w, pos.z);

  double mad_before = state.heightmap.mean_abs_deviation();
  Heightmap hm = state.heightmap;
  PlacedBox b{d, pos};
  // Mean gap between the resting plane and the surface below the footprint.
  double gap_sum = 0.0;
  {
    int n = 0;
    double cx = L / state.heightmap.rx();
    double cy = W / state.heightmap.ry();
    int ix0 = std::max(0, static_cast<int>(std::floor((pos.x + kGeomEps) / cx)));
    int ix1 = std::min(state.heightmap.rx(),
                       static_cast<int>(std::ceil((pos.x + d.l - kGeomEps) / cx)));
    int iy0 = std::max(0, static_cast<int>(std::floor((pos.y + kGeomEps) / cy)));
    int iy1 = std::min(state.heightmap.ry(),
                       static_cast<int>(std::ceil((pos.y + d.w - kGeomEps) / cy)));
    for (int iy = iy0; iy < iy1; ++iy) {
      for (int ix = ix0; ix < ix1; ++ix) {
        gap_sum += std::max(0.0, pos.z - state.heightmap.cell(ix, iy));
        ++n;
      }
    }
    if (n > 0) gap_sum /= n;
  }
  f[8] = gap_sum / H;

  hm.commit(b);
  f[9] = hm.max_height() / H;

  auto spaces_after = ems_update(state.spaces, b);
  f[10] = static_cast<double>(spaces_after.size()) / 64.0;
  double sv = 0.0;
  for (const auto& s : spaces_after) sv += s.volume();
  f[11] = sv / state.container.volume();

  f[12] = (hm.mean_abs_deviation() - mad_before) / H;
  return f;
}

FeatureMatrix featurize_all(const PackingState& state) {
  FeatureMatrix feats;
  feats.reserve(state.candidates.size());
  for (const auto& c : state.candidates.actions) feats.push_back(featurize(state, c));
  return feats;
}

namespace {

double logit_one(const PolicyParams& p, const FeatureVector& f) {
  const ScorerArch& a = p.arch;
  if (a.layers == 0) {
    double s = p.theta[a.feature_dim];
    for (int i = 0; i < a.feature_dim; ++i) s += p.theta[i] * f[i];
    return s;
  }
  // theta layout: W1 (hidden x dim, row-major), b1, w2, b2
  const double* W1 = p.theta.data();
  const double* b1 = W1 + a.hidden * a.feature_dim;
  const double* w2 = b1 + a.hidden;
  const double b2 = w2[a.hidden];
  double s = b2;
  for (int i = 0; i < a.hidden; ++i) {
    double pre = b1[i];
    const double* row = W1 + i * a.feature_dim;
    for (int k = 0; k < a.feature_dim; ++k) pre += row[k] * f[k];
    s += w2[i] * std::tanh(pre);
  }
  return s;
}

// d logit / d theta accumulated into `grad` with weight `coef`.
void accumulate_logit_grad(const PolicyParams& p, const FeatureVector& f, double coef,
                           std::vector<double>& grad) {
  const ScorerArch& a = p.arch;
  if (a.layers == 0) {
    for (int i = 0; i < a.feature_dim; ++i) grad[i] += coef * f[i];
    grad[a.feature_dim] += coef;
    return;
  }
  const double* W1 = p.theta.data();
  const double* b1 = W1 + a.hidden * a.feature_dim;
  const double* w2 = b1 + a.hidden;
  const int off_b1 = a.hidden * a.feature_dim;
  const int off_w2 = off_b1 + a.hidden;
  const int off_b2 = off_w2 + a.hidden;
  for (int i = 0; i < a.hidden; ++i) {
    double pre = b1[i];
    const double* row = W1 + i * a.feature_dim;
    for (int k = 0; k < a.feature_dim; ++k) pre += row[k] * f[k];
    double t = std::tanh(pre);
    grad[off_w2 + i] += coef * t;
    double back = coef * w2[i] * (1.0 - t * t);
    grad[off_b1 + i] += back;
    for (int k = 0; k < a.feature_dim; ++k) grad[i * a.feature_dim + k] += back * f[k];
  }
  grad[off_b2] += coef;
}

}  // namespace

std::vector<double> score_logits(const PolicyParams& p, const FeatureMatrix& feats) {
  std::vector<double> logits(feats.size());
  for (std::size_t i = 0; i < feats.size(); ++i) logits[i] = logit_one(p, feats[i]);
  return logits;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - m);
    total += probs[i];
  }
  for (double& v : probs) v /= total;
  return probs;
}

std::vector<double> score_and_softmax(const PolicyParams& p, const FeatureMatrix& feats) {
  if (feats.empty()) throw std::invalid_argument("score_and_softmax: no candidates");
  return softmax(score_logits(p, feats));
}

std::vector<double> log_prob_grad(const PolicyParams& p, const FeatureMatrix& feats,
                                  std::size_t chosen) {
  if (chosen >= feats.size()) throw std::out_of_range("log_prob_grad: bad index");
  auto probs = score_and_softmax(p, feats);
  std::vector<double> grad(p.theta.size(), 0.0);
  for (std::size_t j = 0; j < feats.size(); ++j) {
    double coef = (j == chosen ? 1.0 : 0.0) - probs[j];
    accumulate_logit_grad(p, feats[j], coef, grad);
  }
  return grad;
}

ProposalSet propose(const PolicyParams& proposal_params, const FeatureMatrix& feats,
                    int k) {
  if (feats.empty()) throw std::invalid_argument("propose: no candidates");
  auto probs = score_and_softmax(proposal_params, feats);
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 1)),
                                           order.size());
  ProposalSet ps;
  ps.indices.assign(order.begin(), order.begin() + keep);
  std::sort(ps.indices.begin(), ps.indices.end());
  return ps;
}

Choice select(const PolicyParams& selection_params, const FeatureMatrix& feats,
              ProposalSet& proposal, SelectMode mode, Rng& rng,
              const PolicyParams* proposal_params) {
  if (proposal.indices.empty()) throw std::invalid_argument("select: empty proposal");
  FeatureMatrix sub;
  sub.reserve(proposal.indices.size());
  for (std::size_t idx : proposal.indices) sub.push_back(feats[idx]);
  proposal.probs = score_and_softmax(selection_params, sub);

  std::size_t pick;
  if (mode == SelectMode::Argmax) {
    pick = static_cast<std::size_t>(
        std::max_element(proposal.probs.begin(), proposal.probs.end()) -
        proposal.probs.begin());
  } else {
    pick = rng.categorical(proposal.probs);
  }

  Choice c;
  c.prop_index = pick;
  c.cand_index = proposal.indices[pick];
  c.logp_selection = std::log(std::max(proposal.probs[pick], 1e-300));
  if (proposal_params != nullptr) {
    auto full = score_and_softmax(*proposal_params, feats);
    c.logp_proposal = std::log(std::max(full[c.cand_index], 1e-300));
  }
  return c;
}

}  // namespace packrl
