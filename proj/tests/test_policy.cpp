#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <set>

#include "packrl/env.hpp"
#include "packrl/policy.hpp"
#include "packrl/rng.hpp"

using namespace packrl;

namespace {

Instance make_instance(std::vector<Dim3> items) {
  Instance inst;
  inst.items = std::move(items);
  return inst;
}

FeatureMatrix random_feats(Rng& rng, std::size_t n, int dim) {
  FeatureMatrix feats(n, FeatureVector(dim));
  for (auto& f : feats)
    for (double& v : f) v = rng.uniform(-1.0, 1.0);
  return feats;
}

double log_prob(const PolicyParams& p, const FeatureMatrix& feats, std::size_t chosen) {
  return std::log(score_and_softmax(p, feats)[chosen]);
}

}  // namespace

TEST_CASE("features of the corner cube on an empty container") {
  auto s = reset(make_instance({{10, 10, 10}}), make_cube(20), PackConfig::discrete());
  REQUIRE(s.candidates.size() == 4);
  auto f = featurize(s, s.candidates[0]);  // placement (0, 0, 0)
  REQUIRE(f.size() == static_cast<std::size_t>(kFeatureDim));
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 0.0);
  CHECK(f[2] == 0.0);
  CHECK(f[3] == doctest::Approx(0.5));
  CHECK(f[4] == doctest::Approx(0.5));
  CHECK(f[5] == doctest::Approx(0.5));
  CHECK(f[6] == doctest::Approx(0.125));  // 10^3 / 20^3
  CHECK(f[7] == 1.0);                     // floor placement is fully supported
  CHECK(f[8] == 0.0);                     // no gap below a floor placement
  CHECK(f[9] == doctest::Approx(0.5));    // max height 10 / 20
  CHECK(f[10] == doctest::Approx(3.0 / 64.0));  // three slabs remain
  CHECK(f[11] == doctest::Approx(1.5));   // 3 * 4000 / 8000 (slabs overlap)
  // quarter of the surface at 10, mean 2.5, mean abs deviation 3.75
  CHECK(f[12] == doctest::Approx(3.75 / 20.0));
}

TEST_CASE("wasted-height feature measures the gap under an elevated placement") {
  auto s = reset(make_instance({{2, 4, 2}, {4, 4, 2}}), make_cube(4),
                 PackConfig::discrete(4));
  step(s, 0);  // first item at the origin
  REQUIRE(s.candidates.size() == 1);
  REQUIRE(s.candidates[0].placement == Placement{0, 0, 2});
  auto f = featurize(s, s.candidates[0]);
  CHECK(f[2] == doctest::Approx(0.5));
  CHECK(f[6] == doctest::Approx(0.75));   // (16 + 32) / 64
  CHECK(f[7] == doctest::Approx(0.5));    // half the footprint rests on the box
  CHECK(f[8] == doctest::Approx(0.25));   // mean gap (0 + 2)/2 over H = 4
  CHECK(f[9] == doctest::Approx(1.0));
  CHECK(f[10] == doctest::Approx(1.0 / 64.0));  // one slab left under the overhang
  CHECK(f[11] == doctest::Approx(0.25));  // 2*4*2 / 64
  CHECK(f[12] == doctest::Approx(-0.25)); // surface flattens completely
}

TEST_CASE("softmax closed forms and stability") {
  auto p = softmax({0.0, 0.0});
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));

  auto q = softmax({std::log(1.0), std::log(3.0)});
  CHECK(q[0] == doctest::Approx(0.25));
  CHECK(q[1] == doctest::Approx(0.75));

  // shift invariance and large-magnitude stability
  auto r = softmax({1000.0, 1000.0 + std::log(3.0)});
  CHECK(r[0] == doctest::Approx(0.25));
  CHECK(r[1] == doctest::Approx(0.75));
  for (double v : r) CHECK(std::isfinite(v));

  CHECK_THROWS_AS(score_and_softmax(init_params({2, 0, 0}, 1), {}),
                  std::invalid_argument);
}

TEST_CASE("linear scorer computes dot products plus bias") {
  ScorerArch arch{3, 0, 0};
  PolicyParams p;
  p.arch = arch;
  p.theta = {1.0, -2.0, 0.5, 0.25};  // weights then bias
  FeatureMatrix feats = {{1.0, 1.0, 2.0}, {0.0, 0.0, 0.0}};
  auto logits = score_logits(p, feats);
  CHECK(logits[0] == doctest::Approx(1.0 - 2.0 + 1.0 + 0.25));
  CHECK(logits[1] == doctest::Approx(0.25));
}

TEST_CASE("analytic log-prob gradient matches central finite differences") {
  const double eps = 1e-5;
  Rng rng(314);
  for (int arch_layers : {0, 1}) {
    ScorerArch arch{kFeatureDim, 8, arch_layers};
    for (int trial = 0; trial < 50; ++trial) {
      auto p = init_params(arch, rng.next_u64(), 0.3);
      std::size_t n = 1 + rng.uniform_index(7);
      auto feats = random_feats(rng, n, arch.feature_dim);
      std::size_t chosen = rng.uniform_index(n);
      auto grad = log_prob_grad(p, feats, chosen);
      REQUIRE(grad.size() == p.theta.size());
      for (std::size_t i = 0; i < p.theta.size(); ++i) {
        auto plus = p, minus = p;
        plus.theta[i] += eps;
        minus.theta[i] -= eps;
        double fd = (log_prob(plus, feats, chosen) - log_prob(minus, feats, chosen)) /
                    (2.0 * eps);
        CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
      }
    }
  }
  CHECK_THROWS_AS(log_prob_grad(init_params({kFeatureDim, 8, 0}, 1),
                                random_feats(rng, 2, kFeatureDim), 2),
                  std::out_of_range);
}

TEST_CASE("gradient vanishes for a single candidate") {
  Rng rng(9);
  for (int layers : {0, 1}) {
    auto p = init_params({kFeatureDim, 8, layers}, 77);
    auto grad = log_prob_grad(p, random_feats(rng, 1, kFeatureDim), 0);
    for (double g : grad) CHECK(g == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("propose keeps the k most probable candidates in ascending order") {
  ScorerArch arch{1, 0, 0};
  PolicyParams p;
  p.arch = arch;
  p.theta = {1.0, 0.0};  // logit == feature value
  FeatureMatrix feats = {{0.1}, {3.0}, {-1.0}, {2.0}};
  auto ps = propose(p, feats, 2);
  CHECK(ps.indices == std::vector<std::size_t>{1, 3});

  // k larger than the candidate count keeps everything
  CHECK(propose(p, feats, 99).indices == std::vector<std::size_t>{0, 1, 2, 3});
  // k < 1 is clamped to one candidate
  CHECK(propose(p, feats, 0).indices == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(propose(p, {}, 2), std::invalid_argument);
}

TEST_CASE("propose breaks probability ties by candidate order") {
  PolicyParams p;
  p.arch = {2, 0, 0};
  p.theta = {0.0, 0.0, 0.0};  // all logits equal
  Rng rng(4);
  auto feats = random_feats(rng, 5, 2);
  CHECK(propose(p, feats, 3).indices == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("proposal sets are nested as k grows") {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    auto p = init_params({kFeatureDim, 8, trial % 2}, rng.next_u64());
    auto feats = random_feats(rng, 2 + rng.uniform_index(9), kFeatureDim);
    std::set<std::size_t> prev;
    for (int k = 1; k <= static_cast<int>(feats.size()); ++k) {
      auto ps = propose(p, feats, k);
      CHECK(ps.indices.size() == static_cast<std::size_t>(k));
      std::set<std::size_t> cur(ps.indices.begin(), ps.indices.end());
      for (std::size_t i : prev) CHECK(cur.count(i) == 1);
      prev = std::move(cur);
    }
  }
}

TEST_CASE("select over a singleton proposal is forced") {
  auto sel = init_params({kFeatureDim, 8, 1}, 1);
  auto prop = init_params({kFeatureDim, 8, 1}, 2);
  Rng rng(3);
  auto feats = random_feats(rng, 4, kFeatureDim);
  auto ps = propose(prop, feats, 1);
  auto c = select(sel, feats, ps, SelectMode::Sample, rng, &prop);
  CHECK(c.cand_index == ps.indices[0]);
  CHECK(c.prop_index == 0);
  CHECK(c.logp_selection == doctest::Approx(0.0));
  auto full = score_and_softmax(prop, feats);
  CHECK(c.logp_proposal == doctest::Approx(std::log(full[c.cand_index])));

  ProposalSet empty;
  CHECK_THROWS_AS(select(sel, feats, empty, SelectMode::Sample, rng),
                  std::invalid_argument);
}

TEST_CASE("sampling frequencies follow the selection softmax") {
  ScorerArch arch{1, 0, 0};
  PolicyParams sel;
  sel.arch = arch;
  sel.theta = {1.0, 0.0};
  FeatureMatrix feats = {{std::log(1.0)}, {std::log(2.0)}, {std::log(5.0)}};
  // selection probabilities 1/8, 2/8, 5/8
  PolicyParams prop;
  prop.arch = arch;
  prop.theta = {0.0, 0.0};
  auto ps = propose(prop, feats, 3);

  const int n = 20000;
  std::vector<int> counts(3, 0);
  Rng rng(2718);
  for (int i = 0; i < n; ++i) {
    auto local = ps;
    counts[select(sel, feats, local, SelectMode::Sample, rng).cand_index] += 1;
  }
  const double expect[3] = {1.0 / 8, 2.0 / 8, 5.0 / 8};
  for (int i = 0; i < 3; ++i) {
    double sigma = std::sqrt(n * expect[i] * (1.0 - expect[i]));
    CHECK(std::abs(counts[i] - n * expect[i]) <= 3.0 * sigma);
  }
}

TEST_CASE("argmax selection ignores the random stream") {
  auto sel = init_params({kFeatureDim, 8, 1}, 5);
  auto prop = init_params({kFeatureDim, 8, 1}, 6);
  Rng a(1), b(999);
  Rng fr(12);
  auto feats = random_feats(fr, 6, kFeatureDim);
  auto ps1 = propose(prop, feats, 4);
  auto ps2 = ps1;
  auto c1 = select(sel, feats, ps1, SelectMode::Argmax, a);
  auto c2 = select(sel, feats, ps2, SelectMode::Argmax, b);
  CHECK(c1.cand_index == c2.cand_index);
  double best = *std::max_element(ps1.probs.begin(), ps1.probs.end());
  CHECK(ps1.probs[c1.prop_index] == doctest::Approx(best));
}

TEST_CASE("decomposed choice at full k matches the plain selection softmax") {
  auto sel = init_params({kFeatureDim, 8, 1}, 11);
  auto prop = init_params({kFeatureDim, 8, 1}, 12);
  Rng rng(13);
  auto feats = random_feats(rng, 5, kFeatureDim);
  auto ps = propose(prop, feats, static_cast<int>(feats.size()));
  REQUIRE(ps.indices.size() == feats.size());
  Rng r2(77);
  select(sel, feats, ps, SelectMode::Sample, r2);
  auto direct = score_and_softmax(sel, feats);
  for (std::size_t i = 0; i < feats.size(); ++i)
    CHECK(ps.probs[i] == doctest::Approx(direct[i]));
}

TEST_CASE("checkpoints round-trip exactly and verify their digest") {
  auto p = init_params({kFeatureDim, 32, 1}, 42);
  std::string path = "/tmp/packrl_ckpt_test.json";
  save_checkpoint(p, path);
  auto q = load_checkpoint(path);
  CHECK(q.arch == p.arch);
  CHECK(q.theta == p.theta);
  CHECK(params_digest(q) == params_digest(p));

  // corrupting a parameter must be detected
  auto bad = p;
  bad.theta[0] += 1.0;
  CHECK(params_digest(bad) != params_digest(p));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
}

TEST_CASE("parameter initialization is reproducible and seed-sensitive") {
  ScorerArch arch{kFeatureDim, 32, 1};
  auto a = init_params(arch, 7);
  auto b = init_params(arch, 7);
  auto c = init_params(arch, 8);
  CHECK(a.theta == b.theta);
  CHECK(a.theta != c.theta);
  CHECK(a.theta.size() == static_cast<std::size_t>(arch.param_count()));
  ScorerArch lin{kFeatureDim, 32, 0};
  CHECK(init_params(lin, 1).theta.size() == static_cast<std::size_t>(kFeatureDim + 1));
}
