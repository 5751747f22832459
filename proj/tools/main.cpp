// packrl: command-line surface for dataset generation, training, online
// adaptation, evaluation, and search-based analysis of the packing policies.
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime failure. Every
// command writes a manifest recording its resolved configuration and content
// digests of all inputs and outputs; re-running a command with
// `--config <manifest>` reproduces the artifacts.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "packrl/digest.hpp"
#include "packrl/oracle.hpp"
#include "packrl/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace packrl;

namespace {

constexpr int kManifestSchema = 1;

// Files created by the running command; removed if the command fails so a
// failed run never leaves partial artifacts behind.
struct OutputTracker {
  std::vector<std::string> files;

  void add(const std::string& path) { files.push_back(path); }
  void cleanup() {
    for (const auto& f : files) {
      std::error_code ec;
      fs::remove(f, ec);
    }
  }
};

// Accepts either a plain configuration object or a previously written
// manifest (in which case the embedded "config" object is used).
json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  json j = json::parse(in);
  if (j.contains("command") && j.contains("config")) return j.at("config");
  return j;
}

// Applies a config-file value only where the flag was not given explicitly.
struct Resolver {
  CLI::App* cmd;
  json cfg;

  template <class T>
  void get(const std::string& flag, const std::string& key, T& var) const {
    if (cmd->count(flag) == 0 && cfg.contains(key)) var = cfg.at(key).get<T>();
  }
};

int env_workers() {
  const char* v = std::getenv("PACKRL_WORKERS");
  if (v == nullptr) return 1;
  int n = std::atoi(v);
  return n >= 1 ? n : 1;
}

void write_manifest(const std::string& path, const std::string& command,
                    const json& config, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, OutputTracker& track) {
  json inputs_j = json::object();
  for (const auto& p : inputs) inputs_j[p] = digest_hex(file_digest(p));
  json outputs_j = json::object();
  for (const auto& p : outputs) outputs_j[p] = digest_hex(file_digest(p));
  json m = {{"schema", kManifestSchema},
            {"command", command},
            {"config", config},
            {"inputs", inputs_j},
            {"outputs", outputs_j}};
  track.add(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << m.dump(2) << "\n";
}

void write_text_file(const std::string& path, const std::string& body,
                     OutputTracker& track) {
  track.add(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << body;
}

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * fraction);
  return buf;
}

std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

// 95% normal confidence half-width of the mean, as a fraction.
double ci_half_width(const std::vector<EpisodeResult>& results) {
  if (results.size() < 2) return 0.0;
  double m = mean_uti(results);
  double ss = 0.0;
  for (const auto& r : results) ss += (r.uti - m) * (r.uti - m);
  double sd = std::sqrt(ss / (results.size() - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(results.size()));
}

TrainContext context_for_dataset(const Dataset& ds, double container_edge, int k) {
  TrainContext ctx;
  ctx.container = make_cube(container_edge);
  ctx.pack = ds.mode == Mode::Continuous ? PackConfig::continuous(container_edge)
                                         : PackConfig::discrete(container_edge);
  ctx.item_set = item_set_for(ds.subset);
  ctx.episode_len = ds.episode_len;
  ctx.k = k;
  return ctx;
}

// ---------------------------------------------------------------- gen ----

struct GenOptions {
  std::string subset = "Default";
  std::string mode = "discrete";
  std::uint64_t seed = 0;
  std::string out;
  int n_dists = 100;
  int n_instances = 64;
  int episode_len = 70;

  json to_json() const {
    return {{"subset", subset},         {"mode", mode},
            {"seed", seed},             {"out", out},
            {"n_dists", n_dists},       {"n_instances", n_instances},
            {"episode_len", episode_len}};
  }
};

int cmd_gen(const GenOptions& o) {
  OutputTracker track;
  try {
    std::string out = o.out.empty() ? o.subset + "_" + o.mode + ".jsonl" : o.out;
    Dataset ds = build_dataset(o.subset, mode_from_string(o.mode), o.seed, o.n_dists,
                               o.n_instances, o.episode_len);
    if (auto dir = fs::path(out).parent_path(); !dir.empty()) fs::create_directories(dir);
    track.add(out);
    write_dataset_jsonl(ds, out);
    GenOptions resolved = o;
    resolved.out = out;
    write_manifest(out + ".manifest.json", "gen", resolved.to_json(), {}, {out}, track);
    std::printf("wrote %s (%d distributions x %d instances)\n", out.c_str(), o.n_dists,
                o.n_instances);
    return 0;
  } catch (...) {
    track.cleanup();
    throw;
  }
}

// -------------------------------------------------------------- train ----

struct TrainOptions {
  std::string subset = "Default";
  std::string mode = "discrete";
  std::uint64_t seed = 0;
  std::string out_dir = "run";
  std::string profile = "desk";
  int k = 3;
  int layers = 1;
  int hidden = 32;
  double container_edge = 20.0;
  int episode_len = 70;
  bool meta_post = true;
  double alpha = 3e-3;
  double beta = 3e-3;
  double post_lr = 1e-3;
  int tasks_per_batch = 4;
  int inner_instances = 4;

  json to_json() const {
    return {{"subset", subset},       {"mode", mode},
            {"seed", seed},           {"out_dir", out_dir},
            {"profile", profile},     {"k", k},
            {"layers", layers},       {"hidden", hidden},
            {"container_edge", container_edge},
            {"episode_len", episode_len},
            {"meta_post", meta_post}, {"alpha", alpha},
            {"beta", beta},           {"post_lr", post_lr},
            {"tasks_per_batch", tasks_per_batch},
            {"inner_instances", inner_instances}};
  }
};

int cmd_train(const TrainOptions& o) {
  OutputTracker track;
  try {
    if (o.profile != "desk" && o.profile != "paper-scale")
      throw std::invalid_argument("unknown profile: " + o.profile);
    TrainSchedule sched =
        o.profile == "desk" ? TrainSchedule::desk() : TrainSchedule::paper_scale();
    MetaConfig meta;
    meta.alpha = o.alpha;
    meta.beta = o.beta;
    meta.tasks_per_batch = o.tasks_per_batch;
    meta.inner_instances = o.inner_instances;

    TrainContext ctx;
    ctx.container = make_cube(o.container_edge);
    ctx.pack = mode_from_string(o.mode) == Mode::Continuous
                   ? PackConfig::continuous(o.container_edge)
                   : PackConfig::discrete(o.container_edge);
    ctx.item_set = item_set_for(o.subset);
    ctx.episode_len = o.episode_len;
    ctx.k = o.k;
    ctx.meta_post = o.meta_post;

    fs::create_directories(o.out_dir);
    std::string log_path = o.out_dir + "/train_log.jsonl";
    track.add(log_path);
    std::ofstream log(log_path);
    if (!log) throw std::runtime_error("cannot write: " + log_path);
    auto logger = [&log](const char* phase) {
      return [&log, phase](int epoch, double u, double n, double g) {
        json rec = {{"phase", phase}, {"epoch", epoch}, {"mean_uti", u},
                    {"mean_num", n}, {"grad_norm", g}};
        log << rec.dump() << "\n";
        log.flush();
        std::printf("[%s] epoch %d  uti %s%%  num %s\n", phase, epoch, pct(u).c_str(),
                    fixed1(n).c_str());
      };
    };

    auto init = init_params({kFeatureDim, o.hidden, o.layers}, mix_seed(o.seed, 1));
    auto pretrained = maml_pretrain(init, ctx, meta, sched, mix_seed(o.seed, 2),
                                    logger("pre"));
    // both roles start from the same pre-trained vector
    auto [proposal, selection] = post_train(pretrained, pretrained, ctx, meta, sched,
                                            mix_seed(o.seed, 3), logger("post"));

    std::string pre_path = o.out_dir + "/pretrained.json";
    std::string prop_path = o.out_dir + "/proposal.json";
    std::string sel_path = o.out_dir + "/selection.json";
    track.add(pre_path);
    save_checkpoint(pretrained, pre_path);
    track.add(prop_path);
    save_checkpoint(proposal, prop_path);
    track.add(sel_path);
    save_checkpoint(selection, sel_path);
    write_manifest(o.out_dir + "/manifest.json", "train", o.to_json(), {},
                   {log_path, pre_path, prop_path, sel_path}, track);
    std::printf("wrote checkpoints under %s\n", o.out_dir.c_str());
    return 0;
  } catch (...) {
    track.cleanup();
    throw;
  }
}

// --------------------------------------------------------------- eval ----

struct EvalOptions {
  std::string proposal;
  std::string selection;
  std::string dataset;
  std::string out = "eval";
  int k = 3;
  double container_edge = 20.0;
  int workers = 0;  // 0 = take PACKRL_WORKERS

  json to_json() const {
    return {{"proposal", proposal}, {"selection", selection}, {"dataset", dataset},
            {"out", out},           {"k", k},
            {"container_edge", container_edge}, {"workers", workers}};
  }
};

std::string eval_text_row(const std::string& subset, const std::string& mode,
                          std::size_t episodes, double uti, double ci, double num) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %-11s %8zu %8s %6s %7s\n", subset.c_str(),
                mode.c_str(), episodes, pct(uti).c_str(), pct(ci).c_str(),
                fixed1(num).c_str());
  return buf;
}

int cmd_eval(const EvalOptions& o) {
  OutputTracker track;
  try {
    auto proposal = load_checkpoint(o.proposal);
    auto selection = load_checkpoint(o.selection);
    Dataset ds = read_dataset_jsonl(o.dataset);
    TrainContext ctx = context_for_dataset(ds, o.container_edge, o.k);
    int workers = o.workers > 0 ? o.workers : env_workers();

    auto results = evaluate_dataset(proposal, selection, ds, ctx, workers);
    double uti = mean_uti(results);
    double num = mean_num(results);
    double ci = ci_half_width(results);

    std::string text;
    text += "subset       mode        episodes   Uti(%)  +/-      Num\n";
    text += eval_text_row(ds.subset, to_string(ds.mode), results.size(), uti, ci, num);
    write_text_file(o.out + ".txt", text, track);

    std::string csv = "subset,mode,episodes,uti_pct,uti_ci_pct,num\n";
    csv += ds.subset + "," + to_string(ds.mode) + "," + std::to_string(results.size()) +
           "," + pct(uti) + "," + pct(ci) + "," + fixed1(num) + "\n";
    write_text_file(o.out + ".csv", csv, track);

    json report = {{"subset", ds.subset},
                   {"mode", to_string(ds.mode)},
                   {"episodes", results.size()},
                   {"uti_pct", 100.0 * uti},
                   {"uti_ci_pct", 100.0 * ci},
                   {"num", num},
                   {"workers", workers}};
    write_text_file(o.out + ".json", report.dump(2) + "\n", track);

    write_manifest(o.out + ".manifest.json", "eval", o.to_json(),
                   {o.proposal, o.selection, o.dataset},
                   {o.out + ".txt", o.out + ".csv", o.out + ".json"}, track);
    std::fputs(text.c_str(), stdout);
    return 0;
  } catch (...) {
    track.cleanup();
    throw;
  }
}

// -------------------------------------------------------------- adapt ----

struct AdaptOptions {
  std::string proposal;
  std::string selection;
  std::string dataset;
  std::string out_dir = "adapt";
  int batches = 50;
  int batch_size = 16;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  int k = 3;
  double container_edge = 20.0;
  int workers = 0;

  json to_json() const {
    return {{"proposal", proposal},   {"selection", selection},
            {"dataset", dataset},     {"out_dir", out_dir},
            {"batches", batches},     {"batch_size", batch_size},
            {"lr", lr},               {"seed", seed},
            {"k", k},                 {"container_edge", container_edge},
            {"workers", workers}};
  }
};

int cmd_adapt(const AdaptOptions& o) {
  OutputTracker track;
  try {
    auto proposal = load_checkpoint(o.proposal);
    auto selection = load_checkpoint(o.selection);
    std::uint64_t proposal_digest = params_digest(proposal);
    Dataset ds = read_dataset_jsonl(o.dataset);
    TrainContext ctx = context_for_dataset(ds, o.container_edge, o.k);
    int workers = o.workers > 0 ? o.workers : env_workers();

    fs::create_directories(o.out_dir);
    std::string before_path = o.out_dir + "/selection_before.json";
    track.add(before_path);
    save_checkpoint(selection, before_path);

    auto base_results = evaluate_dataset(proposal, selection, ds, ctx, workers);
    auto adapted = adapt_online(proposal, selection, ds.dists, ctx.item_set, ctx,
                                o.batches, o.batch_size, o.lr, o.seed);
    auto adapted_results = evaluate_dataset(proposal, adapted, ds, ctx, workers);

    if (params_digest(proposal) != proposal_digest)
      throw std::runtime_error("adaptation touched the proposal parameters");

    std::string after_path = o.out_dir + "/selection_after.json";
    track.add(after_path);
    save_checkpoint(adapted, after_path);

    double base = mean_uti(base_results);
    double after = mean_uti(adapted_results);
    double delta = after - base;

    std::string text;
    text += "subset       mode        episodes   Uti(%)  +/-      Num\n";
    text += eval_text_row(ds.subset + " base", to_string(ds.mode), base_results.size(),
                          base, ci_half_width(base_results), mean_num(base_results));
    text += eval_text_row(ds.subset + " adapt", to_string(ds.mode),
                          adapted_results.size(), after, ci_half_width(adapted_results),
                          mean_num(adapted_results));
    text += "delta Uti: " + pct(delta) + "%\n";
    write_text_file(o.out_dir + "/report.txt", text, track);

    std::string csv = "subset,mode,episodes,uti_base_pct,uti_adapted_pct,delta_uti_pct\n";
    csv += ds.subset + "," + to_string(ds.mode) + "," +
           std::to_string(base_results.size()) + "," + pct(base) + "," + pct(after) +
           "," + pct(delta) + "\n";
    write_text_file(o.out_dir + "/report.csv", csv, track);

    json report = {{"subset", ds.subset},
                   {"mode", to_string(ds.mode)},
                   {"episodes", base_results.size()},
                   {"uti_base_pct", 100.0 * base},
                   {"uti_adapted_pct", 100.0 * after},
                   {"delta_uti_pct", 100.0 * delta},
                   {"batches", o.batches},
                   {"proposal_digest", digest_hex(proposal_digest)}};
    write_text_file(o.out_dir + "/report.json", report.dump(2) + "\n", track);

    write_manifest(o.out_dir + "/manifest.json", "adapt", o.to_json(),
                   {o.proposal, o.selection, o.dataset},
                   {before_path, after_path, o.out_dir + "/report.txt",
                    o.out_dir + "/report.csv", o.out_dir + "/report.json"},
                   track);
    std::fputs(text.c_str(), stdout);
    return 0;
  } catch (...) {
    track.cleanup();
    throw;
  }
}

// ------------------------------------------------------------- oracle ----

struct OracleOptions {
  std::string dataset;
  std::string proposal;   // optional; greedy rollouts when absent
  std::string selection;  // optional
  std::string out = "oracle";
  int n_instances = 4;
  int k = 3;
  int simulations = 200;
  int futures = 16;
  std::uint64_t seed = 0;
  double container_edge = 20.0;

  json to_json() const {
    return {{"dataset", dataset},   {"proposal", proposal},
            {"selection", selection}, {"out", out},
            {"n_instances", n_instances}, {"k", k},
            {"simulations", simulations}, {"futures", futures},
            {"seed", seed},         {"container_edge", container_edge}};
  }
};

int cmd_oracle(const OracleOptions& o) {
  OutputTracker track;
  try {
    Dataset ds = read_dataset_jsonl(o.dataset);
    TrainContext ctx = context_for_dataset(ds, o.container_edge, o.k);

    std::optional<PolicyParams> proposal, selection;
    if (!o.proposal.empty()) proposal = load_checkpoint(o.proposal);
    if (!o.selection.empty()) selection = load_checkpoint(o.selection);
    RolloutPolicy rollout;
    if (proposal && selection) {
      rollout.proposal = &*proposal;
      rollout.selection = &*selection;
      rollout.k = o.k;
    }

    // Drive each instance to terminal twice: once with the full search and
    // once with the root set restricted to the k best proposals.
    auto run = [&](const Instance& inst, const DistributionSpec& spec, bool restricted,
                   std::uint64_t seed) {
      PackingState state = reset(inst, ctx.container, ctx.pack);
      int decision = 0;
      while (!state.terminal) {
        MctsConfig cfg;
        cfg.simulations = o.simulations;
        cfg.num_futures = o.futures;
        cfg.seed = mix_seed(seed, 10 + decision);
        int horizon = static_cast<int>(state.items.size()) - state.cursor;
        FutureSampler sampler =
            horizon > 0 ? distribution_future(spec, ctx.item_set, horizon, ds.mode)
                        : fixed_future({});
        std::vector<std::size_t> allowed;
        const std::vector<std::size_t>* restrict_root = nullptr;
        if (restricted) {
          if (rollout.proposal != nullptr) {
            allowed = propose(*rollout.proposal, featurize_all(state), o.k).indices;
          } else {
            for (std::size_t a = 0;
                 a < std::min<std::size_t>(o.k, state.candidates.size()); ++a)
              allowed.push_back(a);
          }
          restrict_root = &allowed;
        }
        auto r = mcts_decide(state, sampler, cfg, rollout, restrict_root);
        step(state, r.best_index);
        ++decision;
      }
      return final_reward(state);
    };

    double full_sum = 0.0, restricted_sum = 0.0;
    int count = 0;
    for (std::size_t di = 0; di < ds.instances.size() && count < o.n_instances; ++di) {
      for (const auto& inst : ds.instances[di]) {
        if (count >= o.n_instances) break;
        std::uint64_t s = mix_seed(o.seed, count);
        full_sum += run(inst, ds.dists[di], false, s);
        restricted_sum += run(inst, ds.dists[di], true, s);
        ++count;
      }
    }
    if (count == 0) throw std::runtime_error("oracle: dataset has no instances");
    double full = full_sum / count;
    double restricted = restricted_sum / count;

    std::string csv = "instances,k,uti_full_pct,uti_restricted_pct,delta_pct\n";
    csv += std::to_string(count) + "," + std::to_string(o.k) + "," + pct(full) + "," +
           pct(restricted) + "," + pct(restricted - full) + "\n";
    write_text_file(o.out + ".csv", csv, track);
    json report = {{"instances", count},
                   {"k", o.k},
                   {"uti_full_pct", 100.0 * full},
                   {"uti_restricted_pct", 100.0 * restricted},
                   {"delta_pct", 100.0 * (restricted - full)}};
    write_text_file(o.out + ".json", report.dump(2) + "\n", track);

    std::vector<std::string> inputs = {o.dataset};
    if (!o.proposal.empty()) inputs.push_back(o.proposal);
    if (!o.selection.empty()) inputs.push_back(o.selection);
    write_manifest(o.out + ".manifest.json", "oracle", o.to_json(), inputs,
                   {o.out + ".csv", o.out + ".json"}, track);
    std::printf("search over %d instances: full %s%%, restricted(k=%d) %s%%\n", count,
                pct(full).c_str(), o.k, pct(restricted).c_str());
    return 0;
  } catch (...) {
    track.cleanup();
    throw;
  }
}

// ------------------------------------------------------------ analyze ----

struct AnalyzeOptions {
  std::string proposal;
  std::string selection;
  std::string dataset;
  std::string out = "analysis";
  int dist = 0;
  int n_instances = 4;
  std::vector<int> ks = {1, 2, 3, 5, 10};
  int simulations = 200;
  int futures = 16;
  std::uint64_t seed = 0;
  int k = 3;
  double container_edge = 20.0;

  json to_json() const {
    return {{"proposal", proposal}, {"selection", selection}, {"dataset", dataset},
            {"out", out},           {"dist", dist},
            {"n_instances", n_instances}, {"ks", ks},
            {"simulations", simulations}, {"futures", futures},
            {"seed", seed},         {"k", k},
            {"container_edge", container_edge}};
  }
};

int cmd_analyze(const AnalyzeOptions& o) {
  OutputTracker track;
  try {
    auto proposal = load_checkpoint(o.proposal);
    auto selection = load_checkpoint(o.selection);
    Dataset ds = read_dataset_jsonl(o.dataset);
    if (o.dist < 0 || o.dist >= static_cast<int>(ds.dists.size()))
      throw std::invalid_argument("analyze: distribution index out of range");
    TrainContext ctx = context_for_dataset(ds, o.container_edge, o.k);

    std::vector<Instance> instances(
        ds.instances[o.dist].begin(),
        ds.instances[o.dist].begin() +
            std::min<std::size_t>(o.n_instances, ds.instances[o.dist].size()));
    MctsConfig cfg;
    cfg.simulations = o.simulations;
    cfg.num_futures = o.futures;
    cfg.seed = o.seed;
    auto analysis = analyze_oracle(proposal, selection, instances, ds.dists[o.dist],
                                   ctx.item_set, ctx, cfg, o.ks);

    std::string inc = "k,inclusion\n";
    for (std::size_t i = 0; i < analysis.ks.size(); ++i)
      inc += std::to_string(analysis.ks[i]) + "," + pct(analysis.inclusion[i]) + "\n";
    write_text_file(o.out + "_inclusion.csv", inc, track);

    std::string curves = "rank,policy_prob,optimal_freq\n";
    for (std::size_t r = 0; r < analysis.policy_prob.size(); ++r)
      curves += std::to_string(r + 1) + "," + pct(analysis.policy_prob[r]) + "," +
                pct(analysis.optimal_freq[r]) + "\n";
    write_text_file(o.out + "_rank_curves.csv", curves, track);

    json report = {{"decisions", analysis.decisions},
                   {"ks", analysis.ks},
                   {"inclusion", analysis.inclusion},
                   {"policy_prob", analysis.policy_prob},
                   {"optimal_freq", analysis.optimal_freq}};
    write_text_file(o.out + ".json", report.dump(2) + "\n", track);

    write_manifest(o.out + ".manifest.json", "analyze", o.to_json(),
                   {o.proposal, o.selection, o.dataset},
                   {o.out + "_inclusion.csv", o.out + "_rank_curves.csv",
                    o.out + ".json"},
                   track);
    std::printf("analyzed %d decisions\n", analysis.decisions);
    return 0;
  } catch (...) {
    track.cleanup();
    throw;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"packrl: online 3D bin packing benchmark driver"};
  app.require_subcommand(1);

  GenOptions gen_o;
  AdaptOptions adapt_o;
  TrainOptions train_o;
  EvalOptions eval_o;
  OracleOptions oracle_o;
  AnalyzeOptions analyze_o;
  std::string cfg_path;

  auto* gen = app.add_subcommand("gen", "generate a dataset file");
  gen->add_option("--config", cfg_path, "JSON config or manifest file");
  gen->add_option("--subset", gen_o.subset, "item subset name");
  gen->add_option("--mode", gen_o.mode, "discrete | continuous");
  gen->add_option("--seed", gen_o.seed, "master seed");
  gen->add_option("--out", gen_o.out, "output path (default <subset>_<mode>.jsonl)");
  gen->add_option("--n-dists", gen_o.n_dists, "distributions per subset");
  gen->add_option("--n-instances", gen_o.n_instances, "instances per distribution");
  gen->add_option("--episode-len", gen_o.episode_len, "items per instance");

  auto* train = app.add_subcommand("train", "two-phase policy training");
  train->add_option("--config", cfg_path, "JSON config or manifest file");
  train->add_option("--subset", train_o.subset, "training item subset");
  train->add_option("--mode", train_o.mode, "discrete | continuous");
  train->add_option("--seed", train_o.seed, "master seed");
  train->add_option("--out-dir", train_o.out_dir, "checkpoint/log directory");
  train->add_option("--profile", train_o.profile, "desk | paper-scale");
  train->add_option("--k", train_o.k, "proposal set size");
  train->add_option("--layers", train_o.layers, "scorer hidden layers (0 or 1)");
  train->add_option("--hidden", train_o.hidden, "scorer hidden width");
  train->add_option("--container-edge", train_o.container_edge, "container edge length");
  train->add_option("--episode-len", train_o.episode_len, "items per episode");
  train->add_flag("--meta-post,!--no-meta-post", train_o.meta_post,
                  "meta wrapper around post-training");
  train->add_option("--alpha", train_o.alpha, "inner step size");
  train->add_option("--beta", train_o.beta, "outer step size");
  train->add_option("--post-lr", train_o.post_lr, "post-training step size");
  train->add_option("--tasks-per-batch", train_o.tasks_per_batch, "meta tasks per batch");
  train->add_option("--inner-instances", train_o.inner_instances,
                    "episodes per inner/outer rollout");

  auto* eval = app.add_subcommand("eval", "argmax evaluation of a checkpoint pair");
  eval->add_option("--config", cfg_path, "JSON config or manifest file");
  eval->add_option("--proposal", eval_o.proposal, "proposal checkpoint");
  eval->add_option("--selection", eval_o.selection, "selection checkpoint");
  eval->add_option("--dataset", eval_o.dataset, "dataset file");
  eval->add_option("--out", eval_o.out, "report path prefix");
  eval->add_option("--k", eval_o.k, "proposal set size");
  eval->add_option("--container-edge", eval_o.container_edge, "container edge length");
  eval->add_option("--workers", eval_o.workers, "worker threads (default $PACKRL_WORKERS)");

  auto* adapt = app.add_subcommand("adapt", "selection-only online adaptation");
  adapt->add_option("--config", cfg_path, "JSON config or manifest file");
  adapt->add_option("--proposal", adapt_o.proposal, "proposal checkpoint (frozen)");
  adapt->add_option("--selection", adapt_o.selection, "selection checkpoint");
  adapt->add_option("--dataset", adapt_o.dataset, "test dataset file");
  adapt->add_option("--out-dir", adapt_o.out_dir, "output directory");
  adapt->add_option("--batches", adapt_o.batches, "adaptation batches");
  adapt->add_option("--batch-size", adapt_o.batch_size, "episodes per batch");
  adapt->add_option("--lr", adapt_o.lr, "adaptation step size");
  adapt->add_option("--seed", adapt_o.seed, "master seed");
  adapt->add_option("--k", adapt_o.k, "proposal set size");
  adapt->add_option("--container-edge", adapt_o.container_edge, "container edge length");
  adapt->add_option("--workers", adapt_o.workers, "worker threads");

  auto* oracle = app.add_subcommand("oracle", "tree search vs proposal-restricted search");
  oracle->add_option("--config", cfg_path, "JSON config or manifest file");
  oracle->add_option("--dataset", oracle_o.dataset, "dataset file");
  oracle->add_option("--proposal", oracle_o.proposal, "optional proposal checkpoint");
  oracle->add_option("--selection", oracle_o.selection, "optional selection checkpoint");
  oracle->add_option("--out", oracle_o.out, "report path prefix");
  oracle->add_option("--n-instances", oracle_o.n_instances, "instances to search");
  oracle->add_option("--k", oracle_o.k, "restricted root set size");
  oracle->add_option("--simulations", oracle_o.simulations, "search simulations per step");
  oracle->add_option("--futures", oracle_o.futures, "sampled futures per step");
  oracle->add_option("--seed", oracle_o.seed, "master seed");
  oracle->add_option("--container-edge", oracle_o.container_edge, "container edge length");

  auto* analyze = app.add_subcommand("analyze", "inclusion rates and rank curves");
  analyze->add_option("--config", cfg_path, "JSON config or manifest file");
  analyze->add_option("--proposal", analyze_o.proposal, "proposal checkpoint");
  analyze->add_option("--selection", analyze_o.selection, "selection checkpoint");
  analyze->add_option("--dataset", analyze_o.dataset, "dataset file");
  analyze->add_option("--out", analyze_o.out, "output path prefix");
  analyze->add_option("--dist", analyze_o.dist, "distribution index");
  analyze->add_option("--n-instances", analyze_o.n_instances, "instances to analyze");
  analyze->add_option("--ks", analyze_o.ks, "inclusion-rate k values")->delimiter(',');
  analyze->add_option("--simulations", analyze_o.simulations, "search simulations");
  analyze->add_option("--futures", analyze_o.futures, "sampled futures per decision");
  analyze->add_option("--seed", analyze_o.seed, "master seed");
  analyze->add_option("--k", analyze_o.k, "proposal set size for the driving policy");
  analyze->add_option("--container-edge", analyze_o.container_edge,
                      "container edge length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    json file_cfg = json::object();
    if (!cfg_path.empty()) file_cfg = load_config_file(cfg_path);

    if (gen->parsed()) {
      Resolver r{gen, file_cfg};
      r.get("--subset", "subset", gen_o.subset);
      r.get("--mode", "mode", gen_o.mode);
      r.get("--seed", "seed", gen_o.seed);
      r.get("--out", "out", gen_o.out);
      r.get("--n-dists", "n_dists", gen_o.n_dists);
      r.get("--n-instances", "n_instances", gen_o.n_instances);
      r.get("--episode-len", "episode_len", gen_o.episode_len);
      return cmd_gen(gen_o);
    }
    if (train->parsed()) {
      Resolver r{train, file_cfg};
      r.get("--subset", "subset", train_o.subset);
      r.get("--mode", "mode", train_o.mode);
      r.get("--seed", "seed", train_o.seed);
      r.get("--out-dir", "out_dir", train_o.out_dir);
      r.get("--profile", "profile", train_o.profile);
      r.get("--k", "k", train_o.k);
      r.get("--layers", "layers", train_o.layers);
      r.get("--hidden", "hidden", train_o.hidden);
      r.get("--container-edge", "container_edge", train_o.container_edge);
      r.get("--episode-len", "episode_len", train_o.episode_len);
      r.get("--meta-post", "meta_post", train_o.meta_post);
      r.get("--alpha", "alpha", train_o.alpha);
      r.get("--beta", "beta", train_o.beta);
      r.get("--post-lr", "post_lr", train_o.post_lr);
      r.get("--tasks-per-batch", "tasks_per_batch", train_o.tasks_per_batch);
      r.get("--inner-instances", "inner_instances", train_o.inner_instances);
      return cmd_train(train_o);
    }
    if (eval->parsed()) {
      Resolver r{eval, file_cfg};
      r.get("--proposal", "proposal", eval_o.proposal);
      r.get("--selection", "selection", eval_o.selection);
      r.get("--dataset", "dataset", eval_o.dataset);
      r.get("--out", "out", eval_o.out);
      r.get("--k", "k", eval_o.k);
      r.get("--container-edge", "container_edge", eval_o.container_edge);
      r.get("--workers", "workers", eval_o.workers);
      return cmd_eval(eval_o);
    }
    if (adapt->parsed()) {
      Resolver r{adapt, file_cfg};
      r.get("--proposal", "proposal", adapt_o.proposal);
      r.get("--selection", "selection", adapt_o.selection);
      r.get("--dataset", "dataset", adapt_o.dataset);
      r.get("--out-dir", "out_dir", adapt_o.out_dir);
      r.get("--batches", "batches", adapt_o.batches);
      r.get("--batch-size", "batch_size", adapt_o.batch_size);
      r.get("--lr", "lr", adapt_o.lr);
      r.get("--seed", "seed", adapt_o.seed);
      r.get("--k", "k", adapt_o.k);
      r.get("--container-edge", "container_edge", adapt_o.container_edge);
      r.get("--workers", "workers", adapt_o.workers);
      return cmd_adapt(adapt_o);
    }
    if (oracle->parsed()) {
      Resolver r{oracle, file_cfg};
      r.get("--dataset", "dataset", oracle_o.dataset);
      r.get("--proposal", "proposal", oracle_o.proposal);
      r.get("--selection", "selection", oracle_o.selection);
      r.get("--out", "out", oracle_o.out);
      r.get("--n-instances", "n_instances", oracle_o.n_instances);
      r.get("--k", "k", oracle_o.k);
      r.get("--simulations", "simulations", oracle_o.simulations);
      r.get("--futures", "futures", oracle_o.futures);
      r.get("--seed", "seed", oracle_o.seed);
      r.get("--container-edge", "container_edge", oracle_o.container_edge);
      return cmd_oracle(oracle_o);
    }
    if (analyze->parsed()) {
      Resolver r{analyze, file_cfg};
      r.get("--proposal", "proposal", analyze_o.proposal);
      r.get("--selection", "selection", analyze_o.selection);
      r.get("--dataset", "dataset", analyze_o.dataset);
      r.get("--out", "out", analyze_o.out);
      r.get("--dist", "dist", analyze_o.dist);
      r.get("--n-instances", "n_instances", analyze_o.n_instances);
      r.get("--ks", "ks", analyze_o.ks);
      r.get("--simulations", "simulations", analyze_o.simulations);
      r.get("--futures", "futures", analyze_o.futures);
      r.get("--seed", "seed", analyze_o.seed);
      r.get("--k", "k", analyze_o.k);
      r.get("--container-edge", "container_edge", analyze_o.container_edge);
      return cmd_analyze(analyze_o);
    }
  } catch (const std::invalid_argument& e) {
    json err = {{"error", e.what()}, {"kind", "usage"}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  } catch (const std::exception& e) {
    json err = {{"error", e.what()}, {"kind", "runtime"}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 2;
  }
  return 1;
}
