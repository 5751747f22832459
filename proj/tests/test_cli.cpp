#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "packrl/digest.hpp"
#include "packrl/policy.hpp"

using namespace packrl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kBin = PACKRL_BIN;
const fs::path kDir = "/tmp/packrl_cli_test";

int run(const std::string& args) {
  int status = std::system((kBin + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return json::parse(in);
}

std::string path(const std::string& name) { return (kDir / name).string(); }

struct Workspace {
  Workspace() {
    fs::remove_all(kDir);
    fs::create_directories(kDir);
  }
};

Workspace& workspace() {
  static Workspace w;
  return w;
}

void make_dataset(const std::string& out, int n_dists = 2, int n_inst = 2,
                  int len = 4) {
  REQUIRE(run("gen --subset ID-Small --mode discrete --seed 11 --n-dists " +
              std::to_string(n_dists) + " --n-instances " + std::to_string(n_inst) +
              " --episode-len " + std::to_string(len) + " --out " + out) == 0);
}

void make_checkpoints(const std::string& prop, const std::string& sel) {
  save_checkpoint(init_params({kFeatureDim, 8, 1}, 100), prop);
  save_checkpoint(init_params({kFeatureDim, 8, 1}, 101), sel);
}

}  // namespace

TEST_CASE("gen is reproducible and its manifest re-runs byte-identically") {
  workspace();
  make_dataset(path("a.jsonl"));
  make_dataset(path("b.jsonl"));
  CHECK(file_digest(path("a.jsonl")) == file_digest(path("b.jsonl")));

  // re-run purely from the manifest, overriding only the output path
  REQUIRE(run("gen --config " + path("a.jsonl.manifest.json") + " --out " +
              path("c.jsonl")) == 0);
  CHECK(file_digest(path("c.jsonl")) == file_digest(path("a.jsonl")));

  auto m = read_json(path("a.jsonl.manifest.json"));
  CHECK(m.at("command") == "gen");
  CHECK(m.at("config").at("seed") == 11);
  CHECK(m.at("outputs").contains(path("a.jsonl")));
}

TEST_CASE("usage errors exit 1 and runtime failures exit 2") {
  workspace();
  CHECK(run("not-a-command") == 1);
  CHECK(run("gen --subset bogus --out " + path("x.jsonl")) == 1);
  CHECK_FALSE(fs::exists(path("x.jsonl")));
  // nonexistent inputs are runtime failures
  CHECK(run("eval --proposal " + path("missing.json") + " --selection " +
            path("missing.json") + " --dataset " + path("missing.jsonl") + " --out " +
            path("r")) == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("eval emits reports without mutating checkpoints") {
  workspace();
  make_dataset(path("eval_ds.jsonl"));
  make_checkpoints(path("p.json"), path("s.json"));
  auto p_digest = file_digest(path("p.json"));
  auto s_digest = file_digest(path("s.json"));

  REQUIRE(run("eval --proposal " + path("p.json") + " --selection " + path("s.json") +
              " --dataset " + path("eval_ds.jsonl") + " --out " + path("ev")) == 0);
  CHECK(fs::exists(path("ev.txt")));
  CHECK(fs::exists(path("ev.csv")));
  CHECK(fs::exists(path("ev.manifest.json")));
  CHECK(file_digest(path("p.json")) == p_digest);
  CHECK(file_digest(path("s.json")) == s_digest);

  auto r = read_json(path("ev.json"));
  CHECK(r.at("subset") == "ID-Small");
  CHECK(r.at("episodes") == 4);
  CHECK(r.at("uti_pct").get<double>() >= 0.0);
  CHECK(r.at("uti_pct").get<double>() <= 100.0);
}

TEST_CASE("eval metrics are independent of the worker count") {
  workspace();
  make_dataset(path("w_ds.jsonl"), 2, 4);
  make_checkpoints(path("wp.json"), path("ws.json"));
  REQUIRE(run("eval --proposal " + path("wp.json") + " --selection " + path("ws.json") +
              " --dataset " + path("w_ds.jsonl") + " --workers 1 --out " +
              path("w1")) == 0);
  REQUIRE(run("eval --proposal " + path("wp.json") + " --selection " + path("ws.json") +
              " --dataset " + path("w_ds.jsonl") + " --workers 4 --out " +
              path("w4")) == 0);
  auto a = read_json(path("w1.json"));
  auto b = read_json(path("w4.json"));
  CHECK(a.at("uti_pct") == b.at("uti_pct"));
  CHECK(a.at("num") == b.at("num"));
}

TEST_CASE("adapt with zero batches reports a delta of exactly zero") {
  workspace();
  make_dataset(path("ad_ds.jsonl"));
  make_checkpoints(path("ap.json"), path("as.json"));
  REQUIRE(run("adapt --proposal " + path("ap.json") + " --selection " + path("as.json") +
              " --dataset " + path("ad_ds.jsonl") + " --batches 0 --out-dir " +
              path("ad0") + " --container-edge 20 --seed 4") == 0);
  auto r = read_json(path("ad0/report.json"));
  CHECK(r.at("delta_uti_pct").get<double>() == 0.0);
  CHECK(file_digest(path("ad0/selection_before.json")) ==
        file_digest(path("ad0/selection_after.json")));

  // the frozen proposal's digest is recorded and matches the input checkpoint
  auto before = load_checkpoint(path("ap.json"));
  CHECK(r.at("proposal_digest") == digest_hex(params_digest(before)));
}

TEST_CASE("failed commands leave no partial outputs behind") {
  workspace();
  make_dataset(path("f_ds.jsonl"));
  make_checkpoints(path("fp.json"), path("fs.json"));
  // batch size zero fails inside adaptation, after some outputs were written
  CHECK(run("adapt --proposal " + path("fp.json") + " --selection " + path("fs.json") +
            " --dataset " + path("f_ds.jsonl") + " --batches 2 --batch-size 0"
            " --out-dir " + path("fout")) == 1);
  CHECK_FALSE(fs::exists(path("fout/selection_before.json")));
  CHECK_FALSE(fs::exists(path("fout/report.json")));
}

TEST_CASE("analyze writes monotone inclusion tables") {
  workspace();
  make_dataset(path("an_ds.jsonl"), 1, 2, 3);
  make_checkpoints(path("anp.json"), path("ans.json"));
  REQUIRE(run("analyze --proposal " + path("anp.json") + " --selection " +
              path("ans.json") + " --dataset " + path("an_ds.jsonl") +
              " --n-instances 2 --simulations 32 --futures 8 --ks 1,2,100 --out " +
              path("an")) == 0);
  auto r = read_json(path("an.json"));
  auto inc = r.at("inclusion").get<std::vector<double>>();
  REQUIRE(inc.size() == 3);
  CHECK(inc[0] <= inc[1]);
  CHECK(inc[1] <= inc[2]);
  CHECK(inc[2] == doctest::Approx(1.0));
  CHECK(fs::exists(path("an_inclusion.csv")));
  CHECK(fs::exists(path("an_rank_curves.csv")));
}

TEST_CASE("oracle compares full and restricted search") {
  workspace();
  make_dataset(path("or_ds.jsonl"), 1, 2, 3);
  REQUIRE(run("oracle --dataset " + path("or_ds.jsonl") +
              " --n-instances 2 --simulations 32 --futures 4 --k 3 --out " +
              path("orc")) == 0);
  auto r = read_json(path("orc.json"));
  CHECK(r.at("instances") == 2);
  CHECK(r.at("uti_full_pct").get<double>() >= 0.0);
  CHECK(r.at("uti_restricted_pct").get<double>() <=
        r.at("uti_full_pct").get<double>() + 1e-9);
}
