#include "packrl/instances.hpp"

#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace packrl {

using nlohmann::json;

Dim3 ItemSet::type_dims(std::size_t type) const {
  const std::size_t n = values.size();
  std::size_t li = type / (n * n);
  std::size_t wi = (type / n) % n;
  std::size_t hi = type % n;
  return Dim3{static_cast<double>(values[li]), static_cast<double>(values[wi]),
              static_cast<double>(values[hi])};
}

const std::vector<std::string>& all_subsets() {
  static const std::vector<std::string> names = {
      "Default", "ID-Large", "ID-Medium", "ID-Small", "OOD", "OOD-Large", "OOD-Small"};
  return names;
}

ItemSet item_set_for(const std::string& subset) {
  if (subset == "Default") return {subset, {2, 4, 6, 8, 10}};
  if (subset == "ID-Large") return {subset, {6, 8, 10}};
  if (subset == "ID-Medium") return {subset, {4, 6, 8}};
  if (subset == "ID-Small") return {subset, {2, 4, 6}};
  if (subset == "OOD") return {subset, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
  if (subset == "OOD-Large") return {subset, {6, 7, 8, 9, 10, 11}};
  if (subset == "OOD-Small") return {subset, {1, 2, 3, 4, 5, 6}};
  throw std::invalid_argument("unknown subset: " + subset);
}

std::size_t Dataset::total_instances() const {
  std::size_t n = 0;
  for (const auto& v : instances) n += v.size();
  return n;
}

DistributionSpec sample_distribution(const ItemSet& set, std::uint64_t seed) {
  Rng rng(seed);
  DistributionSpec spec;
  spec.item_set = set.name;
  spec.seed = seed;
  spec.probs.resize(set.num_types());
  double total = 0.0;
  for (double& p : spec.probs) {
    p = rng.exponential();  // Gamma(1) draws normalize to Dirichlet(1)
    total += p;
  }
  for (double& p : spec.probs) p /= total;
  return spec;
}

Instance sample_instance(const DistributionSpec& spec, const ItemSet& set, int len,
                         Mode mode, std::uint64_t seed) {
  if (len < 1) throw std::invalid_argument("sample_instance: len < 1");
  Rng rng(seed);
  Instance inst;
  inst.items.reserve(len);
  for (int i = 0; i < len; ++i) {
    std::size_t type = rng.categorical(spec.probs);
    Dim3 d = set.type_dims(type);
    if (mode == Mode::Continuous) {
      d.l += rng.uniform(-0.5, 0.5);
      d.w += rng.uniform(-0.5, 0.5);
      d.h += rng.uniform(-0.5, 0.5);
    }
    inst.items.push_back(d);
  }
  return inst;
}

Dataset build_dataset(const std::string& subset, Mode mode, std::uint64_t seed,
                      int n_dists, int n_instances, int episode_len) {
  ItemSet set = item_set_for(subset);
  Dataset ds;
  ds.subset = subset;
  ds.mode = mode;
  ds.seed = seed;
  ds.episode_len = episode_len;
  ds.dists.reserve(n_dists);
  ds.instances.resize(n_dists);
  for (int di = 0; di < n_dists; ++di) {
    std::uint64_t dist_seed = mix_seed(seed, static_cast<std::uint64_t>(di));
    DistributionSpec spec = sample_distribution(set, dist_seed);
    ds.instances[di].reserve(n_instances);
    for (int ii = 0; ii < n_instances; ++ii) {
      std::uint64_t inst_seed = mix_seed(dist_seed, 1000 + static_cast<std::uint64_t>(ii));
      Instance inst = sample_instance(spec, set, episode_len, mode, inst_seed);
      inst.dist_index = di;
      inst.inst_index = ii;
      ds.instances[di].push_back(std::move(inst));
    }
    ds.dists.push_back(std::move(spec));
  }
  return ds;
}

namespace {
constexpr int kSchemaVersion = 1;
}

void write_dataset_jsonl(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  json header = {
      {"schema", kSchemaVersion}, {"kind", "dataset"},
      {"subset", ds.subset},      {"mode", to_string(ds.mode)},
      {"seed", ds.seed},          {"episode_len", ds.episode_len},
      {"n_dists", ds.dists.size()},
  };
  out << header.dump() << "\n";
  for (std::size_t di = 0; di < ds.dists.size(); ++di) {
    json d = {{"kind", "dist"},
              {"index", di},
              {"item_set", ds.dists[di].item_set},
              {"seed", ds.dists[di].seed},
              {"probs", ds.dists[di].probs}};
    out << d.dump() << "\n";
    for (const auto& inst : ds.instances[di]) {
      json items = json::array();
      for (const auto& it : inst.items) items.push_back({it.l, it.w, it.h});
      json r = {{"kind", "instance"},
                {"dist", inst.dist_index},
                {"index", inst.inst_index},
                {"items", items}};
      out << r.dump() << "\n";
    }
  }
}

Dataset read_dataset_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
  json header = json::parse(line);
  if (header.value("kind", "") != "dataset" || header.value("schema", 0) != kSchemaVersion)
    throw std::runtime_error("bad dataset header: " + path);

  Dataset ds;
  ds.subset = header.at("subset").get<std::string>();
  ds.mode = mode_from_string(header.at("mode").get<std::string>());
  ds.seed = header.at("seed").get<std::uint64_t>();
  ds.episode_len = header.at("episode_len").get<int>();
  ds.instances.resize(header.at("n_dists").get<std::size_t>());

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json r = json::parse(line);
    std::string kind = r.at("kind").get<std::string>();
    if (kind == "dist") {
      DistributionSpec spec;
      spec.item_set = r.at("item_set").get<std::string>();
      spec.seed = r.at("seed").get<std::uint64_t>();
      spec.probs = r.at("probs").get<std::vector<double>>();
      ds.dists.push_back(std::move(spec));
    } else if (kind == "instance") {
      Instance inst;
      inst.dist_index = r.at("dist").get<int>();
      inst.inst_index = r.at("index").get<int>();
      for (const auto& it : r.at("items")) {
        inst.items.push_back(Dim3{it[0].get<double>(), it[1].get<double>(), it[2].get<double>()});
      }
      ds.instances.at(inst.dist_index).push_back(std::move(inst));
    } else {
      throw std::runtime_error("unknown record kind: " + kind);
    }
  }
  return ds;
}

}  // namespace packrl
