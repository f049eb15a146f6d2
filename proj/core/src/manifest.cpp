#include "milattn/manifest.hpp"

#include <cctype>
#include <set>

#include "json.hpp"

#include "milattn/error.hpp"
#include "milattn/io_util.hpp"

namespace milattn {

using nlohmann::json;

std::size_t ParameterGrid::size() const noexcept {
  return epochs.size() * learning_rate.size() * embed_dim.size() * attention_dim.size() *
         featurizer_depth.size() * classifier_depth.size() * batch_size.size() *
         weight_decay.size();
}

std::vector<ModelConfig> ParameterGrid::expand(std::size_t input_dim) const {
  std::vector<ModelConfig> out;
  std::set<std::string> seen;
  for (auto e : epochs)
    for (auto lr : learning_rate)
      for (auto k : embed_dim)
        for (auto l : attention_dim)
          for (auto f : featurizer_depth)
            for (auto c : classifier_depth)
              for (auto b : batch_size)
                for (auto wd : weight_decay) {
                  ModelConfig cfg;
                  cfg.input_dim = input_dim;
                  cfg.epochs = e;
                  cfg.learning_rate = lr;
                  cfg.embed_dim = k;
                  cfg.attention_dim = l;
                  cfg.featurizer_depth = f;
                  cfg.classifier_depth = c;
                  cfg.batch_size = b;
                  cfg.weight_decay = wd;
                  cfg.hidden_activation = hidden_activation;
                  cfg = cfg.normalized();
                  if (seen.insert(cfg.id()).second) out.push_back(cfg);
                }
  return out;
}

ParameterGrid full_grid(Modality modality) {
  ParameterGrid g;
  switch (modality) {
    case Modality::Gaussian:
      g.epochs = {100, 200, 500};
      g.learning_rate = {0.001, 0.005, 0.01, 0.02};
      g.embed_dim = {2, 4, 8};
      g.attention_dim = {1, 2, 4, 8};
      g.featurizer_depth = {0, 1, 2};
      g.classifier_depth = {1, 2, 3};
      break;
    case Modality::MNIST:
      g.epochs = {500};
      g.learning_rate = {0.001, 0.005, 0.01, 0.02};
      g.embed_dim = {8, 16, 32, 64};
      g.attention_dim = {1, 2, 4, 8, 10};
      g.featurizer_depth = {1, 2};
      g.classifier_depth = {1, 2};
      break;
    case Modality::CyTOF:
    case Modality::CyTOFSynthetic:
      g.epochs = {500};
      g.learning_rate = {0.001, 0.005, 0.01, 0.02};
      g.embed_dim = {4, 8, 16};
      g.attention_dim = {1, 2, 4, 8};
      g.featurizer_depth = {1, 2, 3};
      g.classifier_depth = {1, 2, 3};
      break;
  }
  return g;
}

// 12 configurations each; the classifier-depth split matters because XOR
// needs a hidden classifier layer.
ParameterGrid desk_grid(Modality modality) {
  ParameterGrid g;
  g.learning_rate = {0.01, 0.02};
  g.attention_dim = {2, 4, 8};
  g.featurizer_depth = {1};
  g.classifier_depth = {1, 2};
  switch (modality) {
    case Modality::Gaussian:
      g.epochs = {100};
      g.embed_dim = {8};
      break;
    case Modality::MNIST:
      g.epochs = {500};
      g.embed_dim = {16};
      break;
    case Modality::CyTOF:
    case Modality::CyTOFSynthetic:
      g.epochs = {500};
      g.embed_dim = {8};
      break;
  }
  return g;
}

const ParameterGrid& ExperimentManifest::effective_grid() const noexcept {
  return desk_scale.enabled ? desk_scale.grid : grid;
}

std::size_t ExperimentManifest::effective_seeds_per_config() const noexcept {
  return desk_scale.enabled ? desk_scale.seeds_per_config : seeds_per_config;
}

std::size_t ExperimentManifest::effective_n_top() const noexcept {
  return desk_scale.enabled ? desk_scale.n_top : n_top;
}

std::size_t ExperimentManifest::effective_n_repetitions() const noexcept {
  return desk_scale.enabled ? desk_scale.n_repetitions : n_repetitions;
}

std::string ExperimentManifest::task_name() const {
  std::string p(to_string(problem));
  for (char& ch : p) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return std::string(to_string(modality)) + "_" + p;
}

void ExperimentManifest::validate() const {
  const auto& g = effective_grid();
  if (g.size() == 0) throw ConfigError("manifest: parameter grid is empty");
  if (effective_seeds_per_config() == 0) throw ConfigError("manifest: seeds_per_config must be positive");
  if (effective_n_top() == 0) throw ConfigError("manifest: n_top must be positive");
  if (dataset.bag_size == 0) throw ConfigError("manifest: bag_size must be positive");
  if (dataset.balance < 0.0 || dataset.balance > 1.0) throw ConfigError("manifest: balance must be in [0, 1]");
  if (dataset.sizes.train == 0 || dataset.sizes.validation == 0 || dataset.sizes.test == 0) {
    throw ConfigError("manifest: every split needs at least one bag");
  }
  if (ensemble.n_ensembles == 0 || ensemble.repetitions == 0 || ensemble.sizes.empty()) {
    throw ConfigError("manifest: ensemble settings must be positive");
  }
  for (auto s : ensemble.sizes) {
    if (s == 0) throw ConfigError("manifest: ensemble size 0");
  }
  if (modality == Modality::MNIST && (sources.mnist_images.empty() || sources.mnist_labels.empty())) {
    throw ConfigError("manifest: mnist modality needs sources.mnist_images and sources.mnist_labels");
  }
  if (modality == Modality::CyTOF && sources.cytof_table.empty()) {
    throw ConfigError("manifest: cytof modality needs sources.cytof_table");
  }
  (void)g.expand(1);  // validates every grid point
}

namespace {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "relu";
}

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw ConfigError("manifest: unknown activation '" + s + "'");
}

const std::set<std::string> kGridKeys{"epochs", "learning_rate", "hidden_size", "attention_size",
                                      "featurizer_depth", "classifier_depth", "batch_size",
                                      "weight_decay", "activation"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("manifest: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("manifest: unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
void read_list(const json& j, const char* key, std::vector<T>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.empty()) {
    throw ConfigError(std::string("manifest: grid.") + key + " must be a non-empty array");
  }
  out = v.get<std::vector<T>>();
}

// Missing fields keep the values already in `g`.
void read_grid(const json& j, ParameterGrid& g, const std::string& where) {
  check_keys(j, kGridKeys, where);
  read_list(j, "epochs", g.epochs);
  read_list(j, "learning_rate", g.learning_rate);
  read_list(j, "hidden_size", g.embed_dim);
  read_list(j, "attention_size", g.attention_dim);
  read_list(j, "featurizer_depth", g.featurizer_depth);
  read_list(j, "classifier_depth", g.classifier_depth);
  read_list(j, "batch_size", g.batch_size);
  read_list(j, "weight_decay", g.weight_decay);
  if (j.contains("activation")) g.hidden_activation = parse_activation(j.at("activation").get<std::string>());
}

nlohmann::ordered_json grid_json(const ParameterGrid& g) {
  return nlohmann::ordered_json{{"epochs", g.epochs},
              {"learning_rate", g.learning_rate},
              {"hidden_size", g.embed_dim},
              {"attention_size", g.attention_dim},
              {"featurizer_depth", g.featurizer_depth},
              {"classifier_depth", g.classifier_depth},
              {"batch_size", g.batch_size},
              {"weight_decay", g.weight_decay},
              {"activation", activation_name(g.hidden_activation)}};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

}  // namespace

ExperimentManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  check_keys(j,
             {"modality", "problem", "master_seed", "output_dir", "dataset", "grid", "seeds_per_config",
              "n_top", "n_repetitions", "desk_scale", "ensemble", "iauc", "sources"},
             "manifest");
  if (!j.contains("modality") || !j.contains("problem")) {
    throw ConfigError("manifest: 'modality' and 'problem' are required");
  }

  ExperimentManifest m;
  try {
    m.modality = parse_modality(j.at("modality").get<std::string>());
    m.problem = parse_problem(j.at("problem").get<std::string>());
    m.master_seed = j.value("master_seed", std::uint64_t{0});
    if (j.contains("output_dir")) m.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    else m.output_dir = resolve(base_dir, "results/" + m.task_name());

    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      check_keys(d, {"train", "validation", "test", "bag_size", "balance"}, "dataset");
      m.dataset.sizes.train = d.value("train", m.dataset.sizes.train);
      m.dataset.sizes.validation = d.value("validation", m.dataset.sizes.validation);
      m.dataset.sizes.test = d.value("test", m.dataset.sizes.test);
      m.dataset.bag_size = d.value("bag_size", m.dataset.bag_size);
      m.dataset.balance = d.value("balance", m.dataset.balance);
    }

    m.grid = full_grid(m.modality);
    if (j.contains("grid")) read_grid(j.at("grid"), m.grid, "grid");
    m.seeds_per_config = j.value("seeds_per_config", m.seeds_per_config);
    m.n_top = j.value("n_top", m.n_top);
    m.n_repetitions = j.value("n_repetitions", m.n_repetitions);

    m.desk_scale.grid = desk_grid(m.modality);
    if (j.contains("desk_scale")) {
      const json& d = j.at("desk_scale");
      check_keys(d, {"enabled", "grid", "seeds_per_config", "n_top", "n_repetitions"}, "desk_scale");
      m.desk_scale.enabled = d.value("enabled", false);
      if (d.contains("grid")) read_grid(d.at("grid"), m.desk_scale.grid, "desk_scale.grid");
      m.desk_scale.seeds_per_config = d.value("seeds_per_config", m.desk_scale.seeds_per_config);
      m.desk_scale.n_top = d.value("n_top", m.desk_scale.n_top);
      m.desk_scale.n_repetitions = d.value("n_repetitions", m.desk_scale.n_repetitions);
    }

    if (j.contains("ensemble")) {
      const json& e = j.at("ensemble");
      check_keys(e, {"sizes", "n_ensembles", "repetitions"}, "ensemble");
      m.ensemble.sizes = e.value("sizes", m.ensemble.sizes);
      m.ensemble.n_ensembles = e.value("n_ensembles", m.ensemble.n_ensembles);
      m.ensemble.repetitions = e.value("repetitions", m.ensemble.repetitions);
    }

    if (j.contains("iauc")) {
      const json& a = j.at("iauc");
      check_keys(a, {"eligibility", "aggregation"}, "iauc");
      const std::string el = a.value("eligibility", std::string("key_and_non_key"));
      if (el == "key_and_non_key") m.iauc.eligibility = Eligibility::KeyAndNonKey;
      else if (el == "positive_bags") m.iauc.eligibility = Eligibility::PositiveBagsOnly;
      else throw ConfigError("manifest: unknown iauc.eligibility '" + el + "'");
      const std::string ag = a.value("aggregation", std::string("per_bag"));
      if (ag == "per_bag") m.iauc.aggregation = IaucAggregation::PerBag;
      else if (ag == "pooled") m.iauc.aggregation = IaucAggregation::Pooled;
      else throw ConfigError("manifest: unknown iauc.aggregation '" + ag + "'");
    }

    if (j.contains("sources")) {
      const json& s = j.at("sources");
      check_keys(s, {"mnist_images", "mnist_labels", "cytof_table", "cytof_cluster_column", "cytof_delimiter"},
                 "sources");
      if (s.contains("mnist_images")) m.sources.mnist_images = resolve(base_dir, s.at("mnist_images").get<std::string>());
      if (s.contains("mnist_labels")) m.sources.mnist_labels = resolve(base_dir, s.at("mnist_labels").get<std::string>());
      if (s.contains("cytof_table")) m.sources.cytof_table = resolve(base_dir, s.at("cytof_table").get<std::string>());
      m.sources.cytof_cluster_column = s.value("cytof_cluster_column", m.sources.cytof_cluster_column);
      const std::string delim = s.value("cytof_delimiter", std::string(","));
      if (delim == "\\t" || delim == "tab") m.sources.cytof_delimiter = '\t';
      else if (delim.size() == 1) m.sources.cytof_delimiter = delim[0];
      else throw ConfigError("manifest: cytof_delimiter must be one character");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  m.validate();
  return m;
}

ExperimentManifest load_manifest(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot read manifest: ") + e.what());
  }
  return parse_manifest(text, path.parent_path());
}

std::string dump_manifest(const ExperimentManifest& m) {
  nlohmann::ordered_json j;
  j["modality"] = to_string(m.modality);
  j["problem"] = to_string(m.problem);
  j["master_seed"] = m.master_seed;
  j["output_dir"] = m.output_dir.string();
  j["dataset"] = {{"train", m.dataset.sizes.train},
                  {"validation", m.dataset.sizes.validation},
                  {"test", m.dataset.sizes.test},
                  {"bag_size", m.dataset.bag_size},
                  {"balance", m.dataset.balance}};
  j["grid"] = grid_json(m.grid);
  j["seeds_per_config"] = m.seeds_per_config;
  j["n_top"] = m.n_top;
  j["n_repetitions"] = m.n_repetitions;
  j["desk_scale"] = {{"enabled", m.desk_scale.enabled},
                     {"grid", grid_json(m.desk_scale.grid)},
                     {"seeds_per_config", m.desk_scale.seeds_per_config},
                     {"n_top", m.desk_scale.n_top},
                     {"n_repetitions", m.desk_scale.n_repetitions}};
  j["ensemble"] = {{"sizes", m.ensemble.sizes},
                   {"n_ensembles", m.ensemble.n_ensembles},
                   {"repetitions", m.ensemble.repetitions}};
  j["iauc"] = {{"eligibility", m.iauc.eligibility == Eligibility::KeyAndNonKey ? "key_and_non_key"
                                                                               : "positive_bags"},
               {"aggregation", m.iauc.aggregation == IaucAggregation::PerBag ? "per_bag" : "pooled"}};
  j["sources"] = {{"mnist_images", m.sources.mnist_images.string()},
                  {"mnist_labels", m.sources.mnist_labels.string()},
                  {"cytof_table", m.sources.cytof_table.string()},
                  {"cytof_cluster_column", m.sources.cytof_cluster_column},
                  {"cytof_delimiter", m.sources.cytof_delimiter == '\t'
                                          ? std::string("tab")
                                          : std::string(1, m.sources.cytof_delimiter)}};
  return j.dump(2) + "\n";
}

}  // namespace milattn
