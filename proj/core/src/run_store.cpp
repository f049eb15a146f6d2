#include "milattn/run_store.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "json.hpp"

#include "milattn/error.hpp"
#include "milattn/io_util.hpp"

namespace milattn {

using nlohmann::ordered_json;

namespace fs = std::filesystem;

std::string_view to_string(Phase p) noexcept { return p == Phase::Search ? "search" : "repeat"; }

namespace {

Phase parse_phase(const std::string& s) {
  if (s == "search") return Phase::Search;
  if (s == "repeat") return Phase::Repeat;
  throw IngestError("unknown phase '" + s + "'");
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "relu";
}

auto entry_key(const IndexEntry& e) { return std::tie(e.phase, e.config_id, e.index); }

// JSON has no NaN; non-finite reals are stored as null.
ordered_json real(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

double real_of(const ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

constexpr char kAttnMagic[8] = {'M', 'I', 'L', 'A', 'T', 'T', 'N', '1'};

}  // namespace

std::string encode_attention(const std::vector<AttentionProfile>& attention) {
  const std::size_t m = attention.empty() ? 0 : attention.front().size();
  BinaryWriter w;
  w.bytes(kAttnMagic, 8);
  w.u64(attention.size());
  w.u64(m);
  for (const auto& a : attention) {
    if (a.size() != m) throw InternalError("encode_attention: bags of unequal size");
    for (double v : a) w.f64(v);
  }
  return w.take();
}

std::vector<AttentionProfile> decode_attention(std::string bytes, const std::string& name) {
  BinaryReader r(std::move(bytes), name);
  char magic[8];
  r.bytes(magic, 8);
  if (!std::equal(magic, magic + 8, kAttnMagic)) throw IngestError(name + ": bad magic at byte offset 0");
  const std::uint64_t n = r.u64();
  const std::uint64_t m = r.u64();
  std::vector<AttentionProfile> out(n, AttentionProfile(m));
  for (auto& a : out)
    for (double& v : a) v = r.f64();
  if (!r.at_end()) throw IngestError(name + ": trailing bytes at offset " + std::to_string(r.offset()));
  return out;
}

std::string encode_config(const ModelConfig& c) {
  ordered_json j{{"id", c.id()},
                 {"input_dim", c.input_dim},
                 {"hidden_size", c.embed_dim},
                 {"attention_size", c.attention_dim},
                 {"featurizer_depth", c.featurizer_depth},
                 {"classifier_depth", c.classifier_depth},
                 {"learning_rate", c.learning_rate},
                 {"epochs", c.epochs},
                 {"batch_size", c.batch_size},
                 {"weight_decay", c.weight_decay},
                 {"activation", activation_name(c.hidden_activation)}};
  return j.dump(2) + "\n";
}

ModelConfig decode_config(const std::string& text) {
  try {
    const auto j = ordered_json::parse(text);
    ModelConfig c;
    c.input_dim = j.at("input_dim").get<std::size_t>();
    c.embed_dim = j.at("hidden_size").get<std::size_t>();
    c.attention_dim = j.at("attention_size").get<std::size_t>();
    c.featurizer_depth = j.at("featurizer_depth").get<std::size_t>();
    c.classifier_depth = j.at("classifier_depth").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.weight_decay = j.at("weight_decay").get<double>();
    const auto act = j.at("activation").get<std::string>();
    c.hidden_activation = act == "tanh" ? Activation::Tanh
                          : act == "identity" ? Activation::Identity
                                              : Activation::ReLU;
    c.validate();
    return c;
  } catch (const ordered_json::exception& e) {
    throw IngestError(std::string("config record: ") + e.what());
  }
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) {}

fs::path RunStore::config_dir(const std::string& config_id) const { return root_ / "configs" / config_id; }

fs::path RunStore::record_stem(const std::string& config_id, Phase phase, std::size_t index) const {
  return config_dir(config_id) / (std::string(to_string(phase)) + "-" + std::to_string(index));
}

bool RunStore::has(const std::string& config_id, Phase phase, std::size_t index) const {
  auto p = record_stem(config_id, phase, index);
  p += ".json";
  return fs::exists(p);
}

void RunStore::save_config(const ModelConfig& config) const {
  const auto dir = config_dir(config.id());
  fs::create_directories(dir);
  const auto path = dir / "config.json";
  const std::string text = encode_config(config);
  if (fs::exists(path) && read_text_file(path) == text) return;
  write_file_atomic(path, text);
}

std::optional<ModelConfig> RunStore::load_config(const std::string& config_id) const {
  const auto path = config_dir(config_id) / "config.json";
  if (!fs::exists(path)) return std::nullopt;
  return decode_config(read_text_file(path));
}

std::vector<std::string> RunStore::config_ids() const {
  std::vector<std::string> ids;
  const auto dir = root_ / "configs";
  if (!fs::exists(dir)) return ids;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && fs::exists(e.path() / "config.json")) ids.push_back(e.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void RunStore::save(const RunRecord& record, Phase phase, std::size_t index, const MilModel* model) {
  fs::create_directories(config_dir(record.config_id));
  const auto stem = record_stem(record.config_id, phase, index);
  auto with = [&](const char* ext) {
    auto p = stem;
    p += ext;
    return p;
  };

  write_file_atomic(with(".attn"), encode_attention(record.test_attention));
  if (model) write_file_atomic(with(".model"), encode_model_parameters(*model));

  ordered_json curve = ordered_json::array();
  for (double v : record.validation_curve) curve.push_back(real(v));
  ordered_json j{{"config_id", record.config_id},
                 {"phase", to_string(phase)},
                 {"index", index},
                 {"seed", record.seed},
                 {"validation_accuracy", real(record.validation_accuracy)},
                 {"validation_loss", real(record.validation_loss)},
                 {"test_accuracy", real(record.test_accuracy)},
                 {"test_iauc", real(record.test_iauc)},
                 {"training_diverged", record.training_diverged},
                 {"epochs_completed", record.epochs_completed},
                 {"validation_curve", curve}};
  write_file_atomic(with(".json"), j.dump(2) + "\n");

  append_index(IndexEntry{phase, record.config_id, index, record.seed, record.validation_accuracy,
                          record.test_iauc, record.training_diverged});
}

RunRecord RunStore::load(const std::string& config_id, Phase phase, std::size_t index) const {
  const auto stem = record_stem(config_id, phase, index);
  auto with = [&](const char* ext) {
    auto p = stem;
    p += ext;
    return p;
  };
  RunRecord r;
  try {
    const auto j = ordered_json::parse(read_text_file(with(".json")));
    r.config_id = j.at("config_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.validation_accuracy = real_of(j.at("validation_accuracy"));
    r.validation_loss = real_of(j.at("validation_loss"));
    r.test_accuracy = real_of(j.at("test_accuracy"));
    r.test_iauc = real_of(j.at("test_iauc"));
    r.training_diverged = j.at("training_diverged").get<bool>();
    r.epochs_completed = j.at("epochs_completed").get<std::size_t>();
    for (const auto& v : j.at("validation_curve")) r.validation_curve.push_back(real_of(v));
  } catch (const ordered_json::exception& e) {
    throw IngestError(with(".json").string() + ": " + e.what());
  }
  if (r.config_id != config_id) {
    throw IngestError(with(".json").string() + ": config id does not match its directory");
  }
  r.test_attention = decode_attention(read_binary_file(with(".attn")), with(".attn").string());
  return r;
}

std::vector<IndexEntry> RunStore::index() const {
  std::lock_guard lock(index_mutex_);
  return read_index();
}

std::vector<IndexEntry> RunStore::read_index() const {
  std::vector<IndexEntry> out;
  const auto path = root_ / "index.json";
  if (!fs::exists(path)) return out;
  try {
    const auto j = ordered_json::parse(read_text_file(path));
    for (const auto& e : j.at("runs")) {
      out.push_back(IndexEntry{parse_phase(e.at("phase").get<std::string>()),
                               e.at("config_id").get<std::string>(), e.at("index").get<std::size_t>(),
                               e.at("seed").get<std::uint64_t>(), real_of(e.at("validation_accuracy")),
                               real_of(e.at("test_iauc")), e.at("training_diverged").get<bool>()});
    }
  } catch (const ordered_json::exception& e) {
    throw IngestError(path.string() + ": " + e.what());
  }
  return out;
}

void RunStore::append_index(IndexEntry entry) {
  std::lock_guard lock(index_mutex_);
  auto entries = read_index();
  auto it = std::find_if(entries.begin(), entries.end(),
                         [&](const IndexEntry& e) { return entry_key(e) == entry_key(entry); });
  if (it != entries.end()) *it = std::move(entry);
  else entries.push_back(std::move(entry));
  std::sort(entries.begin(), entries.end(),
            [](const IndexEntry& a, const IndexEntry& b) { return entry_key(a) < entry_key(b); });

  ordered_json runs = ordered_json::array();
  for (const auto& e : entries) {
    runs.push_back({{"phase", to_string(e.phase)},
                    {"config_id", e.config_id},
                    {"index", e.index},
                    {"seed", e.seed},
                    {"validation_accuracy", real(e.validation_accuracy)},
                    {"test_iauc", real(e.test_iauc)},
                    {"training_diverged", e.training_diverged}});
  }
  write_file_atomic(root_ / "index.json", ordered_json{{"runs", runs}}.dump(1) + "\n");
}

}  // namespace milattn
