#include "milattn/dataset_io.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"
#include "milattn/error.hpp"
#include "milattn/io_util.hpp"

namespace milattn {

namespace {

constexpr char kSplitMagic[8] = {'M', 'I', 'L', 'B', 'A', 'G', 'S', '1'};
constexpr const char* kSplitNames[3] = {"train", "validation", "test"};

std::string encode_split(const std::vector<Bag>& bags, std::size_t bag_size, std::size_t dim) {
  BinaryWriter w;
  w.bytes(kSplitMagic, sizeof(kSplitMagic));
  w.u64(bags.size());
  w.u64(bag_size);
  w.u64(dim);
  for (const auto& b : bags) w.u8(static_cast<std::uint8_t>(b.label));
  for (const auto& b : bags)
    for (int y : b.instance_labels) w.u8(static_cast<std::uint8_t>(y));
  for (const auto& b : bags)
    for (double v : b.instances.values()) w.f64(v);
  return w.take();
}

std::vector<Bag> decode_split(const std::filesystem::path& path) {
  BinaryReader r(read_binary_file(path), path.string());
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kSplitMagic, sizeof(magic)) != 0) {
    throw IngestError(path.string() + ": bad magic at byte offset 0");
  }
  const auto n = r.u64();
  const auto m = r.u64();
  const auto dim = r.u64();
  std::vector<Bag> bags(n);
  for (auto& b : bags) b.label = r.u8();
  for (auto& b : bags) {
    b.instance_labels.resize(m);
    for (auto& y : b.instance_labels) y = r.u8();
  }
  for (auto& b : bags) {
    b.instances = Matrix(m, dim);
    for (double& v : b.instances.values()) v = r.f64();
  }
  return bags;
}

}  // namespace

void save_dataset(const DatasetSplits& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::size_t dim = data.input_dim();
  const std::vector<Bag>* splits[3] = {&data.train, &data.validation, &data.test};
  for (int s = 0; s < 3; ++s) {
    write_file_atomic(dir / (std::string(kSplitNames[s]) + ".bags"),
                      encode_split(*splits[s], data.bag_size, dim));
  }
  nlohmann::ordered_json j;
  j["modality"] = std::string(to_string(data.modality));
  j["problem"] = std::string(to_string(data.problem));
  j["master_seed"] = data.master_seed;
  j["bag_size"] = data.bag_size;
  j["balance"] = data.balance;
  j["input_dim"] = dim;
  j["sizes"] = {{"train", data.train.size()},
                {"validation", data.validation.size()},
                {"test", data.test.size()}};
  write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

DatasetSplits load_dataset(const std::filesystem::path& dir) {
  const auto text = read_text_file(dir / "manifest.json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IngestError((dir / "manifest.json").string() + ": " + e.what());
  }
  DatasetSplits data;
  try {
    data.modality = parse_modality(j.at("modality").get<std::string>());
    data.problem = parse_problem(j.at("problem").get<std::string>());
    data.master_seed = j.at("master_seed").get<std::uint64_t>();
    data.bag_size = j.at("bag_size").get<std::size_t>();
    data.balance = j.at("balance").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IngestError((dir / "manifest.json").string() + ": " + e.what());
  }
  std::vector<Bag>* splits[3] = {&data.train, &data.validation, &data.test};
  for (int s = 0; s < 3; ++s) *splits[s] = decode_split(dir / (std::string(kSplitNames[s]) + ".bags"));
  for (const auto* split : splits)
    for (const auto& b : *split) {
      if (bag_label_of(b.instance_labels, data.problem) != b.label) {
        throw DataError(dir.string() + ": stored bag label disagrees with instance labels");
      }
    }
  return data;
}

}  // namespace milattn
