#include "milattn/sources.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "milattn/error.hpp"

namespace milattn {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& buf, std::size_t offset,
                   const std::filesystem::path& path) {
  if (offset + 4 > buf.size()) {
    throw IngestError(path.string() + ": truncated header at byte offset " + std::to_string(offset));
  }
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

IdxImages read_idx_images(const std::filesystem::path& path) {
  const auto buf = read_file(path);
  const auto magic = be32(buf, 0, path);
  if (magic != kIdxImagesMagic) {
    throw IngestError(path.string() + ": bad magic " + hex32(magic) + " at byte offset 0 (expected " +
                      hex32(kIdxImagesMagic) + ")");
  }
  IdxImages img;
  img.count = be32(buf, 4, path);
  img.rows = be32(buf, 8, path);
  img.cols = be32(buf, 12, path);
  const std::size_t need = img.count * img.rows * img.cols;
  if (buf.size() < 16 + need) {
    throw IngestError(path.string() + ": truncated pixel data at byte offset " +
                      std::to_string(buf.size()) + " (expected " + std::to_string(16 + need) +
                      " bytes)");
  }
  img.pixels.assign(buf.begin() + 16, buf.begin() + 16 + static_cast<std::ptrdiff_t>(need));
  return img;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  const auto buf = read_file(path);
  const auto magic = be32(buf, 0, path);
  if (magic != kIdxLabelsMagic) {
    throw IngestError(path.string() + ": bad magic " + hex32(magic) + " at byte offset 0 (expected " +
                      hex32(kIdxLabelsMagic) + ")");
  }
  const std::size_t n = be32(buf, 4, path);
  if (buf.size() < 8 + n) {
    throw IngestError(path.string() + ": truncated label data at byte offset " +
                      std::to_string(buf.size()) + " (expected " + std::to_string(8 + n) + " bytes)");
  }
  return {buf.begin() + 8, buf.begin() + 8 + static_cast<std::ptrdiff_t>(n)};
}

PopulationPool load_mnist_idx(const std::filesystem::path& images_path,
                              const std::filesystem::path& labels_path, ProblemKind problem) {
  const auto images = read_idx_images(images_path);
  const auto labels = read_idx_labels(labels_path);
  if (labels.size() != images.count) {
    throw IngestError("image count " + std::to_string(images.count) + " != label count " +
                      std::to_string(labels.size()));
  }
  const std::size_t dim = images.rows * images.cols;
  std::array<std::vector<double>, 3> rows;
  std::array<std::size_t, 3> counts{};
  for (std::size_t i = 0; i < images.count; ++i) {
    const int digit = labels[i];
    if (digit > 9) {
      throw IngestError(labels_path.string() + ": label " + std::to_string(digit) +
                        " at byte offset " + std::to_string(8 + i));
    }
    int pop = 0;
    if (digit == 3) pop = 1;
    if (digit == 9 && problem != ProblemKind::MIL) pop = 2;
    const auto* px = images.pixels.data() + i * dim;
    for (std::size_t d = 0; d < dim; ++d) rows[pop].push_back(px[d] / 255.0);
    ++counts[pop];
  }
  PopulationPool pool;
  for (int p = 0; p < 3; ++p) pool.populations[p] = Matrix(counts[p], dim, std::move(rows[p]));
  return pool;
}

std::optional<int> CytofMapping::population_of(const std::string& cluster) const {
  if (auto it = exact.find(cluster); it != exact.end()) return it->second;
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
  };
  const std::string name = lower(cluster);
  for (const auto& prefix : luminal_prefixes) {
    const std::string p = lower(prefix);
    if (!p.empty() && name.rfind(p, 0) == 0) return 0;
  }
  return std::nullopt;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    std::size_t start = 0;
    while (start < field.size() && field[start] == ' ') ++start;
    out.push_back(field.substr(start));
  }
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

PopulationPool load_cytof_table(const std::filesystem::path& path,
                                const CytofTableOptions& options) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IngestError(path.string() + ": missing header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
  const auto header = split_line(line, options.delimiter);
  const auto cluster_it = std::find(header.begin(), header.end(), options.cluster_column);
  if (cluster_it == header.end()) {
    throw IngestError(path.string() + ": missing cluster column '" + options.cluster_column + "'");
  }
  const auto cluster_idx = static_cast<std::size_t>(cluster_it - header.begin());
  const std::size_t n_markers = header.size() - 1;
  if (n_markers == 0) throw IngestError(path.string() + ": no marker columns");

  std::array<std::vector<double>, 3> rows;
  std::array<std::size_t, 3> counts{};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_line(line, options.delimiter);
    if (fields.size() != header.size()) {
      throw IngestError(path.string() + ": row " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    }
    const auto pop = options.mapping.population_of(fields[cluster_idx]);
    std::vector<double> values;
    values.reserve(n_markers);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == cluster_idx) continue;
      const auto v = parse_double(fields[c]);
      if (!v) {
        throw IngestError(path.string() + ": non-numeric value '" + fields[c] + "' at row " +
                          std::to_string(line_no) + ", column '" + header[c] + "'");
      }
      values.push_back(*v);
    }
    if (!pop) continue;
    rows[*pop].insert(rows[*pop].end(), values.begin(), values.end());
    ++counts[*pop];
  }

  // Standardize each marker over the whole pool.
  const std::size_t total = counts[0] + counts[1] + counts[2];
  if (total == 0) throw IngestError(path.string() + ": no rows mapped to any population");
  std::vector<double> mean(n_markers, 0.0), var(n_markers, 0.0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) mean[i % n_markers] += r[i];
  for (double& m : mean) m /= static_cast<double>(total);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double d = r[i] - mean[i % n_markers];
      var[i % n_markers] += d * d;
    }
  for (double& v : var) v /= static_cast<double>(total);
  constexpr double kVarianceFloor = 1e-12;
  for (auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::size_t c = i % n_markers;
      r[i] = var[c] < kVarianceFloor ? 0.0 : (r[i] - mean[c]) / std::sqrt(var[c]);
    }

  PopulationPool pool;
  for (int p = 0; p < 3; ++p) pool.populations[p] = Matrix(counts[p], n_markers, std::move(rows[p]));
  return pool;
}

PopulationPool synth_cytof_pool(std::uint64_t seed) {
  PopulationPool pool;
  for (int p = 0; p < 3; ++p) {
    Rng rng(derive_seed(seed, {0x637974ULL, static_cast<std::uint64_t>(p)}));
    Matrix m(kSynthCellsPerPopulation, kSynthMarkers);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      auto row = m.row(r);
      for (std::size_t c = 0; c < kSynthMarkers; ++c) {
        double mu = 0.0;
        if (p == 1 && c < 16) mu = kSynthShift;
        if (p == 2 && c >= 8 && c < 24) mu = kSynthShift;
        row[c] = mu + kSynthSigma * standard_normal(rng);
      }
    }
    pool.populations[p] = std::move(m);
  }
  return pool;
}

}  // namespace milattn
