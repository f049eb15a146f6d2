#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "milattn/datagen.hpp"
#include "milattn/dataset_io.hpp"
#include "milattn/error.hpp"
#include "milattn/problem.hpp"
#include "milattn/sources.hpp"
#include "test_util.hpp"

namespace milattn {
namespace {

using testing::TempDir;

TEST(BagLabel, Rules) {
  EXPECT_EQ(bag_label_of(std::vector<int>{0, 0, 0}, ProblemKind::MIL), 0);
  EXPECT_EQ(bag_label_of(std::vector<int>{0, 1, 0}, ProblemKind::MIL), 1);
  EXPECT_EQ(bag_label_of(std::vector<int>{1, 1}, ProblemKind::MIL), 1);
  EXPECT_EQ(bag_label_of(PresenceSet{0, 1}, ProblemKind::AND), 0);
  EXPECT_EQ(bag_label_of(PresenceSet{0, 2}, ProblemKind::AND), 0);
  EXPECT_EQ(bag_label_of(PresenceSet{0, 1, 2}, ProblemKind::AND), 1);
  EXPECT_EQ(bag_label_of(PresenceSet{0, 1, 2}, ProblemKind::XOR), 0);
  EXPECT_EQ(bag_label_of(PresenceSet{0, 2}, ProblemKind::XOR), 1);
  EXPECT_EQ(bag_label_of(PresenceSet{0, 1}, ProblemKind::XOR), 1);
  EXPECT_EQ(bag_label_of(PresenceSet{0}, ProblemKind::XOR), 0);
}

TEST(BagLabel, RejectsInvalidLabels) {
  EXPECT_THROW(bag_label_of(std::vector<int>{0, 3}, ProblemKind::AND), DataError);
  EXPECT_THROW(bag_label_of(std::vector<int>{0, 2}, ProblemKind::MIL), DataError);
}

TEST(BagLabel, KeyPopulations) {
  EXPECT_TRUE(is_key_population(1, ProblemKind::MIL));
  EXPECT_FALSE(is_key_population(0, ProblemKind::MIL));
  EXPECT_TRUE(is_key_population(2, ProblemKind::XOR));
  EXPECT_TRUE(is_key_population(1, ProblemKind::AND));
  EXPECT_FALSE(is_key_population(0, ProblemKind::AND));
}

TEST(Problem, ParseRoundTrip) {
  for (auto p : {ProblemKind::MIL, ProblemKind::AND, ProblemKind::XOR}) {
    EXPECT_EQ(parse_problem(to_string(p)), p);
  }
  EXPECT_THROW(parse_problem("OR"), ConfigError);
}

TEST(PresencePattern, FixedCases) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sample_presence_pattern(ProblemKind::MIL, 0, rng), (PresenceSet{0}));
    EXPECT_EQ(sample_presence_pattern(ProblemKind::MIL, 1, rng), (PresenceSet{0, 1}));
    EXPECT_EQ(sample_presence_pattern(ProblemKind::AND, 1, rng), (PresenceSet{0, 1, 2}));
  }
}

TEST(PresencePattern, XorPositiveIsUniform) {
  Rng rng(2);
  std::map<std::uint8_t, int> counts;
  for (int i = 0; i < 10000; ++i) ++counts[sample_presence_pattern(ProblemKind::XOR, 1, rng).bits()];
  ASSERT_EQ(counts.size(), 2u);
  EXPECT_NEAR(counts[(PresenceSet{0, 1}).bits()] / 10000.0, 0.5, 0.02);
  EXPECT_NEAR(counts[(PresenceSet{0, 2}).bits()] / 10000.0, 0.5, 0.02);
}

TEST(PresencePattern, LabelsAreConsistent) {
  Rng rng(3);
  for (auto p : {ProblemKind::MIL, ProblemKind::AND, ProblemKind::XOR})
    for (int y : {0, 1})
      for (int i = 0; i < 200; ++i) EXPECT_EQ(bag_label_of(sample_presence_pattern(p, y, rng), p), y);
}

TEST(ComposeBag, BackgroundOnly) {
  Rng rng(4);
  for (auto p : {ProblemKind::MIL, ProblemKind::AND, ProblemKind::XOR}) {
    const Bag b = compose_bag(PresenceSet{0}, p, 30, GaussianSpec{}, rng);
    EXPECT_EQ(b.label, 0);
    for (int y : b.instance_labels) EXPECT_EQ(y, 0);
  }
}

TEST(ComposeBag, GaussianMilPositive) {
  Rng rng(5);
  const Bag b = compose_bag(PresenceSet{0, 1}, ProblemKind::MIL, 250, GaussianSpec{}, rng);
  EXPECT_EQ(b.label, 1);
  ASSERT_EQ(b.instances.rows(), 250u);
  ASSERT_EQ(b.instances.cols(), 4u);
  std::size_t n1 = 0;
  std::array<double, 4> mean{};
  for (std::size_t m = 0; m < 250; ++m) {
    if (b.instance_labels[m] != 1) continue;
    ++n1;
    for (std::size_t d = 0; d < 4; ++d) mean[d] += b.instances(m, d);
  }
  EXPECT_NEAR(n1 / 250.0, 0.5, 0.1);
  for (double v : mean) EXPECT_NEAR(v / static_cast<double>(n1), 1.0, 0.2);
}

TEST(ComposeBag, TrinomialCounts) {
  Rng rng(6);
  for (int rep = 0; rep < 5; ++rep) {
    const Bag b = compose_bag(PresenceSet{0, 1, 2}, ProblemKind::AND, 250, GaussianSpec{}, rng);
    std::array<int, 3> c{};
    for (int y : b.instance_labels) ++c[y];
    EXPECT_NEAR(c[0], 100, 25);
    EXPECT_NEAR(c[1], 75, 25);
    EXPECT_NEAR(c[2], 75, 25);
    EXPECT_EQ(b.label, 1);
  }
}

TEST(GenerateDataset, BalanceAndDeterminism) {
  DatasetOptions o;
  o.sizes = {100, 40, 30};
  o.bag_size = 20;
  for (auto p : {ProblemKind::MIL, ProblemKind::AND, ProblemKind::XOR}) {
    const auto a = generate_dataset(Modality::Gaussian, p, o, 9, GaussianSpec{});
    const auto b = generate_dataset(Modality::Gaussian, p, o, 9, GaussianSpec{});
    int pos = 0;
    for (const auto& bag : a.train) {
      pos += bag.label;
      EXPECT_EQ(bag.label, bag_label_of(bag.instance_labels, p));
      EXPECT_EQ(bag.size(), 20u);
    }
    EXPECT_EQ(pos, 50);
    ASSERT_EQ(a.validation.size(), 40u);
    ASSERT_EQ(a.test.size(), 30u);
    for (std::size_t i = 0; i < a.train.size(); ++i) {
      EXPECT_EQ(a.train[i].instances, b.train[i].instances);
      EXPECT_EQ(a.train[i].instance_labels, b.train[i].instance_labels);
    }
    const auto c = generate_dataset(Modality::Gaussian, p, o, 10, GaussianSpec{});
    EXPECT_NE(a.train[0].instances, c.train[0].instances);
  }
}

TEST(DatasetIo, RoundTrip) {
  TempDir dir("dataset");
  DatasetOptions o;
  o.sizes = {6, 4, 4};
  o.bag_size = 5;
  const auto a = generate_dataset(Modality::Gaussian, ProblemKind::XOR, o, 3, GaussianSpec{});
  save_dataset(a, dir.path() / "ds");
  const auto b = load_dataset(dir.path() / "ds");
  EXPECT_EQ(b.problem, ProblemKind::XOR);
  EXPECT_EQ(b.bag_size, 5u);
  ASSERT_EQ(b.train.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(a.train[i].instances, b.train[i].instances);
    EXPECT_EQ(a.train[i].instance_labels, b.train[i].instance_labels);
    EXPECT_EQ(a.train[i].label, b.train[i].label);
  }
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

struct IdxFiles {
  std::filesystem::path images, labels;
};

IdxFiles write_idx(const std::filesystem::path& dir, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  IdxFiles f{dir / "images.idx", dir / "labels.idx"};
  std::ofstream img(f.images, std::ios::binary), lab(f.labels, std::ios::binary);
  put_be32(img, 0x803);
  put_be32(img, static_cast<std::uint32_t>(n));
  put_be32(img, 28);
  put_be32(img, 28);
  put_be32(lab, 0x801);
  put_be32(lab, static_cast<std::uint32_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const char digit = static_cast<char>(uniform_index(rng, 10));
    lab.write(&digit, 1);
    for (int p = 0; p < 784; ++p) {
      const char px = static_cast<char>(uniform_index(rng, 256));
      img.write(&px, 1);
    }
  }
  return f;
}

// Independent label reader: raw stream, manual big-endian header.
std::array<int, 10> digit_histogram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char h[8];
  in.read(reinterpret_cast<char*>(h), 8);
  const std::uint32_t n = (std::uint32_t{h[4]} << 24) | (std::uint32_t{h[5]} << 16) | (std::uint32_t{h[6]} << 8) | h[7];
  std::array<int, 10> hist{};
  for (std::uint32_t i = 0; i < n; ++i) ++hist[static_cast<unsigned char>(in.get())];
  return hist;
}

TEST(Mnist, ReadsIdxFiles) {
  TempDir dir("idx");
  const auto f = write_idx(dir.path(), 10000, 11);
  const auto images = read_idx_images(f.images);
  EXPECT_EQ(images.count, 10000u);
  EXPECT_EQ(images.rows * images.cols, 784u);
  const auto labels = read_idx_labels(f.labels);
  ASSERT_EQ(labels.size(), 10000u);

  const auto hist = digit_histogram(f.labels);
  std::array<int, 10> ours{};
  for (auto d : labels) ++ours[d];
  EXPECT_EQ(ours, hist);

  const auto pool = load_mnist_idx(f.images, f.labels, ProblemKind::AND);
  EXPECT_EQ(pool.dim(), 784u);
  EXPECT_EQ(static_cast<int>(pool.size(1)), hist[3]);
  EXPECT_EQ(static_cast<int>(pool.size(2)), hist[9]);
  EXPECT_EQ(pool.size(0) + pool.size(1) + pool.size(2), 10000u);
  for (int p = 0; p < 3; ++p)
    for (double v : pool.populations[p].values()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }

  const auto mil = load_mnist_idx(f.images, f.labels, ProblemKind::MIL);
  EXPECT_EQ(mil.size(2), 0u);
  EXPECT_EQ(static_cast<int>(mil.size(0)), 10000 - hist[3]);
}

TEST(Mnist, RejectsBadFiles) {
  TempDir dir("idxbad");
  const auto f = write_idx(dir.path(), 5, 12);
  EXPECT_THROW(read_idx_images(f.labels), IngestError);
  EXPECT_THROW(read_idx_labels(f.images), IngestError);
  std::filesystem::resize_file(f.images, 100);
  EXPECT_THROW(read_idx_images(f.images), IngestError);
  EXPECT_THROW(read_idx_images(dir.path() / "missing"), IngestError);
}

std::filesystem::path write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p) << s;
  return p;
}

TEST(Cytof, ToyTableOneRowPerPopulation) {
  TempDir dir("cytof");
  const auto p = write_text(dir.path() / "t.csv", "cluster,m1,m2\nB2,1,5\nB1,2,5\nluminal_a,3,5\nother,9,9\n");
  const auto pool = load_cytof_table(p);
  EXPECT_EQ(pool.size(0), 1u);
  EXPECT_EQ(pool.size(1), 1u);
  EXPECT_EQ(pool.size(2), 1u);
  EXPECT_EQ(pool.dim(), 2u);
  for (int q = 0; q < 3; ++q) EXPECT_EQ(pool.populations[q](0, 1), 0.0);
}

TEST(Cytof, StandardizedMoments) {
  TempDir dir("cytof2");
  Rng rng(13);
  std::string s = "a\tcluster\tb\tc\n";
  const char* clusters[] = {"B1", "B2", "L1", "Luminal-x"};
  for (int i = 0; i < 500; ++i) {
    s += std::to_string(3.0 + 2.0 * standard_normal(rng)) + "\t" + clusters[i % 4] + "\t" +
         std::to_string(-10.0 + 0.1 * standard_normal(rng)) + "\t" + std::to_string(uniform01(rng)) + "\n";
  }
  CytofTableOptions o;
  o.delimiter = '\t';
  const auto pool = load_cytof_table(write_text(dir.path() / "t.tsv", s), o);
  EXPECT_EQ(pool.size(0) + pool.size(1) + pool.size(2), 500u);
  for (std::size_t c = 0; c < 3; ++c) {
    long double sum = 0, sq = 0;
    std::size_t n = 0;
    for (const auto& m : pool.populations)
      for (std::size_t r = 0; r < m.rows(); ++r, ++n) sum += m(r, c);
    const long double mean = sum / n;
    for (const auto& m : pool.populations)
      for (std::size_t r = 0; r < m.rows(); ++r) sq += (m(r, c) - mean) * (m(r, c) - mean);
    EXPECT_LE(std::abs(static_cast<double>(mean)), 1e-9);
    EXPECT_NEAR(static_cast<double>(sq / n), 1.0, 1e-9);
  }
}

TEST(Cytof, MalformedInput) {
  TempDir dir("cytof3");
  EXPECT_THROW(load_cytof_table(write_text(dir.path() / "a.csv", "x,y\n1,2\n")), IngestError);
  EXPECT_THROW(load_cytof_table(write_text(dir.path() / "b.csv", "cluster,y\nB1,abc\n")), IngestError);
  EXPECT_THROW(load_cytof_table(write_text(dir.path() / "c.csv", "cluster,y\nB1,1,2\n")), IngestError);
}

TEST(SynthCytof, DeterministicAndSeparated) {
  const auto a = synth_cytof_pool(5);
  const auto b = synth_cytof_pool(5);
  EXPECT_EQ(a.populations[1], b.populations[1]);
  EXPECT_EQ(a.dim(), kSynthMarkers);

  std::array<std::vector<double>, 3> means;
  for (int p = 0; p < 3; ++p) {
    means[p].assign(a.dim(), 0.0);
    const auto& m = a.populations[p];
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) means[p][c] += m(r, c) / static_cast<double>(m.rows());
  }
  for (int p = 0; p < 3; ++p)
    for (int q = p + 1; q < 3; ++q) {
      double d = 0.0;
      for (std::size_t c = 0; c < a.dim(); ++c) d += (means[p][c] - means[q][c]) * (means[p][c] - means[q][c]);
      EXPECT_GE(std::sqrt(d), 1.0);
    }
}

TEST(SynthCytof, LinearlySeparable) {
  const auto pool = synth_cytof_pool(6);
  const auto& p0 = pool.populations[0];
  const auto& p1 = pool.populations[1];
  const std::size_t half = p0.rows() / 2;
  const std::size_t dim = pool.dim();
  // Fit: difference of class means on the first half, midpoint threshold.
  std::vector<double> m0(dim, 0.0), m1(dim, 0.0);
  for (std::size_t r = 0; r < half; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      m0[c] += p0(r, c) / half;
      m1[c] += p1(r, c) / half;
    }
  std::vector<double> w(dim);
  double bias = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    w[c] = m1[c] - m0[c];
    bias -= w[c] * 0.5 * (m0[c] + m1[c]);
  }
  std::size_t correct = 0, total = 0;
  auto score = [&](const Matrix& m, std::size_t r) {
    double s = bias;
    for (std::size_t c = 0; c < dim; ++c) s += w[c] * m(r, c);
    return s;
  };
  for (std::size_t r = half; r < p0.rows(); ++r, ++total) correct += score(p0, r) < 0.0;
  for (std::size_t r = half; r < p1.rows(); ++r, ++total) correct += score(p1, r) > 0.0;
  EXPECT_GE(static_cast<double>(correct) / static_cast<double>(total), 0.9);
}

TEST(GenerateDataset, PoolSource) {
  const auto pool = synth_cytof_pool(7);
  DatasetOptions o;
  o.sizes = {10, 4, 4};
  o.bag_size = 30;
  const auto d = generate_dataset(Modality::CyTOFSynthetic, ProblemKind::AND, o, 1, &pool);
  EXPECT_EQ(d.input_dim(), kSynthMarkers);
  for (const auto& b : d.train) EXPECT_EQ(b.label, bag_label_of(b.instance_labels, ProblemKind::AND));

  PopulationPool empty_two = pool;
  empty_two.populations[2] = Matrix(0, kSynthMarkers);
  EXPECT_ANY_THROW(generate_dataset(Modality::CyTOFSynthetic, ProblemKind::AND, o, 1, &empty_two));
}

}  // namespace
}  // namespace milattn
