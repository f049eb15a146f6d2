#include "milattn/datagen.hpp"

#include <cmath>
#include <string>

#include "milattn/error.hpp"

namespace milattn {

std::string_view to_string(Modality m) noexcept {
  switch (m) {
    case Modality::Gaussian:
      return "gaussian";
    case Modality::MNIST:
      return "mnist";
    case Modality::CyTOF:
      return "cytof";
    case Modality::CyTOFSynthetic:
      return "cytof-synthetic";
  }
  return "?";
}

Modality parse_modality(std::string_view s) {
  if (s == "gaussian" || s == "Gaussian") return Modality::Gaussian;
  if (s == "mnist" || s == "MNIST") return Modality::MNIST;
  if (s == "cytof" || s == "CyTOF") return Modality::CyTOF;
  if (s == "cytof-synthetic" || s == "CyTOF-synthetic") return Modality::CyTOFSynthetic;
  throw ConfigError("unknown modality '" + std::string(s) + "'");
}

std::size_t PopulationPool::dim() const noexcept {
  for (const auto& p : populations) {
    if (p.rows() > 0) return p.cols();
  }
  return 0;
}

std::size_t DatasetSplits::input_dim() const noexcept {
  for (const auto* split : {&train, &validation, &test}) {
    if (!split->empty()) return split->front().instances.cols();
  }
  return 0;
}

std::array<double, 3> mixing_probabilities(ProblemKind problem) noexcept {
  if (problem == ProblemKind::MIL) return {0.5, 0.5, 0.0};
  return {0.4, 0.3, 0.3};
}

PresenceSet sample_presence_pattern(ProblemKind problem, int target_label, Rng& rng) {
  if (target_label != 0 && target_label != 1) {
    throw ConfigError("target bag label must be 0 or 1");
  }
  switch (problem) {
    case ProblemKind::MIL:
      return target_label == 1 ? PresenceSet{0, 1} : PresenceSet{0};
    case ProblemKind::AND: {
      if (target_label == 1) return PresenceSet{0, 1, 2};
      static constexpr PresenceSet kNeg[] = {PresenceSet{0}, PresenceSet{0, 1}, PresenceSet{0, 2}};
      return kNeg[uniform_index(rng, 3)];
    }
    case ProblemKind::XOR: {
      if (target_label == 1) {
        static constexpr PresenceSet kPos[] = {PresenceSet{0, 1}, PresenceSet{0, 2}};
        return kPos[uniform_index(rng, 2)];
      }
      static constexpr PresenceSet kNeg[] = {PresenceSet{0}, PresenceSet{0, 1, 2}};
      return kNeg[uniform_index(rng, 2)];
    }
  }
  return PresenceSet{0};
}

namespace {

std::size_t source_dim(const InstanceSource& source) {
  if (const auto* g = std::get_if<GaussianSpec>(&source)) return g->dim();
  return std::get<const PopulationPool*>(source)->dim();
}

void draw_instance(const InstanceSource& source, int pop, std::span<double> out, Rng& rng) {
  if (const auto* g = std::get_if<GaussianSpec>(&source)) {
    const auto& mu = g->means[pop];
    for (std::size_t d = 0; d < out.size(); ++d) out[d] = mu[d] + g->sigma * standard_normal(rng);
    return;
  }
  const PopulationPool& pool = *std::get<const PopulationPool*>(source);
  const Matrix& rows = pool.populations[pop];
  const auto idx = uniform_index(rng, rows.rows());
  const auto src = rows.row(idx);
  std::copy(src.begin(), src.end(), out.begin());
}

void check_source(const InstanceSource& source, PresenceSet pattern) {
  if (const auto* g = std::get_if<GaussianSpec>(&source)) {
    if (!(g->sigma > 0.0)) throw ConfigError("Gaussian sigma must be positive");
    for (const auto& m : g->means) {
      if (m.size() != g->dim()) throw ConfigError("Gaussian means differ in dimension");
    }
    return;
  }
  const auto* pool = std::get<const PopulationPool*>(source);
  if (pool == nullptr) throw ConfigError("null population pool");
  for (int p = 0; p < 3; ++p) {
    if (pattern.contains(p) && pool->size(p) == 0) {
      throw DataError("population " + std::to_string(p) + " of the pool is empty");
    }
  }
}

}  // namespace

Bag compose_bag(PresenceSet pattern, ProblemKind problem, std::size_t bag_size,
                const InstanceSource& source, Rng& rng) {
  if (pattern.empty()) throw ConfigError("compose_bag: empty presence pattern");
  if (bag_size == 0) throw ConfigError("compose_bag: bag size must be positive");
  check_source(source, pattern);
  const int target = bag_label_of(pattern, problem);

  const auto mix = mixing_probabilities(problem);
  std::array<double, 3> probs{};
  double total = 0.0;
  for (int p = 0; p < 3; ++p) {
    probs[p] = pattern.contains(p) ? mix[p] : 0.0;
    total += probs[p];
  }
  if (total <= 0.0) throw ConfigError("presence pattern " + to_string(pattern) + " has zero mass");
  for (double& p : probs) p /= total;

  Bag bag;
  bag.instance_labels.resize(bag_size);
  do {
    for (auto& y : bag.instance_labels) {
      const double u = uniform01(rng);
      y = u < probs[0] ? 0 : (u < probs[0] + probs[1] ? 1 : 2);
      if (probs[y] == 0.0) y = probs[1] > 0.0 ? 1 : 0;  // guards u landing on a rounding edge
    }
  } while (bag_label_of(bag.instance_labels, problem) != target);
  bag.label = target;

  const std::size_t dim = source_dim(source);
  bag.instances = Matrix(bag_size, dim);
  for (std::size_t m = 0; m < bag_size; ++m) {
    draw_instance(source, bag.instance_labels[m], bag.instances.row(m), rng);
  }
  return bag;
}

namespace {

std::vector<Bag> generate_split(ProblemKind problem, std::size_t n, std::uint64_t split_id,
                                const DatasetOptions& options, std::uint64_t master_seed,
                                const InstanceSource& source) {
  const auto n_pos = static_cast<std::size_t>(std::llround(options.balance * static_cast<double>(n)));
  std::vector<int> labels(n, 0);
  for (std::size_t i = 0; i < n_pos && i < n; ++i) labels[i] = 1;
  Rng label_rng(derive_seed(master_seed, {split_id, 0x6c6162656c73ULL}));
  shuffle(labels.begin(), labels.end(), label_rng);

  std::vector<Bag> bags;
  bags.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(master_seed, {split_id, i}));
    const PresenceSet pattern = sample_presence_pattern(problem, labels[i], rng);
    bags.push_back(compose_bag(pattern, problem, options.bag_size, source, rng));
  }
  return bags;
}

}  // namespace

DatasetSplits generate_dataset(Modality modality, ProblemKind problem,
                               const DatasetOptions& options, std::uint64_t master_seed,
                               const InstanceSource& source) {
  if (!(options.balance >= 0.0 && options.balance <= 1.0)) {
    throw ConfigError("balance must lie in [0, 1]");
  }
  DatasetSplits data;
  data.modality = modality;
  data.problem = problem;
  data.master_seed = master_seed;
  data.bag_size = options.bag_size;
  data.balance = options.balance;
  data.train = generate_split(problem, options.sizes.train, 0, options, master_seed, source);
  data.validation = generate_split(problem, options.sizes.validation, 1, options, master_seed, source);
  data.test = generate_split(problem, options.sizes.test, 2, options, master_seed, source);
  return data;
}

}  // namespace milattn
