#include "milattn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "milattn/adam.hpp"
#include "milattn/error.hpp"
#include "milattn/loss.hpp"

namespace milattn {

EvalResult evaluate(const MilModel& model, const std::vector<Bag>& bags) {
  EvalResult r;
  if (bags.empty()) return r;
  std::size_t correct = 0;
  double loss = 0.0;
  r.attention.reserve(bags.size());
  for (const auto& bag : bags) {
    auto p = predict_bag(model, bag.instances);
    correct += p.predicted_label() == bag.label ? 1 : 0;
    const double mx = std::max(p.logits[0], p.logits[1]);
    const double lse = mx + std::log(std::exp(p.logits[0] - mx) + std::exp(p.logits[1] - mx));
    loss += lse - p.logits[bag.label];
    r.attention.push_back(std::move(p.attention));
  }
  const auto n = static_cast<double>(bags.size());
  r.accuracy = static_cast<double>(correct) / n;
  r.mean_loss = loss / n;
  return r;
}

namespace {

double validation_accuracy_only(const MilModel& model, const std::vector<Bag>& bags) {
  if (bags.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& bag : bags) correct += predict_bag(model, bag.instances).predicted_label() == bag.label;
  return static_cast<double>(correct) / static_cast<double>(bags.size());
}

}  // namespace

RunRecord train(const ModelConfig& config, std::uint64_t seed, const DatasetSplits& data,
                const TrainOptions& options, MilModel* trained) {
  if (data.train.empty()) throw DataError("train: empty training split");
  ModelConfig cfg = config;
  cfg.input_dim = data.input_dim();
  MilModel model = init_model(cfg, seed);

  RunRecord rec;
  rec.config_id = config.id();
  rec.seed = seed;

  Rng shuffle_rng(derive_seed(seed, {0x73687566ULL}));
  AdamState adam(model.parameter_count(), model.config.learning_rate, model.config.weight_decay);
  std::vector<double> params = model.parameters();
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const Bag*> batch;
  batch.reserve(model.config.batch_size);

  try {
    for (std::size_t epoch = 0; epoch < model.config.epochs; ++epoch) {
      shuffle(order.begin(), order.end(), shuffle_rng);
      for (std::size_t start = 0; start < order.size(); start += model.config.batch_size) {
        const std::size_t stop = std::min(order.size(), start + model.config.batch_size);
        batch.clear();
        for (std::size_t i = start; i < stop; ++i) batch.push_back(&data.train[order[i]]);
        const auto lg = loss_and_grads(model, batch);
        adam_step(params, lg.gradient, adam);
        model.set_parameters(params);
      }
      rec.epochs_completed = epoch + 1;
      if (options.record_validation_curve) {
        rec.validation_curve.push_back(validation_accuracy_only(model, data.validation));
      }
    }
  } catch (const DivergenceError&) {
    rec.training_diverged = true;
  }
  const EvalResult val = evaluate(model, data.validation);
  rec.validation_accuracy = val.accuracy;
  rec.validation_loss = std::isfinite(val.mean_loss) ? val.mean_loss : 1e300;
  EvalResult test = evaluate(model, data.test);
  rec.test_accuracy = test.accuracy;
  rec.test_attention = std::move(test.attention);
  try {
    rec.test_iauc = compute_iauc(rec.test_attention, data.test, data.problem, options.iauc);
  } catch (const MetricError&) {
    // NaN attention after divergence; the run is excluded from rankings anyway.
    if (!rec.training_diverged) throw;
    rec.test_iauc = 0.5;
  }
  if (trained != nullptr) *trained = std::move(model);
  return rec;
}

}  // namespace milattn
