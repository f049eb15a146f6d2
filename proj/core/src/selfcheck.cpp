#include "milattn/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "milattn/adam.hpp"
#include "milattn/ensemble.hpp"
#include "milattn/loss.hpp"
#include "milattn/metrics.hpp"
#include "milattn/mlp.hpp"
#include "milattn/model.hpp"
#include "milattn/rng.hpp"

namespace milattn {

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = standard_normal(rng);
  return m;
}

Bag random_bag(std::size_t size, std::size_t dim, int label, Rng& rng) {
  Bag b;
  b.instances = random_matrix(size, dim, rng);
  b.instance_labels.assign(size, 0);
  b.label = label;
  return b;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

std::vector<ModelConfig> grid_architectures() {
  std::set<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> seen;
  std::vector<ModelConfig> out;
  for (auto modality : {Modality::Gaussian, Modality::MNIST, Modality::CyTOF}) {
    const ParameterGrid g = full_grid(modality);
    for (auto k : g.embed_dim)
      for (auto l : g.attention_dim)
        for (auto f : g.featurizer_depth)
          for (auto c : g.classifier_depth) {
            ModelConfig cfg;
            cfg.input_dim = 3;
            cfg.embed_dim = f == 0 ? cfg.input_dim : k;
            cfg.attention_dim = l;
            cfg.featurizer_depth = f;
            cfg.classifier_depth = c;
            if (seen.emplace(cfg.embed_dim, l, f, c).second) out.push_back(cfg);
          }
  }
  return out;
}

namespace {

using Real = long double;

struct ReferenceEval {
  Real loss = 0;
  std::vector<bool> relu_active;  // sign pattern of every ReLU input, in evaluation order
};

std::vector<Real> reference_dense(const Mlp& net, std::vector<Real> x, std::vector<bool>& pattern) {
  for (std::size_t i = 0; i < net.depth(); ++i) {
    const auto& layer = net.layers[i];
    std::vector<Real> y(layer.weight.rows());
    for (std::size_t o = 0; o < y.size(); ++o) {
      Real acc = layer.bias[o];
      for (std::size_t j = 0; j < x.size(); ++j) acc += static_cast<Real>(layer.weight(o, j)) * x[j];
      if (net.layer_is_activated(i)) {
        switch (net.hidden_activation) {
          case Activation::ReLU:
            pattern.push_back(acc > 0);
            acc = acc > 0 ? acc : 0;
            break;
          case Activation::Tanh: acc = std::tanh(acc); break;
          case Activation::Identity: break;
        }
      }
      y[o] = acc;
    }
    x = std::move(y);
  }
  return x;
}

// Independent loop-based evaluation of the batch loss in extended precision.
ReferenceEval reference_loss(const MilModel& model, std::span<const Bag* const> batch) {
  ReferenceEval out;
  for (const Bag* bag : batch) {
    const std::size_t m = bag->size();
    std::vector<std::vector<Real>> z(m);
    std::vector<Real> score(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto row = bag->instances.row(i);
      z[i] = reference_dense(model.featurizer, std::vector<Real>(row.begin(), row.end()), out.relu_active);
      Real s = 0;
      for (std::size_t l = 0; l < model.attention_w.size(); ++l) {
        Real h = 0;
        for (std::size_t k = 0; k < z[i].size(); ++k) h += static_cast<Real>(model.attention_V(l, k)) * z[i][k];
        s += static_cast<Real>(model.attention_w[l]) * std::tanh(h);
      }
      score[i] = s;
    }
    const Real mx = *std::max_element(score.begin(), score.end());
    Real total = 0;
    for (auto& s : score) total += (s = std::exp(s - mx));
    std::vector<Real> pooled(z.front().size(), 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < pooled.size(); ++k) pooled[k] += score[i] / total * z[i][k];
    const auto logits = reference_dense(model.classifier, pooled, out.relu_active);
    const Real top = std::max(logits[0], logits[1]);
    const Real lse = top + std::log(std::exp(logits[0] - top) + std::exp(logits[1] - top));
    out.loss += lse - logits[static_cast<std::size_t>(bag->label)];
  }
  out.loss /= static_cast<Real>(batch.size());
  return out;
}

}  // namespace

CheckResult check_gradient_exactness(std::uint64_t seed, double tolerance) {
  CheckResult res{"gradient exactness", true, ""};
  const auto shapes = grid_architectures();
  double worst = 0.0;
  std::string worst_id;
  std::size_t entries = 0, narrowed = 0, kinked = 0;
  std::size_t i = 0;
  for (const auto& cfg : shapes) {
    Rng rng(derive_seed(seed, {hash_string("gradcheck"), i++}));
    MilModel model = init_model(cfg, rng());
    std::vector<Bag> bags;
    for (int b = 0; b < 2; ++b) bags.push_back(random_bag(3, cfg.input_dim, b % 2, rng));
    std::vector<const Bag*> batch;
    for (const auto& b : bags) batch.push_back(&b);

    // Zero biases put dead ReLUs exactly on the kink; move to a generic point.
    auto params = model.parameters();
    for (double& v : params) v += 0.1 * standard_normal(rng);
    model.set_parameters(params);
    const auto analytic = loss_and_grads(model, batch).gradient;
    const auto center = reference_loss(model, batch).relu_active;

    for (std::size_t p = 0; p < params.size(); ++p) {
      const double orig = params[p];
      double step = 1e-5;
      bool smooth = false;
      Real numeric = 0;
      // A stencil that crosses a ReLU kink is not a derivative; shrink it.
      for (int attempt = 0; attempt < 4 && !smooth; ++attempt, step *= 1e-2) {
        params[p] = orig + step;
        model.set_parameters(params);
        const auto up = reference_loss(model, batch);
        params[p] = orig - step;
        model.set_parameters(params);
        const auto down = reference_loss(model, batch);
        smooth = up.relu_active == center && down.relu_active == center;
        numeric = (up.loss - down.loss) / (2 * static_cast<Real>(step));
        if (!smooth) ++narrowed;
      }
      params[p] = orig;
      ++entries;
      if (!smooth) ++kinked;
      const double n = static_cast<double>(numeric);
      const double a = analytic[p];
      const double err = std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
      if (err > worst) {
        worst = err;
        worst_id = cfg.id();
      }
    }
    model.set_parameters(params);
  }
  res.passed = worst <= tolerance && kinked == 0;
  res.detail = std::to_string(shapes.size()) + " architectures, " + std::to_string(entries) +
               " entries, max relative error " + fmt(worst) +
               (worst_id.empty() ? "" : " (" + worst_id + ")") + ", " + std::to_string(narrowed) +
               " stencils narrowed at ReLU kinks";
  return res;
}

CheckResult check_permutation_invariance(std::uint64_t seed, std::size_t trials) {
  CheckResult res{"permutation invariance", true, ""};
  Rng rng(derive_seed(seed, {hash_string("permutation")}));
  double worst_logit = 0.0;
  std::size_t attention_mismatches = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    ModelConfig cfg;
    cfg.input_dim = 1 + uniform_index(rng, 6);
    cfg.featurizer_depth = uniform_index(rng, 3);
    cfg.embed_dim = cfg.featurizer_depth == 0 ? cfg.input_dim : 1 + uniform_index(rng, 8);
    cfg.attention_dim = 1 + uniform_index(rng, 8);
    cfg.classifier_depth = 1 + uniform_index(rng, 3);
    const MilModel model = init_model(cfg, rng());
    const std::size_t m = 1 + uniform_index(rng, 40);
    const Matrix x = random_matrix(m, cfg.input_dim, rng);
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm.begin(), perm.end(), rng);
    Matrix xp(m, cfg.input_dim);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t d = 0; d < cfg.input_dim; ++d) xp(i, d) = x(perm[i], d);

    const auto a = predict_bag(model, x);
    const auto b = predict_bag(model, xp);
    for (int k = 0; k < 2; ++k) worst_logit = std::max(worst_logit, std::abs(a.logits[k] - b.logits[k]));
    for (std::size_t i = 0; i < m; ++i) {
      if (b.attention[i] != a.attention[perm[i]]) {
        ++attention_mismatches;
        break;
      }
    }
  }
  res.passed = worst_logit <= 1e-9 && attention_mismatches == 0;
  res.detail = std::to_string(trials) + " triples, max logit difference " + fmt(worst_logit) + ", " +
               std::to_string(attention_mismatches) + " attention mismatches";
  return res;
}

CheckResult check_metric_oracles(std::uint64_t seed, std::size_t trials) {
  CheckResult res{"metric oracles", true, ""};
  Rng rng(derive_seed(seed, {hash_string("metrics")}));
  std::size_t auroc_fail = 0;
  double spearman_worst = 0.0;
  double attention_worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    // Scores on a coarse lattice so ties are common.
    const std::size_t n = 2 + uniform_index(rng, 20);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(uniform_index(rng, 5)) * 0.25;
      labels[i] = static_cast<int>(uniform_index(rng, 2));
    }
    labels[0] = 0;
    labels[1] = 1;
    double wins = 0.0;
    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] != 1) continue;
      ++pos;
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[j] != 0) continue;
        wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
      }
    }
    neg = n - pos;
    const double brute = wins / static_cast<double>(pos * neg);
    if (auroc(scores, labels) != brute) ++auroc_fail;

    // Distinct values so the rank difference formula applies.
    const std::size_t k = 3 + uniform_index(rng, 30);
    std::vector<double> xs(k), ys(k);
    for (std::size_t i = 0; i < k; ++i) {
      xs[i] = uniform01(rng);
      ys[i] = uniform01(rng);
    }
    auto ranks = [](const std::vector<double>& v) {
      std::vector<std::size_t> idx(v.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
      std::vector<double> r(v.size());
      for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i + 1);
      return r;
    };
    const auto rx = ranks(xs), ry = ranks(ys);
    double d2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    const double kd = static_cast<double>(k);
    const double formula = 1.0 - 6.0 * d2 / (kd * (kd * kd - 1.0));
    spearman_worst = std::max(spearman_worst, std::abs(spearman(xs, ys).rho - formula));

    const std::size_t members = 1 + uniform_index(rng, 10);
    const std::size_t m = 1 + uniform_index(rng, 50);
    std::vector<AttentionProfile> profiles;
    for (std::size_t p = 0; p < members; ++p) {
      std::vector<double> s(m);
      for (double& v : s) v = 3.0 * standard_normal(rng);
      profiles.push_back(softmax(s));
    }
    const auto avg = average_attention(profiles);
    attention_worst = std::max(attention_worst, std::abs(std::accumulate(avg.begin(), avg.end(), 0.0) - 1.0));
  }
  res.passed = auroc_fail == 0 && spearman_worst <= 1e-12 && attention_worst <= 1e-6;
  res.detail = std::to_string(trials) + " cases: auroc mismatches " + std::to_string(auroc_fail) +
               ", spearman max error " + fmt(spearman_worst) + ", attention sum max error " + fmt(attention_worst);
  return res;
}

CheckResult check_kernel_properties(std::uint64_t seed) {
  CheckResult res{"kernel properties", true, ""};
  Rng rng(derive_seed(seed, {hash_string("kernel")}));
  std::vector<std::string> failures;

  for (int t = 0; t < 200; ++t) {
    const std::size_t batch = 1 + uniform_index(rng, 8);
    Matrix logits = random_matrix(batch, 2, rng);
    for (double& v : logits.values()) v *= 20.0;
    std::vector<int> labels(batch);
    for (auto& l : labels) l = static_cast<int>(uniform_index(rng, 2));
    const auto r = softmax_cross_entropy(logits, labels);
    if (!(r.mean_loss >= 0.0)) failures.push_back("negative loss");
    for (std::size_t i = 0; i < batch; ++i) {
      if (std::abs(r.logit_grad(i, 0) + r.logit_grad(i, 1)) > 1e-9) {
        failures.push_back("logit gradient row does not sum to 0");
        break;
      }
    }
  }

  std::vector<double> params(50), grads(50);
  for (auto& p : params) p = standard_normal(rng);
  for (auto& g : grads) g = standard_normal(rng);
  AdamState s1(params.size(), 0.01, 1e-4), s2(params.size(), 0.01, 1e-4);
  auto p1 = params, p2 = params;
  for (int i = 0; i < 3; ++i) {
    adam_step(p1, grads, s1);
    adam_step(p2, grads, s2);
  }
  if (p1 != p2 || s1.first_moment != s2.first_moment || s1.second_moment != s2.second_moment) {
    failures.push_back("adam_step is not deterministic");
  }

  const std::size_t dims[] = {5};
  const Mlp identity = make_mlp(dims, Activation::ReLU, false, rng);
  const Matrix x = random_matrix(7, 5, rng);
  if (!(mlp_forward(identity, x).output == x)) failures.push_back("depth-0 network is not the identity");

  res.passed = failures.empty();
  res.detail = failures.empty() ? "loss, adam and identity checks hold" : failures.front();
  return res;
}

std::vector<CheckResult> run_self_checks(std::uint64_t seed) {
  return {check_kernel_properties(seed), check_metric_oracles(seed), check_permutation_invariance(seed),
          check_gradient_exactness(seed)};
}

}  // namespace milattn
