#include "milattn/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <variant>

#include "milattn/error.hpp"
#include "milattn/io_util.hpp"
#include "milattn/sources.hpp"

namespace milattn {

void run_parallel(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::uint64_t search_seed(std::uint64_t master_seed, const std::string& config_id, std::size_t k) {
  return derive_seed(master_seed, {hash_string(config_id), 1, k});
}

std::uint64_t repetition_seed(std::uint64_t master_seed, const std::string& config_id, std::size_t r) {
  return derive_seed(master_seed, {hash_string(config_id), 2, r});
}

DatasetSplits prepare_dataset(const ExperimentManifest& m) {
  switch (m.modality) {
    case Modality::Gaussian:
      return generate_dataset(m.modality, m.problem, m.dataset, m.master_seed, GaussianSpec{});
    case Modality::MNIST: {
      const auto pool = load_mnist_idx(m.sources.mnist_images, m.sources.mnist_labels, m.problem);
      return generate_dataset(m.modality, m.problem, m.dataset, m.master_seed, &pool);
    }
    case Modality::CyTOF: {
      CytofTableOptions opts;
      opts.cluster_column = m.sources.cytof_cluster_column;
      opts.delimiter = m.sources.cytof_delimiter;
      const auto pool = load_cytof_table(m.sources.cytof_table, opts);
      return generate_dataset(m.modality, m.problem, m.dataset, m.master_seed, &pool);
    }
    case Modality::CyTOFSynthetic: {
      const auto pool = synth_cytof_pool(derive_seed(m.master_seed, {hash_string("cytof-pool")}));
      return generate_dataset(m.modality, m.problem, m.dataset, m.master_seed, &pool);
    }
  }
  throw InternalError("prepare_dataset: unhandled modality");
}

namespace {

TrainOptions train_options(const ExperimentManifest& m) {
  TrainOptions o;
  o.iauc = m.iauc;
  return o;
}

std::string describe(const RunRecord& r) {
  std::ostringstream os;
  os.precision(4);
  os << "val_acc=" << r.validation_accuracy << " test_acc=" << r.test_accuracy << " iauc=" << r.test_iauc;
  if (r.training_diverged) os << " (diverged)";
  return os.str();
}

struct Job {
  const ModelConfig* config;
  std::size_t index;
};

void run_jobs(const std::vector<Job>& jobs, Phase phase, const ExperimentManifest& m,
              const DatasetSplits& data, RunStore& store, const JobOptions& options) {
  std::mutex log_mutex;
  std::atomic<std::size_t> done{0};
  const TrainOptions topts = train_options(m);
  run_parallel(jobs.size(), options.jobs, [&](std::size_t j) {
    const Job& job = jobs[j];
    const std::string id = job.config->id();
    const std::uint64_t seed = phase == Phase::Search ? search_seed(m.master_seed, id, job.index)
                                                      : repetition_seed(m.master_seed, id, job.index);
    MilModel model;
    RunRecord rec = train(*job.config, seed, data, topts, &model);
    store.save(rec, phase, job.index, &model);
    const std::size_t finished = ++done;
    if (options.log) {
      std::lock_guard lock(log_mutex);
      options.log("[" + std::to_string(finished) + "/" + std::to_string(jobs.size()) + "] " +
                  std::string(to_string(phase)) + " " + id + " #" + std::to_string(job.index) + " " +
                  describe(rec));
    }
  });
}

}  // namespace

void sort_ranking(std::vector<RankedConfig>& ranked) {
  std::sort(ranked.begin(), ranked.end(), [](const RankedConfig& a, const RankedConfig& b) {
    const bool a_ok = a.n_runs > a.n_diverged;
    const bool b_ok = b.n_runs > b.n_diverged;
    if (a_ok != b_ok) return a_ok;
    if (a.mean_validation_accuracy != b.mean_validation_accuracy) {
      return a.mean_validation_accuracy > b.mean_validation_accuracy;
    }
    if (a.mean_validation_loss != b.mean_validation_loss) return a.mean_validation_loss < b.mean_validation_loss;
    return a.config_id < b.config_id;
  });
}

std::vector<RankedConfig> rank_configs(const RunStore& store, std::span<const ModelConfig> configs,
                                       std::size_t seeds_per_config) {
  std::vector<RankedConfig> ranked;
  for (const auto& cfg : configs) {
    RankedConfig rc;
    rc.config = cfg;
    rc.config_id = cfg.id();
    std::vector<double> acc, loss;
    for (std::size_t k = 0; k < seeds_per_config; ++k) {
      if (!store.has(rc.config_id, Phase::Search, k)) continue;
      const RunRecord r = store.load(rc.config_id, Phase::Search, k);
      ++rc.n_runs;
      if (r.training_diverged || !std::isfinite(r.validation_loss)) {
        ++rc.n_diverged;
        continue;
      }
      acc.push_back(r.validation_accuracy);
      loss.push_back(r.validation_loss);
    }
    if (rc.n_runs == 0) continue;
    if (!acc.empty()) {
      double sa = 0.0, sl = 0.0;
      for (std::size_t i = 0; i < acc.size(); ++i) {
        sa += acc[i];
        sl += loss[i];
      }
      rc.mean_validation_accuracy = sa / static_cast<double>(acc.size());
      rc.mean_validation_loss = sl / static_cast<double>(acc.size());
    } else {
      rc.mean_validation_accuracy = 0.0;
      rc.mean_validation_loss = std::numeric_limits<double>::infinity();
    }
    ranked.push_back(std::move(rc));
  }
  sort_ranking(ranked);
  return ranked;
}

std::vector<RankedConfig> run_grid_search(const ExperimentManifest& m, const DatasetSplits& data,
                                          RunStore& store, const JobOptions& options) {
  const auto configs = m.effective_grid().expand(data.input_dim());
  const std::size_t seeds = m.effective_seeds_per_config();
  for (const auto& c : configs) store.save_config(c);

  std::vector<Job> jobs;
  for (const auto& c : configs) {
    const std::string id = c.id();
    for (std::size_t k = 0; k < seeds; ++k) {
      if (options.resume && store.has(id, Phase::Search, k)) continue;
      jobs.push_back({&c, k});
    }
  }
  if (options.log) {
    options.log("search: " + std::to_string(configs.size()) + " configs x " + std::to_string(seeds) +
                " seeds, " + std::to_string(jobs.size()) + " jobs to run");
  }
  run_jobs(jobs, Phase::Search, m, data, store, options);
  return rank_configs(store, configs, seeds);
}

std::vector<RunRecord> run_repetitions(const ExperimentManifest& m, const DatasetSplits& data,
                                       RunStore& store, std::span<const std::string> config_ids,
                                       std::size_t n, const JobOptions& options) {
  std::vector<ModelConfig> configs;
  for (const auto& id : config_ids) {
    auto cfg = store.load_config(id);
    if (!cfg) throw ConfigError("repeat: config '" + id + "' is not part of this campaign");
    if (cfg->input_dim != data.input_dim()) {
      throw ConfigError("repeat: config '" + id + "' expects input dimension " +
                        std::to_string(cfg->input_dim));
    }
    configs.push_back(*cfg);
  }

  std::vector<Job> jobs;
  for (const auto& c : configs) {
    for (std::size_t r = 0; r < n; ++r) {
      if (options.resume && store.has(c.id(), Phase::Repeat, r)) continue;
      jobs.push_back({&c, r});
    }
  }
  if (options.log) {
    options.log("repeat: " + std::to_string(configs.size()) + " configs x " + std::to_string(n) +
                " repetitions, " + std::to_string(jobs.size()) + " jobs to run");
  }
  run_jobs(jobs, Phase::Repeat, m, data, store, options);

  std::vector<RunRecord> out;
  for (const auto& c : configs)
    for (std::size_t r = 0; r < n; ++r) out.push_back(store.load(c.id(), Phase::Repeat, r));
  return out;
}

std::vector<std::string> top_config_ids(std::span<const RankedConfig> ranked, std::size_t n) {
  std::vector<std::string> ids;
  for (const auto& rc : ranked) {
    if (ids.size() == n) break;
    if (rc.n_runs > rc.n_diverged) ids.push_back(rc.config_id);
  }
  return ids;
}

std::vector<const RunRecord*> CampaignResult::top_runs() const {
  std::vector<const RunRecord*> runs;
  for (const auto& id : top_ids) {
    auto it = repetitions.find(id);
    if (it == repetitions.end()) continue;
    for (const auto& r : it->second) runs.push_back(&r);
  }
  return runs;
}

std::vector<EnsembleCurve> compute_curves(const CampaignResult& c) {
  std::vector<EnsembleCurve> curves;
  const auto pool = c.top_runs();
  if (pool.empty()) return curves;

  std::size_t smallest = std::numeric_limits<std::size_t>::max();
  for (const auto& id : c.top_ids) {
    auto it = c.repetitions.find(id);
    smallest = std::min<std::size_t>(smallest, it == c.repetitions.end() ? 0 : it->second.size());
  }

  for (auto strategy : {EnsembleStrategy::SingleConfig, EnsembleStrategy::MultiConfig}) {
    const std::size_t limit = strategy == EnsembleStrategy::SingleConfig ? smallest : pool.size();
    CurveOptions opts;
    opts.sizes.clear();
    for (auto s : c.manifest.ensemble.sizes)
      if (s <= limit) opts.sizes.push_back(s);
    if (opts.sizes.empty()) continue;
    opts.n_ensembles = c.manifest.ensemble.n_ensembles;
    opts.repetitions = c.manifest.ensemble.repetitions;
    opts.seed = derive_seed(c.manifest.master_seed,
                            {hash_string("ensemble"), static_cast<std::uint64_t>(strategy)});
    opts.iauc = c.manifest.iauc;
    curves.push_back(bad_ensemble_curve(pool, strategy, c.test_bags, c.manifest.problem, opts));
  }
  return curves;
}

CampaignResult load_campaign(const ExperimentManifest& m) {
  CampaignResult c;
  c.manifest = m;
  RunStore store(m.output_dir);

  DatasetSplits data = prepare_dataset(m);
  c.test_bags = std::move(data.test);

  const auto configs = m.effective_grid().expand(data.input_dim());
  const std::size_t seeds = m.effective_seeds_per_config();
  c.ranked = rank_configs(store, configs, seeds);

  std::size_t incomplete = 0;
  for (const auto& rc : c.ranked)
    if (rc.n_runs < seeds) ++incomplete;
  incomplete += configs.size() - c.ranked.size();
  if (c.ranked.empty()) {
    c.gaps.push_back("grid search: no persisted search runs");
  } else if (incomplete > 0) {
    c.gaps.push_back("grid search: " + std::to_string(incomplete) + " of " + std::to_string(configs.size()) +
                     " configs have fewer than " + std::to_string(seeds) + " search runs");
  }

  c.top_ids = top_config_ids(c.ranked, m.effective_n_top());
  if (c.ranked.empty()) {
    for (const auto& id : store.config_ids())
      if (store.has(id, Phase::Repeat, 0)) c.top_ids.push_back(id);
    if (!c.top_ids.empty()) c.gaps.push_back("top configs taken from existing repetitions, not from a ranking");
  } else if (c.top_ids.size() < m.effective_n_top()) {
    c.gaps.push_back("only " + std::to_string(c.top_ids.size()) + " of " +
                     std::to_string(m.effective_n_top()) + " top configs are available");
  }

  const std::size_t n_rep = m.effective_n_repetitions();
  for (const auto& id : c.top_ids) {
    auto& runs = c.repetitions[id];
    for (std::size_t r = 0; r < n_rep && store.has(id, Phase::Repeat, r); ++r) {
      runs.push_back(store.load(id, Phase::Repeat, r));
    }
    if (runs.size() < n_rep) {
      c.gaps.push_back("repetitions: " + id + " has " + std::to_string(runs.size()) + " of " +
                       std::to_string(n_rep));
    }
    if (!runs.empty()) {
      std::vector<double> iauc;
      for (const auto& r : runs) iauc.push_back(r.test_iauc);
      c.summaries.push_back(summarize_config(id, iauc));
    }
  }

  c.curves = compute_curves(c);
  if (!c.top_runs().empty()) {
    for (auto strategy : {EnsembleStrategy::SingleConfig, EnsembleStrategy::MultiConfig}) {
      const auto* curve = [&]() -> const EnsembleCurve* {
        for (const auto& cv : c.curves)
          if (cv.strategy == strategy) return &cv;
        return nullptr;
      }();
      std::vector<std::size_t> missing;
      for (auto s : m.ensemble.sizes) {
        bool found = false;
        if (curve)
          for (const auto& p : curve->points) found = found || p.size == s;
        if (!found) missing.push_back(s);
      }
      if (!missing.empty()) {
        std::string list;
        for (auto s : missing) list += (list.empty() ? "" : ",") + std::to_string(s);
        c.gaps.push_back("ensembles (" + std::string(to_string(strategy)) + "): sizes " + list +
                         " exceed the available runs");
      }
    }
  }
  return c;
}

}  // namespace milattn
