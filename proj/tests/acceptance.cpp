// Acceptance suite: one PASS/FAIL line per criterion.
//
//   milattn_acceptance [--work-dir DIR] [--jobs N] [--reuse] [--only 1,2,...]
//
// Criteria 4-8 share three desk-scale Gaussian campaigns (MIL, AND, XOR)
// built from manifests/ under the work directory. --reuse keeps records
// already there instead of starting from scratch.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "milattn/campaign.hpp"
#include "milattn/io_util.hpp"
#include "milattn/manifest.hpp"
#include "milattn/metrics.hpp"
#include "milattn/report.hpp"
#include "milattn/selfcheck.hpp"

namespace fs = std::filesystem;
using namespace milattn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int decimals = 4) { return format_number(v, decimals); }

struct Outcome {
  bool passed = false;
  std::string detail;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

double bad_run_fraction(const std::vector<RunRecord>& runs) {
  std::size_t bad = 0;
  for (const auto& r : runs) bad += r.test_iauc < kBadIauc;
  return runs.empty() ? std::nan("") : static_cast<double>(bad) / static_cast<double>(runs.size());
}

struct Context {
  fs::path work_dir;
  fs::path manifest_dir;
  std::size_t jobs = 0;
  bool reuse = false;
  std::map<std::string, CampaignResult> campaigns;  // by problem name
  std::map<std::string, double> campaign_seconds;

  ExperimentManifest desk_manifest(const std::string& problem) const {
    auto m = load_manifest(manifest_dir / ("gaussian_" + problem + ".json"));
    m.desk_scale.enabled = true;
    m.output_dir = work_dir / ("gaussian_" + problem);
    m.validate();
    return m;
  }

  // Search, repetitions and load, once per problem.
  const CampaignResult& campaign(const std::string& problem) {
    auto it = campaigns.find(problem);
    if (it != campaigns.end()) return it->second;
    const auto m = desk_manifest(problem);
    if (!reuse) fs::remove_all(m.output_dir);
    const auto t0 = Clock::now();
    std::cerr << "campaign gaussian_" << problem << " -> " << m.output_dir.string() << "\n";
    JobOptions o;
    o.jobs = jobs;
    o.resume = reuse;
    o.log = [](const std::string& line) { std::cerr << "  " << line << "\n"; };
    const auto data = prepare_dataset(m);
    RunStore store(m.output_dir);
    const auto ranked = run_grid_search(m, data, store, o);
    run_repetitions(m, data, store, top_config_ids(ranked, m.effective_n_top()), m.effective_n_repetitions(), o);
    campaign_seconds[problem] = seconds_since(t0);
    return campaigns.emplace(problem, load_campaign(m)).first->second;
  }

  const std::vector<RunRecord>& best_config_runs(const std::string& problem) {
    const auto& c = campaign(problem);
    return c.repetitions.at(c.top_ids.at(0));
  }
};

Outcome check_result(const CheckResult& r, double secs, double limit) {
  Outcome o;
  o.passed = r.passed && secs < limit;
  o.detail = r.detail + ", " + fmt(secs, 1) + " s (limit " + fmt(limit, 0) + " s)";
  return o;
}

Outcome criterion_gradients(Context&) {
  const auto t0 = Clock::now();
  const auto r = check_gradient_exactness(101, 1e-4);
  return check_result(r, seconds_since(t0), 60.0);
}

Outcome criterion_permutation(Context&) {
  const auto t0 = Clock::now();
  const auto r = check_permutation_invariance(102, 1000);
  return check_result(r, seconds_since(t0), 60.0);
}

Outcome criterion_metrics(Context&) {
  const auto r = check_metric_oracles(103, 1000);
  return {r.passed, r.detail};
}

Outcome criterion_mil_reproduction(Context& ctx) {
  const auto& runs = ctx.best_config_runs("mil");
  std::vector<double> acc, iauc;
  for (std::size_t i = 0; i < runs.size() && i < 20; ++i) {
    acc.push_back(runs[i].validation_accuracy);
    iauc.push_back(runs[i].test_iauc);
  }
  Outcome o;
  if (acc.size() < 20) {
    o.detail = "only " + std::to_string(acc.size()) + " repetitions of the best config";
    return o;
  }
  const double med_acc = median(acc), med_iauc = median(iauc), mean_iauc = mean(iauc);
  o.passed = med_acc >= 0.95 && med_iauc >= 0.65 && mean_iauc >= 0.65 && mean_iauc <= 0.85;
  o.detail = "best config " + ctx.campaign("mil").top_ids[0] + ", 20 seeds: median val acc " + fmt(med_acc) +
             " (>= 0.95), median IAUC " + fmt(med_iauc) + " (>= 0.65), mean IAUC " + fmt(mean_iauc) +
             " (in [0.65, 0.85]); campaign " + fmt(ctx.campaign_seconds["mil"] / 60.0, 1) +
             " min on this machine";
  return o;
}

Outcome criterion_failure_ordering(Context& ctx) {
  std::map<std::string, double> bad, mean_iauc;
  std::map<std::string, std::size_t> n;
  for (const char* p : {"mil", "and", "xor"}) {
    const auto& all = ctx.best_config_runs(p);
    const std::vector<RunRecord> runs(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(30, all.size())));
    std::vector<double> iauc;
    for (const auto& r : runs) iauc.push_back(r.test_iauc);
    bad[p] = bad_run_fraction(runs);
    mean_iauc[p] = mean(iauc);
    n[p] = runs.size();
  }
  Outcome o;
  const bool counts = n["mil"] == 30 && n["and"] == 30 && n["xor"] == 30;
  o.passed = counts && bad["and"] > bad["mil"] && mean_iauc["and"] < mean_iauc["mil"] &&
             mean_iauc["and"] < mean_iauc["xor"];
  o.detail = "bad-run fraction AND " + fmt(bad["and"], 3) + " vs MIL " + fmt(bad["mil"], 3) + " (XOR " +
             fmt(bad["xor"], 3) + "); mean IAUC MIL " + fmt(mean_iauc["mil"]) + ", AND " + fmt(mean_iauc["and"]) +
             ", XOR " + fmt(mean_iauc["xor"]) + "; runs " + std::to_string(n["mil"]) + "/" +
             std::to_string(n["and"]) + "/" + std::to_string(n["xor"]);
  return o;
}

Outcome criterion_ensembling(Context& ctx) {
  const auto& c = ctx.campaign("xor");
  const EnsembleCurve* multi = nullptr;
  for (const auto& cv : c.curves)
    if (cv.strategy == EnsembleStrategy::MultiConfig) multi = &cv;
  const CurvePoint *p1 = nullptr, *p20 = nullptr;
  if (multi)
    for (const auto& p : multi->points) {
      if (p.size == 1) p1 = &p;
      if (p.size == 20) p20 = &p;
    }
  Outcome o;
  if (!p1 || !p20) {
    o.detail = "multi-config curve lacks N = 1 or N = 20";
    return o;
  }
  const double b1 = p1->mean_bad_fraction, b20 = p20->mean_bad_fraction;
  o.passed = b20 < b1 && b20 <= b1 / 3.0;
  o.detail = "XOR multi-config bad-ensemble fraction N=1 " + fmt(b1, 3) + ", N=20 " + fmt(b20, 3) +
             " (needs < N=1 and <= " + fmt(b1 / 3.0, 3) + "); " + std::to_string(c.manifest.ensemble.n_ensembles) +
             " ensembles x " + std::to_string(c.manifest.ensemble.repetitions) + " repetitions per size";
  return o;
}

Outcome criterion_decoupling(Context& ctx) {
  const auto& c = ctx.campaign("mil");
  double best = -1.0;
  std::string best_id;
  std::size_t best_n = 0;
  std::string per;
  for (const auto& id : c.top_ids) {
    std::vector<double> iauc;
    for (const auto& r : c.repetitions.at(id))
      if (r.validation_accuracy >= 0.99) iauc.push_back(r.test_iauc);
    const double spread = iauc.size() >= 2 ? *std::max_element(iauc.begin(), iauc.end()) -
                                                 *std::min_element(iauc.begin(), iauc.end())
                                           : 0.0;
    per += (per.empty() ? "" : "; ") + id + ": " + std::to_string(iauc.size()) + "/" +
           std::to_string(c.repetitions.at(id).size()) + " runs at val acc >= 0.99, spread " + fmt(spread);
    if (spread > best) {
      best = spread;
      best_id = id;
      best_n = iauc.size();
    }
  }
  Outcome o;
  o.passed = best_n >= 2 && best > 0.1;
  o.detail = "max IAUC spread among runs at val acc >= 0.99 is " + fmt(best) + " (> 0.1); " + per;
  return o;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text_file(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string f;
    std::istringstream ls(line);
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

Outcome criterion_report_structure(Context& ctx) {
  std::vector<CampaignResult> cs;
  for (const char* p : {"mil", "and", "xor"}) cs.push_back(ctx.campaign(p));
  const auto dir = ctx.work_dir / "reports";
  fs::remove_all(dir);
  write_reports(cs, dir);

  std::vector<std::string> problems;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };
  const std::set<std::string> tasks{"gaussian_mil", "gaussian_and", "gaussian_xor"};

  struct Table {
    const char* file;
    std::vector<std::string> header;
  };
  const std::vector<Table> tables{
      {"iauc_summary.csv", {"task", "modality", "problem", "n_top_configs", "n_runs", "mean_iauc", "n_bad_configs"}},
      {"accuracy_iauc_correlation.csv",
       {"task", "n_runs", "spearman_rho", "spearman_degenerate", "spearman_bootstrap_std", "spearman_config_mean",
        "spearman_config_std", "high_delta_iauc", "high_delta_config", "low_delta_iauc", "low_delta_config"}},
      {"ensembling_summary.csv",
       {"task", "pct_bad_n1", "single_config_size", "pct_bad_single_config", "multi_config_size",
        "pct_bad_multi_config"}},
  };
  for (const auto& t : tables) {
    const auto p = dir / t.file;
    if (!fs::exists(p)) {
      need(false, std::string(t.file) + " missing");
      continue;
    }
    const auto rows = read_csv(p);
    need(!rows.empty() && rows[0] == t.header, std::string(t.file) + " header");
    std::set<std::string> seen;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      need(rows[i].size() == t.header.size(), std::string(t.file) + " row width");
      if (!rows[i].empty()) seen.insert(rows[i][0]);
    }
    need(seen == tasks && rows.size() == 4, std::string(t.file) + " rows (one per task)");
  }

  // Ensemble columns at N = 20 for both strategies.
  if (fs::exists(dir / "ensembling_summary.csv")) {
    const auto rows = read_csv(dir / "ensembling_summary.csv");
    for (std::size_t i = 1; i < rows.size(); ++i)
      need(rows[i].size() == 6 && rows[i][2] == "20" && rows[i][4] == "20", "ensembling sizes at 20");
  }

  // Per-config IAUC histograms with cumulative frequency (20 bins per top config).
  if (fs::exists(dir / "iauc_histograms.csv")) {
    const auto rows = read_csv(dir / "iauc_histograms.csv");
    std::map<std::string, std::size_t> bins;
    for (std::size_t i = 1; i < rows.size(); ++i) ++bins[rows[i][0] + "/" + rows[i][1]];
    need(bins.size() == 6, "histograms for 2 top configs x 3 tasks");
    for (const auto& [k, v] : bins) need(v == 20, "20 histogram bins for " + k);
  } else {
    need(false, "iauc_histograms.csv missing");
  }

  // Accuracy x IAUC matrix: 10 x 10 cells per task, columns normalized.
  if (fs::exists(dir / "accuracy_iauc_heatmap.csv")) {
    const auto rows = read_csv(dir / "accuracy_iauc_heatmap.csv");
    std::map<std::string, std::size_t> cells;
    std::map<std::string, double> col_sum;
    std::map<std::string, std::size_t> col_total;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      ++cells[rows[i][0]];
      col_sum[rows[i][0] + rows[i][1]] += std::stod(rows[i][6]);
      col_total[rows[i][0] + rows[i][1]] = std::stoul(rows[i][7]);
    }
    need(cells.size() == 3, "heatmap for every task");
    for (const auto& [k, v] : cells) need(v == 100, "100 heatmap cells for " + k);
    for (const auto& [k, s] : col_sum)
      if (col_total[k] > 0) need(std::abs(s - 1.0) < 1e-5, "heatmap column sums to 1 (" + k + ")");
  } else {
    need(false, "accuracy_iauc_heatmap.csv missing");
  }

  // Ensemble curves: both strategies at every configured size.
  if (fs::exists(dir / "ensemble_curves.csv")) {
    const auto rows = read_csv(dir / "ensemble_curves.csv");
    std::set<std::string> points;
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i][2] == "mean") points.insert(rows[i][0] + "/" + rows[i][1] + "/" + rows[i][3]);
    for (const auto& t : tasks)
      for (const char* s : {"single_config", "multi_config"})
        for (const char* n : {"1", "2", "5", "10", "20"})
          need(points.count(t + "/" + s + "/" + n) == 1, "curve point " + t + "/" + s + "/" + n);
  } else {
    need(false, "ensemble_curves.csv missing");
  }

  for (const auto& t : tasks) {
    for (const auto& f : {"fig_iauc_" + t + ".svg", "fig_heatmap_" + t + ".svg", "fig_ensembles_" + t + ".svg",
                          "attention_" + t + ".csv"}) {
      need(fs::exists(dir / f), f + " missing");
    }
  }

  try {
    const auto j = nlohmann::json::parse(read_text_file(dir / "summary.json"));
    need(j.at("tasks").size() == 3, "summary.json task count");
    for (const auto& t : j.at("tasks")) {
      for (const char* k : {"iauc", "decoupling", "ensembling", "configs", "gaps"}) {
        need(t.contains(k), std::string("summary.json key ") + k);
      }
      need(t.at("gaps").empty(), "campaign " + t.at("task").get<std::string>() + " has gaps");
    }
  } catch (const std::exception& e) {
    need(false, std::string("summary.json: ") + e.what());
  }

  Outcome o;
  o.passed = problems.empty();
  if (o.passed) {
    o.detail = "3 tasks: IAUC table, accuracy/IAUC correlation, ensembling table, histograms, heatmaps, "
               "curves, figures and summary present in " + dir.string();
  } else {
    o.detail = std::to_string(problems.size()) + " structural problems, first: " + problems.front();
  }
  return o;
}

// Small desk-scale campaign run twice from scratch (1 and 2 workers); the
// reports, and a second rendering of the first campaign, must match byte for byte.
Outcome criterion_determinism(Context& ctx) {
  auto base = ctx.desk_manifest("mil");
  base.dataset.sizes = {100, 50, 50};
  base.dataset.bag_size = 100;
  base.desk_scale.grid = desk_grid(Modality::Gaussian);
  base.desk_scale.grid.epochs = {20};
  base.desk_scale.grid.learning_rate = {0.01};
  base.desk_scale.grid.embed_dim = {8};
  base.desk_scale.grid.attention_dim = {2, 4};
  base.desk_scale.grid.classifier_depth = {1};
  base.desk_scale.seeds_per_config = 2;
  base.desk_scale.n_top = 2;
  base.desk_scale.n_repetitions = 6;
  base.ensemble.sizes = {1, 2, 5};
  base.ensemble.n_ensembles = 10;

  std::vector<std::map<std::string, std::string>> snapshots;
  std::vector<fs::path> report_dirs;
  for (std::size_t jobs : {1u, 2u}) {
    auto m = base;
    m.output_dir = ctx.work_dir / ("determinism_" + std::to_string(jobs));
    fs::remove_all(m.output_dir);
    JobOptions o;
    o.jobs = jobs;
    const auto data = prepare_dataset(m);
    RunStore store(m.output_dir);
    const auto ranked = run_grid_search(m, data, store, o);
    run_repetitions(m, data, store, top_config_ids(ranked, 2), 6, o);
    const std::vector<CampaignResult> cs{load_campaign(m)};
    const auto dir = m.output_dir / "reports";
    write_reports(cs, dir);
    report_dirs.push_back(dir);
    if (jobs == 1) {
      write_reports(std::vector<CampaignResult>{load_campaign(m)}, m.output_dir / "reports_again");
      report_dirs.push_back(m.output_dir / "reports_again");
    }
  }
  for (const auto& dir : report_dirs) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = read_binary_file(e.path());
    snapshots.push_back(std::move(files));
  }
  Outcome o;
  o.passed = snapshots[0] == snapshots[1] && snapshots[0] == snapshots[2] && !snapshots[0].empty();
  std::size_t differing = 0;
  for (const auto& [name, bytes] : snapshots[0]) {
    for (std::size_t i = 1; i < snapshots.size(); ++i) {
      auto it = snapshots[i].find(name);
      if (it == snapshots[i].end() || it->second != bytes) {
        ++differing;
        break;
      }
    }
  }
  o.detail = std::to_string(snapshots[0].size()) + " report files compared across 2 fresh runs (1 and 2 workers) "
             "and a repeated report; " + std::to_string(differing) + " differ";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria", "milattn_acceptance"};
  Context ctx;
  std::string work = (fs::temp_directory_path() / "milattn-acceptance").string();
  std::string manifests = MILATTN_MANIFEST_DIR;
  std::vector<int> only;
  app.add_option("--work-dir", work, "Directory for campaigns and reports");
  app.add_option("--manifests", manifests, "Directory holding gaussian_{mil,and,xor}.json");
  app.add_option("--jobs", ctx.jobs, "Worker threads (0 = all cores)");
  app.add_flag("--reuse", ctx.reuse, "Keep persisted runs from an earlier invocation");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  ctx.work_dir = work;
  ctx.manifest_dir = manifests;
  fs::create_directories(ctx.work_dir);

  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome(Context&)> fn;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient-exactness", criterion_gradients},
      {2, "permutation-invariance", criterion_permutation},
      {3, "metric-oracles", criterion_metrics},
      {4, "gaussian-mil-desk-reproduction", criterion_mil_reproduction},
      {5, "failure-mode-ordering", criterion_failure_ordering},
      {6, "ensembling-benefit", criterion_ensembling},
      {7, "accuracy-iauc-decoupling", criterion_decoupling},
      {8, "report-structure", criterion_report_structure},
      {9, "determinism", criterion_determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.number) == only.end()) continue;
    Outcome o;
    try {
      o = c.fn(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << c.number << " " << c.name << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
