#include "cli.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "milattn/campaign.hpp"
#include "milattn/dataset_io.hpp"
#include "milattn/error.hpp"
#include "milattn/io_util.hpp"
#include "milattn/manifest.hpp"
#include "milattn/report.hpp"
#include "milattn/selfcheck.hpp"

namespace milattn {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::vector<std::string> manifests;
  std::string out;
  bool desk_scale = false;
  std::size_t jobs = 0;
  std::uint64_t seed = 0;
  CLI::Option* seed_option = nullptr;
  bool resume = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool manifest_required, bool many_manifests) {
  auto* m = many_manifests ? cmd->add_option("--manifest", o.manifests, "Experiment manifest (JSON); repeatable")
                           : cmd->add_option("--manifest", o.manifests, "Experiment manifest (JSON)")->expected(1);
  m->check(CLI::ExistingFile);
  if (manifest_required) m->required();
  cmd->add_option("--out", o.out, "Results directory (overrides output_dir)");
  cmd->add_flag("--desk-scale", o.desk_scale, "Use the reduced desk-scale grid and repetition counts");
  cmd->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)")->default_val(0);
  o.seed_option = cmd->add_option("--seed", o.seed, "Master seed (overrides master_seed)");
  cmd->add_flag("--resume", o.resume, "Keep runs that are already persisted");
}

ExperimentManifest manifest_from(const CommonOptions& o, const std::string& path) {
  ExperimentManifest m = load_manifest(path);
  if (!o.out.empty()) m.output_dir = o.out;
  if (o.seed_option && o.seed_option->count() > 0) m.master_seed = o.seed;
  if (o.desk_scale) m.desk_scale.enabled = true;
  m.validate();
  return m;
}

JobOptions job_options(const CommonOptions& o, std::ostream& err) {
  JobOptions j;
  j.jobs = o.jobs;
  j.resume = o.resume;
  j.log = [&err](const std::string& line) { err << line << '\n' << std::flush; };
  return j;
}

void print_ranking(const std::vector<RankedConfig>& ranked, std::size_t n, std::ostream& out) {
  for (std::size_t i = 0; i < ranked.size() && i < n; ++i) {
    const auto& r = ranked[i];
    out << (i + 1) << ". " << r.config_id << "  val_acc=" << format_number(r.mean_validation_accuracy, 4)
        << "  val_loss=" << format_number(r.mean_validation_loss, 4) << "  runs=" << r.n_runs;
    if (r.n_diverged) out << " (" << r.n_diverged << " diverged)";
    out << '\n';
  }
}

int cmd_generate(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const auto m = manifest_from(o, o.manifests.front());
  err << "generating " << m.task_name() << " dataset\n";
  const auto data = prepare_dataset(m);
  const auto dir = m.output_dir / "dataset";
  save_dataset(data, dir);
  out << "wrote " << dir.string() << " (" << data.train.size() << "/" << data.validation.size() << "/"
      << data.test.size() << " bags of " << data.bag_size << ", dim " << data.input_dim() << ")\n";
  return 0;
}

int cmd_search(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  const auto m = manifest_from(o, o.manifests.front());
  const auto data = prepare_dataset(m);
  RunStore store(m.output_dir);
  const auto ranked = run_grid_search(m, data, store, job_options(o, err));

  CampaignResult c;
  c.manifest = m;
  c.ranked = ranked;
  write_file_atomic(m.output_dir / "ranking.csv", ranking_csv(std::span<const CampaignResult>(&c, 1)));
  out << "ranked " << ranked.size() << " configurations (" << (m.output_dir / "ranking.csv").string() << ")\n";
  print_ranking(ranked, m.effective_n_top(), out);
  return 0;
}

int cmd_repeat(const CommonOptions& o, std::size_t n, std::vector<std::string> ids, std::ostream& out,
               std::ostream& err) {
  const auto m = manifest_from(o, o.manifests.front());
  const auto data = prepare_dataset(m);
  RunStore store(m.output_dir);
  if (ids.empty()) {
    const auto configs = m.effective_grid().expand(data.input_dim());
    ids = top_config_ids(rank_configs(store, configs, m.effective_seeds_per_config()), m.effective_n_top());
    if (ids.empty()) throw ConfigError("repeat: no ranked configurations; run `search` first or pass --config");
  }
  if (n == 0) n = m.effective_n_repetitions();
  const auto records = run_repetitions(m, data, store, ids, n, job_options(o, err));
  out << records.size() << " repetition records\n";
  for (const auto& id : ids) {
    std::size_t count = 0;
    double sum = 0.0;
    for (const auto& r : records) {
      if (r.config_id != id) continue;
      ++count;
      sum += r.test_iauc;
    }
    out << id << ": " << count << " runs, mean IAUC " << format_number(sum / static_cast<double>(count), 4) << '\n';
  }
  return 0;
}

std::vector<CampaignResult> load_all(const CommonOptions& o, std::ostream& err) {
  std::vector<CampaignResult> campaigns;
  for (const auto& path : o.manifests) {
    const auto m = manifest_from(o, path);
    err << "loading campaign " << m.task_name() << " from " << m.output_dir.string() << '\n';
    campaigns.push_back(load_campaign(m));
    for (const auto& g : campaigns.back().gaps) err << "  gap: " << g << '\n';
  }
  return campaigns;
}

fs::path report_dir_for(const std::string& report_dir, const std::vector<CampaignResult>& campaigns) {
  if (!report_dir.empty()) return report_dir;
  return campaigns.front().manifest.output_dir / "reports";
}

int cmd_ensemble(const CommonOptions& o, const std::string& report_dir, std::ostream& out, std::ostream& err) {
  const auto campaigns = load_all(o, err);
  const auto written = write_ensemble_reports(campaigns, report_dir_for(report_dir, campaigns));
  for (const auto& p : written) out << p.string() << '\n';
  return 0;
}

int cmd_report(const CommonOptions& o, const std::string& report_dir, std::ostream& out, std::ostream& err) {
  if (o.manifests.size() > 1 && !o.out.empty()) {
    throw ConfigError("report: --out applies to a single manifest; use --report-dir with several");
  }
  const auto campaigns = load_all(o, err);
  const auto written = write_reports(campaigns, report_dir_for(report_dir, campaigns));
  for (const auto& p : written) out << p.string() << '\n';
  return 0;
}

int cmd_verify(const CommonOptions& o, std::ostream& out, std::ostream& err) {
  for (const auto& path : o.manifests) {
    const auto m = manifest_from(o, path);
    out << "PASS manifest " << path << " (" << m.effective_grid().size() << " grid points)\n";
  }
  bool ok = true;
  for (const auto& r : run_self_checks(o.seed)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n' << std::flush;
    ok = ok && r.passed;
  }
  if (!ok) err << "verify: some checks failed\n";
  return ok ? 0 : 1;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention-explanation benchmark for multiple-instance learning", "milattn"};
  app.require_subcommand(1);

  CommonOptions gen_o, search_o, repeat_o, ens_o, report_o, verify_o;
  auto* gen = app.add_subcommand("generate", "Generate the dataset described by a manifest");
  add_common(gen, gen_o, true, false);
  auto* search = app.add_subcommand("search", "Hyperparameter grid search");
  add_common(search, search_o, true, false);
  auto* repeat = app.add_subcommand("repeat", "Repetition campaign of the top configurations");
  add_common(repeat, repeat_o, true, false);
  std::size_t n = 0;
  std::vector<std::string> config_ids;
  repeat->add_option("--n", n, "Repetitions per configuration (default from manifest)");
  repeat->add_option("--config", config_ids, "Configuration id; repeatable (default: top ranked)");
  auto* ens = app.add_subcommand("ensemble", "Bad-ensemble curves and the ensembling table");
  add_common(ens, ens_o, true, true);
  std::string ens_dir;
  ens->add_option("--report-dir", ens_dir, "Output directory (default <out>/reports)");
  auto* report = app.add_subcommand("report", "All tables and figures");
  add_common(report, report_o, true, true);
  std::string report_dir;
  report->add_option("--report-dir", report_dir, "Output directory (default <out>/reports)");
  auto* verify = app.add_subcommand("verify", "Gradient and invariant self-checks");
  add_common(verify, verify_o, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_o, out, err);
    if (search->parsed()) return cmd_search(search_o, out, err);
    if (repeat->parsed()) return cmd_repeat(repeat_o, n, config_ids, out, err);
    if (ens->parsed()) return cmd_ensemble(ens_o, ens_dir, out, err);
    if (report->parsed()) return cmd_report(report_o, report_dir, out, err);
    if (verify->parsed()) return cmd_verify(verify_o, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace milattn
