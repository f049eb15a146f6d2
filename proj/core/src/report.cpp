#include "milattn/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "milattn/error.hpp"
#include "milattn/io_util.hpp"
#include "milattn/svg.hpp"

namespace milattn {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string format_number(double v, int decimals) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s = buf;
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

namespace {

double mean_of(std::span<const double> v) {
  if (v.empty()) return std::nan("");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  double acc = 0.0;
  for (double x : s) acc += x;
  return acc / static_cast<double>(s.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::size_t bin_of(double v, double lo, double width, std::size_t n_bins) {
  const double pos = std::floor((v - lo) / width + 1e-9);
  if (!(pos > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(pos), n_bins - 1);
}

std::vector<double> edges(double lo, double hi, std::size_t n_bins) {
  std::vector<double> e(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_bins);
  return e;
}

const EnsembleCurve* find_curve(const CampaignResult& c, EnsembleStrategy s) {
  for (const auto& cv : c.curves)
    if (cv.strategy == s) return &cv;
  return nullptr;
}

// Size kEnsembleReportSize if computed, else the largest computed size below it.
const CurvePoint* ensemble_report_point(const EnsembleCurve* curve) {
  if (!curve) return nullptr;
  const CurvePoint* best = nullptr;
  for (const auto& p : curve->points) {
    if (p.size <= kEnsembleReportSize && p.size > 1 && (!best || p.size > best->size)) best = &p;
  }
  return best;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

template <typename... Ts>
std::string row(const Ts&... fields) {
  std::string out;
  ((out += (out.empty() ? "" : ",") + csv_field(fields)), ...);
  return out + "\n";
}

std::string size_str(std::optional<std::size_t> s) { return s ? std::to_string(*s) : "NA"; }

}  // namespace

IaucTableRow iauc_table_row(const CampaignResult& c) {
  IaucTableRow r;
  r.task = c.manifest.task_name();
  std::vector<double> all;
  for (const auto& s : c.summaries) {
    ++r.n_configs;
    if (s.is_bad) ++r.n_bad_configs;
    all.insert(all.end(), s.iauc_values.begin(), s.iauc_values.end());
  }
  r.n_runs = all.size();
  r.mean_iauc = mean_of(all);
  return r;
}

DecouplingRow decoupling_row(const CampaignResult& c) {
  DecouplingRow r;
  r.task = c.manifest.task_name();
  const auto runs = c.top_runs();
  r.n_runs = runs.size();
  std::vector<double> acc, iauc;
  for (const auto* run : runs) {
    acc.push_back(run->validation_accuracy);
    iauc.push_back(run->test_iauc);
  }
  if (runs.size() < 2) {
    r.spearman = {0.0, true};
    r.high_delta_iauc = r.low_delta_iauc = std::nan("");
    r.spearman_config_mean = std::nan("");
    return r;
  }
  r.spearman = spearman(acc, iauc);

  Rng rng(derive_seed(c.manifest.master_seed, {hash_string("bootstrap")}));
  std::vector<double> rhos;
  rhos.reserve(kBootstrapResamples);
  std::vector<double> bx(acc.size()), by(acc.size());
  for (std::size_t b = 0; b < kBootstrapResamples; ++b) {
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const auto k = uniform_index(rng, acc.size());
      bx[i] = acc[k];
      by[i] = iauc[k];
    }
    rhos.push_back(spearman(bx, by).rho);
  }
  r.spearman_bootstrap_std = sample_std(rhos);

  std::vector<double> per_config;
  bool have_delta = false;
  for (const auto& id : c.top_ids) {
    auto it = c.repetitions.find(id);
    if (it == c.repetitions.end() || it->second.size() < 2) continue;
    std::vector<double> a, s;
    std::vector<AccuracyIauc> pairs;
    for (const auto& run : it->second) {
      a.push_back(run.validation_accuracy);
      s.push_back(run.test_iauc);
      pairs.push_back({run.validation_accuracy, run.test_iauc});
    }
    per_config.push_back(spearman(a, s).rho);
    const double d = delta_iauc(pairs);
    if (!have_delta || d > r.high_delta_iauc) {
      r.high_delta_iauc = d;
      r.high_delta_config = id;
    }
    if (!have_delta || d < r.low_delta_iauc) {
      r.low_delta_iauc = d;
      r.low_delta_config = id;
    }
    have_delta = true;
  }
  if (!have_delta) r.high_delta_iauc = r.low_delta_iauc = std::nan("");
  r.spearman_config_mean = mean_of(per_config);
  r.spearman_config_std = sample_std(per_config);
  return r;
}

EnsemblingRow ensembling_row(const CampaignResult& c) {
  EnsemblingRow r;
  r.task = c.manifest.task_name();
  std::vector<double> fractions;
  for (const auto& s : c.summaries) fractions.push_back(s.bad_fraction);
  r.pct_bad_n1 = 100.0 * mean_of(fractions);
  if (const auto* p = ensemble_report_point(find_curve(c, EnsembleStrategy::SingleConfig))) {
    r.single_size = p->size;
    r.pct_bad_single = 100.0 * p->mean_bad_fraction;
  } else {
    r.pct_bad_single = std::nan("");
  }
  if (const auto* p = ensemble_report_point(find_curve(c, EnsembleStrategy::MultiConfig))) {
    r.multi_size = p->size;
    r.pct_bad_multi = 100.0 * p->mean_bad_fraction;
  } else {
    r.pct_bad_multi = std::nan("");
  }
  return r;
}

double Heatmap::column_fraction(std::size_t acc_bin, std::size_t iauc_bin) const {
  const auto total = column_totals[acc_bin];
  return total == 0 ? 0.0 : static_cast<double>(counts[acc_bin][iauc_bin]) / static_cast<double>(total);
}

Heatmap accuracy_iauc_heatmap(std::span<const RunRecord* const> runs) {
  Heatmap h;
  h.acc_edges = edges(0.5, 1.0, 10);
  h.iauc_edges = edges(0.0, 1.0, 10);
  h.counts.assign(10, std::vector<std::size_t>(10, 0));
  h.column_totals.assign(10, 0);
  for (const auto* r : runs) {
    const auto a = bin_of(r->validation_accuracy, 0.5, 0.05, 10);
    const auto b = bin_of(r->test_iauc, 0.0, 0.1, 10);
    ++h.counts[a][b];
    ++h.column_totals[a];
  }
  return h;
}

Histogram iauc_histogram(std::span<const double> values) {
  Histogram h;
  h.edges = edges(0.0, 1.0, 20);
  h.counts.assign(20, 0);
  for (double v : values) ++h.counts[bin_of(v, 0.0, 0.05, 20)];
  std::size_t run = 0;
  for (auto c : h.counts) {
    run += c;
    h.cumulative_fraction.push_back(values.empty() ? 0.0 : static_cast<double>(run) / static_cast<double>(values.size()));
  }
  return h;
}

std::string iauc_table_csv(std::span<const CampaignResult> campaigns) {
  std::string out = row(std::string("task"), std::string("modality"), std::string("problem"),
                        std::string("n_top_configs"), std::string("n_runs"), std::string("mean_iauc"),
                        std::string("n_bad_configs"));
  for (const auto& c : campaigns) {
    const auto r = iauc_table_row(c);
    out += row(r.task, std::string(to_string(c.manifest.modality)), std::string(to_string(c.manifest.problem)),
               std::to_string(r.n_configs), std::to_string(r.n_runs), format_number(r.mean_iauc),
               std::to_string(r.n_bad_configs));
  }
  return out;
}

std::string iauc_configs_csv(std::span<const CampaignResult> campaigns) {
  std::string out = row(std::string("task"), std::string("rank"), std::string("config_id"), std::string("n_runs"),
                        std::string("mean_validation_accuracy"), std::string("mean_test_accuracy"),
                        std::string("mean_iauc"), std::string("median_iauc"), std::string("bad_run_fraction"),
                        std::string("is_bad"));
  for (const auto& c : campaigns) {
    for (std::size_t i = 0; i < c.summaries.size(); ++i) {
      const auto& s = c.summaries[i];
      const auto& runs = c.repetitions.at(s.config_id);
      std::vector<double> va, ta;
      for (const auto& r : runs) {
        va.push_back(r.validation_accuracy);
        ta.push_back(r.test_accuracy);
      }
      const auto rank = std::find(c.top_ids.begin(), c.top_ids.end(), s.config_id) - c.top_ids.begin() + 1;
      out += row(c.manifest.task_name(), std::to_string(rank), s.config_id, std::to_string(runs.size()),
                 format_number(mean_of(va)), format_number(mean_of(ta)), format_number(s.mean_iauc),
                 format_number(median_of(s.iauc_values)), format_number(s.bad_fraction),
                 std::string(s.is_bad ? "1" : "0"));
    }
  }
  return out;
}

std::string decoupling_csv(std::span<const CampaignResult> campaigns) {
  std::string out = row(std::string("task"), std::string("n_runs"), std::string("spearman_rho"),
                        std::string("spearman_degenerate"), std::string("spearman_bootstrap_std"),
                        std::string("spearman_config_mean"), std::string("spearman_config_std"),
                        std::string("high_delta_iauc"), std::string("high_delta_config"),
                        std::string("low_delta_iauc"), std::string("low_delta_config"));
  for (const auto& c : campaigns) {
    const auto r = decoupling_row(c);
    out += row(r.task, std::to_string(r.n_runs), format_number(r.spearman.rho),
               std::string(r.spearman.degenerate ? "1" : "0"), format_number(r.spearman_bootstrap_std),
               format_number(r.spearman_config_mean), format_number(r.spearman_config_std),
               format_number(r.high_delta_iauc), r.high_delta_config, format_number(r.low_delta_iauc),
               r.low_delta_config);
  }
  return out;
}

std::string ensembling_csv(std::span<const CampaignResult> campaigns) {
  std::string out = row(std::string("task"), std::string("pct_bad_n1"), std::string("single_config_size"),
                        std::string("pct_bad_single_config"), std::string("multi_config_size"),
                        std::string("pct_bad_multi_config"));
  for (const auto& c : campaigns) {
    const auto r = ensembling_row(c);
    out += row(r.task, format_number(r.pct_bad_n1, 2), size_str(r.single_size), format_number(r.pct_bad_single, 2),
               size_str(r.multi_size), format_number(r.pct_bad_multi, 2));
  }
  return out;
}

std::string ranking_csv(std::span<const CampaignResult> campaigns) {
  std::string out = row(std::string("task"), std::string("rank"), std::string("config_id"), std::string("n_runs"),
                        std::string("n_diverged"), std::string("mean_validation_accuracy"),
                        std::string("mean_validation_loss"));
  for (const auto& c : campaigns) {
    for (std::size_t i = 0; i < c.ranked.size(); ++i) {
      const auto& r = c.ranked[i];
      out += row(c.manifest.task_name(), std::to_string(i + 1), r.config_id, std::to_string(r.n_runs),
                 std::to_string(r.n_diverged), format_number(r.mean_validation_accuracy),
                 format_number(r.mean_validation_loss));
    }
  }
  return out;
}

std::string histogram_csv(std::span<const CampaignResult> campaigns) {
  std::string out = row(std::string("task"), std::string("config_id"), std::string("bin_low"),
                        std::string("bin_high"), std::string("count"), std::string("cumulative_fraction"));
  for (const auto& c : campaigns) {
    for (const auto& s : c.summaries) {
      const auto h = iauc_histogram(s.iauc_values);
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        out += row(c.manifest.task_name(), s.config_id, format_number(h.edges[b], 2),
                   format_number(h.edges[b + 1], 2), std::to_string(h.counts[b]),
                   format_number(h.cumulative_fraction[b]));
      }
    }
  }
  return out;
}

std::string heatmap_csv(std::span<const CampaignResult> campaigns) {
  std::string out = row(std::string("task"), std::string("acc_low"), std::string("acc_high"),
                        std::string("iauc_low"), std::string("iauc_high"), std::string("count"),
                        std::string("column_fraction"), std::string("column_total"));
  for (const auto& c : campaigns) {
    const auto runs = c.top_runs();
    const auto h = accuracy_iauc_heatmap(runs);
    for (std::size_t a = 0; a < h.counts.size(); ++a) {
      for (std::size_t b = 0; b < h.counts[a].size(); ++b) {
        out += row(c.manifest.task_name(), format_number(h.acc_edges[a], 2), format_number(h.acc_edges[a + 1], 2),
                   format_number(h.iauc_edges[b], 2), format_number(h.iauc_edges[b + 1], 2),
                   std::to_string(h.counts[a][b]), format_number(h.column_fraction(a, b)),
                   std::to_string(h.column_totals[a]));
      }
    }
  }
  return out;
}

std::string ensemble_curves_csv(std::span<const CampaignResult> campaigns) {
  std::string out = row(std::string("task"), std::string("strategy"), std::string("series"), std::string("size"),
                        std::string("bad_fraction"), std::string("ci_low"), std::string("ci_high"),
                        std::string("n_samples"));
  for (const auto& c : campaigns) {
    for (const auto& cv : c.curves) {
      const std::string strategy(to_string(cv.strategy));
      for (const auto& p : cv.points) {
        out += row(c.manifest.task_name(), strategy, std::string("mean"), std::to_string(p.size),
                   format_number(p.mean_bad_fraction), format_number(p.ci_low), format_number(p.ci_high),
                   std::to_string(p.samples.size()));
      }
      for (const auto& pc : cv.per_config) {
        for (std::size_t i = 0; i < pc.bad_fraction.size(); ++i) {
          out += row(c.manifest.task_name(), strategy, pc.config_id, std::to_string(cv.points[i].size),
                     format_number(pc.bad_fraction[i]), std::string("NA"), std::string("NA"), std::string("1"));
        }
      }
    }
  }
  return out;
}

std::string attention_export_csv(const CampaignResult& c) {
  std::string out = row(std::string("config_id"), std::string("repetition"), std::string("bag"),
                        std::string("bag_label"), std::string("instance"), std::string("instance_label"),
                        std::string("key"), std::string("attention"));
  if (c.top_ids.empty()) return out;
  auto it = c.repetitions.find(c.top_ids.front());
  if (it == c.repetitions.end() || it->second.empty()) return out;
  const RunRecord& run = it->second.front();
  for (std::size_t b = 0; b < c.test_bags.size() && b < run.test_attention.size(); ++b) {
    const Bag& bag = c.test_bags[b];
    for (std::size_t m = 0; m < bag.size(); ++m) {
      const int label = bag.instance_labels[m];
      out += row(run.config_id, std::string("0"), std::to_string(b), std::to_string(bag.label), std::to_string(m),
                 std::to_string(label), std::string(is_key_population(label, c.manifest.problem) ? "1" : "0"),
                 format_number(run.test_attention[b][m], 9));
    }
  }
  return out;
}

std::string summary_json(std::span<const CampaignResult> campaigns) {
  auto num = [](double v) { return std::isfinite(v) ? ordered_json(std::stod(format_number(v))) : ordered_json(nullptr); };
  ordered_json tasks = ordered_json::array();
  for (const auto& c : campaigns) {
    const auto& m = c.manifest;
    const auto t1 = iauc_table_row(c);
    const auto t2 = decoupling_row(c);
    const auto t3 = ensembling_row(c);
    ordered_json configs = ordered_json::array();
    for (const auto& s : c.summaries) {
      configs.push_back({{"config_id", s.config_id},
                         {"n_runs", s.iauc_values.size()},
                         {"mean_iauc", num(s.mean_iauc)},
                         {"bad_run_fraction", num(s.bad_fraction)},
                         {"is_bad", s.is_bad}});
    }
    tasks.push_back({
        {"task", m.task_name()},
        {"modality", to_string(m.modality)},
        {"problem", to_string(m.problem)},
        {"master_seed", m.master_seed},
        {"desk_scale", m.desk_scale.enabled},
        {"grid_configs", m.effective_grid().size()},
        {"seeds_per_config", m.effective_seeds_per_config()},
        {"n_repetitions", m.effective_n_repetitions()},
        {"top_configs", c.top_ids},
        {"configs", configs},
        {"iauc", {{"mean_iauc", num(t1.mean_iauc)}, {"n_bad_configs", t1.n_bad_configs}, {"n_configs", t1.n_configs}}},
        {"decoupling",
         {{"spearman_rho", num(t2.spearman.rho)},
          {"spearman_degenerate", t2.spearman.degenerate},
          {"spearman_bootstrap_std", num(t2.spearman_bootstrap_std)},
          {"spearman_config_mean", num(t2.spearman_config_mean)},
          {"spearman_config_std", num(t2.spearman_config_std)},
          {"high_delta_iauc", num(t2.high_delta_iauc)},
          {"low_delta_iauc", num(t2.low_delta_iauc)}}},
        {"ensembling",
         {{"pct_bad_n1", num(t3.pct_bad_n1)},
          {"single_config_size", t3.single_size ? ordered_json(*t3.single_size) : ordered_json(nullptr)},
          {"pct_bad_single_config", num(t3.pct_bad_single)},
          {"multi_config_size", t3.multi_size ? ordered_json(*t3.multi_size) : ordered_json(nullptr)},
          {"pct_bad_multi_config", num(t3.pct_bad_multi)}}},
        {"gaps", c.gaps},
    });
  }
  ordered_json j{{"guides", {{"bad_run_iauc", kBadIauc}, {"bad_config_run_fraction", kBadRunFraction},
                             {"bad_ensemble_iauc", kBadEnsembleIauc}}},
                 {"spearman_uncertainty",
                  "spearman_bootstrap_std: std over 1000 bootstrap resamples of the pooled runs; "
                  "spearman_config_std: std of per-config rho across top configs"},
                 {"tasks", tasks}};
  return j.dump(2) + "\n";
}

namespace {

const char* kBlue = "#1f77b4";
const char* kOrange = "#ff7f0e";

std::string histogram_svg(const CampaignResult& c) {
  const double pw = 280, ph = 210;
  const std::size_t n = std::max<std::size_t>(1, c.summaries.size());
  SvgCanvas svg(pw * static_cast<double>(n), ph + 30);
  svg.text(8, 16, c.manifest.task_name() + ": IAUC per top configuration", 13);
  if (c.summaries.empty()) svg.text(20, 60, "no repetition results", 12);
  for (std::size_t i = 0; i < c.summaries.size(); ++i) {
    const auto& s = c.summaries[i];
    const double ox = pw * static_cast<double>(i);
    const Axis x{0.0, 1.0, ox + 40, ox + pw - 15};
    const Axis y{0.0, 1.0, ph, 45};
    const auto h = iauc_histogram(s.iauc_values);
    const double total = static_cast<double>(s.iauc_values.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      const double frac = total > 0 ? static_cast<double>(h.counts[b]) / total : 0.0;
      svg.rect(x(h.edges[b]), y(frac), x(h.edges[b + 1]) - x(h.edges[b]), y(0) - y(frac), kBlue, "white");
    }
    std::vector<std::pair<double, double>> cum;
    for (std::size_t b = 0; b < h.counts.size(); ++b) cum.emplace_back(x(h.edges[b + 1]), y(h.cumulative_fraction[b]));
    svg.polyline(cum, kOrange);
    svg.line(x(kBadIauc), y(0), x(kBadIauc), y(1), "black", 1, true);
    svg.line(x(0), y(kBadRunFraction), x(1), y(kBadRunFraction), "gray", 1, true);
    svg.line(x(0), y(0), x(1), y(0), "black");
    svg.line(x(0), y(0), x(0), y(1), "black");
    for (double t : {0.0, 0.5, 1.0}) {
      svg.text(x(t), y(0) + 14, format_number(t, 1), 9, "middle");
      svg.text(x(0) - 4, y(t) + 3, format_number(t, 1), 9, "end");
    }
    svg.text(x(0.5), 36, s.config_id, 8, "middle");
    svg.text(x(0.5), y(0) + 26, "IAUC (bad fraction " + format_number(s.bad_fraction, 2) + ")", 9, "middle");
  }
  return svg.str();
}

std::string heatmap_svg(const CampaignResult& c) {
  const auto runs = c.top_runs();
  const auto h = accuracy_iauc_heatmap(runs);
  const double cell = 34, ox = 60, oy = 50;
  SvgCanvas svg(ox + cell * 10 + 20, oy + cell * 10 + 50);
  svg.text(8, 16, c.manifest.task_name() + ": fraction of models per accuracy column", 13);
  for (std::size_t a = 0; a < 10; ++a) {
    svg.text(ox + cell * (static_cast<double>(a) + 0.5), oy - 6, std::to_string(h.column_totals[a]), 9, "middle");
    for (std::size_t b = 0; b < 10; ++b) {
      const double f = h.column_fraction(a, b);
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - f)));
      char fill[16];
      std::snprintf(fill, sizeof(fill), "#%02x%02xff", shade, shade);
      const double yy = oy + cell * static_cast<double>(9 - b);
      svg.rect(ox + cell * static_cast<double>(a), yy, cell, cell, h.column_totals[a] ? fill : "#eeeeee", "white");
      if (h.counts[a][b]) svg.text(ox + cell * (static_cast<double>(a) + 0.5), yy + cell * 0.6, format_number(f, 2), 8, "middle");
    }
    svg.text(ox + cell * static_cast<double>(a), oy + cell * 10 + 12, format_number(h.acc_edges[a], 2), 8, "middle");
  }
  for (std::size_t b = 0; b <= 10; b += 2) {
    svg.text(ox - 4, oy + cell * static_cast<double>(10 - b) + 3, format_number(h.iauc_edges[b], 1), 9, "end");
  }
  svg.text(ox + cell * 5, oy + cell * 10 + 32, "validation accuracy", 11, "middle");
  svg.text(12, oy + cell * 5, "IAUC", 11, "start");
  return svg.str();
}

std::string ensembles_svg(const CampaignResult& c) {
  SvgCanvas svg(460, 300);
  svg.text(8, 16, c.manifest.task_name() + ": fraction of bad ensembles", 13);
  std::vector<std::size_t> sizes;
  for (const auto& cv : c.curves)
    for (const auto& p : cv.points) sizes.push_back(p.size);
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  if (sizes.empty()) {
    svg.text(20, 60, "no ensemble results", 12);
    return svg.str();
  }
  const Axis x{std::log(static_cast<double>(sizes.front())) - 0.2, std::log(static_cast<double>(sizes.back())) + 0.2, 50, 440};
  const Axis y{0.0, 1.0, 250, 40};
  svg.line(50, y(0), 440, y(0), "black");
  svg.line(50, y(0), 50, y(1), "black");
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) svg.text(46, y(t) + 3, format_number(t, 2), 9, "end");
  for (auto s : sizes) svg.text(x(std::log(static_cast<double>(s))), y(0) + 14, std::to_string(s), 9, "middle");
  svg.text(245, 290, "ensemble size N", 11, "middle");
  double legend_y = 30;
  for (const auto& cv : c.curves) {
    const char* color = cv.strategy == EnsembleStrategy::SingleConfig ? kBlue : kOrange;
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : cv.points) {
      const double px = x(std::log(static_cast<double>(p.size)));
      pts.emplace_back(px, y(p.mean_bad_fraction));
      svg.line(px, y(std::clamp(p.ci_low, 0.0, 1.0)), px, y(std::clamp(p.ci_high, 0.0, 1.0)), color, 1);
    }
    svg.polyline(pts, color);
    svg.line(330, legend_y, 350, legend_y, color, 2);
    svg.text(355, legend_y + 4, std::string(to_string(cv.strategy)), 10);
    legend_y += 14;
  }
  return svg.str();
}

fs::path put(const fs::path& dir, const std::string& name, const std::string& contents,
             std::vector<fs::path>& written) {
  const auto p = dir / name;
  write_file_atomic(p, contents);
  written.push_back(p);
  return p;
}

}  // namespace

std::vector<fs::path> write_ensemble_reports(std::span<const CampaignResult> campaigns, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  put(dir, "ensemble_curves.csv", ensemble_curves_csv(campaigns), written);
  put(dir, "ensembling_summary.csv", ensembling_csv(campaigns), written);
  for (const auto& c : campaigns) put(dir, "fig_ensembles_" + c.manifest.task_name() + ".svg", ensembles_svg(c), written);
  return written;
}

std::vector<fs::path> write_reports(std::span<const CampaignResult> campaigns, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  put(dir, "search_ranking.csv", ranking_csv(campaigns), written);
  put(dir, "iauc_summary.csv", iauc_table_csv(campaigns), written);
  put(dir, "iauc_configs.csv", iauc_configs_csv(campaigns), written);
  put(dir, "accuracy_iauc_correlation.csv", decoupling_csv(campaigns), written);
  put(dir, "iauc_histograms.csv", histogram_csv(campaigns), written);
  put(dir, "accuracy_iauc_heatmap.csv", heatmap_csv(campaigns), written);
  for (auto& p : write_ensemble_reports(campaigns, dir)) written.push_back(p);
  for (const auto& c : campaigns) {
    const auto task = c.manifest.task_name();
    put(dir, "fig_iauc_" + task + ".svg", histogram_svg(c), written);
    put(dir, "fig_heatmap_" + task + ".svg", heatmap_svg(c), written);
    put(dir, "attention_" + task + ".csv", attention_export_csv(c), written);
  }
  put(dir, "summary.json", summary_json(campaigns), written);
  return written;
}

}  // namespace milattn
