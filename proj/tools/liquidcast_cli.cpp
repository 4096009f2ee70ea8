// liquidcast: batch front end for the forecasting pipeline.
//
// Verbs: prepare, tune, evaluate, baseline, bootstrap, report, plotdata.
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.
//
// Every command reads its configuration from a JSON file (--config) whose
// fields all have defaults, writes its artifacts only to the output
// directory, and is byte-for-byte reproducible given identical inputs and
// seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "liquidcast/baseline.hpp"
#include "liquidcast/bootstrap.hpp"
#include "liquidcast/cells.hpp"
#include "liquidcast/csv.hpp"
#include "liquidcast/dataset.hpp"
#include "liquidcast/errors.hpp"
#include "liquidcast/metrics.hpp"
#include "liquidcast/numerics.hpp"
#include "liquidcast/protocol.hpp"

namespace {

using liquidcast::Error;
using liquidcast::ErrorCode;
using liquidcast::ForecastRecord;
namespace csvio = liquidcast::csv;
namespace ds = liquidcast::dataset;
namespace proto = liquidcast::protocol;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string data_dir = ".";
  std::string output_dir = "out";
  std::string schema = "schema.json";
  std::string arch;  // default --arch for commands that take one
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  std::size_t window = 30;           // rolling regression window W
  std::size_t sequence_length = 30;  // recurrent input window L
  std::size_t strata = 20;           // evaluation bins K
  std::size_t per_stratum = 8;       // indices per bin k
  std::size_t bootstrap_replicates = 300;

  int tuning_epochs = 30;
  int final_epochs = 50;
  double weight_decay = 1e-5;
  double clip_norm = 1.0;

  std::vector<int> hidden_sizes = {4, 8, 12};
  std::vector<double> learning_rates = {5e-3, 1e-3};
  std::vector<int> batch_sizes = {32, 64};
};

RunConfig load_run_config(const std::string& path) {
  RunConfig rc;
  if (path.empty()) return rc;
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::BadConfig, "cannot open config file " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig,
                "config " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::BadConfig, "config root must be a JSON object");
  }
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "data_dir") rc.data_dir = value.get<std::string>();
      else if (key == "output_dir") rc.output_dir = value.get<std::string>();
      else if (key == "schema") rc.schema = value.get<std::string>();
      else if (key == "arch") rc.arch = value.get<std::string>();
      else if (key == "seed") rc.seed = value.get<std::uint64_t>();
      else if (key == "jobs") rc.jobs = value.get<unsigned>();
      else if (key == "window") rc.window = value.get<std::size_t>();
      else if (key == "sequence_length")
        rc.sequence_length = value.get<std::size_t>();
      else if (key == "strata") rc.strata = value.get<std::size_t>();
      else if (key == "per_stratum")
        rc.per_stratum = value.get<std::size_t>();
      else if (key == "bootstrap_replicates")
        rc.bootstrap_replicates = value.get<std::size_t>();
      else if (key == "tuning_epochs") rc.tuning_epochs = value.get<int>();
      else if (key == "final_epochs") rc.final_epochs = value.get<int>();
      else if (key == "weight_decay") rc.weight_decay = value.get<double>();
      else if (key == "clip_norm") rc.clip_norm = value.get<double>();
      else if (key == "hidden_sizes")
        rc.hidden_sizes = value.get<std::vector<int>>();
      else if (key == "learning_rates")
        rc.learning_rates = value.get<std::vector<double>>();
      else if (key == "batch_sizes")
        rc.batch_sizes = value.get<std::vector<int>>();
      else
        throw Error(ErrorCode::BadConfig, "unknown config key \"" + key + "\"");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig,
                std::string("config field has the wrong type: ") + e.what());
  }
  return rc;
}

proto::ProtocolConfig protocol_config(const RunConfig& rc) {
  proto::ProtocolConfig p;
  p.window_len = rc.sequence_length;
  p.hidden_sizes = rc.hidden_sizes;
  p.learning_rates = rc.learning_rates;
  p.batch_sizes = rc.batch_sizes;
  p.tuning_epochs = rc.tuning_epochs;
  p.final_epochs = rc.final_epochs;
  p.weight_decay = rc.weight_decay;
  p.clip_norm = rc.clip_norm;
  p.strata = rc.strata;
  p.per_stratum = rc.per_stratum;
  p.seed = rc.seed;
  p.jobs = rc.jobs;
  return p;
}

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

std::string join_path(const std::string& dir, const std::string& p) {
  if (p.empty() || p.front() == '/' || dir.empty()) return p;
  return dir + "/" + p;
}

std::string artifact(const RunConfig& rc, const std::string& name) {
  return join_path(rc.output_dir, name);
}

void ensure_output_dir(const RunConfig& rc) {
  std::filesystem::create_directories(rc.output_dir);
}

void require_artifact(const std::string& path, const std::string& producer) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::BadConfig,
                "missing upstream artifact " + path + "; run `" + producer +
                    "` first");
  }
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string opt4(const std::optional<double>& v) {
  return v ? fixed4(*v) : std::string("n/a");
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::BadConfig, "cannot write " + path);
  }
  out << text;
}

// Display names for table rows; the short names double as artifact suffixes.
const std::vector<std::pair<std::string, std::string>> kModelRows = {
    {"baseline", "Baseline"},     {"lstm", "LSTM"},
    {"strict_cfc", "Strict CfC"}, {"ltc", "LTC"},
    {"hybrid_cfc", "Hybrid CfC"}, {"ct_ltc", "CT-LTC"},
};

// ---------------------------------------------------------------------------
// Forecast CSV (date, actual, predicted, arch, config_hash)
// ---------------------------------------------------------------------------

void write_forecast_csv(const std::string& path,
                        const std::vector<ForecastRecord>& records,
                        const std::string& model_name,
                        const std::string& config_hash) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(records.size());
  for (const ForecastRecord& r : records) {
    rows.push_back({csvio::format_date(r.date), csvio::format_number(r.actual),
                    csvio::format_number(r.predicted), model_name,
                    config_hash});
  }
  csvio::write_file(path, {"date", "actual", "predicted", "arch", "config_hash"},
                    rows);
}

struct ForecastSeries {
  std::vector<std::int64_t> dates;
  std::vector<double> actual;
  std::vector<double> predicted;
};

ForecastSeries read_forecast_csv(const std::string& path) {
  const csvio::Table t = csvio::read_file(path);
  const std::size_t cd = t.column("date");
  const std::size_t ca = t.column("actual");
  const std::size_t cp = t.column("predicted");
  ForecastSeries s;
  s.dates.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    s.dates.push_back(csvio::parse_date(row[cd], "%Y-%m-%d"));
    s.actual.push_back(csvio::parse_number(row[ca]));
    s.predicted.push_back(csvio::parse_number(row[cp]));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_prepare(const RunConfig& rc) {
  const std::string schema_path = join_path(rc.data_dir, rc.schema);
  const ds::Schema schema = ds::load_schema_file(schema_path);
  const ds::TimeSeriesFrame merged = ds::load_and_merge(schema, rc.data_dir);
  const auto [cleaned, report] = ds::clean(merged, schema.sparse_columns());
  const ds::TimeSeriesFrame frame = ds::compute_returns(cleaned);

  ensure_output_dir(rc);
  ds::write_frame_csv(frame, artifact(rc, "frame.csv"));

  std::string acct;
  acct += "rows merged: " + std::to_string(report.rows_before) + "\n";
  acct += "sparse columns dropped: ";
  if (report.dropped_columns.empty()) {
    acct += "none";
  } else {
    for (std::size_t i = 0; i < report.dropped_columns.size(); ++i) {
      if (i) acct += ", ";
      acct += report.dropped_columns[i];
    }
  }
  acct += "\n";
  acct += "rows removed (missing values): " +
          std::to_string(report.rows_missing) + "\n";
  acct += "rows removed (price outliers): " +
          std::to_string(report.rows_outlier) + "\n";
  acct +=
      "rows removed (total): " +
      std::to_string(report.rows_missing + report.rows_outlier) + "\n";
  acct += "rows retained after cleaning: " + std::to_string(report.rows_after) +
          "\n";
  acct += "rows in final frame: " + std::to_string(frame.rows()) + "\n";
  acct += "columns in final frame: " + std::to_string(frame.columns.size()) +
          "\n";
  write_text_file(artifact(rc, "prepare_report.txt"), acct);
  std::fputs(acct.c_str(), stdout);
  std::printf("wrote %s\n", artifact(rc, "frame.csv").c_str());
  return 0;
}

json score_to_json(const proto::ConfigScore& s) {
  json row;
  row["hidden"] = s.config.hidden;
  row["learning_rate"] = s.config.learning_rate;
  row["batch_size"] = s.config.batch_size;
  if (s.val_pearson) {
    row["val_pearson"] = *s.val_pearson;
  } else {
    row["val_pearson"] = nullptr;
    row["failure"] = s.failure;
  }
  return row;
}

int cmd_tune(const RunConfig& rc, const std::string& arch_name) {
  const std::string frame_path = artifact(rc, "frame.csv");
  require_artifact(frame_path, "prepare");
  const ds::TimeSeriesFrame frame = ds::read_frame_csv(frame_path);
  const auto arch = liquidcast::cells::arch_from_name(arch_name);

  const proto::GridSearchResult result =
      proto::tune(frame, arch, protocol_config(rc));

  json manifest;
  manifest["arch"] = arch_name;
  manifest["seed"] = rc.seed;
  manifest["sequence_length"] = rc.sequence_length;
  manifest["tuning_epochs"] = rc.tuning_epochs;
  manifest["grid"] = json::array();
  for (const proto::ConfigScore& s : result.scores) {
    manifest["grid"].push_back(score_to_json(s));
  }
  manifest["best"] = {{"hidden", result.best.hidden},
                      {"learning_rate", result.best.learning_rate},
                      {"batch_size", result.best.batch_size},
                      {"val_pearson", result.val_pearson}};

  ensure_output_dir(rc);
  const std::string path = artifact(rc, "tune_" + arch_name + ".json");
  write_text_file(path, manifest.dump(2) + "\n");
  std::printf(
      "%s: %zu configs scored; best hidden=%d lr=%s batch=%d (val r=%s)\n",
      arch_name.c_str(), result.scores.size(), result.best.hidden,
      csvio::format_number(result.best.learning_rate).c_str(),
      result.best.batch_size, fixed4(result.val_pearson).c_str());
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

proto::ChosenConfig read_chosen(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  json j;
  try {
    in >> j;
    proto::ChosenConfig chosen;
    chosen.hidden = j.at("best").at("hidden").get<int>();
    chosen.learning_rate = j.at("best").at("learning_rate").get<double>();
    chosen.batch_size = j.at("best").at("batch_size").get<int>();
    return chosen;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig,
                "manifest " + manifest_path + " is malformed: " + e.what());
  }
}

std::string eval_config_hash(const RunConfig& rc, const std::string& arch_name,
                             const proto::ChosenConfig& chosen) {
  const std::string key =
      arch_name + "|h=" + std::to_string(chosen.hidden) +
      "|lr=" + csvio::format_number(chosen.learning_rate) +
      "|b=" + std::to_string(chosen.batch_size) +
      "|L=" + std::to_string(rc.sequence_length) +
      "|epochs=" + std::to_string(rc.final_epochs) +
      "|seed=" + std::to_string(rc.seed);
  return hex16(fnv1a64(key));
}

int cmd_evaluate(const RunConfig& rc, const std::string& arch_name) {
  const std::string frame_path = artifact(rc, "frame.csv");
  require_artifact(frame_path, "prepare");
  const std::string manifest_path =
      artifact(rc, "tune_" + arch_name + ".json");
  require_artifact(manifest_path, "tune --arch " + arch_name);

  const ds::TimeSeriesFrame frame = ds::read_frame_csv(frame_path);
  const auto arch = liquidcast::cells::arch_from_name(arch_name);
  const proto::ChosenConfig chosen = read_chosen(manifest_path);

  const proto::EvalResult result =
      proto::expanding_window_eval(frame, arch, chosen, protocol_config(rc));

  const std::string hash = eval_config_hash(rc, arch_name, chosen);
  ensure_output_dir(rc);
  const std::string csv_path = artifact(rc, "eval_" + arch_name + ".csv");
  write_forecast_csv(csv_path, result.records, arch_name, hash);

  json diag;
  diag["arch"] = arch_name;
  diag["config_hash"] = hash;
  diag["chosen"] = {{"hidden", chosen.hidden},
                    {"learning_rate", chosen.learning_rate},
                    {"batch_size", chosen.batch_size}};
  diag["forecasts"] = result.records.size();
  diag["failures"] = json::array();
  for (const proto::IndexFailure& f : result.diagnostics.failures) {
    diag["failures"].push_back({{"position", f.position},
                                {"t_eval", f.t_eval},
                                {"message", f.message}});
  }
  diag["max_row_read"] = json::array();
  for (const std::size_t r : result.diagnostics.max_row_read) {
    if (r == ds::RowAudit::kNone) {
      diag["max_row_read"].push_back(nullptr);
    } else {
      diag["max_row_read"].push_back(r);
    }
  }
  write_text_file(artifact(rc, "eval_" + arch_name + ".json"),
                  diag.dump(2) + "\n");

  std::printf("%s: %zu forecasts, %zu failed anchors\n", arch_name.c_str(),
              result.records.size(), result.diagnostics.failures.size());
  std::printf("wrote %s\n", csv_path.c_str());
  return 0;
}

int cmd_baseline(const RunConfig& rc) {
  const std::string frame_path = artifact(rc, "frame.csv");
  require_artifact(frame_path, "prepare");
  const ds::TimeSeriesFrame frame = ds::read_frame_csv(frame_path);

  liquidcast::baseline::BaselineConfig config;
  config.window = rc.window;
  const std::vector<ForecastRecord> records =
      liquidcast::baseline::rolling_forecast(frame, config);

  const std::string hash =
      hex16(fnv1a64("baseline|W=" + std::to_string(rc.window)));
  ensure_output_dir(rc);
  const std::string csv_path = artifact(rc, "baseline.csv");
  write_forecast_csv(csv_path, records, "baseline", hash);

  std::vector<double> actual, predicted;
  actual.reserve(records.size());
  predicted.reserve(records.size());
  for (const ForecastRecord& r : records) {
    actual.push_back(r.actual);
    predicted.push_back(r.predicted);
  }
  const liquidcast::metrics::MetricsReport m =
      liquidcast::metrics::compute_metrics(actual, predicted);

  std::vector<std::vector<std::string>> rows = {
      {"pearson_r", m.pearson_r ? csvio::format_number(*m.pearson_r) : ""},
      {"spearman_rho",
       m.spearman_rho ? csvio::format_number(*m.spearman_rho) : ""},
      {"directional_accuracy", csvio::format_number(m.directional_accuracy)},
      {"r_squared", m.r_squared ? csvio::format_number(*m.r_squared) : ""},
      {"rmse", csvio::format_number(m.rmse)},
      {"mae", csvio::format_number(m.mae)},
  };
  csvio::write_file(artifact(rc, "baseline_metrics.csv"), {"metric", "value"},
                    rows);

  std::printf("baseline: %zu forecasts over window %zu\n", records.size(),
              rc.window);
  std::printf("  pearson_r=%s spearman_rho=%s da=%s r2=%s rmse=%s mae=%s\n",
              opt4(m.pearson_r).c_str(), opt4(m.spearman_rho).c_str(),
              fixed4(m.directional_accuracy).c_str(), opt4(m.r_squared).c_str(),
              fixed4(m.rmse).c_str(), fixed4(m.mae).c_str());
  std::printf("wrote %s\n", csv_path.c_str());
  return 0;
}

int cmd_bootstrap(const RunConfig& rc, const std::string& model_name) {
  const std::string forecast_path =
      model_name == "baseline" ? artifact(rc, "baseline.csv")
                               : artifact(rc, "eval_" + model_name + ".csv");
  require_artifact(forecast_path, model_name == "baseline"
                                      ? "baseline"
                                      : "evaluate --arch " + model_name);
  const ForecastSeries s = read_forecast_csv(forecast_path);

  const liquidcast::bootstrap::BootstrapReport report =
      liquidcast::bootstrap::bootstrap_metrics(
          s.actual, s.predicted, rc.bootstrap_replicates, rc.seed, rc.jobs);

  std::vector<std::vector<std::string>> rows;
  for (const auto& m : report.metrics) {
    rows.push_back({m.metric, csvio::format_number(m.mean),
                    csvio::format_number(m.sd), csvio::format_number(m.ci_low),
                    csvio::format_number(m.ci_high),
                    std::to_string(m.undefined_replicates)});
  }
  ensure_output_dir(rc);
  const std::string csv_path =
      artifact(rc, "bootstrap_" + model_name + ".csv");
  csvio::write_file(csv_path,
                    {"metric", "mean", "sd", "ci_low", "ci_high",
                     "undefined_replicates"},
                    rows);

  std::string table;
  table += "bootstrap: " + model_name + " (" +
           std::to_string(report.replications) + " replicates, block length " +
           std::to_string(report.block_len) + ")\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-22s %12s %12s %12s %12s %10s\n",
                "metric", "mean", "sd", "ci_low", "ci_high", "undefined");
  table += line;
  for (const auto& m : report.metrics) {
    std::snprintf(line, sizeof(line), "%-22s %12s %12s %12s %12s %10zu\n",
                  m.metric.c_str(), fixed4(m.mean).c_str(),
                  fixed4(m.sd).c_str(), fixed4(m.ci_low).c_str(),
                  fixed4(m.ci_high).c_str(), m.undefined_replicates);
    table += line;
  }
  write_text_file(artifact(rc, "bootstrap_" + model_name + ".txt"), table);
  std::fputs(table.c_str(), stdout);
  std::printf("wrote %s\n", csv_path.c_str());
  return 0;
}

int cmd_report(const RunConfig& rc) {
  std::string text;
  char line[256];

  // Panel A: point metrics per model with a persisted forecast series.
  text += "Panel A: point performance\n";
  std::snprintf(line, sizeof(line), "%-12s %10s %12s %8s %10s %10s %10s\n",
                "Model", "Pearson r", "Spearman rho", "DA (%)", "R^2", "RMSE",
                "MAE");
  text += line;
  std::size_t panel_a_rows = 0;
  for (const auto& [short_name, display] : kModelRows) {
    const std::string path =
        short_name == "baseline" ? artifact(rc, "baseline.csv")
                                 : artifact(rc, "eval_" + short_name + ".csv");
    if (!std::filesystem::exists(path)) continue;
    const ForecastSeries s = read_forecast_csv(path);
    const liquidcast::metrics::MetricsReport m =
        liquidcast::metrics::compute_metrics(s.actual, s.predicted);
    std::snprintf(line, sizeof(line), "%-12s %10s %12s %8s %10s %10s %10s\n",
                  display.c_str(), opt4(m.pearson_r).c_str(),
                  opt4(m.spearman_rho).c_str(),
                  fixed4(m.directional_accuracy).c_str(),
                  opt4(m.r_squared).c_str(), fixed4(m.rmse).c_str(),
                  fixed4(m.mae).c_str());
    text += line;
    ++panel_a_rows;
  }
  if (panel_a_rows == 0) {
    throw Error(ErrorCode::BadConfig,
                "no forecast artifacts in " + rc.output_dir +
                    "; run `baseline` or `evaluate` first");
  }

  // Panel B: bootstrap aggregates for models with a bootstrap artifact.
  std::size_t panel_b_rows = 0;
  std::string panel_b;
  for (const auto& [short_name, display] : kModelRows) {
    const std::string path = artifact(rc, "bootstrap_" + short_name + ".csv");
    if (!std::filesystem::exists(path)) continue;
    const csvio::Table t = csvio::read_file(path);
    const std::size_t cm = t.column("mean");
    const std::size_t cs = t.column("sd");
    const std::size_t cl = t.column("ci_low");
    const std::size_t ch = t.column("ci_high");
    std::string mean_line = display, ci_line;
    mean_line.resize(12, ' ');
    ci_line.resize(12, ' ');
    for (const auto& row : t.rows) {
      char cell[64];
      std::snprintf(cell, sizeof(cell), " %10s +- %-7s",
                    fixed4(csvio::parse_number(row[cm])).c_str(),
                    fixed4(csvio::parse_number(row[cs])).c_str());
      mean_line += cell;
      std::snprintf(cell, sizeof(cell), " [%8s, %8s]   ",
                    fixed4(csvio::parse_number(row[cl])).c_str(),
                    fixed4(csvio::parse_number(row[ch])).c_str());
      ci_line += cell;
    }
    panel_b += mean_line + "\n" + ci_line + "\n";
    ++panel_b_rows;
  }
  if (panel_b_rows > 0) {
    text += "\nPanel B: bootstrap performance (mean +- sd, 95% CI, B=" +
            std::to_string(rc.bootstrap_replicates) + ")\n";
    std::snprintf(line, sizeof(line), "%-12s %21s %21s %21s %21s %21s %21s\n",
                  "Model", "Pearson r", "Spearman rho", "DA (%)", "R^2",
                  "RMSE", "MAE");
    text += line;
    text += panel_b;
  }

  ensure_output_dir(rc);
  write_text_file(artifact(rc, "report.txt"), text);
  std::fputs(text.c_str(), stdout);
  std::printf("wrote %s\n", artifact(rc, "report.txt").c_str());
  return 0;
}

int cmd_plotdata(const RunConfig& rc) {
  const std::string frame_path = artifact(rc, "frame.csv");
  require_artifact(frame_path, "prepare");
  const ds::TimeSeriesFrame frame = ds::read_frame_csv(frame_path);
  const auto ret_col = static_cast<Eigen::Index>(frame.column(ds::kSpotReturn));
  const std::size_t n = frame.rows();
  std::vector<double> returns(n);
  for (std::size_t r = 0; r < n; ++r) {
    returns[r] = frame.values(static_cast<Eigen::Index>(r), ret_col);
  }
  ensure_output_dir(rc);

  // Rolling standard deviation of returns over the configured window.
  const std::size_t w = rc.window;
  std::vector<std::vector<std::string>> std_rows;
  if (n >= w && w >= 2) {
    for (std::size_t r = w - 1; r < n; ++r) {
      double mean = 0.0;
      for (std::size_t i = r + 1 - w; i <= r; ++i) mean += returns[i];
      mean /= static_cast<double>(w);
      double ss = 0.0;
      for (std::size_t i = r + 1 - w; i <= r; ++i) {
        ss += (returns[i] - mean) * (returns[i] - mean);
      }
      const double sd = std::sqrt(ss / static_cast<double>(w - 1));
      std_rows.push_back(
          {csvio::format_date(frame.dates[r]), csvio::format_number(sd)});
    }
  }
  csvio::write_file(artifact(rc, "plot_rolling_std.csv"),
                    {"date", "rolling_std"}, std_rows);

  // Autocorrelation of returns, lag 0 pinned at 1, with the standard
  // white-noise band +-1.96/sqrt(N).
  const std::size_t max_lag = std::min<std::size_t>(40, n > 2 ? n - 2 : 0);
  const std::vector<double> rho =
      liquidcast::numerics::acf(returns, max_lag);
  const double band = 1.96 / std::sqrt(static_cast<double>(n));
  std::vector<std::vector<std::string>> acf_rows;
  acf_rows.push_back({"0", csvio::format_number(1.0),
                      csvio::format_number(-band), csvio::format_number(band)});
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    acf_rows.push_back({std::to_string(lag),
                        csvio::format_number(rho[lag - 1]),
                        csvio::format_number(-band),
                        csvio::format_number(band)});
  }
  csvio::write_file(artifact(rc, "plot_acf.csv"),
                    {"lag", "acf", "ci_low", "ci_high"}, acf_rows);

  // Actual-vs-predicted series for every persisted forecast artifact.
  std::size_t avp_files = 0;
  for (const auto& [short_name, display] : kModelRows) {
    (void)display;
    const std::string path =
        short_name == "baseline" ? artifact(rc, "baseline.csv")
                                 : artifact(rc, "eval_" + short_name + ".csv");
    if (!std::filesystem::exists(path)) continue;
    const ForecastSeries s = read_forecast_csv(path);
    std::vector<std::vector<std::string>> rows;
    rows.reserve(s.dates.size());
    for (std::size_t i = 0; i < s.dates.size(); ++i) {
      rows.push_back({csvio::format_date(s.dates[i]),
                      csvio::format_number(s.actual[i]),
                      csvio::format_number(s.predicted[i])});
    }
    csvio::write_file(artifact(rc, "plot_avp_" + short_name + ".csv"),
                      {"date", "actual", "predicted"}, rows);
    ++avp_files;
  }

  std::printf(
      "wrote %s (%zu rows), %s (%zu lags), %zu actual-vs-predicted series\n",
      artifact(rc, "plot_rolling_std.csv").c_str(), std_rows.size(),
      artifact(rc, "plot_acf.csv").c_str(), max_lag + 1, avp_files);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"liquidcast: recurrent and linear one-step return forecasting"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string arch_flag;
  std::optional<std::uint64_t> seed_flag;
  std::optional<unsigned> jobs_flag;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed_flag, "master seed (overrides config)");
  app.add_option("--jobs", jobs_flag, "worker threads (overrides config)");

  const std::vector<std::string> arch_names = {"lstm", "strict_cfc", "ltc",
                                               "hybrid_cfc", "ct_ltc"};
  std::vector<std::string> bootstrap_names = arch_names;
  bootstrap_names.emplace_back("baseline");

  auto* prepare = app.add_subcommand(
      "prepare", "merge, clean, and derive the canonical frame");
  auto* tune = app.add_subcommand("tune", "grid-search one architecture");
  tune->add_option("--arch", arch_flag, "architecture")
      ->check(CLI::IsMember(arch_names));
  auto* evaluate =
      app.add_subcommand("evaluate", "expanding-window evaluation");
  evaluate->add_option("--arch", arch_flag, "architecture")
      ->check(CLI::IsMember(arch_names));
  auto* baseline = app.add_subcommand(
      "baseline", "rolling-window linear regression forecasts");
  auto* bootstrap = app.add_subcommand(
      "bootstrap", "block-bootstrap metric distributions for one model");
  bootstrap->add_option("--arch", arch_flag, "model (architecture or baseline)")
      ->check(CLI::IsMember(bootstrap_names));
  auto* report =
      app.add_subcommand("report", "combined point + bootstrap tables");
  auto* plotdata = app.add_subcommand(
      "plotdata", "plot-ready series: rolling std, ACF, actual-vs-predicted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every actual usage problem exits 1
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    RunConfig rc = load_run_config(config_path);
    if (seed_flag) rc.seed = *seed_flag;
    if (jobs_flag) rc.jobs = *jobs_flag;

    std::string model = arch_flag.empty() ? rc.arch : arch_flag;
    const bool needs_arch =
        tune->parsed() || evaluate->parsed() || bootstrap->parsed();
    if (needs_arch) {
      const auto& allowed =
          bootstrap->parsed() ? bootstrap_names : arch_names;
      if (std::find(allowed.begin(), allowed.end(), model) == allowed.end()) {
        std::fprintf(stderr,
                     "error: this command needs --arch (or an \"arch\" config "
                     "entry) naming one of:");
        for (const auto& a : allowed) std::fprintf(stderr, " %s", a.c_str());
        std::fprintf(stderr, "\n");
        return 1;
      }
    }

    if (prepare->parsed()) return cmd_prepare(rc);
    if (tune->parsed()) return cmd_tune(rc, model);
    if (evaluate->parsed()) return cmd_evaluate(rc, model);
    if (baseline->parsed()) return cmd_baseline(rc);
    if (bootstrap->parsed()) return cmd_bootstrap(rc, model);
    if (report->parsed()) return cmd_report(rc);
    if (plotdata->parsed()) return cmd_plotdata(rc);
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return liquidcast::is_data_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
