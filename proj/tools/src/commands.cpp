#include "seasoncast_cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "seasoncast/checkpoint.hpp"
#include "seasoncast/config_io.hpp"
#include "seasoncast/error.hpp"
#include "seasoncast/evaluation.hpp"
#include "seasoncast/parallel.hpp"
#include "seasoncast/pipeline.hpp"
#include "seasoncast/synth.hpp"

namespace seasoncast::cli {
namespace {

using nlohmann::json;

constexpr const char* kCheckpointFile = "best.ckpt";
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kHistoryFile = "history.log";
constexpr const char* kSkipFile = "skipped.json";
constexpr const char* kReportText = "report.txt";
constexpr const char* kReportCsv = "report.csv";
constexpr const char* kScenariosCsv = "scenarios.csv";

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  }
}

std::uint64_t data_hash(const fs::path& dir) {
  std::string bytes = read_text_file(dir / kSeriesFile);
  if (fs::exists(dir / kEnsembleFile)) {
    bytes += read_text_file(dir / kEnsembleFile);
  }
  return fnv1a64(bytes);
}

RunConfig load_run_config(const std::optional<fs::path>& path) {
  return path ? run_config_from_json(read_text_file(*path)) : default_run_config();
}

std::string variant_name(const TrainOptions& options) {
  if (options.baseline) {
    return std::string(to_string(*options.baseline));
  }
  return options.no_climate ? "noclimate" : "climate";
}

std::string model_label(const Checkpoint& checkpoint) {
  switch (checkpoint.kind) {
    case CheckpointKind::Persistence:
      return "Persistence";
    case CheckpointKind::SeasonalNaive:
      return "Seasonal-Naive";
    case CheckpointKind::LrlSnn:
      break;
  }
  for (const auto& f : checkpoint.config.features) {
    if (f.kind == SeriesKind::Climate) {
      return "LRL-SNN+Climate";
    }
  }
  return "LRL-SNN";
}

std::string format_history(const TrainHistory& history) {
  std::string out;
  char line[160];
  for (const auto& e : history.epochs) {
    std::snprintf(line, sizeof line, "epoch=%zu train_loss=%.17g dev_loss=%.17g\n", e.epoch, e.train_loss,
                  e.dev_loss);
    out += line;
  }
  std::snprintf(line, sizeof line, "best_epoch=%zu\n", history.epochs.empty() ? 0 : history.epochs[history.best_epoch].epoch);
  out += line;
  return out;
}

json feature_list(const ModelConfig& model, bool climate) {
  json out = json::array();
  for (const auto& f : model.features) {
    if ((f.kind == SeriesKind::Climate) == climate) {
      out.push_back(f.id);
    }
  }
  return out;
}

// Reads report.csv (and scenarios.csv when present) from a directory or a
// report file.
struct LoadedReport {
  std::vector<ReportRow> rows;
  std::optional<std::vector<ScenarioMetrics>> scenarios;
};

LoadedReport load_report(const fs::path& path) {
  const fs::path report = fs::is_directory(path) ? path / kReportCsv : path;
  LoadedReport out;
  out.rows = parse_report_csv(read_text_file(report));
  const fs::path scenarios = report.parent_path() / kScenariosCsv;
  if (fs::exists(scenarios)) {
    out.scenarios = parse_scenarios_csv(read_text_file(scenarios));
  }
  return out;
}

}  // namespace

std::vector<fs::path> cmd_synth(const SynthOptions& options) {
  SynthConfig config = options.config ? synth_config_from_json(read_text_file(*options.config)) : SynthConfig{};
  if (options.seed) {
    config.seed = *options.seed;
  }
  config.validate();
  make_dir(options.out);
  return write_dataset(generate(config), options.out);
}

TrainOutcome cmd_train(const TrainOptions& options, std::ostream* progress) {
  const auto started = utc_now();
  const auto wall = std::chrono::steady_clock::now();
  RunConfig run = load_run_config(options.config);
  if (options.seed) {
    run.train.seed = *options.seed;
  }
  if (!options.quantiles.empty()) {
    run.model.quantiles = options.quantiles;
    run.train.quantiles = options.quantiles;
    run.train.loss = LossKind::Pinball;
  }
  if (options.no_climate || options.baseline) {
    run.model = without_climate(std::move(run.model));
  }
  run.model.validate();
  run.train.threads = configured_threads();
  run.train.validate();

  const Dataset dataset = load_dataset(options.data);
  const std::uint64_t dhash = data_hash(options.data);
  const std::string variant = variant_name(options);
  const std::uint64_t model_hash = config_hash(run.model);
  const std::uint64_t train_hash = fnv1a64(to_json(run.train) + to_json(run.split));
  const std::string run_key = variant + hex64(model_hash) + hex64(train_hash) + hex64(dhash);
  const std::string run_id =
      variant + "-s" + std::to_string(run.train.seed) + "-" + hex64(fnv1a64(run_key)).substr(0, 8);
  const fs::path run_dir = options.out / run_id;
  make_dir(run_dir);

  const PreparedSamples data = prepare_samples(dataset, run.model, run.split, run.train.threads);
  write_text_file(run_dir / kSkipFile, data.skipped.to_json() + "\n");

  Checkpoint checkpoint;
  json history = nullptr;
  if (options.baseline) {
    checkpoint = make_baseline_checkpoint(*options.baseline, run.model, run.train.seed);
  } else {
    const TrainedModel trained = fit(run.model, run.train, data, options.verbose ? progress : nullptr);
    checkpoint = make_checkpoint(trained.model, run.train.seed);
    write_text_file(run_dir / kHistoryFile, format_history(trained.history));
    history = kHistoryFile;
  }
  save_checkpoint(checkpoint, run_dir / kCheckpointFile);

  json manifest;
  manifest["run_id"] = run_id;
  manifest["variant"] = variant;
  manifest["seed"] = run.train.seed;
  manifest["hashes"] = {{"model", hex64(model_hash)}, {"train", hex64(train_hash)}, {"data", hex64(dhash)}};
  manifest["timestamps"] = {{"started", started},
                            {"finished", utc_now()},
                            {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count()}};
  manifest["artifacts"] = {{"checkpoint", kCheckpointFile}, {"history", history}, {"skipped", kSkipFile}};
  manifest["data_dir"] = fs::absolute(options.data).lexically_normal().string();
  manifest["features"] = feature_list(run.model, false);
  manifest["climate_features"] = feature_list(run.model, true);
  manifest["split"] = {{"train_fraction", run.split.train_fraction},
                       {"dev_fraction", run.split.dev_fraction},
                       {"train_end_week", data.cuts.train_end},
                       {"dev_end_week", data.cuts.dev_end}};
  manifest["samples"] = {{"train", data.split.train.size()},
                         {"dev", data.split.dev.size()},
                         {"test", data.split.test.size()},
                         {"dropped_at_cuts", data.split.dropped},
                         {"skipped", data.skipped.total()}};
  manifest["config"] = json::parse(to_json(run));
  write_text_file(run_dir / kManifestFile, manifest.dump(2) + "\n");
  return {run_id, run_dir, run_dir / kCheckpointFile};
}

std::vector<fs::path> cmd_evaluate(const EvaluateOptions& options) {
  const Checkpoint checkpoint = load_checkpoint(options.checkpoint);

  // Split placement: an explicit run config, else the manifest written next
  // to the checkpoint, else the defaults.
  SplitConfig split = default_run_config().split;
  if (options.config) {
    const RunConfig run = run_config_from_json(read_text_file(*options.config));
    if (config_hash(run.model) != checkpoint.config_hash) {
      throw Error(ErrorCode::ConfigMismatch, "model config in " + options.config->string() +
                                                 " does not match checkpoint " + options.checkpoint.string());
    }
    split = run.split;
  } else if (const auto manifest = options.checkpoint.parent_path() / kManifestFile; fs::exists(manifest)) {
    const json m = json::parse(read_text_file(manifest), nullptr, false);
    if (!m.is_discarded() && m.contains("split")) {
      split.train_fraction = m["split"].value("train_fraction", split.train_fraction);
      split.dev_fraction = m["split"].value("dev_fraction", split.dev_fraction);
    }
  }

  const Dataset dataset = load_dataset(options.data);
  const std::size_t threads = configured_threads();
  const PreparedSamples data = prepare_samples(dataset, checkpoint.config, split, threads);
  const auto& test = data.split.test;

  std::vector<Forecast> forecasts;
  if (checkpoint.kind == CheckpointKind::LrlSnn) {
    forecasts = predict_batch(model_from_checkpoint(checkpoint), test, threads);
  } else {
    forecasts = baseline_forecasts(baseline_of(checkpoint.kind), dataset, checkpoint.config.target_series(), test,
                                   checkpoint.config.horizon);
  }
  const auto truths = targets_of(test);
  const std::span<const Forecast> fc(forecasts);
  const std::span<const std::vector<double>> tr(truths);

  std::string label = options.dataset;
  if (label.empty()) {
    label = fs::absolute(options.data).lexically_normal().filename().string();
    if (label.empty()) {
      label = fs::absolute(options.data).lexically_normal().parent_path().filename().string();
    }
  }
  const std::vector<ReportRow> rows{{label, model_label(checkpoint), bucketed_report(fc, tr)}};
  make_dir(options.out);
  const std::vector<fs::path> written{options.out / kReportText, options.out / kReportCsv, options.out / kScenariosCsv};
  write_text_file(written[0], format_table(rows));
  write_text_file(written[1], format_report_csv(rows));
  write_text_file(written[2], format_scenarios_csv(scenario_report(fc, tr)));
  return written;
}

std::vector<fs::path> cmd_compare(const CompareOptions& options) {
  const LoadedReport base = load_report(options.base);
  const LoadedReport variant = load_report(options.variant);

  std::map<std::string, const ReportRow*> base_by_dataset;
  for (const auto& row : base.rows) {
    if (!base_by_dataset.emplace(row.dataset, &row).second) {
      throw Error(ErrorCode::KeyMismatch, "base report lists dataset '" + row.dataset + "' more than once");
    }
  }
  std::vector<ComparisonRow> comparison;
  for (const auto& row : variant.rows) {
    const auto it = base_by_dataset.find(row.dataset);
    if (it == base_by_dataset.end()) {
      throw Error(ErrorCode::KeyMismatch, "dataset '" + row.dataset + "' missing from the base report");
    }
    comparison.push_back(error_reduction(it->second->buckets, row.buckets, row.dataset));
  }

  std::optional<WinTieLoss> verdicts;
  if (base.scenarios && variant.scenarios) {
    verdicts = win_tie_loss(*variant.scenarios, *base.scenarios);
  }
  const WinTieLoss* v = verdicts ? &*verdicts : nullptr;
  make_dir(options.out);
  const std::vector<fs::path> written{options.out / "comparison.txt", options.out / "comparison.csv"};
  write_text_file(written[0], format_comparison(comparison, v));
  write_text_file(written[1], format_comparison_csv(comparison, v));
  return written;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-horizon retail demand forecasting with seasonal climate ensembles", "seasoncast"};
  app.require_subcommand(1);

  SynthOptions synth;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--config", synth.config, "Synthetic data config (JSON)");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "Override the generator seed");

  TrainOptions train;
  std::uint64_t train_seed = 0;
  std::string baseline;
  auto* train_cmd = app.add_subcommand("train", "Train a model (or package a baseline) on a dataset");
  train_cmd->add_option("--data", train.data, "Dataset directory")->required();
  train_cmd->add_option("--out", train.out, "Output directory; the run lands in <out>/<run_id>/")->required();
  train_cmd->add_option("--config", train.config, "Run config (JSON with model/train/split sections)");
  auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "Override the training seed");
  train_cmd->add_flag("--no-climate", train.no_climate, "Drop every climate feature (ablation twin)");
  train_cmd->add_option("--baseline", baseline, "Non-learned comparator instead of training")
      ->check(CLI::IsMember({"persistence", "seasonal-naive"}));
  train_cmd->add_option("--quantiles", train.quantiles, "Quantile levels, e.g. 0.1,0.5,0.9 (pinball loss)")
      ->delimiter(',');
  train_cmd->add_flag("-v,--verbose", train.verbose, "Print per-epoch losses to stderr");

  EvaluateOptions evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a checkpoint on the test split");
  eval_cmd->add_option("--checkpoint", evaluate.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--data", evaluate.data, "Dataset directory")->required();
  eval_cmd->add_option("--out", evaluate.out, "Report directory")->required();
  eval_cmd->add_option("--config", evaluate.config, "Run config; must match the checkpoint");
  eval_cmd->add_option("--name", evaluate.dataset, "Dataset label in the report");

  CompareOptions compare;
  auto* cmp_cmd = app.add_subcommand("compare", "Error reduction and win/tie/loss of a variant against a base");
  cmp_cmd->add_option("--base", compare.base, "Base evaluate directory or report.csv")->required();
  cmp_cmd->add_option("--variant", compare.variant, "Variant evaluate directory or report.csv")->required();
  cmp_cmd->add_option("--out", compare.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) {
      if (*synth_seed_opt) synth.seed = synth_seed;
      for (const auto& p : cmd_synth(synth)) out << p.string() << '\n';
    } else if (train_cmd->parsed()) {
      if (*train_seed_opt) train.seed = train_seed;
      if (!baseline.empty()) train.baseline = parse_baseline_kind(baseline);
      if (train.baseline && (train.no_climate || !train.quantiles.empty())) {
        err << "--baseline cannot be combined with --no-climate or --quantiles\n";
        return kExitUsage;
      }
      const auto outcome = cmd_train(train, &err);
      out << outcome.checkpoint.string() << '\n';
    } else if (eval_cmd->parsed()) {
      const auto written = cmd_evaluate(evaluate);
      out << read_text_file(written[0]);
    } else if (cmp_cmd->parsed()) {
      const auto written = cmd_compare(compare);
      out << read_text_file(written[0]);
    }
  } catch (const Error& e) {
    err << "seasoncast: " << e.what() << '\n';
    return e.code() == ErrorCode::NonFiniteLoss ? kExitNumeric : kExitData;
  } catch (const std::exception& e) {
    err << "seasoncast: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace seasoncast::cli
