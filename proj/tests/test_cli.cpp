#include <chrono>
#include <cstdlib>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "seasoncast/checkpoint.hpp"
#include "seasoncast/config_io.hpp"
#include "seasoncast/error.hpp"
#include "seasoncast/pipeline.hpp"
#include "seasoncast_cli/commands.hpp"
#include "support.hpp"

using namespace seasoncast;
using namespace seasoncast::cli;
using doctest::Approx;
using nlohmann::json;

namespace {

constexpr const char* kSmallSynth = R"({"n_stores": 3, "n_products": 2, "n_weeks": 150, "n_members": 10})";
constexpr const char* kTinyRun = R"({"model": {"trunk": [16]}, "train": {"epochs": 2}})";

struct Shell {
  int status = -1;
  std::string output;
};

Shell shell(const std::string& args, const std::filesystem::path& log) {
  const std::string command = std::string(SEASONCAST_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(command.c_str());
  Shell r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.output = read_text_file(log);
  return r;
}

int run_args(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "seasoncast");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text != nullptr) *err_text = err.str();
  return code;
}

// Small synthetic dataset plus a tiny run config shared by the tests below.
struct Workspace {
  test::TempDir dir{"cli"};
  std::filesystem::path data = dir / "data";
  std::filesystem::path run_config = dir / "run.json";

  Workspace() {
    write_text_file(dir / "synth.json", kSmallSynth);
    write_text_file(run_config, kTinyRun);
    cmd_synth({dir / "synth.json", data, 11});
  }

  TrainOutcome train(const std::filesystem::path& out, bool no_climate = false) const {
    TrainOptions o;
    o.data = data;
    o.out = out;
    o.config = run_config;
    o.seed = 3;
    o.no_climate = no_climate;
    return cmd_train(o);
  }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("default synth output loads and trains") {
  test::TempDir dir("cli-default");
  const auto written = cmd_synth({std::nullopt, dir / "data", std::nullopt});
  CHECK(written.size() == 4);
  const Dataset ds = load_dataset(dir / "data");
  CHECK(ds.entities().size() == 200);
  const auto prepared = prepare_samples(ds, desk_config(), default_run_config().split);
  CHECK(!prepared.split.test.empty());
}

TEST_CASE("synth with the same seed writes identical files") {
  test::TempDir dir("cli-synth");
  write_text_file(dir / "synth.json", kSmallSynth);
  cmd_synth({dir / "synth.json", dir / "a", 7});
  cmd_synth({dir / "synth.json", dir / "b", 7});
  for (const char* name : {"series.csv", "ensembles.csv", "climate_truth.csv", "truth.json"}) {
    CHECK(read_text_file(dir / "a" / name) == read_text_file(dir / "b" / name));
  }
  cmd_synth({dir / "synth.json", dir / "c", 8});
  CHECK(read_text_file(dir / "a" / "series.csv") != read_text_file(dir / "c" / "series.csv"));
}

TEST_CASE("missing config is reported with its path") {
  test::TempDir dir("cli-missing");
  const auto missing = (dir / "nope.json").string();
  std::string err;
  CHECK(run_args({"synth", "--config", missing, "--out", (dir / "d").string()}, &err) == kExitData);
  CHECK(err.find(missing) != std::string::npos);
  const auto r = shell("synth --config " + missing + " --out " + (dir / "d").string(), dir / "log.txt");
  CHECK(r.status == kExitData);
  CHECK(r.output.find(missing) != std::string::npos);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_args({}) == kExitUsage);
  CHECK(run_args({"fly"}) == kExitUsage);
  CHECK(run_args({"train", "--out", "x"}) == kExitUsage);
  CHECK(run_args({"train", "--data", "d", "--out", "x", "--baseline", "persistence", "--no-climate"}) == kExitUsage);
  CHECK(run_args({"train", "--data", "d", "--out", "x", "--baseline", "naive"}) == kExitUsage);
}

TEST_CASE("training, evaluation and comparison end to end") {
  Workspace ws;

  const auto begin = std::chrono::steady_clock::now();
  const TrainOutcome climate = ws.train(ws.dir / "runs");
  CHECK(std::chrono::steady_clock::now() - begin < std::chrono::seconds(60));
  CHECK(std::filesystem::exists(climate.checkpoint));
  CHECK(std::filesystem::exists(climate.run_dir / "history.log"));
  CHECK(climate.run_id.rfind("climate-s3-", 0) == 0);

  SUBCASE("no-climate manifest lists no climate features") {
    const TrainOutcome plain = ws.train(ws.dir / "runs", true);
    const json m = json::parse(read_text_file(plain.run_dir / "manifest.json"));
    CHECK(m.at("climate_features").empty());
    CHECK(m.at("features").size() == 3);
    const json mc = json::parse(read_text_file(climate.run_dir / "manifest.json"));
    CHECK(mc.at("climate_features").size() == 8);
    CHECK(plain.run_id != climate.run_id);
  }

  SUBCASE("a rerun reproduces the checkpoint byte for byte") {
    const TrainOutcome again = ws.train(ws.dir / "rerun");
    CHECK(again.run_id == climate.run_id);
    CHECK(read_text_file(again.checkpoint) == read_text_file(climate.checkpoint));
    CHECK(read_text_file(again.run_dir / "history.log") == read_text_file(climate.run_dir / "history.log"));
  }

  SUBCASE("evaluate writes one row per bucket and metric") {
    cmd_evaluate({climate.checkpoint, ws.data, ws.dir / "eval", std::nullopt, ""});
    const std::string csv = read_text_file(ws.dir / "eval" / "report.csv");
    const auto rows = parse_report_csv(csv);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].model == "LRL-SNN+Climate");
    CHECK(rows[0].dataset == "data");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 1 * 4 * 3);

    // Same numbers as the library path.
    const Checkpoint ckpt = load_checkpoint(climate.checkpoint);
    const auto prepared = prepare_samples(load_dataset(ws.data), ckpt.config, default_run_config().split);
    const auto library = evaluate_model(model_from_checkpoint(ckpt), prepared.split.test);
    for (std::size_t b = 0; b < 4; ++b) {
      CHECK(rows[0].buckets[b].rmse == library[b].rmse);
      CHECK(rows[0].buckets[b].mape == library[b].mape);
      CHECK(rows[0].buckets[b].mae == library[b].mae);
    }

    SUBCASE("comparing a report with itself") {
      cmd_compare({ws.dir / "eval", ws.dir / "eval", ws.dir / "cmp"});
      const std::string cmp = read_text_file(ws.dir / "cmp" / "comparison.csv");
      const std::string text = read_text_file(ws.dir / "cmp" / "comparison.txt");
      CHECK(cmp.find("reduction_pct,data,mape,0\n") != std::string::npos);
      CHECK(cmp.find("reduction_pct,data,rmse,0\n") != std::string::npos);
      CHECK(text.find("Better or equal: 100.00%") != std::string::npos);
    }

    SUBCASE("a malformed report names the bad column") {
      write_text_file(ws.dir / "bad.csv", "dataset,model,bucket,metric,valu\nd,m,Overall,rmse,1\n");
      std::string err;
      CHECK(run_args({"compare", "--base", (ws.dir / "bad.csv").string(), "--variant",
                      (ws.dir / "eval").string(), "--out", (ws.dir / "cmp2").string()},
                     &err) == kExitData);
      CHECK(err.find("value") != std::string::npos);
    }
  }

  SUBCASE("evaluate rejects a config that does not match the checkpoint") {
    write_text_file(ws.dir / "other.json", R"({"model": {"trunk": [8]}})");
    std::string err;
    CHECK(run_args({"evaluate", "--checkpoint", climate.checkpoint.string(), "--data", ws.data.string(), "--out",
                    (ws.dir / "eval-bad").string(), "--config", (ws.dir / "other.json").string()},
                   &err) == kExitData);
    CHECK(err.find("other.json") != std::string::npos);
  }

  SUBCASE("baselines evaluate without training") {
    TrainOptions o;
    o.data = ws.data;
    o.out = ws.dir / "runs";
    o.config = ws.run_config;
    o.baseline = BaselineKind::Persistence;
    const auto base = cmd_train(o);
    CHECK(!std::filesystem::exists(base.run_dir / "history.log"));
    cmd_evaluate({base.checkpoint, ws.data, ws.dir / "eval-p", std::nullopt, "synthetic"});
    const auto rows = parse_report_csv(read_text_file(ws.dir / "eval-p" / "report.csv"));
    CHECK(rows[0].model == "Persistence");
    CHECK(rows[0].dataset == "synthetic");
  }
}

TEST_CASE("the binary runs a full pipeline") {
  Workspace ws;
  const auto log = ws.dir / "log.txt";
  const auto runs = (ws.dir / "runs").string();
  auto r = shell("train --data " + ws.data.string() + " --out " + runs + " --config " + ws.run_config.string() +
                     " --seed 5 --no-climate",
                 log);
  REQUIRE(r.status == kExitOk);
  CHECK(r.output.find("noclimate-s5-") != std::string::npos);
  std::filesystem::path ckpt;
  for (const auto& e : std::filesystem::directory_iterator(ws.dir / "runs")) ckpt = e.path() / "best.ckpt";
  r = shell("evaluate --checkpoint " + ckpt.string() + " --data " + ws.data.string() + " --out " +
                (ws.dir / "eval").string(),
            log);
  CHECK(r.status == kExitOk);
  CHECK(read_text_file(ws.dir / "eval" / "report.txt").find("LRL-SNN ") != std::string::npos);
}

TEST_CASE("a diverging run exits with the numeric code") {
  Workspace ws;
  write_text_file(ws.dir / "explode.json",
                  R"({"model": {"trunk": [16]}, "train": {"epochs": 3, "learning_rate": 1e300}})");
  std::string err;
  const int code = run_args({"train", "--data", ws.data.string(), "--out", (ws.dir / "runs").string(), "--config",
                             (ws.dir / "explode.json").string()},
                            &err);
  CHECK(code == kExitNumeric);
  CHECK(err.find("non-finite") != std::string::npos);
}

}  // TEST_SUITE
