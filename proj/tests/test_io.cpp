#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "otra/common.hpp"
#include "otra/io.hpp"
#include "otra/lab.hpp"
#include "otra/mdp.hpp"
#include "otra/ot.hpp"
#include "otra/reward.hpp"

using namespace otra;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "otra_io_tests";
  fs::create_directories(dir);
  return dir;
}

std::string scratch(const std::string& name) {
  return (scratch_dir() / name).string();
}

}  // namespace

TEST_CASE("doubles survive a text round trip bit-exactly") {
  const std::vector<double> values = {0.0,
                                      -0.0,
                                      1.0,
                                      -1.5,
                                      1.0 / 3.0,
                                      6.02214076e23,
                                      5e-324,
                                      std::numeric_limits<double>::max(),
                                      std::numeric_limits<double>::infinity(),
                                      -std::numeric_limits<double>::infinity()};
  for (double v : values) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
  CHECK_THROWS_AS(parse_double("not-a-number"), std::exception);
  CHECK_THROWS_AS(parse_double("1.5trailing"), std::exception);
}

TEST_CASE("atomic write creates parent directories and full content") {
  const std::string path = scratch("nested/dir/file.txt");
  fs::remove_all(scratch_dir() / "nested");
  write_file_atomic(path, "line\n");
  CHECK(read_file(path) == "line\n");
  write_file_atomic(path, "replaced\n");
  CHECK(read_file(path) == "replaced\n");
  CHECK_THROWS_AS(read_file(scratch("missing.txt")), std::exception);
}

TEST_CASE("reward csv round trip and rejection of malformed rows") {
  RewardTable reward = RewardTable::zeros(3, 5);
  Rng rng(17);
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 5; ++a) reward.values(s, a) = rng.uniform(-5.0, 5.0);
  }
  const std::string path = scratch("reward.csv");
  write_reward_csv(path, reward);
  const RewardTable loaded = read_reward_csv(path);
  CHECK((loaded.values - reward.values).cwiseAbs().maxCoeff() == 0.0);

  write_file_atomic(scratch("bad_header.csv"), "a,b,c\n0,0,1\n");
  CHECK_THROWS_AS(read_reward_csv(scratch("bad_header.csv")), ConfigError);
  write_file_atomic(scratch("bad_row.csv"),
                    "state,action,value\n0,0,1\n0,oops,2\n");
  try {
    read_reward_csv(scratch("bad_row.csv"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    // The message carries the path and the 1-based line number.
    CHECK(std::string(err.what()).find("bad_row.csv:3") != std::string::npos);
  }
}

TEST_CASE("reward set csv keeps set order and indices") {
  std::vector<RewardTable> rewards;
  Rng rng(29);
  for (int i = 0; i < 3; ++i) {
    RewardTable r = RewardTable::zeros(2, 5);
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 5; ++a) r.values(s, a) = rng.uniform(-1.0, 1.0);
    }
    rewards.push_back(std::move(r));
  }
  const std::string path = scratch("set.csv");
  write_reward_set_csv(path, rewards);
  const auto loaded = read_reward_set_csv(path);
  REQUIRE(loaded.size() == rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    CHECK((loaded[i].values - rewards[i].values).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("measure csv demands dense 0-based indices") {
  const DiscreteMeasure mu =
      DiscreteMeasure::normalized(Vector::LinSpaced(6, 1.0, 6.0));
  const std::string path = scratch("measure.csv");
  write_measure_csv(path, mu);
  const DiscreteMeasure loaded = read_measure_csv(path);
  CHECK((loaded.weights - mu.weights).cwiseAbs().maxCoeff() == 0.0);

  write_file_atomic(scratch("gap.csv"), "index,weight\n0,0.5\n2,0.5\n");
  CHECK_THROWS_AS(read_measure_csv(scratch("gap.csv")), ConfigError);
}

TEST_CASE("metric csv rejects ragged matrices") {
  const TabularMdp mdp = build_gridworld(2, 1, 0.0, 0.9, {{1, 0}});
  const GroundMetric metric = ground_metric_gridworld(mdp, 0.5);
  const std::string path = scratch("metric.csv");
  write_metric_csv(path, metric);
  const GroundMetric loaded = read_metric_csv(path);
  CHECK((loaded.costs - metric.costs).cwiseAbs().maxCoeff() == 0.0);

  write_file_atomic(scratch("ragged.csv"), "row,col,value\n0,0,0\n0,1,1\n");
  CHECK_THROWS_AS(read_metric_csv(scratch("ragged.csv")), ConfigError);
}

TEST_CASE("records csv emits the exact header even when empty") {
  CHECK(records_to_csv({}) ==
        "kind,variable,seed,metric,value,converged,wall_ms\n");
  const std::vector<ResultRecord> one = {
      {"converge", 8.0, 0, "wp_to_true", 0.25, true, 12.5}};
  // One record -> exactly two lines.
  const std::string csv = records_to_csv(one);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("records csv round trip preserves flags and nan values") {
  std::vector<ResultRecord> records = {
      {"converge", 8.0, 0, "wp_to_true", 0.25, true, 12.5},
      {"converge", 8.0, 1, "wp_to_true", std::nan(""), false, 3.25},
      {"noise", 0.1, -1, "envelope", 1.75, true, 0.0},
  };
  const std::string path = scratch("records.csv");
  write_records_csv(path, records);
  const auto loaded = read_records_csv(path);
  REQUIRE(loaded.size() == records.size());
  CHECK(loaded[0].value == 0.25);
  CHECK(loaded[0].converged);
  CHECK(std::isnan(loaded[1].value));
  CHECK_FALSE(loaded[1].converged);
  CHECK(loaded[2].seed == -1);
  CHECK(loaded[2].kind == "noise");
}

TEST_CASE("records digest ignores wall time but nothing else") {
  const std::vector<ResultRecord> records = {
      {"converge", 8.0, 0, "wp_to_true", 0.25, true, 12.5}};
  std::vector<ResultRecord> slower = records;
  slower[0].wall_ms = 9000.0;
  std::vector<ResultRecord> different = records;
  different[0].value = 0.26;
  const std::string base = records_to_csv(records);
  CHECK(records_digest(base) == records_digest(records_to_csv(slower)));
  CHECK(records_digest(base) != records_digest(records_to_csv(different)));
  CHECK(records_digest(base).rfind("fnv1a64:", 0) == 0);
}

TEST_CASE("fnv digest matches the published test vector") {
  // FNV-1a 64-bit of "a" is 0xaf63dc4c8601ec8c.
  CHECK(fnv1a64("a") == "fnv1a64:af63dc4c8601ec8c");
  CHECK(fnv1a64("") == "fnv1a64:cbf29ce484222325");
}

TEST_CASE("manifest write, read, verify, and tamper detection") {
  const fs::path dir = scratch_dir() / "run";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<ResultRecord> records = {
      {"converge", 8.0, 0, "wp_to_true", 0.25, true, 12.5}};
  const std::string records_path = (dir / "records.csv").string();
  write_records_csv(records_path, records);

  ExperimentConfig config;
  config.kind = ExperimentKind::kConverge;
  config.grid_sizes = {{2, 2}};
  config.trajectory_counts = {2};
  config.seeds = {0};

  RunManifest manifest;
  manifest.tool_version = kVersion;
  manifest.master_seed = config.master_seed;
  manifest.started_at = utc_timestamp();
  manifest.finished_at = utc_timestamp();
  manifest.config_json = experiment_config_to_json(config);
  manifest.outputs.push_back(
      {"records.csv", records_digest(read_file(records_path))});
  const std::string manifest_path = (dir / "manifest.json").string();
  write_manifest(manifest, manifest_path);

  const RunManifest loaded = read_manifest(manifest_path);
  CHECK(loaded.tool_version == manifest.tool_version);
  CHECK(loaded.outputs.size() == 1);
  CHECK(loaded.outputs[0].digest == manifest.outputs[0].digest);
  // Config snapshot inside the manifest parses back to the same config.
  const ExperimentConfig recovered = parse_experiment_config(loaded.config_json);
  CHECK(recovered.kind == ExperimentKind::kConverge);
  CHECK(recovered.trajectory_counts == config.trajectory_counts);

  CHECK(verify_manifest(manifest_path).empty());
  // Tamper with the records file: verification must name it.
  std::vector<ResultRecord> tampered = records;
  tampered[0].value = 0.5;
  write_records_csv(records_path, tampered);
  const auto bad = verify_manifest(manifest_path);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0] == "records.csv");
}

TEST_CASE("config json is strict about keys and types") {
  const std::string good = R"({
    "kind": "converge",
    "grid_sizes": [[2, 2]],
    "trajectory_counts": [2, 6],
    "seeds": [0, 1]
  })";
  const ExperimentConfig config = parse_experiment_config(good);
  CHECK(config.kind == ExperimentKind::kConverge);
  CHECK(config.trajectory_counts == std::vector<int>{2, 6});
  // Omitted keys fall back to defaults.
  CHECK(config.goal_bonus == 7.0);
  CHECK(config.set_size == 15);

  CHECK_THROWS_AS(parse_experiment_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("[]"), ConfigError);
  // Unknown key, anywhere, is an error that names the key.
  try {
    parse_experiment_config(R"({"kind": "converge", "grid_sizes": [[2,2]],
      "trajectory_counts": [2], "seeds": [0], "typo_key": 1})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find("typo_key") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_experiment_config(
                      R"({"kind": "converge", "grid_sizes": [[2,2]],
      "trajectory_counts": [2], "seeds": [0], "ot": {"order_q": 2}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(
                      R"({"kind": "converge", "grid_sizes": [[2,2]],
      "trajectory_counts": ["many"], "seeds": [0]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(
                      R"({"kind": "converge", "grid_sizes": [[2,2]],
      "trajectory_counts": [2], "seeds": [0], "goal_bonus": -1.0})"),
                  ConfigError);
  // Validation runs at the end: structurally fine, semantically wrong.
  CHECK_THROWS_AS(parse_experiment_config(
                      R"({"kind": "converge", "grid_sizes": [[2,2]],
      "trajectory_counts": [6, 2], "seeds": [0]})"),
                  ConfigError);
}

TEST_CASE("config serialization is a lossless canonical round trip") {
  ExperimentConfig config;
  config.kind = ExperimentKind::kNoise;
  config.grid_sizes = {{3, 3}};
  config.trajectory_counts = {16};
  config.noise_levels = {0.0, 0.05, 0.2};
  config.seeds = {4, 5, 6};
  config.master_seed = 99;
  config.slip_probability = 0.2;
  config.goal_bonus = 3.5;
  config.method = GenerationMethod::kPerturbAccept;
  config.goal_cells = {{0, 2}};
  config.irl.iterations = 123;
  config.ot.reg_epsilon = 0.01;
  const std::string text = experiment_config_to_json(config);
  const ExperimentConfig back = parse_experiment_config(text);
  CHECK(back.kind == config.kind);
  CHECK(back.noise_levels == config.noise_levels);
  CHECK(back.seeds == config.seeds);
  CHECK(back.master_seed == config.master_seed);
  CHECK(back.goal_bonus == config.goal_bonus);
  CHECK(back.method == GenerationMethod::kPerturbAccept);
  CHECK(back.goal_cells == config.goal_cells);
  CHECK(back.irl.iterations == 123);
  CHECK(back.ot.reg_epsilon == 0.01);
  // Canonical: serializing the parse reproduces the text exactly.
  CHECK(experiment_config_to_json(back) == text);
}
