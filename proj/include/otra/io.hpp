#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otra/lab.hpp"
#include "otra/ot.hpp"
#include "otra/reward.hpp"

namespace otra {

/// Shortest round-trip decimal rendering (printf %.17g); the parse side
/// uses std::from_chars, so write followed by read is bit-exact.
std::string format_double(double value);
double parse_double(const std::string& text);

/// Writes via a sibling temp file and an atomic rename, so readers never
/// observe a partially written file.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// CSV codecs. Every writer emits exactly the documented header and every
// reader rejects a wrong header or a malformed row by throwing ConfigError
// with the file path and line number.

/// Header: state,action,value
void write_reward_csv(const std::string& path, const RewardTable& reward);
RewardTable read_reward_csv(const std::string& path,
                            double bound = kDefaultRewardBound);

/// Header: reward,state,action,value (reward = 0-based index in the set)
void write_reward_set_csv(const std::string& path,
                          const std::vector<RewardTable>& rewards);
std::vector<RewardTable> read_reward_set_csv(
    const std::string& path, double bound = kDefaultRewardBound);

/// Header: index,weight
void write_measure_csv(const std::string& path, const DiscreteMeasure& mu);
DiscreteMeasure read_measure_csv(const std::string& path);

/// Header: row,col,value
void write_metric_csv(const std::string& path, const GroundMetric& metric);
GroundMetric read_metric_csv(const std::string& path);

/// Header: kind,variable,seed,metric,value,converged,wall_ms
std::string records_to_csv(const std::vector<ResultRecord>& records);
void write_records_csv(const std::string& path,
                       const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_records_csv(const std::string& path);

/// FNV-1a 64-bit digest of a byte string, rendered "fnv1a64:" + 16 hex.
std::string fnv1a64(const std::string& bytes);

/// Digest of a records CSV with the wall_ms column dropped from every line
/// (header included), so repeated runs of a deterministic experiment agree.
std::string records_digest(const std::string& csv_content);

struct OutputDigest {
  std::string filename;
  std::string digest;
};

/// Sidecar of one experiment run. `config_json` holds the canonical config
/// snapshot; timestamps are UTC ISO 8601.
struct RunManifest {
  std::string tool_version;
  std::uint64_t master_seed = 0;
  std::string started_at;
  std::string finished_at;
  std::string config_json;
  std::vector<OutputDigest> outputs;
};

std::string utc_timestamp();
void write_manifest(const RunManifest& manifest, const std::string& path);
RunManifest read_manifest(const std::string& path);

/// Recomputes the digest of every listed output (paths resolved relative
/// to the manifest's directory) and compares. Returns the mismatching
/// filenames, empty on success.
std::vector<std::string> verify_manifest(const std::string& manifest_path);

/// Strict JSON config codec: unknown or ill-typed keys raise ConfigError
/// naming the key. The serializer emits every field, so a round trip is
/// lossless and the output is canonical (sorted keys).
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& config);

}  // namespace otra
