#include "otra/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "otra/common.hpp"

namespace otra {

namespace {

using nlohmann::json;

[[noreturn]] void fail_at(const std::string& path, std::size_t line,
                          const std::string& message) {
  throw ConfigError(path + ":" + std::to_string(line) + ": " + message);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::vector<std::string> read_lines(const std::string& content) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

double parse_double_at(const std::string& path, std::size_t line,
                       const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc() || result.ptr != last) {
    fail_at(path, line, "malformed number \"" + text + "\"");
  }
  return value;
}

long long parse_int_at(const std::string& path, std::size_t line,
                       const std::string& text) {
  long long value = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc() || result.ptr != last) {
    fail_at(path, line, "malformed integer \"" + text + "\"");
  }
  return value;
}

void expect_header(const std::string& path,
                   const std::vector<std::string>& lines,
                   const std::string& header) {
  if (lines.empty()) fail_at(path, 1, "empty file");
  if (lines[0] != header) {
    fail_at(path, 1, "expected header \"" + header + "\", got \"" + lines[0] +
                          "\"");
  }
}

void expect_fields(const std::string& path, std::size_t line,
                   const std::vector<std::string>& fields, std::size_t count) {
  if (fields.size() != count) {
    fail_at(path, line,
            "expected " + std::to_string(count) + " fields, got " +
                std::to_string(fields.size()));
  }
}

constexpr const char* kRecordsHeader =
    "kind,variable,seed,metric,value,converged,wall_ms";

/// Records files are digested with the wall_ms column dropped; everything
/// else byte for byte.
std::string digest_for_content(const std::string& content) {
  const std::string header(kRecordsHeader);
  if (content.compare(0, header.size(), header) == 0) {
    return records_digest(content);
  }
  return fnv1a64(content);
}

std::string method_to_string(GenerationMethod method) {
  switch (method) {
    case GenerationMethod::kShaping: return "shaping";
    case GenerationMethod::kPerturbAccept: return "perturb_accept";
  }
  throw ConfigError("unknown generation method");
}

GenerationMethod method_from_string(const std::string& name) {
  if (name == "shaping") return GenerationMethod::kShaping;
  if (name == "perturb_accept") return GenerationMethod::kPerturbAccept;
  throw ConfigError("config key \"method\": unknown value \"" + name + "\"");
}

[[noreturn]] void bad_key(const std::string& key, const std::string& reason) {
  throw ConfigError("config key \"" + key + "\": " + reason);
}

double take_double(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) bad_key(key, "expected a number");
  return v.get<double>();
}

int take_int(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) bad_key(key, "expected an integer");
  return v.get<int>();
}

void check_keys(const json& j, const std::string& scope,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        });
    if (!known) {
      const std::string qualified =
          scope.empty() ? item.key() : scope + "." + item.key();
      bad_key(qualified, "unknown key");
    }
  }
}

std::vector<std::pair<int, int>> take_cell_list(const json& j,
                                                const std::string& key) {
  std::vector<std::pair<int, int>> cells;
  if (!j.contains(key)) return cells;
  const json& v = j.at(key);
  if (!v.is_array()) bad_key(key, "expected an array of [x, y] pairs");
  for (const json& item : v) {
    if (!item.is_array() || item.size() != 2 ||
        !item[0].is_number_integer() || !item[1].is_number_integer()) {
      bad_key(key, "expected an array of [x, y] pairs");
    }
    cells.emplace_back(item[0].get<int>(), item[1].get<int>());
  }
  return cells;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc() || result.ptr != last) {
    throw ConfigError("malformed number \"" + text + "\"");
  }
  return value;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path temp = target.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + temp.string());
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ConfigError("write failed: " + temp.string());
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    throw ConfigError("rename failed: " + temp.string() + " -> " + path +
                      " (" + ec.message() + ")");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_reward_csv(const std::string& path, const RewardTable& reward) {
  std::string out = "state,action,value\n";
  for (int s = 0; s < reward.num_states(); ++s) {
    for (int a = 0; a < reward.num_actions(); ++a) {
      out += std::to_string(s) + "," + std::to_string(a) + "," +
             format_double(reward.values(s, a)) + "\n";
    }
  }
  write_file_atomic(path, out);
}

RewardTable read_reward_csv(const std::string& path, double bound) {
  const auto lines = read_lines(read_file(path));
  expect_header(path, lines, "state,action,value");
  int max_state = -1;
  int max_action = -1;
  std::vector<std::tuple<int, int, double>> entries;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i]);
    expect_fields(path, i + 1, fields, 3);
    const int s = static_cast<int>(parse_int_at(path, i + 1, fields[0]));
    const int a = static_cast<int>(parse_int_at(path, i + 1, fields[1]));
    const double v = parse_double_at(path, i + 1, fields[2]);
    if (s < 0 || a < 0) fail_at(path, i + 1, "negative state or action");
    max_state = std::max(max_state, s);
    max_action = std::max(max_action, a);
    entries.emplace_back(s, a, v);
  }
  if (entries.empty()) fail_at(path, 1, "no reward entries");
  RewardTable reward = RewardTable::zeros(max_state + 1, max_action + 1);
  reward.bound = bound;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
          max_state + 1, max_action + 1, false);
  for (const auto& [s, a, v] : entries) {
    if (seen(s, a)) {
      fail_at(path, 1,
              "duplicate entry for state " + std::to_string(s) + " action " +
                  std::to_string(a));
    }
    seen(s, a) = true;
    reward.values(s, a) = v;
  }
  if (!seen.all()) fail_at(path, 1, "missing state-action entries");
  reward.validate();
  return reward;
}

void write_reward_set_csv(const std::string& path,
                          const std::vector<RewardTable>& rewards) {
  std::string out = "reward,state,action,value\n";
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    const RewardTable& r = rewards[k];
    for (int s = 0; s < r.num_states(); ++s) {
      for (int a = 0; a < r.num_actions(); ++a) {
        out += std::to_string(k) + "," + std::to_string(s) + "," +
               std::to_string(a) + "," + format_double(r.values(s, a)) + "\n";
      }
    }
  }
  write_file_atomic(path, out);
}

std::vector<RewardTable> read_reward_set_csv(const std::string& path,
                                             double bound) {
  const auto lines = read_lines(read_file(path));
  expect_header(path, lines, "reward,state,action,value");
  std::vector<std::vector<std::tuple<int, int, double>>> groups;
  int max_state = -1;
  int max_action = -1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i]);
    expect_fields(path, i + 1, fields, 4);
    const int k = static_cast<int>(parse_int_at(path, i + 1, fields[0]));
    const int s = static_cast<int>(parse_int_at(path, i + 1, fields[1]));
    const int a = static_cast<int>(parse_int_at(path, i + 1, fields[2]));
    const double v = parse_double_at(path, i + 1, fields[3]);
    if (k < 0 || s < 0 || a < 0) fail_at(path, i + 1, "negative index");
    if (static_cast<std::size_t>(k) >= groups.size()) {
      groups.resize(static_cast<std::size_t>(k) + 1);
    }
    groups[static_cast<std::size_t>(k)].emplace_back(s, a, v);
    max_state = std::max(max_state, s);
    max_action = std::max(max_action, a);
  }
  if (groups.empty()) fail_at(path, 1, "no reward entries");
  std::vector<RewardTable> rewards;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].empty()) {
      fail_at(path, 1, "missing entries for reward " + std::to_string(k));
    }
    RewardTable r = RewardTable::zeros(max_state + 1, max_action + 1);
    r.bound = bound;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
            max_state + 1, max_action + 1, false);
    for (const auto& [s, a, v] : groups[k]) {
      if (seen(s, a)) {
        fail_at(path, 1, "duplicate entry in reward " + std::to_string(k));
      }
      seen(s, a) = true;
      r.values(s, a) = v;
    }
    if (!seen.all()) {
      fail_at(path, 1, "missing entries for reward " + std::to_string(k));
    }
    r.validate();
    rewards.push_back(std::move(r));
  }
  return rewards;
}

void write_measure_csv(const std::string& path, const DiscreteMeasure& mu) {
  std::string out = "index,weight\n";
  for (Eigen::Index i = 0; i < mu.weights.size(); ++i) {
    out += std::to_string(i) + "," + format_double(mu.weights(i)) + "\n";
  }
  write_file_atomic(path, out);
}

DiscreteMeasure read_measure_csv(const std::string& path) {
  const auto lines = read_lines(read_file(path));
  expect_header(path, lines, "index,weight");
  if (lines.size() < 2) fail_at(path, 1, "no weights");
  Vector weights(static_cast<Eigen::Index>(lines.size() - 1));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i]);
    expect_fields(path, i + 1, fields, 2);
    const long long index = parse_int_at(path, i + 1, fields[0]);
    if (index != static_cast<long long>(i - 1)) {
      fail_at(path, i + 1, "indices must be 0-based and consecutive");
    }
    weights(static_cast<Eigen::Index>(i - 1)) =
        parse_double_at(path, i + 1, fields[1]);
  }
  DiscreteMeasure mu{weights};
  mu.validate();
  return mu;
}

void write_metric_csv(const std::string& path, const GroundMetric& metric) {
  std::string out = "row,col,value\n";
  for (Eigen::Index i = 0; i < metric.costs.rows(); ++i) {
    for (Eigen::Index j = 0; j < metric.costs.cols(); ++j) {
      out += std::to_string(i) + "," + std::to_string(j) + "," +
             format_double(metric.costs(i, j)) + "\n";
    }
  }
  write_file_atomic(path, out);
}

GroundMetric read_metric_csv(const std::string& path) {
  const auto lines = read_lines(read_file(path));
  expect_header(path, lines, "row,col,value");
  long long max_index = -1;
  std::vector<std::tuple<long long, long long, double>> entries;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i]);
    expect_fields(path, i + 1, fields, 3);
    const long long r = parse_int_at(path, i + 1, fields[0]);
    const long long c = parse_int_at(path, i + 1, fields[1]);
    const double v = parse_double_at(path, i + 1, fields[2]);
    if (r < 0 || c < 0) fail_at(path, i + 1, "negative index");
    max_index = std::max({max_index, r, c});
    entries.emplace_back(r, c, v);
  }
  if (entries.empty()) fail_at(path, 1, "no entries");
  const Eigen::Index n = static_cast<Eigen::Index>(max_index + 1);
  if (entries.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    fail_at(path, 1, "expected a dense square matrix");
  }
  GroundMetric metric;
  metric.costs = Matrix::Constant(n, n, -1.0);
  for (const auto& [r, c, v] : entries) {
    metric.costs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
        v;
  }
  metric.validate();
  return metric;
}

std::string records_to_csv(const std::vector<ResultRecord>& records) {
  std::string out = std::string(kRecordsHeader) + "\n";
  for (const ResultRecord& r : records) {
    out += r.kind + "," + format_double(r.variable) + "," +
           std::to_string(r.seed) + "," + r.metric + "," +
           format_double(r.value) + "," + (r.converged ? "true" : "false") +
           "," + format_double(r.wall_ms) + "\n";
  }
  return out;
}

void write_records_csv(const std::string& path,
                       const std::vector<ResultRecord>& records) {
  write_file_atomic(path, records_to_csv(records));
}

std::vector<ResultRecord> read_records_csv(const std::string& path) {
  const auto lines = read_lines(read_file(path));
  expect_header(path, lines, kRecordsHeader);
  std::vector<ResultRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i]);
    expect_fields(path, i + 1, fields, 7);
    ResultRecord r;
    r.kind = fields[0];
    r.variable = parse_double_at(path, i + 1, fields[1]);
    r.seed = parse_int_at(path, i + 1, fields[2]);
    r.metric = fields[3];
    r.value = parse_double_at(path, i + 1, fields[4]);
    if (fields[5] == "true") {
      r.converged = true;
    } else if (fields[5] == "false") {
      r.converged = false;
    } else {
      fail_at(path, i + 1, "converged must be true or false");
    }
    r.wall_ms = parse_double_at(path, i + 1, fields[6]);
    records.push_back(std::move(r));
  }
  return records;
}

std::string fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    hash ^= static_cast<std::uint64_t>(c);
    hash *= 1099511628211ULL;
  }
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "fnv1a64:%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

std::string records_digest(const std::string& csv_content) {
  std::string stripped;
  stripped.reserve(csv_content.size());
  for (const std::string& line : read_lines(csv_content)) {
    const std::size_t last_comma = line.rfind(',');
    stripped += (last_comma == std::string::npos)
                    ? line
                    : line.substr(0, last_comma);
    stripped += '\n';
  }
  return fnv1a64(stripped);
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buffer;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  json j;
  j["tool_version"] = manifest.tool_version;
  j["master_seed"] = manifest.master_seed;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["config"] = json::parse(manifest.config_json);
  json outputs = json::array();
  for (const OutputDigest& o : manifest.outputs) {
    outputs.push_back({{"filename", o.filename}, {"digest", o.digest}});
  }
  j["outputs"] = outputs;
  write_file_atomic(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& err) {
    throw ConfigError(path + ": " + err.what());
  }
  RunManifest manifest;
  try {
    manifest.tool_version = j.at("tool_version").get<std::string>();
    manifest.master_seed = j.at("master_seed").get<std::uint64_t>();
    manifest.started_at = j.at("started_at").get<std::string>();
    manifest.finished_at = j.at("finished_at").get<std::string>();
    manifest.config_json = j.at("config").dump(2);
    for (const json& o : j.at("outputs")) {
      manifest.outputs.push_back({o.at("filename").get<std::string>(),
                                  o.at("digest").get<std::string>()});
    }
  } catch (const json::exception& err) {
    throw ConfigError(path + ": " + err.what());
  }
  return manifest;
}

std::vector<std::string> verify_manifest(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  const RunManifest manifest = read_manifest(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<std::string> mismatches;
  for (const OutputDigest& o : manifest.outputs) {
    const fs::path target = dir / o.filename;
    std::string digest;
    try {
      digest = digest_for_content(read_file(target.string()));
    } catch (const ConfigError&) {
      mismatches.push_back(o.filename);
      continue;
    }
    if (digest != o.digest) mismatches.push_back(o.filename);
  }
  return mismatches;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  check_keys(j, "",
             {"kind", "grid_sizes", "trajectory_counts", "noise_levels",
              "set_size", "seeds", "master_seed", "slip_probability",
              "discount", "ot", "irl", "temperature", "noise_scale", "method",
              "action_penalty", "goal_bonus", "goal_cells"});

  ExperimentConfig config;
  if (!j.contains("kind")) bad_key("kind", "required");
  if (!j.at("kind").is_string()) bad_key("kind", "expected a string");
  config.kind = experiment_kind_from_string(j.at("kind").get<std::string>());

  if (j.contains("grid_sizes")) {
    const json& v = j.at("grid_sizes");
    if (!v.is_array()) {
      bad_key("grid_sizes", "expected an array of [width, height] pairs");
    }
    config.grid_sizes.clear();
    for (const json& item : v) {
      if (!item.is_array() || item.size() != 2 ||
          !item[0].is_number_integer() || !item[1].is_number_integer()) {
        bad_key("grid_sizes", "expected an array of [width, height] pairs");
      }
      config.grid_sizes.push_back({item[0].get<int>(), item[1].get<int>()});
    }
  }
  if (j.contains("trajectory_counts")) {
    const json& v = j.at("trajectory_counts");
    if (!v.is_array()) bad_key("trajectory_counts", "expected an array");
    config.trajectory_counts.clear();
    for (const json& item : v) {
      if (!item.is_number_integer()) {
        bad_key("trajectory_counts", "expected integers");
      }
      config.trajectory_counts.push_back(item.get<int>());
    }
  }
  if (j.contains("noise_levels")) {
    const json& v = j.at("noise_levels");
    if (!v.is_array()) bad_key("noise_levels", "expected an array");
    config.noise_levels.clear();
    for (const json& item : v) {
      if (!item.is_number()) bad_key("noise_levels", "expected numbers");
      config.noise_levels.push_back(item.get<double>());
    }
  }
  config.set_size = take_int(j, "set_size", config.set_size);
  if (j.contains("seeds")) {
    const json& v = j.at("seeds");
    if (!v.is_array()) bad_key("seeds", "expected an array");
    config.seeds.clear();
    for (const json& item : v) {
      if (!item.is_number_integer()) bad_key("seeds", "expected integers");
      config.seeds.push_back(item.get<long long>());
    }
  }
  if (j.contains("master_seed")) {
    const json& v = j.at("master_seed");
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
      bad_key("master_seed", "expected a nonnegative integer");
    }
    config.master_seed = v.get<std::uint64_t>();
  }
  config.slip_probability =
      take_double(j, "slip_probability", config.slip_probability);
  config.discount = take_double(j, "discount", config.discount);
  if (j.contains("ot")) {
    const json& v = j.at("ot");
    if (!v.is_object()) bad_key("ot", "expected an object");
    check_keys(v, "ot",
               {"order_p", "reg_epsilon", "max_iterations",
                "convergence_tol"});
    config.ot.order_p = take_double(v, "order_p", config.ot.order_p);
    config.ot.reg_epsilon =
        take_double(v, "reg_epsilon", config.ot.reg_epsilon);
    config.ot.max_iterations =
        take_int(v, "max_iterations", config.ot.max_iterations);
    config.ot.convergence_tol =
        take_double(v, "convergence_tol", config.ot.convergence_tol);
  }
  if (j.contains("irl")) {
    const json& v = j.at("irl");
    if (!v.is_object()) bad_key("irl", "expected an object");
    check_keys(v, "irl",
               {"learning_rate", "iterations", "l2_penalty",
                "soft_vi_tolerance", "horizon"});
    config.irl.learning_rate =
        take_double(v, "learning_rate", config.irl.learning_rate);
    config.irl.iterations = take_int(v, "iterations", config.irl.iterations);
    config.irl.l2_penalty =
        take_double(v, "l2_penalty", config.irl.l2_penalty);
    config.irl.soft_vi_tolerance =
        take_double(v, "soft_vi_tolerance", config.irl.soft_vi_tolerance);
    config.irl.horizon = take_int(v, "horizon", config.irl.horizon);
  }
  config.temperature = take_double(j, "temperature", config.temperature);
  config.noise_scale = take_double(j, "noise_scale", config.noise_scale);
  if (j.contains("method")) {
    if (!j.at("method").is_string()) bad_key("method", "expected a string");
    config.method = method_from_string(j.at("method").get<std::string>());
  }
  config.action_penalty =
      take_double(j, "action_penalty", config.action_penalty);
  config.goal_bonus = take_double(j, "goal_bonus", config.goal_bonus);
  config.goal_cells = take_cell_list(j, "goal_cells");

  config.validate();
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_file(path));
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  json j;
  j["kind"] = to_string(config.kind);
  json sizes = json::array();
  for (const GridSize& g : config.grid_sizes) {
    sizes.push_back({g.width, g.height});
  }
  j["grid_sizes"] = sizes;
  j["trajectory_counts"] = config.trajectory_counts;
  j["noise_levels"] = config.noise_levels;
  j["set_size"] = config.set_size;
  j["seeds"] = config.seeds;
  j["master_seed"] = config.master_seed;
  j["slip_probability"] = config.slip_probability;
  j["discount"] = config.discount;
  j["ot"] = {{"order_p", config.ot.order_p},
             {"reg_epsilon", config.ot.reg_epsilon},
             {"max_iterations", config.ot.max_iterations},
             {"convergence_tol", config.ot.convergence_tol}};
  j["irl"] = {{"learning_rate", config.irl.learning_rate},
              {"iterations", config.irl.iterations},
              {"l2_penalty", config.irl.l2_penalty},
              {"soft_vi_tolerance", config.irl.soft_vi_tolerance},
              {"horizon", config.irl.horizon}};
  j["temperature"] = config.temperature;
  j["noise_scale"] = config.noise_scale;
  j["method"] = method_to_string(config.method);
  j["goal_bonus"] = config.goal_bonus;
  json cells = json::array();
  for (const auto& [x, y] : config.goal_cells) cells.push_back({x, y});
  j["goal_cells"] = cells;
  return j.dump(2) + "\n";
}

}  // namespace otra
