#include "otra/lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>

#include "otra/common.hpp"

namespace otra {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  const auto now = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(now - since).count();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::vector<std::pair<int, int>> goals_for(const ExperimentConfig& config,
                                           const GridSize& size) {
  if (!config.goal_cells.empty()) return config.goal_cells;
  return {{size.width - 1, size.height - 1}};
}

TabularMdp build_world(const ExperimentConfig& config, const GridSize& size) {
  return build_gridworld(size.width, size.height, config.slip_probability,
                         config.discount, goals_for(config, size));
}

/// Replicate seed layout, offsets from base b = master_seed + 1024 * seed:
///   b     optimizer / reserved
///   b+1   trajectory sampling (shared across n and across epsilon)
///   b+2   equivalent-set generation (fans out as b+2+i per set member)
///   b+3+k barycenter multi-start init k
/// The stride keeps the derived streams of different replicates disjoint;
/// without it, neighboring seeds would share most of their set-generation
/// streams and the replicates would not be independent.
constexpr std::uint64_t kSeedStride = 1024;

std::uint64_t replicate_base(const ExperimentConfig& config, long long seed) {
  return config.master_seed + kSeedStride * static_cast<std::uint64_t>(seed);
}

DiscreteMeasure embed(const ExperimentConfig& config, const RewardTable& r) {
  return phi_embed(r, config.temperature);
}

double exact_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const GroundMetric& metric, double order_p) {
  return exact_wasserstein(mu, nu, metric, order_p).distance;
}

/// Barycenter functional sum_i w_i W_p(point, mu_i)^p with uniform weights
/// and the exact solver; the common yardstick for both centroid notions.
double transport_objective(const DiscreteMeasure& point,
                           const std::vector<DiscreteMeasure>& measures,
                           const GroundMetric& metric, double order_p) {
  double total = 0.0;
  for (const auto& mu : measures) {
    const double dist = exact_distance(point, mu, metric, order_p);
    total += std::pow(dist, order_p);
  }
  return total / static_cast<double>(measures.size());
}

struct Inference {
  RewardTable reward;
  bool converged = true;
};

Inference infer_reward(const TabularMdp& mdp,
                       const std::vector<Trajectory>& trajectories,
                       const ExperimentConfig& config, std::uint64_t seed) {
  Inference out{RewardTable::zeros(mdp.num_states(), mdp.num_actions()), true};
  try {
    out.reward = maxent_irl(mdp, trajectories, config.irl, seed);
  } catch (const NumericError&) {
    out.converged = false;
  }
  return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kConverge: return "converge";
    case ExperimentKind::kNoise: return "noise";
    case ExperimentKind::kDimSweep: return "dim_sweep";
    case ExperimentKind::kCentroid: return "centroid";
  }
  throw ConfigError("unknown experiment kind");
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "converge") return ExperimentKind::kConverge;
  if (name == "noise") return ExperimentKind::kNoise;
  if (name == "dim_sweep") return ExperimentKind::kDimSweep;
  if (name == "centroid") return ExperimentKind::kCentroid;
  throw ConfigError("config key \"kind\": unknown value \"" + name + "\"");
}

void ExperimentConfig::validate() const {
  require(!seeds.empty(), "config key \"seeds\": must be nonempty");
  require(!grid_sizes.empty(), "config key \"grid_sizes\": must be nonempty");
  for (const auto& g : grid_sizes) {
    require(g.width >= 1 && g.height >= 1,
            "config key \"grid_sizes\": sizes must be positive");
  }
  require(slip_probability >= 0.0 && slip_probability < 1.0,
          "config key \"slip_probability\": must lie in [0, 1)");
  require(discount >= 0.0 && discount < 1.0,
          "config key \"discount\": must lie in [0, 1)");
  require(temperature > 0.0, "config key \"temperature\": must be positive");
  require(noise_scale > 0.0, "config key \"noise_scale\": must be positive");
  require(action_penalty >= 0.0,
          "config key \"action_penalty\": must be nonnegative");
  require(goal_bonus > 0.0, "config key \"goal_bonus\": must be positive");
  try {
    ot.validate();
  } catch (const std::exception& err) {
    throw ConfigError(std::string("config key \"ot\": ") + err.what());
  }
  try {
    irl.validate();
  } catch (const std::exception& err) {
    throw ConfigError(std::string("config key \"irl\": ") + err.what());
  }
  if (!goal_cells.empty()) {
    require(grid_sizes.size() == 1,
            "config key \"goal_cells\": only valid with a single grid size");
  }

  const bool single_grid = grid_sizes.size() == 1;
  switch (kind) {
    case ExperimentKind::kConverge: {
      require(single_grid,
              "config key \"grid_sizes\": converge uses exactly one size");
      require(!trajectory_counts.empty(),
              "config key \"trajectory_counts\": must be nonempty");
      for (std::size_t i = 0; i < trajectory_counts.size(); ++i) {
        require(trajectory_counts[i] >= 1,
                "config key \"trajectory_counts\": counts must be positive");
        require(i == 0 || trajectory_counts[i] > trajectory_counts[i - 1],
                "config key \"trajectory_counts\": must be strictly "
                "increasing");
      }
      break;
    }
    case ExperimentKind::kNoise: {
      require(single_grid,
              "config key \"grid_sizes\": noise uses exactly one size");
      require(trajectory_counts.size() == 1,
              "config key \"trajectory_counts\": noise uses exactly one "
              "count");
      require(trajectory_counts[0] >= 1,
              "config key \"trajectory_counts\": counts must be positive");
      require(!noise_levels.empty(),
              "config key \"noise_levels\": must be nonempty");
      for (std::size_t i = 0; i < noise_levels.size(); ++i) {
        require(noise_levels[i] >= 0.0 && noise_levels[i] < 1.0,
                "config key \"noise_levels\": levels must lie in [0, 1)");
        require(i == 0 || noise_levels[i] > noise_levels[i - 1],
                "config key \"noise_levels\": must be strictly increasing");
      }
      require(noise_levels[0] == 0.0,
              "config key \"noise_levels\": must include 0");
      break;
    }
    case ExperimentKind::kDimSweep: {
      require(set_size >= 2, "config key \"set_size\": must be at least 2");
      for (std::size_t i = 1; i < grid_sizes.size(); ++i) {
        const long prev = static_cast<long>(grid_sizes[i - 1].width) *
                          grid_sizes[i - 1].height;
        const long cur =
            static_cast<long>(grid_sizes[i].width) * grid_sizes[i].height;
        require(cur > prev,
                "config key \"grid_sizes\": dimensions must be strictly "
                "increasing");
      }
      break;
    }
    case ExperimentKind::kCentroid: {
      require(single_grid,
              "config key \"grid_sizes\": centroid uses exactly one size");
      require(set_size >= 2, "config key \"set_size\": must be at least 2");
      break;
    }
  }
}

void sort_records(std::vector<ResultRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const ResultRecord& x, const ResultRecord& y) {
                     return std::tie(x.kind, x.variable, x.seed, x.metric) <
                            std::tie(y.kind, y.variable, y.seed, y.metric);
                   });
}

double average_pairwise_distance(const std::vector<DiscreteMeasure>& measures,
                                 const GroundMetric& metric, double order_p) {
  const std::size_t m = measures.size();
  if (m < 2) {
    throw std::invalid_argument(
        "average_pairwise_distance: need at least two measures");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      total += exact_distance(measures[i], measures[j], metric, order_p);
    }
  }
  const double pairs = 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
  return total / pairs;
}

Policy perturb_policy(const Policy& policy, const NoiseModel& noise,
                      std::uint64_t /*seed*/) {
  if (noise.epsilon < 0.0 || noise.epsilon >= 1.0) {
    throw std::invalid_argument("perturb_policy: epsilon must lie in [0, 1)");
  }
  const double uniform = 1.0 / static_cast<double>(policy.num_actions());
  Policy out = policy;
  out.action_probabilities =
      (1.0 - noise.epsilon) * policy.action_probabilities;
  out.action_probabilities.array() += noise.epsilon * uniform;
  return out;
}

RewardTable true_gridworld_reward(const TabularMdp& mdp, double bonus) {
  RewardTable reward = RewardTable::zeros(mdp.num_states(), mdp.num_actions());
  for (int s : mdp.terminal_states()) {
    reward.values(s, static_cast<int>(GridAction::kStay)) = bonus;
  }
  const double d = static_cast<double>(mdp.dimension());
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
      const int flat = flat_index(s, a, mdp.num_actions());
      reward.values(s, a) += 1e-3 * (flat + 1) / d;
    }
  }
  return reward;
}

Vector policy_occupancy(const TabularMdp& mdp, const Policy& policy,
                        int horizon) {
  if (horizon < 1) {
    throw std::invalid_argument("policy_occupancy: horizon must be positive");
  }
  if (policy.num_states() != mdp.num_states() ||
      policy.num_actions() != mdp.num_actions()) {
    throw std::invalid_argument("policy_occupancy: policy shape mismatch");
  }
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  Vector occupancy = Vector::Zero(S * A);
  Vector alive = mdp.start_distribution();
  for (int t = 0; t < horizon; ++t) {
    Vector joint = Vector::Zero(S * A);
    for (int s = 0; s < S; ++s) {
      if (alive(s) <= 0.0) continue;
      for (int a = 0; a < A; ++a) {
        joint(flat_index(s, a, A)) =
            alive(s) * policy.action_probabilities(s, a);
      }
    }
    occupancy += joint;
    if (t + 1 == horizon) break;
    Vector next = Vector::Zero(S);
    for (int s = 0; s < S; ++s) {
      if (alive(s) <= 0.0 || mdp.is_terminal(s)) continue;
      for (int a = 0; a < A; ++a) {
        const double mass = joint(flat_index(s, a, A));
        if (mass <= 0.0) continue;
        for (const auto& succ : mdp.successors(s, a)) {
          next(succ.state) += mass * succ.prob;
        }
      }
    }
    alive = std::move(next);
  }
  return occupancy;
}

double expected_reward(const TabularMdp& mdp, const Policy& policy,
                       const RewardTable& reward, int horizon) {
  const Vector occupancy = policy_occupancy(mdp, policy, horizon);
  const double total = occupancy.sum();
  if (total <= 0.0) {
    throw NumericError("expected_reward: empty occupancy");
  }
  return occupancy.dot(reward.flattened()) / total;
}

std::vector<double> isotonic_fit(const std::vector<double>& values) {
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (double v : values) {
    blocks.push_back({v, 1.0, 1});
    while (blocks.size() >= 2 &&
           blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double w = prev.weight + top.weight;
      prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w;
      prev.weight = w;
      prev.count += top.count;
    }
  }
  std::vector<double> fit;
  fit.reserve(values.size());
  for (const Block& b : blocks) {
    fit.insert(fit.end(), b.count, b.mean);
  }
  return fit;
}

std::vector<ResultRecord> run_convergence_experiment(
    const ExperimentConfig& config) {
  config.validate();
  if (config.kind != ExperimentKind::kConverge) {
    throw ConfigError("config key \"kind\": expected \"converge\"");
  }
  const TabularMdp mdp = build_world(config, config.grid_sizes[0]);
  const GroundMetric metric =
      ground_metric_gridworld(mdp, config.action_penalty);
  const RewardTable r_true = true_gridworld_reward(mdp, config.goal_bonus);
  const DiscreteMeasure mu_true = embed(config, r_true);
  const Policy expert =
      greedy_policy(value_iteration(mdp, r_true, 1e-10).q_values);
  const double expert_value =
      expected_reward(mdp, expert, r_true, config.irl.horizon);

  std::vector<ResultRecord> records;
  for (long long seed : config.seeds) {
    const std::uint64_t base = replicate_base(config, seed);
    for (int n : config.trajectory_counts) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto trajectories =
          sample_trajectories(mdp, expert, n, config.irl.horizon, base + 1);
      const Inference fit = infer_reward(mdp, trajectories, config, base);
      double wp = kNan;
      double gap = kNan;
      if (fit.converged) {
        wp = exact_distance(embed(config, fit.reward), mu_true, metric,
                            config.ot.order_p);
        const Policy soft = softmax_policy(soft_value_iteration(
            mdp, fit.reward, config.irl.soft_vi_tolerance));
        gap = std::abs(
            expected_reward(mdp, soft, fit.reward, config.irl.horizon) -
            expert_value);
      }
      const double wall = elapsed_ms(t0);
      const double variable = static_cast<double>(n);
      records.push_back({"converge", variable, seed, "wp_to_true", wp,
                         fit.converged, wall});
      records.push_back({"converge", variable, seed, "expected_reward_gap",
                         gap, fit.converged, wall});
    }
  }
  sort_records(records);
  return records;
}

std::vector<ResultRecord> run_noise_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.kind != ExperimentKind::kNoise) {
    throw ConfigError("config key \"kind\": expected \"noise\"");
  }
  const TabularMdp mdp = build_world(config, config.grid_sizes[0]);
  const GroundMetric metric =
      ground_metric_gridworld(mdp, config.action_penalty);
  const RewardTable r_true = true_gridworld_reward(mdp, config.goal_bonus);
  const DiscreteMeasure mu_true = embed(config, r_true);
  const Policy expert =
      greedy_policy(value_iteration(mdp, r_true, 1e-10).q_values);
  const int n = config.trajectory_counts[0];

  std::vector<ResultRecord> records;
  std::vector<double> max_noise(config.noise_levels.size(), 0.0);
  std::vector<bool> level_clean(config.noise_levels.size(), true);
  for (long long seed : config.seeds) {
    const std::uint64_t base = replicate_base(config, seed);
    // The epsilon = 0 run is the reference point of this replicate; paired
    // trajectory seeds make it bit-identical to the unperturbed pipeline.
    DiscreteMeasure mu_ref;
    bool ref_ok = false;
    for (std::size_t li = 0; li < config.noise_levels.size(); ++li) {
      const double eps = config.noise_levels[li];
      const auto t0 = std::chrono::steady_clock::now();
      const Policy actor =
          perturb_policy(expert, {eps, PerturbationKind::kUniformMix}, base);
      const auto trajectories =
          sample_trajectories(mdp, actor, n, config.irl.horizon, base + 1);
      const Inference fit = infer_reward(mdp, trajectories, config, base);
      double wp_noise = kNan;
      double wp_true = kNan;
      bool ok = fit.converged;
      if (fit.converged) {
        const DiscreteMeasure mu = embed(config, fit.reward);
        if (li == 0) {
          mu_ref = mu;
          ref_ok = true;
        }
        wp_true = exact_distance(mu, mu_true, metric, config.ot.order_p);
        if (ref_ok) {
          wp_noise = exact_distance(mu, mu_ref, metric, config.ot.order_p);
        } else {
          ok = false;
        }
      }
      const double wall = elapsed_ms(t0);
      records.push_back(
          {"noise", eps, seed, "wp_noise", wp_noise, ok, wall});
      records.push_back(
          {"noise", eps, seed, "wp_to_true", wp_true, fit.converged, wall});
      if (ok && std::isfinite(wp_noise)) {
        max_noise[li] = std::max(max_noise[li], wp_noise);
      } else {
        level_clean[li] = false;
      }
    }
  }
  const std::vector<double> envelope = isotonic_fit(max_noise);
  for (std::size_t li = 0; li < config.noise_levels.size(); ++li) {
    records.push_back({"noise", config.noise_levels[li], -1, "envelope",
                       envelope[li], level_clean[li], 0.0});
  }
  sort_records(records);
  return records;
}

std::vector<ResultRecord> run_dimensionality_experiment(
    const ExperimentConfig& config) {
  config.validate();
  if (config.kind != ExperimentKind::kDimSweep) {
    throw ConfigError("config key \"kind\": expected \"dim_sweep\"");
  }
  std::vector<ResultRecord> records;
  for (const GridSize& size : config.grid_sizes) {
    const TabularMdp mdp = build_world(config, size);
    const GroundMetric metric =
        ground_metric_gridworld(mdp, config.action_penalty);
    const RewardTable r_true = true_gridworld_reward(mdp, config.goal_bonus);
    const double d = static_cast<double>(mdp.dimension());
    for (long long seed : config.seeds) {
      const std::uint64_t base = replicate_base(config, seed);
      const auto t0 = std::chrono::steady_clock::now();
      double delta = kNan;
      double variance = kNan;
      bool ok = true;
      try {
        const auto rewards = generate_equivalent_rewards(
            mdp, r_true, config.set_size, config.method, config.noise_scale,
            base + 2);
        std::vector<DiscreteMeasure> measures;
        measures.reserve(rewards.size());
        for (const auto& r : rewards) measures.push_back(embed(config, r));
        delta = average_pairwise_distance(measures, metric, config.ot.order_p);
        variance = compute_reward_variance(rewards);
      } catch (const GenerationError&) {
        ok = false;
      }
      const double wall = elapsed_ms(t0);
      records.push_back({"dim_sweep", d, seed, "delta_d", delta, ok, wall});
      records.push_back(
          {"dim_sweep", d, seed, "variance_d", variance, ok, wall});
    }
  }
  sort_records(records);
  return records;
}

std::vector<ResultRecord> run_centroid_analysis(
    const ExperimentConfig& config) {
  config.validate();
  if (config.kind != ExperimentKind::kCentroid) {
    throw ConfigError("config key \"kind\": expected \"centroid\"");
  }
  const TabularMdp mdp = build_world(config, config.grid_sizes[0]);
  const GroundMetric metric =
      ground_metric_gridworld(mdp, config.action_penalty);
  const RewardTable r_true = true_gridworld_reward(mdp, config.goal_bonus);
  constexpr int kMultistarts = 5;

  std::vector<ResultRecord> records;
  for (long long seed : config.seeds) {
    const std::uint64_t base = replicate_base(config, seed);
    const auto t0 = std::chrono::steady_clock::now();
    const auto rewards = generate_equivalent_rewards(
        mdp, r_true, config.set_size, config.method, config.noise_scale,
        base + 2);
    std::vector<DiscreteMeasure> measures;
    measures.reserve(rewards.size());
    for (const auto& r : rewards) measures.push_back(embed(config, r));
    const Vector weights = Vector::Constant(
        static_cast<Eigen::Index>(measures.size()),
        1.0 / static_cast<double>(measures.size()));

    const MedoidResult medoid =
        medoid_centroid(measures, metric, config.ot.order_p);
    const double medoid_objective = transport_objective(
        measures[static_cast<std::size_t>(medoid.index)], measures, metric,
        config.ot.order_p);

    // Multi-start check: the default uniform init plus randomized inits.
    std::vector<Vector> solutions;
    bool all_converged = true;
    for (int k = 0; k < kMultistarts; ++k) {
      BarycenterResult result;
      if (k == 0) {
        result = wasserstein_barycenter(measures, weights, metric, config.ot);
      } else {
        Rng rng(base + 3 + static_cast<std::uint64_t>(k));
        Vector init(metric.size());
        for (Eigen::Index i = 0; i < init.size(); ++i) {
          init(i) = rng.uniform(0.1, 1.0);
        }
        init /= init.sum();
        result = wasserstein_barycenter(measures, weights, metric, config.ot,
                                        &init);
      }
      all_converged = all_converged && result.converged;
      solutions.push_back(result.barycenter.weights);
    }
    double spread = 0.0;
    for (std::size_t i = 0; i < solutions.size(); ++i) {
      for (std::size_t j = i + 1; j < solutions.size(); ++j) {
        spread = std::max(
            spread, 0.5 * (solutions[i] - solutions[j]).cwiseAbs().sum());
      }
    }
    const double bary_objective =
        transport_objective(DiscreteMeasure{solutions[0]}, measures, metric,
                            config.ot.order_p);
    const double wall = elapsed_ms(t0);
    records.push_back({"centroid", 0.0, seed, "medoid_index",
                       static_cast<double>(medoid.index), true, wall});
    records.push_back({"centroid", 0.0, seed, "medoid_objective",
                       medoid_objective, true, wall});
    records.push_back({"centroid", 0.0, seed, "barycenter_objective",
                       bary_objective, all_converged, wall});
    records.push_back({"centroid", 0.0, seed, "multistart_spread", spread,
                       all_converged, wall});
  }
  sort_records(records);
  return records;
}

}  // namespace otra
