#pragma once

#include <string>
#include <vector>

#include "otra/irl.hpp"
#include "otra/ot.hpp"

namespace otra {

enum class ExperimentKind {
  kConverge,
  kNoise,
  kDimSweep,
  kCentroid,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct GridSize {
  int width = 0;
  int height = 0;
};

/// One JSON document mirrors this struct field for field; see the README
/// for the schema. Validation is per experiment kind and reports the
/// offending key via ConfigError.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kConverge;
  std::vector<GridSize> grid_sizes;
  std::vector<int> trajectory_counts;
  std::vector<double> noise_levels;
  int set_size = 15;
  std::vector<long long> seeds;
  std::uint64_t master_seed = 0;
  double slip_probability = 0.1;
  double discount = 0.9;
  OtConfig ot;
  IrlConfig irl;
  double temperature = kDefaultTemperature;
  double noise_scale = 0.1;
  GenerationMethod method = GenerationMethod::kShaping;
  double action_penalty = 0.5;
  /// Reward placed on (goal, stay) by the demonstrations' true reward.
  /// The greedy expert is scale-invariant in this value, but the embedding
  /// of the true reward is not: 7 matches the concentration that inference
  /// from a near-deterministic expert settles at on the 4x4 benchmark.
  double goal_bonus = 7.0;
  /// Goal cells per gridworld; empty means the bottom-right cell. May only
  /// be set when the config has exactly one grid size.
  std::vector<std::pair<int, int>> goal_cells;

  void validate() const;
};

/// One measurement. `variable` is the independent variable of the
/// experiment kind (trajectory count n, noise level epsilon, or dimension
/// d). Aggregate rows (the noise envelope) use seed = -1. A flagged
/// (converged = false) record may carry a non-finite value.
struct ResultRecord {
  std::string kind;
  double variable = 0.0;
  long long seed = 0;
  std::string metric;
  double value = 0.0;
  bool converged = true;
  double wall_ms = 0.0;
};

/// Canonical emission order: (kind, variable, seed, metric).
void sort_records(std::vector<ResultRecord>& records);

enum class PerturbationKind {
  kUniformMix,
};

/// Expert-noise model of the robustness experiment: the expert's action
/// distribution is mixed with the uniform distribution at rate epsilon.
struct NoiseModel {
  double epsilon = 0.0;
  PerturbationKind kind = PerturbationKind::kUniformMix;
};

/// Delta = 2 / (m(m-1)) * sum_{i<j} W_p(mu_i, mu_j), exact solver; equals
/// the mean of the strict upper triangle of pairwise_distance_matrix.
double average_pairwise_distance(const std::vector<DiscreteMeasure>& measures,
                                 const GroundMetric& metric, double order_p);

/// pi'(a|s) = (1 - epsilon) * pi(a|s) + epsilon / num_actions. Rows stay
/// normalized by construction and epsilon = 0 returns the input exactly.
/// `seed` is unused by uniform mixing and reserved for stochastic
/// perturbation kinds.
Policy perturb_policy(const Policy& policy, const NoiseModel& noise,
                      std::uint64_t seed);

/// The experiments' true reward on a gridworld: `bonus` on (goal, stay)
/// for every terminal state, plus the deterministic tie-breaking ramp
/// 1e-3 * (flat_index + 1) / d that makes the greedy expert's argmax
/// unique at every state (symmetric grids otherwise have exact ties).
RewardTable true_gridworld_reward(const TabularMdp& mdp, double bonus);

/// Horizon-bounded state-action occupancy of a fixed policy under the true
/// dynamics, episodes ending at terminal states; sums to the expected
/// trajectory length.
Vector policy_occupancy(const TabularMdp& mdp, const Policy& policy,
                        int horizon);

/// Occupancy-normalized mean reward E_pi[R] over the horizon.
double expected_reward(const TabularMdp& mdp, const Policy& policy,
                       const RewardTable& reward, int horizon);

/// Least-squares nondecreasing fit (pool-adjacent-violators) of `values`
/// taken in input order.
std::vector<double> isotonic_fit(const std::vector<double>& values);

/// Sample-size study: per (n, seed), infer R_n from n greedy-expert
/// trajectories and emit "wp_to_true" = W_p(phi(R_n), phi(R_true)) and the
/// diagnostic "expected_reward_gap" = |E_{pi_n}[R_n] - E_{pi*}[R_true]|,
/// where pi_n is the stationary softmax policy of R_n.
std::vector<ResultRecord> run_convergence_experiment(
    const ExperimentConfig& config);

/// Demonstrator-noise study: per (epsilon, seed), perturb the expert, infer
/// with trajectory seeds paired across epsilon, emit "wp_noise" =
/// W_p(phi(R(eps)), phi(R(0))) and "wp_to_true"; afterwards emit the
/// per-epsilon envelope "envelope" (max over seeds, isotonic fit, seed -1).
std::vector<ResultRecord> run_noise_experiment(const ExperimentConfig& config);

/// Ambiguity-growth study: per (grid size, seed), generate a
/// policy-equivalent reward set with an identical protocol at every size
/// and emit "delta_d" and "variance_d" against d = num_states * num_actions.
std::vector<ResultRecord> run_dimensionality_experiment(
    const ExperimentConfig& config);

/// Centroid study: per seed, generate the set, embed, and emit
/// "medoid_index", "medoid_objective", "barycenter_objective",
/// "multistart_spread". Both objective records report the barycenter
/// functional sum_i w_i W_p(x, mu_i)^p (uniform weights, exact solver)
/// evaluated at the respective point, so they are directly comparable.
std::vector<ResultRecord> run_centroid_analysis(const ExperimentConfig& config);

}  // namespace otra
