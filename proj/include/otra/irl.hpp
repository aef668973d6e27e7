#pragma once

#include <vector>

#include "otra/mdp.hpp"
#include "otra/reward.hpp"

namespace otra {

struct IrlConfig {
  double learning_rate = 0.05;
  int iterations = 500;
  double l2_penalty = 0.01;
  double soft_vi_tolerance = 1e-8;
  int horizon = 50;

  void validate() const;
};

/// Mean state-action counts across the trajectory list (counts divided by
/// the number of trajectories, not by total steps), in flat_index order.
/// Sums to the mean trajectory length.
Vector empirical_visitation(const std::vector<Trajectory>& trajectories,
                            const TabularMdp& mdp);

/// Expected state-action visitation of the maximum-entropy trajectory
/// model exp(sum of rewards) * dynamics over the horizon, computed exactly
/// by a forward-backward recursion (partition values backward, posterior
/// marginals forward). Episodes end at terminal states exactly as in
/// sample_trajectories. `start_override` replaces the MDP start
/// distribution (used internally with the empirical start frequencies so
/// the IRL gradient is the exact likelihood gradient).
Vector expected_visitation(const TabularMdp& mdp, const RewardTable& reward,
                           const IrlConfig& config,
                           const Vector* start_override = nullptr);

/// The model's time-indexed action distributions pi_t(a | s), one S x A
/// matrix per step. On deterministic dynamics, rolling these policies
/// forward samples the model's trajectory distribution exactly (used by
/// the Monte Carlo cross-checks).
std::vector<Matrix> maxent_step_policies(const TabularMdp& mdp,
                                         const RewardTable& reward,
                                         const IrlConfig& config);

/// Reward-dependent part of the penalized mean log-likelihood of the
/// trajectories under the maximum-entropy model:
///   (1/N) sum_tau [ sum_t R(s_t, a_t) - log Z(s_0) ]
///   - l2_penalty / 2 * ||R||^2.
/// The dynamics log-probabilities, constant in R, are omitted.
/// irl_gradient is the exact gradient of this function.
double log_likelihood(const TabularMdp& mdp,
                      const std::vector<Trajectory>& trajectories,
                      const RewardTable& reward, const IrlConfig& config);

/// empirical_visitation - expected_visitation (seeded with the empirical
/// start frequencies) - l2_penalty * R, flattened; equals the gradient of
/// log_likelihood exactly.
Vector irl_gradient(const TabularMdp& mdp,
                    const std::vector<Trajectory>& trajectories,
                    const RewardTable& reward, const IrlConfig& config);

/// Fixed-iteration-count gradient ascent on log_likelihood from a zero
/// reward table, clipping to the reward bound after every step. The
/// algorithm is fully deterministic; `seed` is accepted for interface
/// stability and reserved for stochastic variants.
RewardTable maxent_irl(const TabularMdp& mdp,
                       const std::vector<Trajectory>& trajectories,
                       const IrlConfig& config, std::uint64_t seed);

}  // namespace otra
