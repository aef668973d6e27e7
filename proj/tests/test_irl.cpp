#include <cmath>
#include <vector>

#include "doctest.h"
#include "otra/common.hpp"
#include "otra/irl.hpp"
#include "otra/mdp.hpp"
#include "otra/oracles.hpp"
#include "otra/reward.hpp"

using namespace otra;

namespace {

std::vector<Trajectory> demo_trajectories(const TabularMdp& mdp, int count,
                                          std::uint64_t seed) {
  RewardTable reward = RewardTable::zeros(mdp.num_states(), mdp.num_actions());
  for (int s : mdp.terminal_states()) {
    reward.values(s, GridAction::kStay) = 5.0;
  }
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
      reward.values(s, a) += 1e-3 * (flat_index(s, a, mdp.num_actions()) + 1);
    }
  }
  const Policy expert =
      greedy_policy(value_iteration(mdp, reward, 1e-10).q_values);
  return sample_trajectories(mdp, expert, count, 30, seed);
}

}  // namespace

TEST_CASE("empirical visitation averages counts per trajectory") {
  const TabularMdp mdp = build_gridworld(2, 1, 0.0, 0.9, {{1, 0}});
  Trajectory one;
  one.steps = {{0, GridAction::kRight}, {1, GridAction::kStay}};
  Trajectory two;
  two.steps = {{0, GridAction::kStay},
               {0, GridAction::kRight},
               {1, GridAction::kStay}};
  const Vector counts = empirical_visitation({one, two}, mdp);
  CHECK(counts(flat_index(0, GridAction::kRight, 5)) == doctest::Approx(1.0));
  CHECK(counts(flat_index(0, GridAction::kStay, 5)) == doctest::Approx(0.5));
  CHECK(counts(flat_index(1, GridAction::kStay, 5)) == doctest::Approx(1.0));
  CHECK(counts.sum() == doctest::Approx(2.5));  // mean trajectory length
}

TEST_CASE("model visitation is a distribution over trajectories' mass") {
  const TabularMdp mdp = build_gridworld(2, 2, 0.1, 0.9, {{1, 1}});
  RewardTable reward = RewardTable::zeros(4, 5);
  reward.values(3, 4) = 2.0;
  IrlConfig config;
  config.horizon = 12;
  const Vector visitation = expected_visitation(mdp, reward, config);
  REQUIRE(visitation.size() == mdp.dimension());
  CHECK(visitation.minCoeff() >= 0.0);
  // Expected trajectory length lies within [1, horizon].
  CHECK(visitation.sum() >= 1.0);
  CHECK(visitation.sum() <= config.horizon + 1e-9);
}

TEST_CASE("step policies match a direct likelihood ratio on a chain") {
  // Two-state deterministic chain: trajectories are fully enumerable, so
  // the model's first-step action distribution has a closed form.
  const TabularMdp mdp = build_gridworld(2, 1, 0.0, 0.9, {{1, 0}});
  RewardTable reward = RewardTable::zeros(2, 5);
  reward.values(0, GridAction::kRight) = 1.0;
  reward.values(0, GridAction::kStay) = 0.5;
  IrlConfig config;
  config.horizon = 2;
  const auto policies = maxent_step_policies(mdp, reward, config);
  REQUIRE(policies.size() == 2);
  // Enumerate every length-2 trajectory with exp path-reward weights. A
  // right move reaches the terminal, whose record still carries one of the
  // five (zero-reward) actions; any other move bumps a wall, stays at 0,
  // and the second step is a free choice there.
  double z_right = 0.0;
  double z = 0.0;
  for (int a0 = 0; a0 < 5; ++a0) {
    for (int a1 = 0; a1 < 5; ++a1) {
      const double second =
          a0 == GridAction::kRight ? reward(1, a1) : reward(0, a1);
      const double weight = std::exp(reward(0, a0) + second);
      z += weight;
      if (a0 == GridAction::kRight) z_right += weight;
    }
  }
  CHECK(policies[0](0, GridAction::kRight) ==
        doctest::Approx(z_right / z).epsilon(1e-9));
}

TEST_CASE("analytic gradient equals central finite differences") {
  const TabularMdp mdp = build_gridworld(2, 2, 0.15, 0.9, {{1, 1}});
  const auto trajectories = demo_trajectories(mdp, 12, 7);
  IrlConfig config;
  config.horizon = 20;
  config.l2_penalty = 0.05;
  Rng rng(19);
  RewardTable point = RewardTable::zeros(4, 5);
  for (int s = 0; s < 4; ++s) {
    for (int a = 0; a < 5; ++a) point.values(s, a) = rng.uniform(-1.0, 1.0);
  }
  const Vector grad = irl_gradient(mdp, trajectories, point, config);
  const double h = 1e-5;
  for (int i = 0; i < point.dimension(); i += 3) {
    const int s = i / 5;
    const int a = i % 5;
    const double saved = point.values(s, a);
    point.values(s, a) = saved + h;
    const double up = log_likelihood(mdp, trajectories, point, config);
    point.values(s, a) = saved - h;
    const double down = log_likelihood(mdp, trajectories, point, config);
    point.values(s, a) = saved;
    const double fd = (up - down) / (2.0 * h);
    CHECK(std::abs(fd - grad(i)) <=
          1e-4 * std::max(std::abs(grad(i)), 1e-6));
  }
}

TEST_CASE("gradient ascent increases the penalized likelihood") {
  const TabularMdp mdp = build_gridworld(2, 2, 0.1, 0.9, {{1, 1}});
  const auto trajectories = demo_trajectories(mdp, 20, 3);
  IrlConfig config;
  config.iterations = 150;
  config.learning_rate = 0.2;
  config.l2_penalty = 0.01;
  config.horizon = 20;
  const RewardTable zero = RewardTable::zeros(4, 5);
  const RewardTable fitted = maxent_irl(mdp, trajectories, config, 0);
  CHECK(log_likelihood(mdp, trajectories, fitted, config) >
        log_likelihood(mdp, trajectories, zero, config));
  CHECK_NOTHROW(fitted.validate());
}

TEST_CASE("fitting is deterministic and the fit explains the expert") {
  const TabularMdp mdp = build_gridworld(3, 3, 0.1, 0.9, {{2, 2}});
  const auto trajectories = demo_trajectories(mdp, 64, 11);
  IrlConfig config;
  config.iterations = 400;
  config.learning_rate = 0.25;
  config.l2_penalty = 0.005;
  config.horizon = 30;
  const RewardTable a = maxent_irl(mdp, trajectories, config, 5);
  const RewardTable b = maxent_irl(mdp, trajectories, config, 5);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
  // The inferred reward's greedy policy reaches the goal from the start
  // cell; check the first greedy step at the cell left of the goal.
  const Policy greedy = greedy_policy(value_iteration(mdp, a, 1e-10).q_values);
  const int left_of_goal = 2 * 3 + 1;
  CHECK(greedy.action_probabilities(left_of_goal, GridAction::kRight) == 1.0);
}

TEST_CASE("l2 penalty shrinks the fitted reward") {
  const TabularMdp mdp = build_gridworld(2, 2, 0.1, 0.9, {{1, 1}});
  const auto trajectories = demo_trajectories(mdp, 16, 2);
  IrlConfig weak;
  weak.iterations = 200;
  weak.learning_rate = 0.2;
  weak.l2_penalty = 1e-4;
  weak.horizon = 20;
  IrlConfig strong = weak;
  strong.l2_penalty = 1.0;
  const RewardTable loose = maxent_irl(mdp, trajectories, weak, 0);
  const RewardTable tight = maxent_irl(mdp, trajectories, strong, 0);
  CHECK(tight.values.norm() < loose.values.norm());
}

TEST_CASE("config validation rejects nonsense") {
  IrlConfig config;
  config.learning_rate = -0.1;
  CHECK_THROWS_AS(config.validate(), std::exception);
  config = IrlConfig{};
  config.iterations = -1;
  CHECK_THROWS_AS(config.validate(), std::exception);
  // Zero iterations is legal: run no ascent steps, return the zero table.
  config = IrlConfig{};
  config.iterations = 0;
  CHECK_NOTHROW(config.validate());
  config = IrlConfig{};
  config.horizon = 0;
  CHECK_THROWS_AS(config.validate(), std::exception);
  config = IrlConfig{};
  config.l2_penalty = -1.0;
  CHECK_THROWS_AS(config.validate(), std::exception);
  CHECK_NOTHROW(IrlConfig{}.validate());
}
