#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "otra/common.hpp"
#include "otra/mdp.hpp"
#include "otra/oracles.hpp"
#include "otra/reward.hpp"

using namespace otra;

TEST_CASE("gridworld transition rows are distributions") {
  const TabularMdp mdp = build_gridworld(3, 4, 0.15, 0.9, {{2, 3}});
  CHECK(mdp.num_states() == 12);
  CHECK(mdp.num_actions() == 5);
  CHECK(mdp.dimension() == 60);
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
      double total = 0.0;
      for (int next = 0; next < mdp.num_states(); ++next) {
        const double p = mdp.transition(s, a, next);
        CHECK(p >= 0.0);
        total += p;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(mdp.start_distribution().sum() == doctest::Approx(1.0));
}

TEST_CASE("goal cells absorb under every action") {
  const TabularMdp mdp = build_gridworld(3, 3, 0.2, 0.9, {{2, 2}});
  const int goal = 2 * 3 + 2;
  CHECK(mdp.is_terminal(goal));
  REQUIRE(mdp.terminal_states().size() == 1);
  CHECK(mdp.terminal_states()[0] == goal);
  for (int a = 0; a < mdp.num_actions(); ++a) {
    CHECK(mdp.transition(goal, a, goal) == doctest::Approx(1.0));
  }
  // Start mass only on non-goal cells.
  CHECK(mdp.start_distribution()(goal) == 0.0);
}

TEST_CASE("deterministic moves bump against walls") {
  const TabularMdp mdp = build_gridworld(2, 2, 0.0, 0.9, {{1, 1}});
  // State 0 is (0, 0); moving up or left keeps the agent in place.
  CHECK(mdp.transition(0, GridAction::kUp, 0) == doctest::Approx(1.0));
  CHECK(mdp.transition(0, GridAction::kLeft, 0) == doctest::Approx(1.0));
  CHECK(mdp.transition(0, GridAction::kRight, 1) == doctest::Approx(1.0));
  CHECK(mdp.transition(0, GridAction::kDown, 2) == doctest::Approx(1.0));
  CHECK(mdp.transition(0, GridAction::kStay, 0) == doctest::Approx(1.0));
}

TEST_CASE("slip spreads mass over the other four moves") {
  const double slip = 0.2;
  const TabularMdp mdp = build_gridworld(3, 3, slip, 0.9, {{2, 2}});
  // Center cell (1, 1) = state 4: all four neighbors distinct.
  const int s = 4;
  CHECK(mdp.transition(s, GridAction::kUp, 1) == doctest::Approx(1.0 - slip));
  CHECK(mdp.transition(s, GridAction::kUp, 7) == doctest::Approx(slip / 4.0));
  CHECK(mdp.transition(s, GridAction::kUp, 3) == doctest::Approx(slip / 4.0));
  CHECK(mdp.transition(s, GridAction::kUp, 5) == doctest::Approx(slip / 4.0));
  CHECK(mdp.transition(s, GridAction::kUp, s) == doctest::Approx(slip / 4.0));
}

TEST_CASE("successor lists mirror the dense transition matrix") {
  const TabularMdp mdp = build_gridworld(3, 2, 0.3, 0.9, {{2, 1}});
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
      double listed = 0.0;
      for (const auto& succ : mdp.successors(s, a)) {
        CHECK(succ.prob == doctest::Approx(mdp.transition(s, a, succ.state)));
        CHECK(succ.log_prob == doctest::Approx(std::log(succ.prob)));
        listed += succ.prob;
      }
      CHECK(listed == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("value iteration matches exhaustive policy search") {
  const TabularMdp mdp = build_gridworld(2, 2, 0.25, 0.85, {{1, 1}});
  RewardTable reward = RewardTable::zeros(4, 5);
  Rng rng(11);
  for (int s = 0; s < 4; ++s) {
    for (int a = 0; a < 5; ++a) reward.values(s, a) = rng.uniform(-1.0, 1.0);
  }
  const ValueIterationResult vi = value_iteration(mdp, reward, 1e-12);
  const Policy greedy = greedy_policy(vi.q_values);
  const Vector value = oracles::policy_value(mdp, greedy, reward);
  const double via_vi = mdp.start_distribution().dot(value);
  const double best = oracles::best_deterministic_value(mdp, reward);
  CHECK(via_vi == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("greedy policy is deterministic with lowest-index ties") {
  Matrix q(2, 3);
  q << 1.0, 1.0, 0.5,  //
      0.2, 0.9, 0.9;
  const Policy policy = greedy_policy(q);
  CHECK(policy.action_probabilities(0, 0) == 1.0);
  CHECK(policy.action_probabilities(0, 1) == 0.0);
  CHECK(policy.action_probabilities(1, 1) == 1.0);
}

TEST_CASE("softmax policy rows sum to one") {
  const TabularMdp mdp = build_gridworld(3, 3, 0.1, 0.9, {{2, 2}});
  RewardTable reward = RewardTable::zeros(9, 5);
  reward.values(8, 4) = 3.0;
  const Matrix q = soft_value_iteration(mdp, reward, 1e-10);
  const Policy policy = softmax_policy(q);
  for (int s = 0; s < policy.num_states(); ++s) {
    CHECK(policy.action_probabilities.row(s).sum() == doctest::Approx(1.0));
    CHECK(policy.action_probabilities.row(s).minCoeff() > 0.0);
  }
  // The soft greedy action at the goal must be the rewarded one.
  int argmax = 0;
  policy.action_probabilities.row(8).maxCoeff(&argmax);
  CHECK(argmax == static_cast<int>(GridAction::kStay));
}

TEST_CASE("soft value iteration satisfies its own fixed point") {
  const TabularMdp mdp = build_gridworld(2, 3, 0.2, 0.9, {{1, 2}});
  RewardTable reward = RewardTable::zeros(6, 5);
  Rng rng(5);
  for (int s = 0; s < 6; ++s) {
    for (int a = 0; a < 5; ++a) reward.values(s, a) = rng.uniform(-0.5, 0.5);
  }
  const Matrix q = soft_value_iteration(mdp, reward, 1e-12);
  const Vector v = log_sum_exp_rows(q);
  for (int s = 0; s < 6; ++s) {
    for (int a = 0; a < 5; ++a) {
      // The backup has no terminal exception: goal cells are absorbing
      // self-loops, so their soft value is part of the same fixed point.
      double backup = reward(s, a);
      for (const auto& succ : mdp.successors(s, a)) {
        backup += mdp.discount() * succ.prob * v(succ.state);
      }
      CHECK(q(s, a) == doctest::Approx(backup).epsilon(1e-8));
    }
  }
}

TEST_CASE("trajectory sampling is seed-deterministic and horizon-bounded") {
  const TabularMdp mdp = build_gridworld(3, 3, 0.2, 0.9, {{2, 2}});
  RewardTable reward = RewardTable::zeros(9, 5);
  reward.values(8, 4) = 1.0;
  const Policy policy =
      greedy_policy(value_iteration(mdp, reward, 1e-10).q_values);

  const auto first = sample_trajectories(mdp, policy, 20, 15, 99);
  const auto second = sample_trajectories(mdp, policy, 20, 15, 99);
  const auto other = sample_trajectories(mdp, policy, 20, 15, 100);
  REQUIRE(first.size() == 20);
  bool identical = true;
  for (std::size_t i = 0; i < first.size(); ++i) {
    identical = identical && first[i].steps == second[i].steps;
  }
  CHECK(identical);
  bool any_difference = false;
  for (std::size_t i = 0; i < first.size(); ++i) {
    any_difference = any_difference || first[i].steps != other[i].steps;
  }
  CHECK(any_difference);

  for (const auto& trajectory : first) {
    REQUIRE(trajectory.length() >= 1);
    CHECK(trajectory.length() <= 15);
    // Terminal states may only appear as the final step.
    for (int t = 0; t + 1 < trajectory.length(); ++t) {
      CHECK_FALSE(mdp.is_terminal(trajectory.steps[t].first));
    }
  }
}

TEST_CASE("trajectories end right after recording a terminal state") {
  // Deterministic world, start adjacent to the goal: every trajectory is
  // (start, right), (goal, stay-ish) cut at the terminal record.
  const TabularMdp mdp = build_gridworld(2, 1, 0.0, 0.9, {{1, 0}});
  const Policy policy = Policy::deterministic({GridAction::kRight,
                                               GridAction::kStay}, 5);
  const auto trajectories = sample_trajectories(mdp, policy, 5, 10, 3);
  for (const auto& trajectory : trajectories) {
    REQUIRE(trajectory.length() == 2);
    CHECK(trajectory.steps[0].first == 0);
    CHECK(trajectory.steps[1].first == 1);
  }
}
