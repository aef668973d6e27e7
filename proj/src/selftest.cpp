#include "otra/selftest.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "otra/common.hpp"
#include "otra/io.hpp"
#include "otra/irl.hpp"
#include "otra/lab.hpp"
#include "otra/mdp.hpp"
#include "otra/oracles.hpp"
#include "otra/ot.hpp"
#include "otra/reward.hpp"
#include "transport_simplex.hpp"

namespace otra {

namespace {

struct Battery {
  std::ostream& out;
  int failures = 0;

  void check(const std::string& name, const std::function<void()>& body) {
    try {
      body();
      out << "[ok]   " << name << "\n";
    } catch (const std::exception& err) {
      ++failures;
      out << "[FAIL] " << name << " (" << err.what() << ")\n";
    }
  }
};

[[noreturn]] void fail(const std::string& detail) {
  throw std::runtime_error(detail);
}

void expect_near(double got, double want, double tol,
                 const std::string& what) {
  if (!(std::abs(got - want) <= tol)) {
    std::ostringstream msg;
    msg << what << ": got " << got << ", want " << want << " +- " << tol;
    fail(msg.str());
  }
}

void expect(bool ok, const std::string& what) {
  if (!ok) fail(what);
}

Vector random_simplex(Rng& rng, int d) {
  Vector w(d);
  for (int i = 0; i < d; ++i) w(i) = rng.uniform(0.05, 1.0);
  w /= w.sum();
  return w;
}

RewardTable random_reward(Rng& rng, int states, int actions, double scale) {
  RewardTable r = RewardTable::zeros(states, actions);
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) {
      r.values(s, a) = rng.uniform(-scale, scale);
    }
  }
  return r;
}

void check_lp_against_enumeration(Rng& rng, int n, int m) {
  const Vector a = random_simplex(rng, n);
  const Vector b = random_simplex(rng, m);
  Matrix cost(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) cost(i, j) = rng.uniform(0.0, 3.0);
  }
  const Matrix plan = detail::solve_transport_lp(a, b, cost);
  const double simplex_value = (plan.array() * cost.array()).sum();
  const double oracle_value = oracles::transport_min_cost(a, b, cost);
  expect_near(simplex_value, oracle_value, 1e-9, "lp objective");
}

void check_line_oracle(Rng& rng) {
  const TabularMdp mdp = build_gridworld(5, 1, 0.0, 0.9, {{4, 0}});
  const GroundMetric metric = ground_metric_gridworld(mdp, 0.0);
  const int d = mdp.dimension();
  Vector positions(d);
  for (int i = 0; i < d; ++i) positions(i) = i / mdp.num_actions();
  for (double p : {1.0, 2.0}) {
    const DiscreteMeasure mu{random_simplex(rng, d)};
    const DiscreteMeasure nu{random_simplex(rng, d)};
    const double exact = exact_wasserstein(mu, nu, metric, p).distance;
    const double line =
        oracles::line_wasserstein(positions, mu.weights, nu.weights, p);
    expect_near(exact, line, 1e-9, "line W_" + std::to_string(int(p)));
  }
}

void check_policy_enumeration(Rng& rng, int width, int height, double slip) {
  const TabularMdp mdp =
      build_gridworld(width, height, slip, 0.9, {{width - 1, height - 1}});
  const RewardTable reward =
      random_reward(rng, mdp.num_states(), mdp.num_actions(), 1.0);
  const auto vi = value_iteration(mdp, reward, 1e-10);
  const double vi_value = mdp.start_distribution().dot(vi.state_values);
  const double brute = oracles::best_deterministic_value(mdp, reward);
  expect_near(vi_value, brute, 1e-7, "optimal start value");
  const Policy greedy = greedy_policy(vi.q_values);
  const double greedy_value =
      mdp.start_distribution().dot(oracles::policy_value(mdp, greedy, reward));
  expect_near(greedy_value, brute, 1e-7, "greedy policy value");
}

void check_soft_chain(Rng& rng) {
  const TabularMdp mdp = build_gridworld(2, 2, 0.15, 0.9, {{1, 1}});
  const RewardTable reward =
      random_reward(rng, mdp.num_states(), mdp.num_actions(), 1.0);
  const Matrix q = soft_value_iteration(mdp, reward, 1e-10);
  // Independent fixed-point iteration with scalar loops.
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  std::vector<double> v(S, 0.0);
  Matrix q_ref = Matrix::Zero(S, A);
  for (int sweep = 0; sweep < 600; ++sweep) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double next = 0.0;
        for (int sp = 0; sp < S; ++sp) {
          next += mdp.transition(s, a, sp) * v[static_cast<std::size_t>(sp)];
        }
        q_ref(s, a) = reward.values(s, a) + mdp.discount() * next;
      }
    }
    for (int s = 0; s < S; ++s) {
      double mx = q_ref(s, 0);
      for (int a = 1; a < A; ++a) mx = std::max(mx, q_ref(s, a));
      double acc = 0.0;
      for (int a = 0; a < A; ++a) acc += std::exp(q_ref(s, a) - mx);
      v[static_cast<std::size_t>(s)] = mx + std::log(acc);
    }
  }
  expect((q - q_ref).cwiseAbs().maxCoeff() < 1e-7, "soft q mismatch");
}

void check_sampler_frequencies() {
  const TabularMdp mdp = build_gridworld(2, 2, 0.2, 0.9, {{1, 1}});
  Policy uniform;
  uniform.action_probabilities =
      Matrix::Constant(mdp.num_states(), mdp.num_actions(),
                       1.0 / mdp.num_actions());
  const int count = 40000;
  const auto trajectories =
      sample_trajectories(mdp, uniform, count, 3, 7);
  Vector start_freq = Vector::Zero(mdp.num_states());
  for (const auto& tau : trajectories) {
    start_freq(tau.steps.front().first) += 1.0;
  }
  start_freq /= static_cast<double>(count);
  for (int s = 0; s < mdp.num_states(); ++s) {
    const double p = mdp.start_distribution()(s);
    const double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-12) / count);
    expect_near(start_freq(s), p, 4.0 * sigma + 1e-12,
                "start frequency s=" + std::to_string(s));
  }
}

void check_variance_two_pass(Rng& rng) {
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<RewardTable> set;
    const int m = 3 + trial;
    for (int k = 0; k < m; ++k) set.push_back(random_reward(rng, 4, 5, 2.0));
    const double streaming = compute_reward_variance(set);
    const double two_pass = oracles::two_pass_variance(set);
    expect_near(streaming, two_pass, 1e-12, "variance");
  }
}

void check_medoid_exhaustive(Rng& rng) {
  const TabularMdp mdp = build_gridworld(2, 2, 0.1, 0.9, {{1, 1}});
  const GroundMetric metric = ground_metric_gridworld(mdp, 0.5);
  std::vector<DiscreteMeasure> measures;
  for (int k = 0; k < 6; ++k) {
    measures.push_back(DiscreteMeasure{random_simplex(rng, mdp.dimension())});
  }
  const MedoidResult fast = medoid_centroid(measures, metric, 2.0);
  const MedoidResult slow = oracles::medoid_exhaustive(measures, metric, 2.0);
  expect(fast.index == slow.index, "medoid index mismatch");
  expect_near(fast.objective, slow.objective, 1e-9, "medoid objective");
}

void check_occupancy_oracle(Rng& rng) {
  const TabularMdp mdp = build_gridworld(3, 2, 0.25, 0.9, {{2, 1}});
  Matrix probs(mdp.num_states(), mdp.num_actions());
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
      probs(s, a) = rng.uniform(0.1, 1.0);
    }
    probs.row(s) /= probs.row(s).sum();
  }
  Policy policy;
  policy.action_probabilities = probs;
  const Vector fast = policy_occupancy(mdp, policy, 12);
  const Vector slow = oracles::occupancy_forward(mdp, policy, 12);
  expect((fast - slow).cwiseAbs().maxCoeff() < 1e-12, "occupancy mismatch");
}

void check_gradient_fd(Rng& rng) {
  const TabularMdp mdp = build_gridworld(2, 2, 0.1, 0.9, {{1, 1}});
  IrlConfig config;
  config.horizon = 8;
  config.l2_penalty = 0.01;
  const RewardTable behavior =
      random_reward(rng, mdp.num_states(), mdp.num_actions(), 1.0);
  const Policy actor =
      softmax_policy(soft_value_iteration(mdp, behavior, 1e-8));
  const auto trajectories = sample_trajectories(mdp, actor, 30, 8, 11);
  RewardTable point =
      random_reward(rng, mdp.num_states(), mdp.num_actions(), 0.5);
  const Vector grad = irl_gradient(mdp, trajectories, point, config);
  const double h = 1e-5;
  for (int trial = 0; trial < 6; ++trial) {
    const int i = rng.uniform_int(mdp.dimension());
    const int s = i / mdp.num_actions();
    const int a = i % mdp.num_actions();
    const double saved = point.values(s, a);
    point.values(s, a) = saved + h;
    const double up = log_likelihood(mdp, trajectories, point, config);
    point.values(s, a) = saved - h;
    const double down = log_likelihood(mdp, trajectories, point, config);
    point.values(s, a) = saved;
    const double fd = (up - down) / (2.0 * h);
    const double rel =
        std::abs(fd - grad(i)) / std::max(std::abs(grad(i)), 1e-8);
    expect(rel < 1e-4, "gradient coordinate " + std::to_string(i) +
                           " relative error " + std::to_string(rel));
  }
}

void check_sinkhorn_bias(Rng& rng) {
  const TabularMdp mdp = build_gridworld(3, 3, 0.1, 0.9, {{2, 2}});
  const GroundMetric metric = ground_metric_gridworld(mdp, 0.5);
  const double max_cost = metric.costs.maxCoeff();
  const double max_powered = metric.costs.array().square().maxCoeff();
  for (int pair = 0; pair < 3; ++pair) {
    const DiscreteMeasure mu{random_simplex(rng, mdp.dimension())};
    const DiscreteMeasure nu{random_simplex(rng, mdp.dimension())};
    OtConfig config;
    config.max_iterations = 200000;
    config.convergence_tol = 1e-9;

    // Order 1: one percent of the largest ground cost is already inside the
    // one-percent band around the exact value.
    const double exact1 = exact_wasserstein(mu, nu, metric, 1.0).distance;
    config.order_p = 1.0;
    SinkhornPotentials warm1;
    double value = 0.0;
    for (double factor : {0.3, 0.1, 0.03, 0.01}) {
      config.reg_epsilon = factor * max_cost;
      const SinkhornResult result =
          sinkhorn_distance(mu, nu, metric, config, &warm1);
      expect(result.converged, "sinkhorn did not converge");
      value = result.value;
    }
    double rel = std::abs(value - exact1) / std::max(exact1, 1e-12);
    expect(rel < 0.01,
           "order-1 bias " + std::to_string(rel) + " at 0.01*max_cost");

    // Order 2 pays quadratically for regularization; the same band needs a
    // deeper epsilon relative to the squared-cost scale.
    const double exact2 = exact_wasserstein(mu, nu, metric, 2.0).distance;
    config.order_p = 2.0;
    SinkhornPotentials warm2;
    for (double factor : {0.3, 0.1, 0.03, 0.01, 0.003, 0.001}) {
      config.reg_epsilon = factor * max_powered;
      const SinkhornResult result =
          sinkhorn_distance(mu, nu, metric, config, &warm2);
      expect(result.converged, "sinkhorn did not converge");
      value = result.value;
    }
    rel = std::abs(value - exact2) / std::max(exact2, 1e-12);
    expect(rel < 0.01,
           "order-2 bias " + std::to_string(rel) + " at 0.001*max_cost^2");

    // Gap decays monotonically along a fixed absolute schedule.
    SinkhornPotentials warm3;
    double previous_gap = std::numeric_limits<double>::infinity();
    for (double eps : {1.0, 0.3, 0.1, 0.03}) {
      config.reg_epsilon = eps;
      const SinkhornResult result =
          sinkhorn_distance(mu, nu, metric, config, &warm3);
      expect(result.converged, "sinkhorn did not converge");
      const double gap = std::abs(result.value - exact2);
      expect(gap <= previous_gap + 1e-9, "gap increased along schedule");
      previous_gap = gap;
    }
  }
}

void check_shaping_invariance(Rng& rng) {
  for (int trial = 0; trial < 10; ++trial) {
    const int width = 2 + static_cast<int>(rng.uniform_int(2));
    const int height = 2 + static_cast<int>(rng.uniform_int(2));
    const TabularMdp mdp = build_gridworld(width, height, 0.1, 0.9,
                                           {{width - 1, height - 1}});
    const RewardTable base =
        random_reward(rng, mdp.num_states(), mdp.num_actions(), 1.0);
    Vector potential(mdp.num_states());
    for (int s = 0; s < mdp.num_states(); ++s) {
      potential(s) = rng.uniform(-1.0, 1.0);
    }
    const RewardTable shaped =
        potential_shaping(mdp, base, potential, mdp.discount());
    expect(verify_policy_equivalence(mdp, base, shaped) ==
               Equivalence::kEquivalent,
           "shaping changed the greedy policy");
  }
}

void check_barycenter_dominance(Rng& rng) {
  const TabularMdp mdp = build_gridworld(2, 2, 0.1, 0.9, {{1, 1}});
  const GroundMetric metric = ground_metric_gridworld(mdp, 0.5);
  const int d = mdp.dimension();
  std::vector<DiscreteMeasure> measures;
  for (int k = 0; k < 4; ++k) {
    measures.push_back(DiscreteMeasure{random_simplex(rng, d)});
  }
  const Vector weights = Vector::Constant(4, 0.25);
  OtConfig config;
  config.order_p = 2.0;
  const auto objective = [&](const DiscreteMeasure& point) {
    double total = 0.0;
    for (const auto& mu : measures) {
      const double dist = exact_wasserstein(point, mu, metric, 2.0).distance;
      total += 0.25 * dist * dist;
    }
    return total;
  };
  const BarycenterResult bary =
      wasserstein_barycenter(measures, weights, metric, config);
  expect(bary.converged, "barycenter did not converge");
  const MedoidResult medoid = medoid_centroid(measures, metric, 2.0);
  const double slack = config.reg_epsilon * std::log(static_cast<double>(d));
  const double bary_objective = objective(bary.barycenter);
  const double medoid_objective =
      objective(measures[static_cast<std::size_t>(medoid.index)]);
  expect(bary_objective <= medoid_objective + slack,
         "barycenter objective above medoid + slack");
  // Second start from a random point lands on the same fixed point.
  Vector init = random_simplex(rng, d);
  const BarycenterResult again =
      wasserstein_barycenter(measures, weights, metric, config, &init);
  expect(again.converged, "restarted barycenter did not converge");
  const double spread = 0.5 * (again.barycenter.weights -
                               bary.barycenter.weights)
                                  .cwiseAbs()
                                  .sum();
  expect(spread < 1e-4, "multi-start spread " + std::to_string(spread));
}

void check_digest_replay() {
  ExperimentConfig config;
  config.kind = ExperimentKind::kConverge;
  config.grid_sizes = {{2, 2}};
  config.trajectory_counts = {2, 4};
  config.seeds = {0, 1};
  config.master_seed = 5;
  config.irl.iterations = 40;
  config.irl.horizon = 12;
  const std::string first = records_to_csv(run_convergence_experiment(config));
  const std::string second =
      records_to_csv(run_convergence_experiment(config));
  expect(records_digest(first) == records_digest(second),
         "replay digests differ");
}

}  // namespace

int run_selftest(std::ostream& out) {
  Battery battery{out};
  Rng rng(20240817);

  battery.check("transport lp vs basis enumeration", [&] {
    check_lp_against_enumeration(rng, 3, 3);
    check_lp_against_enumeration(rng, 3, 4);
    check_lp_against_enumeration(rng, 4, 4);
    check_lp_against_enumeration(rng, 2, 5);
  });
  battery.check("line-metric quantile oracle",
                [&] { check_line_oracle(rng); });
  battery.check("value iteration vs policy enumeration (2x2, slippery)",
                [&] { check_policy_enumeration(rng, 2, 2, 0.2); });
  battery.check("value iteration vs policy enumeration (3x3)",
                [&] { check_policy_enumeration(rng, 3, 3, 0.0); });
  battery.check("soft backup fixed point", [&] { check_soft_chain(rng); });
  battery.check("sampler start frequencies",
                [] { check_sampler_frequencies(); });
  battery.check("streaming vs two-pass variance",
                [&] { check_variance_two_pass(rng); });
  battery.check("medoid vs exhaustive search",
                [&] { check_medoid_exhaustive(rng); });
  battery.check("occupancy forward recursion",
                [&] { check_occupancy_oracle(rng); });
  battery.check("likelihood gradient vs finite differences",
                [&] { check_gradient_fd(rng); });
  battery.check("entropic bias against exact solver",
                [&] { check_sinkhorn_bias(rng); });
  battery.check("shaping leaves the greedy policy fixed",
                [&] { check_shaping_invariance(rng); });
  battery.check("barycenter dominates medoid objective",
                [&] { check_barycenter_dominance(rng); });
  battery.check("experiment replay digest", [] { check_digest_replay(); });

  out << (battery.failures == 0 ? "all checks passed\n"
                                : std::to_string(battery.failures) +
                                      " check(s) failed\n");
  return battery.failures;
}

}  // namespace otra
