#include "otra/oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace otra::oracles {

namespace {

/// Advances `combo` (strictly increasing indices into [0, total)) to the
/// next combination; returns false when exhausted.
bool next_combination(std::vector<int>& combo, int total) {
  const int k = static_cast<int>(combo.size());
  for (int i = k - 1; i >= 0; --i) {
    if (combo[static_cast<std::size_t>(i)] < total - (k - i)) {
      ++combo[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) {
        combo[static_cast<std::size_t>(j)] =
            combo[static_cast<std::size_t>(j - 1)] + 1;
      }
      return true;
    }
  }
  return false;
}

double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) {
    out *= static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return out;
}

}  // namespace

double transport_min_cost(const Vector& a, const Vector& b,
                          const Matrix& cost) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  if (cost.rows() != n || cost.cols() != m) {
    throw std::invalid_argument("transport_min_cost: shape mismatch");
  }
  const int cells = n * m;
  const int basis = n + m - 1;
  if (basis > cells) {
    throw std::invalid_argument("transport_min_cost: degenerate shape");
  }
  if (binomial(cells, basis) > 2e6) {
    throw std::invalid_argument("transport_min_cost: instance too large");
  }

  // Marginal constraints as one (n + m) x basis system per candidate.
  std::vector<int> combo(static_cast<std::size_t>(basis));
  std::iota(combo.begin(), combo.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  constexpr double kFeasTol = 1e-9;
  Matrix system(n + m, basis);
  Vector rhs(n + m);
  rhs.head(n) = a;
  rhs.tail(m) = b;
  do {
    system.setZero();
    for (int col = 0; col < basis; ++col) {
      const int cell = combo[static_cast<std::size_t>(col)];
      system(cell / m, col) = 1.0;
      system(n + cell % m, col) = 1.0;
    }
    const Vector flow = system.colPivHouseholderQr().solve(rhs);
    if ((system * flow - rhs).cwiseAbs().maxCoeff() > kFeasTol) continue;
    if (flow.minCoeff() < -kFeasTol) continue;
    double value = 0.0;
    for (int col = 0; col < basis; ++col) {
      const int cell = combo[static_cast<std::size_t>(col)];
      value += std::max(flow(col), 0.0) * cost(cell / m, cell % m);
    }
    best = std::min(best, value);
  } while (next_combination(combo, cells));
  if (!std::isfinite(best)) {
    throw std::runtime_error("transport_min_cost: no feasible basis");
  }
  return best;
}

double line_wasserstein(const Vector& positions, const Vector& mu,
                        const Vector& nu, double order_p) {
  const Eigen::Index n = positions.size();
  if (mu.size() != n || nu.size() != n) {
    throw std::invalid_argument("line_wasserstein: size mismatch");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return positions(i) < positions(j); });

  // Walk both quantile functions over merged mass breakpoints.
  std::size_t ia = 0;
  std::size_t ib = 0;
  double rem_a = mu(order[0]);
  double rem_b = nu(order[0]);
  double total = 0.0;
  while (ia < order.size() && ib < order.size()) {
    if (rem_a <= 0.0) {
      if (++ia >= order.size()) break;
      rem_a = mu(order[ia]);
      continue;
    }
    if (rem_b <= 0.0) {
      if (++ib >= order.size()) break;
      rem_b = nu(order[ib]);
      continue;
    }
    const double step = std::min(rem_a, rem_b);
    const double gap =
        std::abs(positions(order[ia]) - positions(order[ib]));
    total += step * std::pow(gap, order_p);
    rem_a -= step;
    rem_b -= step;
  }
  return std::pow(total, 1.0 / order_p);
}

Vector policy_value(const TabularMdp& mdp, const Policy& policy,
                    const RewardTable& reward) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  Matrix p_pi = Matrix::Zero(S, S);
  Vector r_pi = Vector::Zero(S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const double w = policy.action_probabilities(s, a);
      if (w <= 0.0) continue;
      r_pi(s) += w * reward.values(s, a);
      for (const auto& succ : mdp.successors(s, a)) {
        p_pi(s, succ.state) += w * succ.prob;
      }
    }
  }
  const Matrix system =
      Matrix::Identity(S, S) - mdp.discount() * p_pi;
  return system.partialPivLu().solve(r_pi);
}

double best_deterministic_value(const TabularMdp& mdp,
                                const RewardTable& reward) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  double total = std::pow(static_cast<double>(A), S);
  if (total > 2.5e6) {
    throw std::invalid_argument("best_deterministic_value: too many policies");
  }
  std::vector<int> actions(static_cast<std::size_t>(S), 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    const Policy policy = Policy::deterministic(actions, A);
    const Vector v = policy_value(mdp, policy, reward);
    best = std::max(best, mdp.start_distribution().dot(v));
    int pos = 0;
    while (pos < S) {
      if (++actions[static_cast<std::size_t>(pos)] < A) break;
      actions[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == S) break;
  }
  return best;
}

double two_pass_variance(const std::vector<RewardTable>& rewards) {
  if (rewards.empty()) {
    throw std::invalid_argument("two_pass_variance: empty set");
  }
  const double m = static_cast<double>(rewards.size());
  Matrix mean = Matrix::Zero(rewards[0].num_states(),
                             rewards[0].num_actions());
  for (const auto& r : rewards) mean += r.values;
  mean /= m;
  Matrix squares = Matrix::Zero(mean.rows(), mean.cols());
  for (const auto& r : rewards) {
    squares += (r.values - mean).cwiseAbs2();
  }
  // Population variance per (state, action), averaged over all entries.
  return squares.sum() / (m * static_cast<double>(mean.size()));
}

MedoidResult medoid_exhaustive(const std::vector<DiscreteMeasure>& measures,
                               const GroundMetric& metric, double order_p) {
  const std::size_t m = measures.size();
  if (m == 0) throw std::invalid_argument("medoid_exhaustive: empty set");
  MedoidResult best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < m; ++i) {
    double objective = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      objective +=
          exact_wasserstein(measures[i], measures[j], metric, order_p)
              .distance;
    }
    if (objective < best.objective) best = {static_cast<int>(i), objective};
  }
  return best;
}

Vector occupancy_forward(const TabularMdp& mdp, const Policy& policy,
                         int horizon) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  std::vector<double> alive(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) alive[static_cast<std::size_t>(s)] = mdp.start_distribution()(s);
  Vector occupancy = Vector::Zero(S * A);
  for (int t = 0; t < horizon; ++t) {
    std::vector<double> next(static_cast<std::size_t>(S), 0.0);
    for (int s = 0; s < S; ++s) {
      const double mass = alive[static_cast<std::size_t>(s)];
      if (mass <= 0.0) continue;
      for (int a = 0; a < A; ++a) {
        const double joint = mass * policy.action_probabilities(s, a);
        occupancy(flat_index(s, a, A)) += joint;
        if (mdp.is_terminal(s) || t + 1 == horizon) continue;
        for (int sp = 0; sp < S; ++sp) {
          next[static_cast<std::size_t>(sp)] +=
              joint * mdp.transition(s, a, sp);
        }
      }
    }
    alive = std::move(next);
  }
  return occupancy;
}

}  // namespace otra::oracles
