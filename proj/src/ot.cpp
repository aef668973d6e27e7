#include "otra/ot.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "transport_simplex.hpp"

namespace otra {

namespace {

Matrix costs_to_power(const Matrix& costs, double order_p) {
  if (order_p == 1.0) return costs;
  if (order_p == 2.0) return costs.cwiseProduct(costs);
  return costs.array().pow(order_p).matrix();
}

}  // namespace

void GroundMetric::validate() const {
  if (costs.rows() != costs.cols() || costs.rows() == 0) {
    throw std::invalid_argument("GroundMetric: cost matrix must be square and nonempty");
  }
  for (Eigen::Index i = 0; i < costs.rows(); ++i) {
    if (costs(i, i) != 0.0) {
      throw std::invalid_argument("GroundMetric: diagonal must be zero");
    }
    for (Eigen::Index j = 0; j < costs.cols(); ++j) {
      const double c = costs(i, j);
      if (!(c >= 0.0) || !std::isfinite(c)) {
        throw std::invalid_argument("GroundMetric: negative or non-finite cost");
      }
      if (std::abs(c - costs(j, i)) > 1e-12) {
        throw std::invalid_argument("GroundMetric: cost matrix must be symmetric");
      }
    }
  }
}

GroundMetric ground_metric_gridworld(const TabularMdp& mdp,
                                     double action_penalty) {
  if (!mdp.layout()) {
    throw std::invalid_argument("ground_metric_gridworld: MDP has no grid layout");
  }
  if (!(action_penalty >= 0.0)) {
    throw std::invalid_argument("ground_metric_gridworld: action_penalty must be nonnegative");
  }
  const int width = mdp.layout()->width;
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int d = S * A;

  Matrix costs(d, d);
  for (int s1 = 0; s1 < S; ++s1) {
    const int x1 = s1 % width;
    const int y1 = s1 / width;
    for (int s2 = 0; s2 < S; ++s2) {
      const int x2 = s2 % width;
      const int y2 = s2 / width;
      const double manhattan = std::abs(x1 - x2) + std::abs(y1 - y2);
      for (int a1 = 0; a1 < A; ++a1) {
        for (int a2 = 0; a2 < A; ++a2) {
          costs(flat_index(s1, a1, A), flat_index(s2, a2, A)) =
              manhattan + (a1 != a2 ? action_penalty : 0.0);
        }
      }
    }
  }
  return GroundMetric{std::move(costs)};
}

ExactTransportResult exact_wasserstein(const DiscreteMeasure& mu,
                                       const DiscreteMeasure& nu,
                                       const GroundMetric& metric,
                                       double order_p) {
  mu.validate();
  nu.validate();
  if (!(order_p >= 1.0)) {
    throw std::invalid_argument("exact_wasserstein: order_p must be at least 1");
  }
  const int d = metric.size();
  if (mu.size() != d || nu.size() != d) {
    throw std::invalid_argument("exact_wasserstein: dimension mismatch");
  }

  // Strip zero-mass support points so the LP sees strictly positive
  // marginals (Dirac inputs become 1x1 problems).
  std::vector<int> rows;
  std::vector<int> cols;
  for (int i = 0; i < d; ++i) {
    if (mu.weights(i) > 0.0) rows.push_back(i);
    if (nu.weights(i) > 0.0) cols.push_back(i);
  }
  const int n = static_cast<int>(rows.size());
  const int m = static_cast<int>(cols.size());

  Vector a(n);
  for (int i = 0; i < n; ++i) a(i) = mu.weights(rows[i]);
  Vector b(m);
  for (int j = 0; j < m; ++j) b(j) = nu.weights(cols[j]);
  a /= a.sum();
  b /= b.sum();

  Matrix sub_cost(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double c = metric.costs(rows[i], cols[j]);
      sub_cost(i, j) = order_p == 1.0
                           ? c
                           : (order_p == 2.0 ? c * c : std::pow(c, order_p));
    }
  }

  const Matrix sub_plan = detail::solve_transport_lp(a, b, sub_cost);

  Matrix coupling = Matrix::Zero(d, d);
  double objective = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      coupling(rows[i], cols[j]) = sub_plan(i, j);
      objective += sub_plan(i, j) * sub_cost(i, j);
    }
  }
  const double distance = std::pow(std::max(objective, 0.0), 1.0 / order_p);
  return ExactTransportResult{
      distance, TransportPlan{std::move(coupling), mu.weights, nu.weights}};
}

MedoidResult medoid_centroid(const std::vector<DiscreteMeasure>& measures,
                             const GroundMetric& metric, double order_p) {
  if (measures.empty()) {
    throw std::invalid_argument("medoid_centroid: empty measure set");
  }
  const int m = static_cast<int>(measures.size());
  if (m == 1) return MedoidResult{0, 0.0};

  Matrix dist = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      dist(i, j) = dist(j, i) =
          exact_wasserstein(measures[i], measures[j], metric, order_p).distance;
    }
  }
  int best = 0;
  double best_sum = dist.row(0).sum();
  for (int i = 1; i < m; ++i) {
    const double sum = dist.row(i).sum();
    if (sum < best_sum) {
      best = i;
      best_sum = sum;
    }
  }
  return MedoidResult{best, best_sum};
}

Matrix pairwise_distance_matrix(const std::vector<DiscreteMeasure>& measures,
                                const GroundMetric& metric, double order_p,
                                OtSolver solver, const OtConfig& config) {
  if (measures.size() < 2) {
    throw std::invalid_argument("pairwise_distance_matrix: need at least 2 measures");
  }
  const int m = static_cast<int>(measures.size());
  Matrix dist = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double value = 0.0;
      if (solver == OtSolver::kExact) {
        value = exact_wasserstein(measures[i], measures[j], metric, order_p).distance;
      } else {
        OtConfig pair_config = config;
        pair_config.order_p = order_p;
        const auto result =
            sinkhorn_distance(measures[i], measures[j], metric, pair_config);
        if (!result.converged) {
          throw NumericError("pairwise_distance_matrix: Sinkhorn did not converge for pair (" +
                             std::to_string(i) + ", " + std::to_string(j) + ")");
        }
        value = result.value;
      }
      dist(i, j) = dist(j, i) = value;
    }
  }
  return dist;
}

std::vector<ConvexityPoint> convexity_probe(
    const RewardTable& r1, const RewardTable& r2,
    const DiscreteMeasure& reference, const GroundMetric& metric,
    const std::vector<double>& t_grid, double temperature, double order_p) {
  if (r1.num_states() != r2.num_states() ||
      r1.num_actions() != r2.num_actions()) {
    throw std::invalid_argument("convexity_probe: reward shape mismatch");
  }
  for (double t : t_grid) {
    if (!(t > 0.0 && t < 1.0)) {
      throw std::invalid_argument("convexity_probe: t values must lie in (0, 1)");
    }
  }
  const double bound = std::max(r1.bound, r2.bound);
  const double w1 =
      exact_wasserstein(phi_embed(r1, temperature), reference, metric, order_p)
          .distance;
  const double w2 =
      exact_wasserstein(phi_embed(r2, temperature), reference, metric, order_p)
          .distance;

  std::vector<ConvexityPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    RewardTable mix{t * r1.values + (1.0 - t) * r2.values, bound};
    const double lhs =
        exact_wasserstein(phi_embed(mix, temperature), reference, metric,
                          order_p)
            .distance;
    out.push_back(ConvexityPoint{t, lhs, t * w1 + (1.0 - t) * w2});
  }
  return out;
}

}  // namespace otra
