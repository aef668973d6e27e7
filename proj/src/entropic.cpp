#include <cmath>
#include <stdexcept>
#include <vector>

#include "otra/ot.hpp"

namespace otra {

namespace {

/// Row-wise log-matvec against a symmetric log-kernel:
///   out_i = LSE_j(log_kernel(i,j) + phi_j).
Vector log_kernel_apply(const Matrix& log_kernel, const Vector& phi) {
  const Eigen::Index d = log_kernel.rows();
  const double shift = phi.maxCoeff();
  if (!std::isfinite(shift)) {
    // All-(-inf) potential: the image is -inf everywhere.
    return Vector::Constant(d, shift);
  }
  const Vector scaled = (phi.array() - shift).exp();
  Vector out(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double acc = 0.0;
    double row_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < d; ++j) {
      row_max = std::max(row_max, log_kernel(i, j));
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      acc += std::exp(log_kernel(i, j) - row_max) * scaled(j);
    }
    out(i) = row_max + shift + std::log(acc);
  }
  return out;
}

Matrix power_costs(const GroundMetric& metric, double order_p) {
  if (!(order_p >= 1.0)) {
    throw std::invalid_argument("order_p must be at least 1");
  }
  if (order_p == 1.0) return metric.costs;
  if (order_p == 2.0) return metric.costs.cwiseProduct(metric.costs);
  return metric.costs.array().pow(order_p).matrix();
}

}  // namespace

void OtConfig::validate() const {
  if (!(order_p >= 1.0)) {
    throw std::invalid_argument("OtConfig: order_p must be at least 1");
  }
  if (!(reg_epsilon > 0.0)) {
    throw std::invalid_argument("OtConfig: reg_epsilon must be positive");
  }
  if (max_iterations < 1) {
    throw std::invalid_argument("OtConfig: max_iterations must be positive");
  }
  if (!(convergence_tol > 0.0)) {
    throw std::invalid_argument("OtConfig: convergence_tol must be positive");
  }
}

SinkhornResult sinkhorn_distance(const DiscreteMeasure& mu,
                                 const DiscreteMeasure& nu,
                                 const GroundMetric& metric,
                                 const OtConfig& config,
                                 SinkhornPotentials* warm) {
  config.validate();
  mu.validate();
  nu.validate();
  const int d = metric.size();
  if (mu.size() != d || nu.size() != d) {
    throw std::invalid_argument("sinkhorn_distance: dimension mismatch");
  }
  if (mu.weights.minCoeff() <= 0.0 || nu.weights.minCoeff() <= 0.0) {
    throw std::invalid_argument(
        "sinkhorn_distance: measures must be strictly positive");
  }

  const double eps = config.reg_epsilon;
  const Matrix m_cost = power_costs(metric, config.order_p);
  const Vector log_a = mu.weights.array().log();
  const Vector log_b = nu.weights.array().log();

  Vector f = Vector::Zero(d);
  Vector g = Vector::Zero(d);
  if (warm && warm->f.size() == d && warm->g.size() == d) {
    f = warm->f;
    g = warm->g;
  }

  // Plan convention: plan(i,j) = exp((f_i + g_j - m_cost(i,j)) / eps).
  // A g-update makes column marginals exact; the row-marginal violation is
  // read off the same log-sum-exp that the next f-update needs.
  bool converged = false;
  int iterations = 0;
  const Matrix neg_cost_over_eps = -m_cost / eps;
  Vector t(d);
  Vector s(d);
  while (iterations < config.max_iterations) {
    ++iterations;
    const Vector g_scaled = g / eps;
    for (int i = 0; i < d; ++i) {
      t(i) = log_sum_exp(neg_cost_over_eps.row(i).transpose() + g_scaled);
    }
    const double violation =
        ((f / eps + t).array().exp() - mu.weights.array()).abs().maxCoeff();
    if (violation < config.convergence_tol) {
      converged = true;
      break;
    }
    f = eps * (log_a - t);
    const Vector f_scaled = f / eps;
    for (int j = 0; j < d; ++j) {
      s(j) = log_sum_exp(neg_cost_over_eps.row(j).transpose() + f_scaled);
    }
    g = eps * (log_b - s);
  }

  double cost = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double log_plan = (f(i) + g(j) - m_cost(i, j)) / eps;
      cost += std::exp(log_plan) * m_cost(i, j);
    }
  }
  if (warm) {
    warm->f = f;
    warm->g = g;
  }
  const double value = std::pow(std::max(cost, 0.0), 1.0 / config.order_p);
  return SinkhornResult{value, converged, iterations};
}

BarycenterResult wasserstein_barycenter(
    const std::vector<DiscreteMeasure>& measures, const Vector& weights,
    const GroundMetric& metric, const OtConfig& config,
    const Vector* initial) {
  config.validate();
  if (measures.empty()) {
    throw std::invalid_argument("wasserstein_barycenter: empty measure set");
  }
  const int d = metric.size();
  const int k = static_cast<int>(measures.size());
  if (weights.size() != k) {
    throw std::invalid_argument("wasserstein_barycenter: weight count mismatch");
  }
  if (weights.minCoeff() < 0.0 || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "wasserstein_barycenter: weights must be a probability vector");
  }
  for (const auto& m : measures) {
    m.validate();
    if (m.size() != d) {
      throw std::invalid_argument("wasserstein_barycenter: support mismatch");
    }
  }

  const double eps = config.reg_epsilon;
  const Matrix log_kernel = -power_costs(metric, config.order_p) / eps;

  Vector log_b(d);
  if (initial) {
    if (initial->size() != d || initial->minCoeff() <= 0.0) {
      throw std::invalid_argument(
          "wasserstein_barycenter: initial point must be strictly positive on the support");
    }
    log_b = initial->array().log();
    log_b.array() -= log_sum_exp(log_b);
  } else {
    log_b.setConstant(-std::log(static_cast<double>(d)));
  }

  std::vector<Vector> log_mu(k);
  for (int i = 0; i < k; ++i) {
    log_mu[i] = measures[i].weights.array().log();
  }

  // Iterative Bregman projections with a debiasing autocorrelation
  // potential log_c; without it the fixed point is an entropically blurred
  // barycenter and even the barycenter of identical inputs is not that
  // input.
  std::vector<Vector> log_u(k, Vector::Zero(d));
  Vector log_c = log_b;

  bool converged = false;
  int iterations = 0;
  Vector b_prev = log_b.array().exp();
  while (iterations < config.max_iterations) {
    ++iterations;
    Vector mix = log_c;
    std::vector<Vector> log_kv(k);
    for (int i = 0; i < k; ++i) {
      const Vector log_v = log_mu[i] - log_kernel_apply(log_kernel, log_u[i]);
      log_kv[i] = log_kernel_apply(log_kernel, log_v);
      mix += weights(i) * log_kv[i];
    }
    mix.array() -= log_sum_exp(mix);
    for (int i = 0; i < k; ++i) {
      log_u[i] = mix - log_kv[i];
    }
    log_c = 0.5 * (log_c + mix - log_kernel_apply(log_kernel, log_c));
    log_b = mix;

    Vector b_now = log_b.array().exp();
    const double change = (b_now - b_prev).cwiseAbs().maxCoeff();
    b_prev = std::move(b_now);
    if (change < config.convergence_tol) {
      converged = true;
      break;
    }
  }

  Vector b = log_b.array().exp();
  b /= b.sum();
  return BarycenterResult{DiscreteMeasure{std::move(b)}, converged, iterations};
}

}  // namespace otra
