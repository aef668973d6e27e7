#include "otra/common.hpp"

#include <cmath>
#include <limits>

namespace otra {

double log_sum_exp(const Vector& x) {
  if (x.size() == 0) return -std::numeric_limits<double>::infinity();
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

Vector log_sum_exp_rows(const Matrix& m) {
  Vector out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out(i) = log_sum_exp(m.row(i).transpose());
  }
  return out;
}

double Rng::normal() {
  // Box-Muller, cartesian form rejected in favor of the polar-free basic
  // transform so the draw count per call is fixed at two.
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int Rng::categorical(const Vector& weights) {
  const double total = weights.sum();
  if (!(total > 0.0)) {
    throw std::invalid_argument("categorical: weights must have positive sum");
  }
  const double r = uniform() * total;
  double acc = 0.0;
  const int n = static_cast<int>(weights.size());
  for (int i = 0; i < n; ++i) {
    acc += weights(i);
    if (r < acc) return i;
  }
  return n - 1;
}

}  // namespace otra
