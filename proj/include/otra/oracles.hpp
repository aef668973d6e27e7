#pragma once

#include <vector>

#include "otra/mdp.hpp"
#include "otra/ot.hpp"
#include "otra/reward.hpp"

namespace otra::oracles {

/// Minimum transport cost by brute-force enumeration of every candidate
/// basis (all supports of size n + m - 1), solving the marginal equations
/// with a least-squares factorization and keeping feasible solutions.
/// Exponential; refuses instances with more than ~2e6 candidate bases.
double transport_min_cost(const Vector& a, const Vector& b,
                          const Matrix& cost);

/// W_p between two measures supported on the real line at `positions`,
/// via the closed-form quantile coupling.
double line_wasserstein(const Vector& positions, const Vector& mu,
                        const Vector& nu, double order_p);

/// Discounted value of a stochastic policy by solving the linear system
/// (I - gamma * P_pi) v = r_pi directly.
Vector policy_value(const TabularMdp& mdp, const Policy& policy,
                    const RewardTable& reward);

/// Exhaustive search over all deterministic policies; returns the maximum
/// of the start-weighted value. Exponential (A^S); small MDPs only.
double best_deterministic_value(const TabularMdp& mdp,
                                const RewardTable& reward);

/// Two-pass (sum then centered sum of squares) population variance over
/// every entry of the set, checked against the streaming implementation.
double two_pass_variance(const std::vector<RewardTable>& rewards);

/// Exhaustive medoid: full pairwise distance table, no shortcuts.
MedoidResult medoid_exhaustive(const std::vector<DiscreteMeasure>& measures,
                               const GroundMetric& metric, double order_p);

/// Horizon-bounded occupancy of a fixed policy by scalar forward
/// recursion, independent of the matrix pipeline.
Vector occupancy_forward(const TabularMdp& mdp, const Policy& policy,
                         int horizon);

}  // namespace otra::oracles
