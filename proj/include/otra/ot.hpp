#pragma once

#include <vector>

#include "otra/mdp.hpp"
#include "otra/reward.hpp"

namespace otra {

/// Symmetric nonnegative cost matrix with zero diagonal over the d support
/// points (state-action pairs in flat_index order).
struct GroundMetric {
  Matrix costs;

  int size() const { return static_cast<int>(costs.rows()); }

  /// Largest pairwise cost; upper bound for any W_p on this metric.
  double diameter() const { return costs.maxCoeff(); }

  /// Throws std::invalid_argument on asymmetry, a nonzero diagonal, or
  /// negative entries. The triangle inequality is not checked here (it is
  /// exercised exhaustively in tests at small d).
  void validate() const;
};

/// Coupling with prescribed marginals; optimizer of the transport problem.
struct TransportPlan {
  Matrix coupling;
  Vector source_marginal;
  Vector target_marginal;
};

/// Solver knobs. `order_p` is the Wasserstein order used by operations that
/// do not take an explicit order parameter; where an operation has an
/// explicit order_p argument, that argument wins.
struct OtConfig {
  double order_p = 2.0;
  double reg_epsilon = 0.05;
  int max_iterations = 5000;
  double convergence_tol = 1e-7;

  void validate() const;
};

/// cost((s,a),(s',a')) = manhattan(s,s') + action_penalty * [a != a'] on the
/// MDP's grid layout. The sum of a metric on states and a scaled discrete
/// metric on actions, hence itself a metric.
GroundMetric ground_metric_gridworld(const TabularMdp& mdp,
                                     double action_penalty);

struct ExactTransportResult {
  double distance;
  TransportPlan plan;
};

/// Exact p-Wasserstein distance by the transportation-simplex LP on the
/// cost matrix raised to the p-th power:
///   distance = (sum_ij plan(i,j) * costs(i,j)^p)^(1/p).
/// Zero-mass support points are allowed (Dirac inputs); the returned plan
/// has the full d x d shape with the input measures as marginals.
ExactTransportResult exact_wasserstein(const DiscreteMeasure& mu,
                                       const DiscreteMeasure& nu,
                                       const GroundMetric& metric,
                                       double order_p);

/// Optional warm start for sinkhorn_distance: dual potentials from a prior
/// solve at nearby regularization. Updated in place with the final
/// potentials of the run.
struct SinkhornPotentials {
  Vector f;
  Vector g;
};

struct SinkhornResult {
  double value;
  bool converged;
  int iterations;
};

/// Entropic transport cost at regularization config.reg_epsilon, reported
/// as (<plan, cost^p>)^(1/p) with the entropy term excluded. Runs entirely
/// in the log domain. Convergence means the sup-norm row-marginal violation
/// dropped below config.convergence_tol; hitting max_iterations instead
/// yields converged=false, never a silent value. Requires strictly positive
/// measures.
SinkhornResult sinkhorn_distance(const DiscreteMeasure& mu,
                                 const DiscreteMeasure& nu,
                                 const GroundMetric& metric,
                                 const OtConfig& config,
                                 SinkhornPotentials* warm = nullptr);

struct MedoidResult {
  int index;
  double objective;
};

/// Member of the set minimizing sum_i W_p(candidate, mu_i), computed with
/// the exact solver; ties broken by lowest index.
MedoidResult medoid_centroid(const std::vector<DiscreteMeasure>& measures,
                             const GroundMetric& metric, double order_p);

struct BarycenterResult {
  DiscreteMeasure barycenter;
  bool converged;
  int iterations;
};

/// Fixed-support entropic Wasserstein barycenter by iterative Bregman
/// projections with debiasing (an autocorrelation potential is maintained
/// alongside the couplings), at order config.order_p. Debiasing removes the
/// entropic blur: the barycenter of identical inputs is that input, not a
/// smoothed copy. `initial` optionally overrides the uniform starting
/// point (multi-start probes). Convergence means the sup-norm change of
/// the barycenter weights between sweeps fell below config.convergence_tol.
BarycenterResult wasserstein_barycenter(
    const std::vector<DiscreteMeasure>& measures, const Vector& weights,
    const GroundMetric& metric, const OtConfig& config,
    const Vector* initial = nullptr);

enum class OtSolver {
  kExact,
  kSinkhorn,
};

/// Symmetric zero-diagonal matrix of pairwise distances; each unordered
/// pair is computed once and mirrored.
Matrix pairwise_distance_matrix(const std::vector<DiscreteMeasure>& measures,
                                const GroundMetric& metric, double order_p,
                                OtSolver solver, const OtConfig& config);

struct ConvexityPoint {
  double t;
  double lhs;
  double rhs;
};

/// Samples f(t) = W_p(phi(t*R1 + (1-t)*R2), reference) against the chord
/// t*W_p(phi(R1), reference) + (1-t)*W_p(phi(R2), reference). Returns the
/// raw (t, lhs, rhs) table; no inequality is asserted, because convexity of
/// reward mixtures need not survive the softmax embedding.
std::vector<ConvexityPoint> convexity_probe(
    const RewardTable& r1, const RewardTable& r2,
    const DiscreteMeasure& reference, const GroundMetric& metric,
    const std::vector<double>& t_grid, double temperature, double order_p);

}  // namespace otra
