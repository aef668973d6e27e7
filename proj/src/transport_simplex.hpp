#pragma once

#include "otra/common.hpp"

namespace otra::detail {

/// Solves the balanced transportation problem
///   min <plan, cost>  s.t.  plan >= 0, plan * 1 = a, plan' * 1 = b
/// for strictly positive marginals a, b with (numerically) equal total
/// mass, by the transportation simplex on a spanning-tree basis.
///
/// Pivoting uses the most-negative reduced cost; after 50 consecutive
/// degenerate (zero-improvement) pivots it switches permanently to Bland's
/// smallest-index rule, which precludes cycling. Exceeding the pivot budget
/// raises NumericError.
Matrix solve_transport_lp(const Vector& a, const Vector& b,
                          const Matrix& cost);

}  // namespace otra::detail
