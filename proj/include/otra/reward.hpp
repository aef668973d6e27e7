#pragma once

#include <vector>

#include "otra/mdp.hpp"

namespace otra {

inline constexpr double kDefaultRewardBound = 10.0;
inline constexpr double kDefaultTemperature = 1.0;

/// Margin on the best-vs-second-best q gap below which a greedy argmax is
/// treated as numerically fragile by the policy-equivalence check.
inline constexpr double kQGapMargin = 1e-8;

/// Real-valued reward on state-action pairs, bounded by |value| <= bound.
struct RewardTable {
  Matrix values;  // num_states x num_actions
  double bound = kDefaultRewardBound;

  int num_states() const { return static_cast<int>(values.rows()); }
  int num_actions() const { return static_cast<int>(values.cols()); }
  int dimension() const { return num_states() * num_actions(); }

  double operator()(int state, int action) const {
    return values(state, action);
  }

  /// Entries in canonical flat_index order (state-major).
  Vector flattened() const;

  /// Clamps every entry into [-bound, bound] in place.
  void clip_to_bound();

  /// Throws std::invalid_argument on non-finite or out-of-bound entries.
  void validate() const;

  static RewardTable zeros(int num_states, int num_actions,
                           double bound = kDefaultRewardBound);
  static RewardTable from_flat(const Vector& flat, int num_states,
                               int num_actions,
                               double bound = kDefaultRewardBound);
};

/// Probability distribution over the d state-action indices. Weights are
/// nonnegative and sum to 1 within 1e-12; images of phi_embed are strictly
/// positive, but measures loaded from files may contain zeros (Diracs).
struct DiscreteMeasure {
  Vector weights;

  int size() const { return static_cast<int>(weights.size()); }

  /// Throws std::invalid_argument on negative entries or a total mass
  /// farther than 1e-12 from 1.
  void validate() const;

  /// Builds a measure by normalizing nonnegative weights to unit mass.
  static DiscreteMeasure normalized(Vector raw);
};

/// Softmax embedding of a reward table into a strictly positive measure
/// over its d state-action pairs:
///   w(s,a) proportional to exp(value(s,a) / temperature).
/// Overflow is guarded by max subtraction, so the map is invariant under
/// adding a constant to every reward entry.
DiscreteMeasure phi_embed(const RewardTable& reward, double temperature);

/// Potential-based shaping R'(s,a) = R(s,a) + discount * E[phi(s') | s, a]
/// - phi(s). Preserves the greedy argmax at every state. The transition
/// expectation comes from `mdp`; `discount` is passed explicitly so shaping
/// at a mismatched discount can be studied.
RewardTable potential_shaping(const TabularMdp& mdp, const RewardTable& reward,
                              const Vector& potential, double discount);

/// Outcome of a margin-checked policy comparison. A result is only
/// kEquivalent or kDifferent when floating-point noise cannot plausibly
/// flip it; fragile comparisons surface as kIndeterminate, never as a
/// silent boolean.
enum class Equivalence {
  kEquivalent,
  kDifferent,
  kIndeterminate,
};

/// Compares the greedy policies induced by r1 and r2 (value iteration at
/// tolerance 1e-10). Per-state rule: if both argmaxes agree the state is
/// consistent (identical tie-breaking is deterministic); if they disagree
/// and each argmax beats the other's choice by more than kQGapMargin in its
/// own q table, the state certifies a genuine difference; a disagreement
/// without that margin is fragile. One certified difference yields
/// kDifferent; otherwise any fragile state yields kIndeterminate; otherwise
/// kEquivalent.
Equivalence verify_policy_equivalence(const TabularMdp& mdp,
                                      const RewardTable& r1,
                                      const RewardTable& r2);

enum class GenerationMethod {
  kShaping,
  kPerturbAccept,
};

/// Generates `count` reward tables whose greedy policy equals that of
/// base_reward.
///
/// kShaping draws a random potential per sample, uniform on
/// (-noise_scale, noise_scale) per state, and applies potential_shaping at
/// the MDP discount. kPerturbAccept adds i.i.d. uniform(-noise_scale,
/// noise_scale) entry noise and rejection-samples until the greedy policy
/// matches, at most 10,000 rejections per sample. Outputs are clipped to
/// base_reward.bound and re-verified after clipping. Sample i draws from
/// seed + i, so the set is a pure function of the seed.
///
/// Throws std::invalid_argument when base_reward's greedy policy has a
/// fragile argmax (q gap <= kQGapMargin at some state); GenerationError
/// (carrying the acceptance rate) when the rejection budget is exhausted.
std::vector<RewardTable> generate_equivalent_rewards(
    const TabularMdp& mdp, const RewardTable& base_reward, int count,
    GenerationMethod method, double noise_scale, std::uint64_t seed);

/// Mean over state-action entries of the population variance across the
/// set: V = (1/d) * sum_{s,a} Var_i[R_i(s,a)].
double compute_reward_variance(const std::vector<RewardTable>& rewards);

}  // namespace otra
