#include "otra/reward.hpp"

#include <cmath>
#include <stdexcept>

namespace otra {

namespace {

constexpr int kMaxRejectionsPerSample = 10000;

struct GreedySolve {
  Policy policy;
  Matrix q;
};

GreedySolve solve_greedy(const TabularMdp& mdp, const RewardTable& reward) {
  auto vi = value_iteration(mdp, reward, 1e-10);
  Policy policy = greedy_policy(vi.q_values);
  return GreedySolve{std::move(policy), std::move(vi.q_values)};
}

int argmax_row(const Matrix& q, int s) {
  int arg = 0;
  for (int a = 1; a < q.cols(); ++a) {
    if (q(s, a) > q(s, arg)) arg = a;
  }
  return arg;
}

/// Best-vs-second-best q gap at state s (0 when only one action exists).
double q_gap(const Matrix& q, int s) {
  const int arg = argmax_row(q, s);
  double second = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < q.cols(); ++a) {
    if (a == arg) continue;
    second = std::max(second, q(s, a));
  }
  if (!std::isfinite(second)) return 0.0;
  return q(s, arg) - second;
}

}  // namespace

Vector RewardTable::flattened() const {
  const int S = num_states();
  const int A = num_actions();
  Vector flat(static_cast<Eigen::Index>(S) * A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      flat(flat_index(s, a, A)) = values(s, a);
    }
  }
  return flat;
}

void RewardTable::clip_to_bound() {
  values = values.cwiseMax(-bound).cwiseMin(bound);
}

void RewardTable::validate() const {
  if (!(bound > 0.0)) {
    throw std::invalid_argument("RewardTable: bound must be positive");
  }
  if (!values.allFinite()) {
    throw std::invalid_argument("RewardTable: non-finite entry");
  }
  if (values.cwiseAbs().maxCoeff() > bound) {
    throw std::invalid_argument("RewardTable: entry exceeds bound");
  }
}

RewardTable RewardTable::zeros(int num_states, int num_actions, double bound) {
  return RewardTable{Matrix::Zero(num_states, num_actions), bound};
}

RewardTable RewardTable::from_flat(const Vector& flat, int num_states,
                                   int num_actions, double bound) {
  if (flat.size() != static_cast<Eigen::Index>(num_states) * num_actions) {
    throw std::invalid_argument("RewardTable::from_flat: size mismatch");
  }
  Matrix values(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      values(s, a) = flat(flat_index(s, a, num_actions));
    }
  }
  return RewardTable{std::move(values), bound};
}

void DiscreteMeasure::validate() const {
  if (weights.size() == 0) {
    throw std::invalid_argument("DiscreteMeasure: empty weight vector");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double w = weights(i);
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("DiscreteMeasure: negative or non-finite weight");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("DiscreteMeasure: weights do not sum to 1");
  }
}

DiscreteMeasure DiscreteMeasure::normalized(Vector raw) {
  if (raw.size() == 0) {
    throw std::invalid_argument("DiscreteMeasure::normalized: empty weight vector");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (!(raw(i) >= 0.0) || !std::isfinite(raw(i))) {
      throw std::invalid_argument("DiscreteMeasure::normalized: negative or non-finite weight");
    }
    sum += raw(i);
  }
  if (!(sum > 0.0)) {
    throw std::invalid_argument("DiscreteMeasure::normalized: total mass must be positive");
  }
  raw /= sum;
  return DiscreteMeasure{std::move(raw)};
}

DiscreteMeasure phi_embed(const RewardTable& reward, double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("phi_embed: temperature must be positive");
  }
  Vector x = reward.flattened() / temperature;
  const double m = x.maxCoeff();
  Vector w = (x.array() - m).exp();
  w /= w.sum();
  return DiscreteMeasure{std::move(w)};
}

RewardTable potential_shaping(const TabularMdp& mdp, const RewardTable& reward,
                              const Vector& potential, double discount) {
  if (reward.num_states() != mdp.num_states() ||
      reward.num_actions() != mdp.num_actions()) {
    throw std::invalid_argument("potential_shaping: reward shape does not match MDP");
  }
  if (potential.size() != mdp.num_states()) {
    throw std::invalid_argument("potential_shaping: potential size mismatch");
  }
  if (!potential.allFinite()) {
    throw std::invalid_argument("potential_shaping: potential must be finite");
  }
  const Vector expected_next = mdp.transition_matrix() * potential;  // length S*A
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  Matrix shaped(S, A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      shaped(s, a) = reward.values(s, a) +
                     discount * expected_next(flat_index(s, a, A)) -
                     potential(s);
    }
  }
  return RewardTable{std::move(shaped), reward.bound};
}

Equivalence verify_policy_equivalence(const TabularMdp& mdp,
                                      const RewardTable& r1,
                                      const RewardTable& r2) {
  const auto s1 = solve_greedy(mdp, r1);
  const auto s2 = solve_greedy(mdp, r2);

  bool fragile = false;
  for (int s = 0; s < mdp.num_states(); ++s) {
    const int a1 = argmax_row(s1.q, s);
    const int a2 = argmax_row(s2.q, s);
    if (a1 == a2) continue;
    const double gap1 = s1.q(s, a1) - s1.q(s, a2);
    const double gap2 = s2.q(s, a2) - s2.q(s, a1);
    if (gap1 > kQGapMargin && gap2 > kQGapMargin) {
      return Equivalence::kDifferent;
    }
    fragile = true;
  }
  return fragile ? Equivalence::kIndeterminate : Equivalence::kEquivalent;
}

std::vector<RewardTable> generate_equivalent_rewards(
    const TabularMdp& mdp, const RewardTable& base_reward, int count,
    GenerationMethod method, double noise_scale, std::uint64_t seed) {
  if (count < 1) {
    throw std::invalid_argument("generate_equivalent_rewards: count must be positive");
  }
  if (!(noise_scale > 0.0)) {
    throw std::invalid_argument("generate_equivalent_rewards: noise_scale must be positive");
  }

  const auto base = solve_greedy(mdp, base_reward);
  for (int s = 0; s < mdp.num_states(); ++s) {
    if (q_gap(base.q, s) <= kQGapMargin) {
      throw std::invalid_argument(
          "generate_equivalent_rewards: base reward has a tied or fragile "
          "greedy argmax at state " + std::to_string(s));
    }
  }

  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  std::vector<RewardTable> out;
  out.reserve(count);
  long long attempts = 0;
  long long accepts = 0;

  for (int i = 0; i < count; ++i) {
    // Per-sample stream: sample i is reproducible in isolation as seed + i.
    Rng rng(seed + static_cast<std::uint64_t>(i));
    bool accepted = false;
    for (int rejection = 0; rejection <= kMaxRejectionsPerSample; ++rejection) {
      ++attempts;
      RewardTable candidate = base_reward;
      if (method == GenerationMethod::kShaping) {
        Vector potential(S);
        for (int s = 0; s < S; ++s) {
          potential(s) = rng.uniform(-noise_scale, noise_scale);
        }
        candidate = potential_shaping(mdp, base_reward, potential, mdp.discount());
      } else {
        for (int s = 0; s < S; ++s) {
          for (int a = 0; a < A; ++a) {
            candidate.values(s, a) += rng.uniform(-noise_scale, noise_scale);
          }
        }
      }
      candidate.clip_to_bound();
      if (verify_policy_equivalence(mdp, base_reward, candidate) ==
          Equivalence::kEquivalent) {
        ++accepts;
        out.push_back(std::move(candidate));
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      const double rate =
          attempts > 0 ? static_cast<double>(accepts) / static_cast<double>(attempts) : 0.0;
      throw GenerationError(
          "generate_equivalent_rewards: rejection budget exhausted at sample " +
              std::to_string(i) + " (acceptance rate " + std::to_string(rate) + ")",
          rate);
    }
  }
  return out;
}

double compute_reward_variance(const std::vector<RewardTable>& rewards) {
  if (rewards.size() < 2) {
    throw std::invalid_argument("compute_reward_variance: need at least 2 rewards");
  }
  const int S = rewards.front().num_states();
  const int A = rewards.front().num_actions();
  for (const auto& r : rewards) {
    if (r.num_states() != S || r.num_actions() != A) {
      throw std::invalid_argument("compute_reward_variance: shape mismatch");
    }
  }

  // Welford update over the set, per entry; the population variance per
  // entry is m2 / n.
  Matrix mean = Matrix::Zero(S, A);
  Matrix m2 = Matrix::Zero(S, A);
  int n = 0;
  for (const auto& r : rewards) {
    ++n;
    const Matrix delta = r.values - mean;
    mean += delta / n;
    m2 += delta.cwiseProduct(r.values - mean);
  }
  return m2.sum() / (static_cast<double>(n) * S * A);
}

}  // namespace otra
