#include "otra/irl.hpp"

#include <cmath>
#include <stdexcept>

namespace otra {

namespace {

// Backward pass of the maximum-entropy trajectory model. For each step t,
//   scores_t(s,a) = R(s,a) + cont_t(s,a),
//   cont_t(s,a)   = log sum_s' P(s'|s,a) Z_{t+1}(s')   (0 when the episode
//                   ends at s: terminal state or final step),
//   log Z_t(s)    = log sum_a exp(scores_t(s,a)).
// pi_t(a|s) = exp(scores_t(s,a) - log Z_t(s)) is the model's conditional
// action distribution given survival to (t, s).
struct SoftBackward {
  std::vector<Vector> scores;  // horizon entries, each of size d
  std::vector<Vector> cont;    // same layout; -inf marks "episode ends"
  std::vector<Vector> log_z;   // horizon entries, each of size S
};

SoftBackward soft_backward(const TabularMdp& mdp, const RewardTable& reward,
                           int horizon) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int d = S * A;
  const Vector r = reward.flattened();
  const Matrix& T = mdp.transition_matrix();

  SoftBackward out;
  out.scores.resize(horizon);
  out.cont.resize(horizon);
  out.log_z.resize(horizon);

  Vector log_z_next;
  for (int t = horizon - 1; t >= 0; --t) {
    Vector cont = Vector::Zero(d);
    if (t < horizon - 1) {
      const double shift = log_z_next.maxCoeff();
      const Vector ez = (log_z_next.array() - shift).exp();
      const Vector w = T * ez;
      for (int s = 0; s < S; ++s) {
        if (mdp.is_terminal(s)) continue;
        for (int a = 0; a < A; ++a) {
          const int idx = flat_index(s, a, A);
          cont(idx) = std::log(w(idx)) + shift;
        }
      }
    }
    Vector scores = r + cont;
    Vector log_z(S);
    for (int s = 0; s < S; ++s) {
      log_z(s) = log_sum_exp(scores.segment(static_cast<Eigen::Index>(s) * A, A));
    }
    out.scores[t] = std::move(scores);
    out.cont[t] = std::move(cont);
    out.log_z[t] = log_z;
    log_z_next = std::move(log_z);
  }
  return out;
}

// Forward pass: posterior state-action marginals of the model. Transitions
// are tilted by the downstream partition values,
//   P_t(s'|s,a) proportional to P(s'|s,a) * Z_{t+1}(s'),
// which is what makes sum_t marginals the exact gradient of log Z.
Vector soft_forward_visits(const TabularMdp& mdp, const SoftBackward& bw,
                           int horizon, const Vector& start) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int d = S * A;

  Vector visits = Vector::Zero(d);
  Vector alive = start;
  for (int t = 0; t < horizon; ++t) {
    Vector joint(d);
    for (int s = 0; s < S; ++s) {
      const double mass = alive(s);
      for (int a = 0; a < A; ++a) {
        const int idx = flat_index(s, a, A);
        joint(idx) =
            mass > 0.0
                ? mass * std::exp(bw.scores[t](idx) - bw.log_z[t](s))
                : 0.0;
      }
    }
    visits += joint;
    if (t == horizon - 1) break;
    Vector next = Vector::Zero(S);
    const Vector& log_z_next = bw.log_z[t + 1];
    for (int s = 0; s < S; ++s) {
      if (mdp.is_terminal(s)) continue;
      for (int a = 0; a < A; ++a) {
        const int idx = flat_index(s, a, A);
        const double mass = joint(idx);
        if (mass <= 0.0) continue;
        const double denom = bw.cont[t](idx);
        for (const auto& sc : mdp.successors(s, a)) {
          next(sc.state) +=
              mass * sc.prob * std::exp(log_z_next(sc.state) - denom);
        }
      }
    }
    alive = std::move(next);
  }
  return visits;
}

void check_trajectories(const std::vector<Trajectory>& trajectories,
                        const TabularMdp& mdp) {
  if (trajectories.empty()) {
    throw std::invalid_argument("trajectory list must be nonempty");
  }
  for (const auto& traj : trajectories) {
    if (traj.steps.empty()) {
      throw std::invalid_argument("trajectory must be nonempty");
    }
    for (const auto& [s, a] : traj.steps) {
      if (s < 0 || s >= mdp.num_states() || a < 0 || a >= mdp.num_actions()) {
        throw std::invalid_argument("trajectory step index out of range");
      }
    }
  }
}

Vector empirical_start_frequencies(const std::vector<Trajectory>& trajectories,
                                   int num_states) {
  Vector freq = Vector::Zero(num_states);
  for (const auto& traj : trajectories) {
    freq(traj.steps.front().first) += 1.0;
  }
  freq /= static_cast<double>(trajectories.size());
  return freq;
}

}  // namespace

void IrlConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("IrlConfig: learning_rate must be positive");
  }
  if (iterations < 0) {
    throw std::invalid_argument("IrlConfig: iterations must be nonnegative");
  }
  if (!(l2_penalty >= 0.0)) {
    throw std::invalid_argument("IrlConfig: l2_penalty must be nonnegative");
  }
  if (!(soft_vi_tolerance > 0.0)) {
    throw std::invalid_argument("IrlConfig: soft_vi_tolerance must be positive");
  }
  if (horizon < 1) {
    throw std::invalid_argument("IrlConfig: horizon must be positive");
  }
}

Vector empirical_visitation(const std::vector<Trajectory>& trajectories,
                            const TabularMdp& mdp) {
  check_trajectories(trajectories, mdp);
  const int A = mdp.num_actions();
  Vector counts = Vector::Zero(mdp.dimension());
  for (const auto& traj : trajectories) {
    for (const auto& [s, a] : traj.steps) {
      counts(flat_index(s, a, A)) += 1.0;
    }
  }
  counts /= static_cast<double>(trajectories.size());
  return counts;
}

Vector expected_visitation(const TabularMdp& mdp, const RewardTable& reward,
                           const IrlConfig& config,
                           const Vector* start_override) {
  config.validate();
  if (reward.num_states() != mdp.num_states() ||
      reward.num_actions() != mdp.num_actions()) {
    throw std::invalid_argument("expected_visitation: reward shape mismatch");
  }
  const Vector& start =
      start_override ? *start_override : mdp.start_distribution();
  if (start.size() != mdp.num_states()) {
    throw std::invalid_argument("expected_visitation: start distribution size mismatch");
  }
  const SoftBackward bw = soft_backward(mdp, reward, config.horizon);
  return soft_forward_visits(mdp, bw, config.horizon, start);
}

std::vector<Matrix> maxent_step_policies(const TabularMdp& mdp,
                                         const RewardTable& reward,
                                         const IrlConfig& config) {
  config.validate();
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const SoftBackward bw = soft_backward(mdp, reward, config.horizon);
  std::vector<Matrix> policies(config.horizon);
  for (int t = 0; t < config.horizon; ++t) {
    Matrix pi(S, A);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        pi(s, a) = std::exp(bw.scores[t](flat_index(s, a, A)) - bw.log_z[t](s));
      }
    }
    policies[t] = std::move(pi);
  }
  return policies;
}

double log_likelihood(const TabularMdp& mdp,
                      const std::vector<Trajectory>& trajectories,
                      const RewardTable& reward, const IrlConfig& config) {
  config.validate();
  check_trajectories(trajectories, mdp);
  const Vector r = reward.flattened();
  const Vector emp = empirical_visitation(trajectories, mdp);
  const Vector starts = empirical_start_frequencies(trajectories, mdp.num_states());
  const SoftBackward bw = soft_backward(mdp, reward, config.horizon);

  double value = emp.dot(r);
  for (int s = 0; s < mdp.num_states(); ++s) {
    if (starts(s) > 0.0) value -= starts(s) * bw.log_z[0](s);
  }
  value -= 0.5 * config.l2_penalty * r.squaredNorm();
  return value;
}

Vector irl_gradient(const TabularMdp& mdp,
                    const std::vector<Trajectory>& trajectories,
                    const RewardTable& reward, const IrlConfig& config) {
  check_trajectories(trajectories, mdp);
  const Vector emp = empirical_visitation(trajectories, mdp);
  const Vector starts = empirical_start_frequencies(trajectories, mdp.num_states());
  const Vector expected = expected_visitation(mdp, reward, config, &starts);
  return emp - expected - config.l2_penalty * reward.flattened();
}

RewardTable maxent_irl(const TabularMdp& mdp,
                       const std::vector<Trajectory>& trajectories,
                       const IrlConfig& config, std::uint64_t seed) {
  (void)seed;
  config.validate();
  check_trajectories(trajectories, mdp);

  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const Vector emp = empirical_visitation(trajectories, mdp);
  const Vector starts = empirical_start_frequencies(trajectories, S);

  RewardTable reward = RewardTable::zeros(S, A);
  for (int it = 0; it < config.iterations; ++it) {
    const Vector expected = expected_visitation(mdp, reward, config, &starts);
    const Vector gradient =
        emp - expected - config.l2_penalty * reward.flattened();
    if (gradient.norm() > 1e6) {
      throw NumericError("maxent_irl: gradient norm exceeded 1e6");
    }
    reward = RewardTable::from_flat(
        reward.flattened() + config.learning_rate * gradient, S, A,
        reward.bound);
    reward.clip_to_bound();
  }
  return reward;
}

}  // namespace otra
