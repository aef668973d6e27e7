#include "otra/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "otra/reward.hpp"

namespace otra {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr int kMaxSweeps = 2000000;

void check_reward_shape(const TabularMdp& mdp, const RewardTable& reward) {
  if (reward.num_states() != mdp.num_states() ||
      reward.num_actions() != mdp.num_actions()) {
    throw std::invalid_argument("reward table shape does not match MDP");
  }
}

}  // namespace

TabularMdp::TabularMdp(int num_states, int num_actions, Matrix transitions,
                       Vector start_distribution, double discount,
                       std::optional<GridLayout> layout,
                       std::vector<int> terminal_states)
    : num_states_(num_states),
      num_actions_(num_actions),
      transitions_(std::move(transitions)),
      start_distribution_(std::move(start_distribution)),
      discount_(discount),
      layout_(layout),
      terminal_states_(std::move(terminal_states)) {
  if (num_states_ <= 0 || num_actions_ <= 0) {
    throw std::invalid_argument("TabularMdp: state and action counts must be positive");
  }
  if (transitions_.rows() != static_cast<Eigen::Index>(num_states_) * num_actions_ ||
      transitions_.cols() != num_states_) {
    throw std::invalid_argument("TabularMdp: transition matrix must be (S*A) x S");
  }
  if (start_distribution_.size() != num_states_) {
    throw std::invalid_argument("TabularMdp: start distribution size mismatch");
  }
  if (!(discount_ >= 0.0 && discount_ < 1.0)) {
    throw std::invalid_argument("TabularMdp: discount must lie in [0, 1)");
  }
  for (Eigen::Index r = 0; r < transitions_.rows(); ++r) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < transitions_.cols(); ++c) {
      const double p = transitions_(r, c);
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("TabularMdp: negative or non-finite transition probability");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kStochasticTol) {
      throw std::invalid_argument("TabularMdp: transition row does not sum to 1");
    }
  }
  double start_sum = 0.0;
  for (int s = 0; s < num_states_; ++s) {
    if (!(start_distribution_(s) >= 0.0)) {
      throw std::invalid_argument("TabularMdp: negative start probability");
    }
    start_sum += start_distribution_(s);
  }
  if (std::abs(start_sum - 1.0) > kStochasticTol) {
    throw std::invalid_argument("TabularMdp: start distribution does not sum to 1");
  }
  if (layout_ && layout_->width * layout_->height != num_states_) {
    throw std::invalid_argument("TabularMdp: layout does not match state count");
  }

  terminal_mask_.assign(num_states_, 0);
  for (int s : terminal_states_) {
    if (s < 0 || s >= num_states_) {
      throw std::invalid_argument("TabularMdp: terminal state out of range");
    }
    terminal_mask_[s] = 1;
  }

  successors_.resize(static_cast<std::size_t>(num_states_) * num_actions_);
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      const int row = flat_index(s, a, num_actions_);
      auto& list = successors_[row];
      for (int next = 0; next < num_states_; ++next) {
        const double p = transitions_(row, next);
        if (p > 0.0) {
          list.push_back(Successor{next, p, std::log(p)});
        }
      }
    }
  }
}

Policy Policy::deterministic(const std::vector<int>& actions, int num_actions) {
  Matrix probs = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), num_actions);
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] < 0 || actions[s] >= num_actions) {
      throw std::invalid_argument("Policy::deterministic: action index out of range");
    }
    probs(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
  }
  return Policy{std::move(probs)};
}

TabularMdp build_gridworld(int width, int height, double slip_probability,
                           double discount,
                           const std::vector<std::pair<int, int>>& goal_cells) {
  if (width <= 0 || height <= 0 || width * height < 2) {
    throw std::invalid_argument("build_gridworld: grid must contain at least 2 cells");
  }
  if (!(slip_probability >= 0.0 && slip_probability < 1.0)) {
    throw std::invalid_argument("build_gridworld: slip_probability must lie in [0, 1)");
  }
  const int num_states = width * height;
  const int num_actions = 5;

  std::vector<char> is_goal(num_states, 0);
  std::vector<int> terminals;
  for (const auto& [gx, gy] : goal_cells) {
    if (gx < 0 || gx >= width || gy < 0 || gy >= height) {
      throw std::invalid_argument("build_gridworld: goal cell out of bounds");
    }
    const int g = gy * width + gx;
    if (!is_goal[g]) {
      is_goal[g] = 1;
      terminals.push_back(g);
    }
  }
  std::sort(terminals.begin(), terminals.end());

  // Destination of each action's move effect, staying in place off-grid.
  auto move_dest = [&](int state, int action) {
    int x = state % width;
    int y = state / width;
    switch (action) {
      case kUp:    y = std::max(0, y - 1); break;
      case kDown:  y = std::min(height - 1, y + 1); break;
      case kLeft:  x = std::max(0, x - 1); break;
      case kRight: x = std::min(width - 1, x + 1); break;
      case kStay:  break;
      default:     break;
    }
    return y * width + x;
  };

  Matrix transitions = Matrix::Zero(static_cast<Eigen::Index>(num_states) * num_actions, num_states);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      const int row = flat_index(s, a, num_actions);
      if (is_goal[s]) {
        transitions(row, s) = 1.0;
        continue;
      }
      transitions(row, move_dest(s, a)) += 1.0 - slip_probability;
      for (int b = 0; b < num_actions; ++b) {
        if (b == a) continue;
        transitions(row, move_dest(s, b)) += slip_probability / (num_actions - 1);
      }
    }
  }

  Vector start = Vector::Zero(num_states);
  int free_cells = 0;
  for (int s = 0; s < num_states; ++s) {
    if (!is_goal[s]) ++free_cells;
  }
  if (free_cells == 0) {
    start.setConstant(1.0 / num_states);
  } else {
    for (int s = 0; s < num_states; ++s) {
      if (!is_goal[s]) start(s) = 1.0 / free_cells;
    }
  }

  return TabularMdp(num_states, num_actions, std::move(transitions), std::move(start),
                    discount, GridLayout{width, height}, std::move(terminals));
}

ValueIterationResult value_iteration(const TabularMdp& mdp,
                                     const RewardTable& reward,
                                     double tolerance) {
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("value_iteration: tolerance must be positive");
  }
  check_reward_shape(mdp, reward);

  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const Vector r = reward.flattened();
  const Matrix& T = mdp.transition_matrix();
  const double gamma = mdp.discount();

  Vector v = Vector::Zero(S);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const Vector q = r + gamma * (T * v);
    Vector v_next(S);
    for (int s = 0; s < S; ++s) {
      v_next(s) = q.segment(static_cast<Eigen::Index>(s) * A, A).maxCoeff();
    }
    const double change = (v_next - v).cwiseAbs().maxCoeff();
    v = v_next;
    if (change < tolerance) {
      Matrix q_values(S, A);
      const Vector q_final = r + gamma * (T * v);
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          q_values(s, a) = q_final(flat_index(s, a, A));
        }
      }
      return ValueIterationResult{std::move(v), std::move(q_values)};
    }
  }
  throw NumericError("value_iteration: sweep limit exceeded");
}

Policy greedy_policy(const Matrix& q_values) {
  const int S = static_cast<int>(q_values.rows());
  const int A = static_cast<int>(q_values.cols());
  if (!q_values.allFinite()) {
    throw std::invalid_argument("greedy_policy: q-values must be finite");
  }
  std::vector<int> best(S, 0);
  for (int s = 0; s < S; ++s) {
    int arg = 0;
    for (int a = 1; a < A; ++a) {
      if (q_values(s, a) > q_values(s, arg)) arg = a;
    }
    best[s] = arg;
  }
  return Policy::deterministic(best, A);
}

Matrix soft_value_iteration(const TabularMdp& mdp, const RewardTable& reward,
                            double tolerance) {
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("soft_value_iteration: tolerance must be positive");
  }
  check_reward_shape(mdp, reward);

  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const Vector r = reward.flattened();
  const Matrix& T = mdp.transition_matrix();
  const double gamma = mdp.discount();

  Vector v = Vector::Zero(S);
  double prev_change = std::numeric_limits<double>::infinity();
  int growth_streak = 0;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const Vector q = r + gamma * (T * v);
    Vector v_next(S);
    for (int s = 0; s < S; ++s) {
      v_next(s) = log_sum_exp(q.segment(static_cast<Eigen::Index>(s) * A, A));
    }
    const double change = (v_next - v).cwiseAbs().maxCoeff();
    v = v_next;
    if (change < tolerance) {
      const Vector q_final = r + gamma * (T * v);
      Matrix soft_q(S, A);
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
          soft_q(s, a) = q_final(flat_index(s, a, A));
        }
      }
      return soft_q;
    }
    growth_streak = (change > prev_change) ? growth_streak + 1 : 0;
    if (growth_streak >= 10) {
      throw NumericError("soft_value_iteration: residual grew over 10 consecutive sweeps");
    }
    prev_change = change;
  }
  throw NumericError("soft_value_iteration: sweep limit exceeded");
}

Policy softmax_policy(const Matrix& soft_q_values) {
  const int S = static_cast<int>(soft_q_values.rows());
  const int A = static_cast<int>(soft_q_values.cols());
  Matrix probs(S, A);
  for (int s = 0; s < S; ++s) {
    const Vector row = soft_q_values.row(s).transpose();
    const double m = row.maxCoeff();
    Vector w = (row.array() - m).exp();
    w /= w.sum();
    probs.row(s) = w.transpose();
  }
  return Policy{std::move(probs)};
}

std::vector<Trajectory> sample_trajectories(const TabularMdp& mdp,
                                            const Policy& policy, int count,
                                            int horizon, std::uint64_t seed) {
  if (count < 1) {
    throw std::invalid_argument("sample_trajectories: count must be positive");
  }
  if (horizon < 1) {
    throw std::invalid_argument("sample_trajectories: horizon must be positive");
  }
  if (policy.num_states() != mdp.num_states() ||
      policy.num_actions() != mdp.num_actions()) {
    throw std::invalid_argument("sample_trajectories: policy shape does not match MDP");
  }

  // One draw per start, per action, per transition, in that fixed order, so
  // the output is a pure function of the seed.
  Rng rng(seed);
  std::vector<Trajectory> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Trajectory traj;
    int s = rng.categorical(mdp.start_distribution());
    for (int t = 0; t < horizon; ++t) {
      const Vector action_row = policy.action_probabilities.row(s).transpose();
      const int a = rng.categorical(action_row);
      traj.steps.emplace_back(s, a);
      if (mdp.is_terminal(s) || t == horizon - 1) break;
      const auto& succ = mdp.successors(s, a);
      const double u = rng.uniform();
      double acc = 0.0;
      int next = succ.back().state;
      for (const auto& sc : succ) {
        acc += sc.prob;
        if (u < acc) {
          next = sc.state;
          break;
        }
      }
      s = next;
    }
    out.push_back(std::move(traj));
  }
  return out;
}

}  // namespace otra
