#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "otra/common.hpp"

namespace otra {

struct RewardTable;

/// Grid metadata attached to gridworld MDPs; consumed by the ground-metric
/// builder. States are laid out row-major: state = y * width + x.
struct GridLayout {
  int width = 0;
  int height = 0;
};

/// Gridworld action set. Fixed at five actions so the state-action
/// dimension d = 5 * width * height is predictable across sweep sizes.
enum GridAction : int {
  kUp = 0,
  kDown = 1,
  kLeft = 2,
  kRight = 3,
  kStay = 4,
};

/// Finite MDP with dense transition model.
///
/// Transitions are stored as a (num_states * num_actions) x num_states
/// matrix whose row flat_index(s, a) holds P(. | s, a). A sparse successor
/// list per (s, a) is precomputed for samplers and occupancy recursions.
///
/// Terminal states are tracked explicitly rather than inferred from
/// self-loop structure: hand-built MDPs may contain self-loops that are not
/// episode ends, while gridworld goal cells are.
class TabularMdp {
 public:
  struct Successor {
    int state;
    double prob;
    double log_prob;
  };

  TabularMdp(int num_states, int num_actions, Matrix transitions,
             Vector start_distribution, double discount,
             std::optional<GridLayout> layout = std::nullopt,
             std::vector<int> terminal_states = {});

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  /// Total number of state-action pairs.
  int dimension() const { return num_states_ * num_actions_; }

  double discount() const { return discount_; }
  const Vector& start_distribution() const { return start_distribution_; }
  const std::optional<GridLayout>& layout() const { return layout_; }

  /// P(next | state, action).
  double transition(int state, int action, int next) const {
    return transitions_(flat_index(state, action, num_actions_), next);
  }

  /// Row layout: flat_index(state, action) -> distribution over next states.
  const Matrix& transition_matrix() const { return transitions_; }

  const std::vector<Successor>& successors(int state, int action) const {
    return successors_[flat_index(state, action, num_actions_)];
  }

  bool is_terminal(int state) const { return terminal_mask_[state] != 0; }
  const std::vector<int>& terminal_states() const { return terminal_states_; }

 private:
  int num_states_;
  int num_actions_;
  Matrix transitions_;
  Vector start_distribution_;
  double discount_;
  std::optional<GridLayout> layout_;
  std::vector<int> terminal_states_;
  std::vector<char> terminal_mask_;
  std::vector<std::vector<Successor>> successors_;
};

/// Stochastic policy: row s is a distribution over actions.
struct Policy {
  Matrix action_probabilities;

  int num_states() const {
    return static_cast<int>(action_probabilities.rows());
  }
  int num_actions() const {
    return static_cast<int>(action_probabilities.cols());
  }

  /// Deterministic policy from an action index per state.
  static Policy deterministic(const std::vector<int>& actions,
                              int num_actions);
};

/// Ordered (state, action) steps of one episode.
struct Trajectory {
  std::vector<std::pair<int, int>> steps;

  int length() const { return static_cast<int>(steps.size()); }
};

/// Builds a width x height gridworld with five actions (up, down, left,
/// right, stay). The intended move succeeds with probability
/// 1 - slip_probability; otherwise one of the other four moves happens
/// uniformly at random. Moves off-grid leave the agent in place. Goal cells
/// are absorbing under every action and marked terminal. goal_cells are
/// (x, y) coordinates. The start distribution is uniform over non-goal
/// cells (uniform over all cells if every cell is a goal).
TabularMdp build_gridworld(int width, int height, double slip_probability,
                           double discount,
                           const std::vector<std::pair<int, int>>& goal_cells);

struct ValueIterationResult {
  Vector state_values;
  Matrix q_values;
};

/// Exact value iteration to a sup-norm Bellman residual below `tolerance`.
ValueIterationResult value_iteration(const TabularMdp& mdp,
                                     const RewardTable& reward,
                                     double tolerance);

/// Deterministic argmax policy; ties broken by lowest action index.
Policy greedy_policy(const Matrix& q_values);

/// Soft (log-sum-exp) value iteration:
///   Q(s,a) = R(s,a) + discount * sum_s' P(s'|s,a) * V(s'),
///   V(s)   = log sum_a exp Q(s,a).
/// Iterates until the sup-norm change of Q drops below `tolerance`.
/// Residual growth over 10 consecutive sweeps raises NumericError.
Matrix soft_value_iteration(const TabularMdp& mdp, const RewardTable& reward,
                            double tolerance);

/// Row-wise softmax of soft Q-values; rows sum to 1 exactly by construction.
Policy softmax_policy(const Matrix& soft_q_values);

/// Samples `count` trajectories of length <= horizon. A trajectory records
/// (s_t, a_t) each step and ends early right after recording a terminal
/// state. Output is a pure function of (mdp, policy, count, horizon, seed).
std::vector<Trajectory> sample_trajectories(const TabularMdp& mdp,
                                            const Policy& policy, int count,
                                            int horizon, std::uint64_t seed);

}  // namespace otra
