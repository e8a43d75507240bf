#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ppolab/advantage.hpp"
#include "ppolab/agent.hpp"

namespace ppolab {

// Explicit finite MDP; the substrate for both the tabular environment and
// the exact oracle.
struct TabularMDP {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> transitions;   // [s][a][s'] flattened
  std::vector<double> rewards;       // [s][a]
  std::vector<double> initial_dist;  // [s]
  double gamma = 0.99;
  std::size_t horizon = 100;

  double p(std::size_t s, std::size_t a, std::size_t s2) const {
    return transitions[(s * num_actions + a) * num_states + s2];
  }
  double r(std::size_t s, std::size_t a) const { return rewards[s * num_actions + a]; }

  void validate() const;  // throws on bad stochastic tensors
  static TabularMDP from_json_file(const std::string& path);
  static TabularMDP from_json_text(const std::string& text);
};

class Env {
 public:
  virtual ~Env() = default;

  virtual std::size_t obs_dim() const = 0;
  virtual bool continuous_actions() const = 0;
  // number of discrete actions, or action dimension for continuous
  virtual std::size_t act_dim() const = 0;

  // Fills the observation; clears done/return/step counters.
  virtual std::vector<double> reset(std::mt19937_64& rng) = 0;
  // Returns (reward, done); obs receives the next observation. Stepping a
  // finished episode throws std::logic_error.
  virtual std::pair<double, bool> step(const Action& action, std::mt19937_64& rng,
                                       std::vector<double>& obs) = 0;

  virtual std::unique_ptr<Env> clone() const = 0;
};

// One-hot observations over the MDP's states; episodes end at the horizon
// (time-limit truncation, treated as done).
std::unique_ptr<Env> make_tabular_env(TabularMDP mdp);

// 5x5 deterministic grid: start (0,0), goal (4,4), -0.01 per step, +1 on
// reaching the goal, wall bumps keep position, horizon 50. One-hot obs.
std::unique_ptr<Env> make_gridworld();

// Classic cart-pole: Euler at 0.02s, force +-10, termination at +-12 deg or
// +-2.4, reward +1 per step, 500-step cap.
std::unique_ptr<Env> make_cartpole();

// 2-d point mass: state (pos, vel), acceleration actions clipped to
// [-1,1]^2, quadratic cost, horizon 100.
std::unique_ptr<Env> make_pointmass();

// env ids: "gridworld", "cartpole", "pointmass", "tabular:<json path>"
std::unique_ptr<Env> make_env(const std::string& id);

// p actors x T steps under the frozen agent. Each actor owns envs[i] and an
// rng stream; envs persist so episodes continue across calls. max_threads
// caps the fan-out (1 = serial); results are identical either way.
RolloutBatch rollout(const Agent& frozen, std::vector<std::unique_ptr<Env>>& envs,
                     std::vector<std::vector<double>>& current_obs,
                     std::vector<bool>& needs_reset, std::size_t horizon,
                     std::vector<std::mt19937_64>& rngs,
                     std::vector<double>& episode_return_acc, std::size_t max_threads = 1);

}  // namespace ppolab
