#pragma once

#include <cstdint>
#include <vector>

#include "ppolab/policy.hpp"

namespace ppolab {

// Flat batch of p actors x T steps, stored actor-major so timestep t of
// actor i sits at i*T + t. Old log-probs and values are frozen at sample
// time; advantages/returns are filled in by the advantage pass.
struct RolloutBatch {
  std::size_t num_actors = 0;
  std::size_t horizon = 0;
  std::size_t obs_dim = 0;

  std::vector<double> observations;  // (p*T) x obs_dim, row-major
  std::vector<Action> actions;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  std::vector<double> old_log_probs;
  std::vector<double> values;
  std::vector<double> bootstrap_values;  // one per actor, V(s_{T}) of the tail

  std::vector<double> advantages;
  std::vector<double> norm_advantages;
  std::vector<double> returns;

  // episode returns completed during collection, in completion order
  std::vector<double> episode_returns;

  std::size_t size() const { return num_actors * horizon; }
  const double* obs_at(std::size_t i) const { return &observations[i * obs_dim]; }
};

// Backward GAE recursion over one trajectory segment. dones[t] marks that
// the episode ended at step t, so no bootstrapping across t -> t+1.
std::vector<double> gae(const std::vector<double>& rewards, const std::vector<double>& values,
                        const std::vector<std::uint8_t>& dones, double bootstrap, double gamma,
                        double lambda_gae);

std::vector<double> returns(const std::vector<double>& advantages,
                            const std::vector<double>& values);

// (x - mean) / (pop std + 1e-8), over the whole batch.
std::vector<double> normalize(const std::vector<double>& advantages);

// Fills advantages, returns, and norm_advantages of the batch in place.
void compute_advantages(RolloutBatch& batch, double gamma, double lambda_gae);

}  // namespace ppolab
