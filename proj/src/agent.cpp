#include "ppolab/agent.hpp"

#include <stdexcept>

namespace ppolab {

Agent Agent::make(bool continuous, std::size_t obs_dim, std::size_t act_dim,
                  const std::vector<std::size_t>& hidden, std::mt19937_64& rng) {
  Agent a;
  a.continuous = continuous;
  a.obs_dim = obs_dim;
  a.act_dim = act_dim;
  std::vector<std::size_t> psizes{obs_dim};
  psizes.insert(psizes.end(), hidden.begin(), hidden.end());
  psizes.push_back(act_dim);
  a.policy = make_mlp(psizes, rng, 1.41421356237309515, 0.01);
  if (continuous) {
    Layer log_std;
    log_std.b.assign(act_dim, 0.0);
    log_std.gb.assign(act_dim, 0.0);
    a.policy.layers.push_back(std::move(log_std));
  }
  std::vector<std::size_t> vsizes{obs_dim};
  vsizes.insert(vsizes.end(), hidden.begin(), hidden.end());
  vsizes.push_back(1);
  a.value = make_mlp(vsizes, rng, 1.41421356237309515, 1.0);
  return a;
}

DistParams Agent::dist(std::span<const double> obs, Tape* tape) const {
  auto out = forward(policy, obs, tape);
  if (!continuous) return CategoricalParams{std::move(out)};
  return GaussianParams{std::move(out), policy.layers.back().b};
}

double Agent::state_value(std::span<const double> obs, Tape* tape) const {
  return forward(value, obs, tape)[0];
}

void Agent::policy_backward(const Tape& tape, std::span<const double> dist_grad) {
  if (!continuous) {
    backward(policy, tape, dist_grad);
    return;
  }
  if (dist_grad.size() != 2 * act_dim)
    throw std::invalid_argument("policy_backward: bad gaussian grad size");
  backward(policy, tape, dist_grad.subspan(0, act_dim));
  auto& log_std = policy.layers.back();
  for (std::size_t i = 0; i < act_dim; ++i) log_std.gb[i] += dist_grad[act_dim + i];
}

}  // namespace ppolab
