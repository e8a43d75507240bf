#pragma once

#include <span>

#include "ppolab/nn.hpp"
#include "ppolab/policy.hpp"

namespace ppolab {

// Policy network plus value network with separate trunks. For continuous
// actions the policy net outputs the mean and a trailing bias-only block
// holds the state-independent log-std.
struct Agent {
  bool continuous = false;
  std::size_t obs_dim = 0;
  std::size_t act_dim = 0;  // number of actions (discrete) or action dims
  ParameterSet policy;
  ParameterSet value;

  static Agent make(bool continuous, std::size_t obs_dim, std::size_t act_dim,
                    const std::vector<std::size_t>& hidden, std::mt19937_64& rng);

  DistParams dist(std::span<const double> obs, Tape* tape = nullptr) const;
  double state_value(std::span<const double> obs, Tape* tape = nullptr) const;

  // dist_grad layout matches log_prob_grad / entropy_grad: logits for
  // discrete, mean block then log_std block for continuous.
  void policy_backward(const Tape& tape, std::span<const double> dist_grad);
};

}  // namespace ppolab
