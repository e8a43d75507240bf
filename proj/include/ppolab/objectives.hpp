#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppolab/advantage.hpp"
#include "ppolab/agent.hpp"

namespace ppolab {

enum class Algorithm { kPpo, kPpoLambda };

// The log-ratio weight in the adaptive surrogate is normally treated as
// gradient-stopped; kLiteral differentiates through it as well (study mode).
enum class SurrogateGradMode { kStopGradient, kLiteral };

struct Hyperparameters {
  double gamma = 0.99;
  double delta0 = 0.1;        // initial clip threshold
  double lambda0 = 1.0;       // initial Lagrange multiplier
  double beta0 = 1e-3;        // initial learning rate
  double c1 = 0.5;            // value loss coefficient
  double c2 = 0.01;           // entropy bonus coefficient
  double lambda_gae = 0.95;
  std::size_t num_actors = 8;       // p
  std::size_t horizon = 128;        // T
  std::size_t epochs = 3;           // K
  std::size_t minibatch_size = 128; // M
  std::size_t iterations = 200;     // N
  double delta_floor = 1e-3;
  double beta_floor = 0.0;

  std::size_t batch_size() const { return num_actors * horizon; }
  void validate() const;  // throws std::invalid_argument
};

// Scalars in force for one learning iteration.
struct Schedule {
  std::size_t iteration = 0;
  double delta = 0.1;
  double beta = 1e-3;
  double lambda = 1.0;
};

Schedule schedule_at(const Hyperparameters& hp, std::size_t iteration);

enum class Branch { kClipHigh, kClipLow, kOpen };

struct ClipResult {
  double value = 0.0;       // clipped objective value
  double grad_coef = 0.0;   // coefficient on d tau / d theta
  Branch branch = Branch::kOpen;
};

// PPO's clipped surrogate at one sample. The objective is maximized, so
// grad_coef is the ascent coefficient.
ClipResult ppo_clip(double tau, double adv, double delta);

// Unnormalized log of the adaptive improvement target: logp_old + adv/lambda.
double adaptive_target_logprob(double logp_old, double adv, double lambda);

// logp_new - target_logp; equals -adv/lambda when the policies coincide.
double log_ratio_to_target(double logp_new, double target_logp);

struct SurrogateTerm {
  double tau = 0.0;
  double adv = 0.0;
  double log_ratio = 0.0;
  double loss = 0.0;        // lambda * coef * log_ratio, minimized
  double grad_coef = 0.0;   // coefficient on d tau / d theta of the loss
  Branch branch = Branch::kOpen;
};

SurrogateTerm ppo_lambda_surrogate(double tau, double adv, double delta, double lambda,
                                   double log_ratio);

// Eq-19 multiplier adjustment: lambda0 * log(delta0+1) / log(delta_n+1).
double lambda_schedule(double lambda0, double delta0, double delta_n);

// max(x0 * (1 - n/N), floor)
double linear_decay(double x0, std::size_t n, std::size_t N, double floor);

struct UpdateStats {
  double surrogate_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_abs_log_ratio = 0.0;  // ppo-lambda only
  std::size_t clipped = 0;
  std::size_t samples = 0;
  bool skipped = false;  // non-finite loss, minibatch dropped
};

// Accumulates the Eq.-17 gradient (surrogate + value + entropy terms, mean
// over the minibatch) into the agent's gradient buffers without stepping.
UpdateStats accumulate_gradients(const RolloutBatch& batch,
                                 const std::vector<std::size_t>& indices, Agent& agent,
                                 const Schedule& sched, const Hyperparameters& hp,
                                 Algorithm algorithm, RatioGuard* guard = nullptr,
                                 SurrogateGradMode mode = SurrogateGradMode::kStopGradient);

// One minibatch gradient accumulation + Adam step per Eq. 17 (or the PPO
// objective when algorithm == kPpo). Indices select samples from the batch;
// frozen old log-probs / normalized advantages / returns come from the batch.
UpdateStats combined_update(const RolloutBatch& batch, const std::vector<std::size_t>& indices,
                            Agent& agent, AdamState& policy_adam, AdamState& value_adam,
                            const Schedule& sched, const Hyperparameters& hp,
                            Algorithm algorithm, RatioGuard* guard = nullptr,
                            SurrogateGradMode mode = SurrogateGradMode::kStopGradient);

}  // namespace ppolab
