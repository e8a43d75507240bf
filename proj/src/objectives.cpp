#include "ppolab/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace ppolab {

void Hyperparameters::validate() const {
  if (gamma <= 0 || gamma >= 1) throw std::invalid_argument("gamma must be in (0,1)");
  if (delta0 <= 0 || delta0 >= 1) throw std::invalid_argument("delta0 must be in (0,1)");
  if (lambda0 <= 0) throw std::invalid_argument("lambda0 must be positive");
  if (beta0 < 0) throw std::invalid_argument("beta0 must be nonnegative");
  if (c1 < 0 || c2 < 0) throw std::invalid_argument("c1/c2 must be nonnegative");
  if (lambda_gae < 0 || lambda_gae > 1)
    throw std::invalid_argument("lambda_gae must be in [0,1]");
  if (num_actors == 0 || horizon == 0 || epochs == 0 || iterations == 0)
    throw std::invalid_argument("p, T, K, N must be positive");
  if (minibatch_size == 0 || batch_size() % minibatch_size != 0)
    throw std::invalid_argument("minibatch size must divide p*T");
  if (delta_floor <= 0 || delta_floor > delta0)
    throw std::invalid_argument("delta_floor must be in (0, delta0]");
  if (beta_floor < 0) throw std::invalid_argument("beta_floor must be nonnegative");
}

double linear_decay(double x0, std::size_t n, std::size_t N, double floor) {
  if (n > N) throw std::invalid_argument("linear_decay: n > N");
  const double x = x0 * (1.0 - static_cast<double>(n) / static_cast<double>(N));
  return std::max(x, floor);
}

double lambda_schedule(double lambda0, double delta0, double delta_n) {
  if (lambda0 <= 0) throw std::invalid_argument("lambda_schedule: lambda0 must be positive");
  if (delta_n <= 0 || delta_n > delta0)
    throw std::invalid_argument("lambda_schedule: delta_n outside (0, delta0]");
  return lambda0 * std::log(delta0 + 1.0) / std::log(delta_n + 1.0);
}

Schedule schedule_at(const Hyperparameters& hp, std::size_t iteration) {
  Schedule s;
  s.iteration = iteration;
  s.delta = linear_decay(hp.delta0, iteration, hp.iterations, hp.delta_floor);
  s.beta = linear_decay(hp.beta0, iteration, hp.iterations, hp.beta_floor);
  s.lambda = lambda_schedule(hp.lambda0, hp.delta0, s.delta);
  return s;
}

ClipResult ppo_clip(double tau, double adv, double delta) {
  ClipResult r;
  if (adv > 0 && tau > 1.0 + delta) {
    r.branch = Branch::kClipHigh;
    r.value = (1.0 + delta) * adv;
    r.grad_coef = 0.0;
  } else if (adv < 0 && tau < 1.0 - delta) {
    r.branch = Branch::kClipLow;
    r.value = (1.0 - delta) * adv;
    r.grad_coef = 0.0;
  } else {
    r.branch = Branch::kOpen;
    r.value = tau * adv;
    r.grad_coef = adv;
  }
  return r;
}

double adaptive_target_logprob(double logp_old, double adv, double lambda) {
  if (lambda <= 0) throw std::invalid_argument("adaptive_target_logprob: lambda must be positive");
  return logp_old + adv / lambda;
}

double log_ratio_to_target(double logp_new, double target_logp) {
  return logp_new - target_logp;
}

SurrogateTerm ppo_lambda_surrogate(double tau, double adv, double delta, double lambda,
                                   double log_ratio) {
  SurrogateTerm t;
  t.tau = tau;
  t.adv = adv;
  t.log_ratio = log_ratio;
  double coef;
  if (adv > 0 && tau > 1.0 + delta) {
    t.branch = Branch::kClipHigh;
    coef = 1.0 + delta;
    t.grad_coef = 0.0;
  } else if (adv < 0 && tau < 1.0 - delta) {
    t.branch = Branch::kClipLow;
    coef = 1.0 - delta;
    t.grad_coef = 0.0;
  } else {
    t.branch = Branch::kOpen;
    coef = tau;
    t.grad_coef = lambda * log_ratio;
  }
  t.loss = lambda * coef * log_ratio;
  return t;
}

UpdateStats accumulate_gradients(const RolloutBatch& batch,
                                 const std::vector<std::size_t>& indices, Agent& agent,
                                 const Schedule& sched, const Hyperparameters& hp,
                                 Algorithm algorithm, RatioGuard* guard,
                                 SurrogateGradMode mode) {
  UpdateStats stats;
  const double inv_m = 1.0 / static_cast<double>(indices.size());
  double total_loss = 0.0;

  for (std::size_t i : indices) {
    std::span<const double> obs(batch.obs_at(i), batch.obs_dim);
    const double adv = batch.norm_advantages[i];
    const double logp_old = batch.old_log_probs[i];

    Tape ptape;
    const DistParams d = agent.dist(obs, &ptape);
    const double logp_new = log_prob(d, batch.actions[i]);
    const double tau = prob_ratio(logp_new, logp_old, guard);

    // coefficient on d logp_new / d theta of the minimized loss
    double g_logp = 0.0;
    if (algorithm == Algorithm::kPpo) {
      const ClipResult cr = ppo_clip(tau, adv, sched.delta);
      total_loss += -cr.value;
      stats.surrogate_loss += -cr.value;
      g_logp = -cr.grad_coef * tau;  // d tau / d theta = tau * d logp / d theta
      if (cr.branch != Branch::kOpen) stats.clipped += 1;
    } else {
      const double target = adaptive_target_logprob(logp_old, adv, sched.lambda);
      const double lr = log_ratio_to_target(logp_new, target);
      const SurrogateTerm st = ppo_lambda_surrogate(tau, adv, sched.delta, sched.lambda, lr);
      total_loss += st.loss;
      stats.surrogate_loss += st.loss;
      stats.mean_abs_log_ratio += std::abs(lr);
      if (mode == SurrogateGradMode::kStopGradient) {
        g_logp = st.grad_coef * tau;
      } else if (st.branch == Branch::kOpen) {
        g_logp = sched.lambda * tau * (lr + 1.0);
      } else {
        const double coef = (st.branch == Branch::kClipHigh) ? 1.0 + sched.delta
                                                             : 1.0 - sched.delta;
        g_logp = sched.lambda * coef;
      }
      if (st.branch != Branch::kOpen) stats.clipped += 1;
    }

    const double h = entropy(d);
    stats.entropy += h;
    total_loss += -hp.c2 * h;

    auto dist_grad = log_prob_grad(d, batch.actions[i]);
    for (auto& g : dist_grad) g *= g_logp * inv_m;
    if (hp.c2 > 0) {
      const auto hg = entropy_grad(d);
      for (std::size_t k = 0; k < dist_grad.size(); ++k)
        dist_grad[k] += -hp.c2 * hg[k] * inv_m;
    }
    agent.policy_backward(ptape, dist_grad);

    Tape vtape;
    const double v = agent.state_value(obs, &vtape);
    const double ev = v - batch.returns[i];
    stats.value_loss += ev * ev;
    total_loss += hp.c1 * ev * ev;
    const double vgrad = 2.0 * hp.c1 * ev * inv_m;
    backward(agent.value, vtape, std::span<const double>(&vgrad, 1));
  }

  stats.samples = indices.size();
  stats.surrogate_loss *= inv_m;
  stats.value_loss *= inv_m;
  stats.entropy *= inv_m;
  stats.mean_abs_log_ratio *= inv_m;

  if (!std::isfinite(total_loss) || !agent.policy.grads_finite() ||
      !agent.value.grads_finite()) {
    agent.policy.zero_grads();
    agent.value.zero_grads();
    stats.skipped = true;
  }
  return stats;
}

UpdateStats combined_update(const RolloutBatch& batch, const std::vector<std::size_t>& indices,
                            Agent& agent, AdamState& policy_adam, AdamState& value_adam,
                            const Schedule& sched, const Hyperparameters& hp,
                            Algorithm algorithm, RatioGuard* guard, SurrogateGradMode mode) {
  UpdateStats stats =
      accumulate_gradients(batch, indices, agent, sched, hp, algorithm, guard, mode);
  if (stats.skipped) return stats;
  adam_step(agent.policy, policy_adam, sched.beta);
  adam_step(agent.value, value_adam, sched.beta);
  return stats;
}

}  // namespace ppolab
