#include "ppolab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ppolab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

}  // namespace

void TrainConfig::validate() const {
  hp.validate();
  if (env_id.empty()) throw std::invalid_argument("TrainConfig: empty env id");
  make_env(env_id);  // throws on unknown id
}

ClipDiagnostics clip_diagnostics(const RolloutBatch& batch, const Agent& agent,
                                 const Schedule& sched) {
  const std::size_t n = batch.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(batch.norm_advantages[a]) < std::abs(batch.norm_advantages[b]);
  });

  ClipDiagnostics d;
  std::size_t total_clipped = 0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    const std::size_t i = order[rank];
    const std::size_t bucket = std::min<std::size_t>(rank * 10 / n, 9);
    std::span<const double> obs(batch.obs_at(i), batch.obs_dim);
    const double logp_new = log_prob(agent.dist(obs), batch.actions[i]);
    const double tau = prob_ratio(logp_new, batch.old_log_probs[i]);
    const ClipResult cr = ppo_clip(tau, batch.norm_advantages[i], sched.delta);
    d.bucket_sizes[bucket] += 1;
    if (cr.branch != Branch::kOpen) {
      d.clipped_fraction_by_decile[bucket] += 1.0;
      total_clipped += 1;
    }
  }
  for (std::size_t b = 0; b < 10; ++b)
    if (d.bucket_sizes[b] > 0) d.clipped_fraction_by_decile[b] /= d.bucket_sizes[b];
  d.overall_clipped_fraction = n ? static_cast<double>(total_clipped) / n : 0.0;
  return d;
}

ReplayResult replay_fixed_batch(const RolloutBatch& batch, Agent& agent,
                                const Schedule& sched, const Hyperparameters& hp,
                                Algorithm algorithm) {
  ReplayResult res;
  AdamState pol_adam = AdamState::like(agent.policy);
  AdamState val_adam = AdamState::like(agent.value);
  std::vector<std::size_t> all(batch.size());
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t k = 0; k < hp.epochs; ++k) {
    const UpdateStats stats =
        combined_update(batch, all, agent, pol_adam, val_adam, sched, hp, algorithm);
    res.mean_abs_log_ratio_per_epoch.push_back(stats.mean_abs_log_ratio);
    res.diagnostics_per_epoch.push_back(clip_diagnostics(batch, agent, sched));
  }
  return res;
}

TrainResult train(const TrainConfig& config) {
  config.validate();
  const Hyperparameters& hp = config.hp;

  const auto proto = make_env(config.env_id);
  std::vector<std::unique_ptr<Env>> envs;
  for (std::size_t i = 0; i < hp.num_actors; ++i) envs.push_back(proto->clone());

  auto init_rng = derived_rng(config.seed, 1);
  Agent agent = Agent::make(proto->continuous_actions(), proto->obs_dim(), proto->act_dim(),
                            config.hidden, init_rng);
  AdamState pol_adam = AdamState::like(agent.policy);
  AdamState val_adam = AdamState::like(agent.value);

  std::vector<std::mt19937_64> actor_rngs;
  for (std::size_t i = 0; i < hp.num_actors; ++i)
    actor_rngs.push_back(derived_rng(config.seed, 100 + i));
  auto shuffle_rng = derived_rng(config.seed, 2);

  std::vector<std::vector<double>> current_obs(hp.num_actors);
  std::vector<bool> needs_reset(hp.num_actors, true);
  std::vector<double> episode_return_acc(hp.num_actors, 0.0);

  TrainResult result{LearningCurve{}, agent};
  RatioGuard guard;
  double last_mean_return = 0.0;
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t n = 0; n < hp.iterations; ++n) {
    const Schedule sched = schedule_at(hp, n);

    RolloutBatch batch = rollout(agent, envs, current_obs, needs_reset, hp.horizon,
                                 actor_rngs, episode_return_acc, config.rollout_threads);
    compute_advantages(batch, hp.gamma, hp.lambda_gae);

    const Agent old_agent = agent;  // theta_old, frozen for diagnostics

    CurveRow row;
    row.iteration = n;
    row.delta = sched.delta;
    row.beta = sched.beta;
    row.lambda = sched.lambda;
    row.episode_count = batch.episode_returns.size();
    if (!batch.episode_returns.empty()) {
      last_mean_return =
          std::accumulate(batch.episode_returns.begin(), batch.episode_returns.end(), 0.0) /
          static_cast<double>(batch.episode_returns.size());
    }
    row.mean_episode_return = last_mean_return;

    std::vector<std::size_t> indices(batch.size());
    std::iota(indices.begin(), indices.end(), 0);
    std::size_t clipped = 0, samples_seen = 0;
    for (std::size_t k = 0; k < hp.epochs; ++k) {
      std::shuffle(indices.begin(), indices.end(), shuffle_rng);
      double epoch_abs_log_ratio = 0.0;
      std::size_t epoch_batches = 0;
      for (std::size_t start = 0; start < indices.size(); start += hp.minibatch_size) {
        std::vector<std::size_t> mb(indices.begin() + start,
                                    indices.begin() + start + hp.minibatch_size);
        const UpdateStats stats = combined_update(batch, mb, agent, pol_adam, val_adam,
                                                  sched, hp, config.algorithm, &guard);
        if (stats.skipped) result.curve.skipped_minibatches += 1;
        clipped += stats.clipped;
        samples_seen += stats.samples;
        row.surrogate_loss += stats.surrogate_loss;
        row.value_loss += stats.value_loss;
        row.entropy += stats.entropy;
        epoch_abs_log_ratio += stats.mean_abs_log_ratio;
        epoch_batches += 1;
      }
      row.mean_abs_log_ratio_per_epoch.push_back(epoch_abs_log_ratio / epoch_batches);
    }
    const double num_updates =
        static_cast<double>(hp.epochs * (batch.size() / hp.minibatch_size));
    row.surrogate_loss /= num_updates;
    row.value_loss /= num_updates;
    row.entropy /= num_updates;
    row.clip_fraction = samples_seen ? static_cast<double>(clipped) / samples_seen : 0.0;

    row.vanish_by_decile = clip_diagnostics(batch, agent, sched).clipped_fraction_by_decile;

    double kl_sum = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      std::span<const double> obs(batch.obs_at(i), batch.obs_dim);
      kl_sum += kl_divergence(agent.dist(obs), old_agent.dist(obs));
    }
    row.mean_kl_new_old = kl_sum / static_cast<double>(batch.size());

    row.env_steps = (n + 1) * hp.batch_size();
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!agent.policy.finite() || !agent.value.finite()) {
      row.halted = true;
      result.curve.rows.push_back(row);
      break;
    }
    result.curve.rows.push_back(row);
  }
  result.curve.ratio_clamps = guard.clamped;
  result.agent = agent;
  return result;
}

EvalResult evaluate(const Agent& agent, Env& env, std::size_t episodes, std::mt19937_64& rng) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  std::vector<double> returns;
  for (std::size_t e = 0; e < episodes; ++e) {
    auto obs = env.reset(rng);
    double total = 0;
    bool done = false;
    while (!done) {
      const ActionSample as = sample(agent.dist(obs), rng);
      const auto [reward, d] = env.step(as.action, rng, obs);
      total += reward;
      done = d;
    }
    returns.push_back(total);
  }
  EvalResult r;
  r.mean = std::accumulate(returns.begin(), returns.end(), 0.0) /
           static_cast<double>(returns.size());
  double var = 0;
  for (double x : returns) var += (x - r.mean) * (x - r.mean);
  r.stddev = std::sqrt(var / static_cast<double>(returns.size()));
  return r;
}

std::pair<double, double> scoring_metrics(const LearningCurve& curve) {
  if (curve.rows.size() < 10)
    throw std::invalid_argument("scoring_metrics: need at least 10 rows");
  double fast = 0;
  for (const auto& r : curve.rows) fast += r.mean_episode_return;
  fast /= static_cast<double>(curve.rows.size());
  double final_perf = 0;
  for (std::size_t i = curve.rows.size() - 10; i < curve.rows.size(); ++i)
    final_perf += curve.rows[i].mean_episode_return;
  final_perf /= 10.0;
  return {fast, final_perf};
}

}  // namespace ppolab
