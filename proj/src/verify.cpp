#include "ppolab/verify.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace ppolab {
namespace verify {

StationarySweep run_stationary_sweep(std::size_t instances, std::uint64_t seed) {
  StationarySweep sweep;
  sweep.instances = instances;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> num_actions(2, 5);
  std::uniform_real_distribution<double> adv(-3.0, 3.0);
  std::uniform_real_distribution<double> lam(0.5, 5.0);
  std::uniform_real_distribution<double> raw(0.05, 1.0);
  for (std::size_t i = 0; i < instances; ++i) {
    const int n = num_actions(rng);
    std::vector<double> pi_old(n), a(n);
    double sum = 0;
    for (auto& x : pi_old) {
      x = raw(rng);
      sum += x;
    }
    for (auto& x : pi_old) x /= sum;
    for (auto& x : a) x = adv(rng);
    const double lambda = lam(rng);
    const auto res = oracle::verify_stationary_point(pi_old, a, lambda);
    if (res.max_abs_dev <= 1e-4) {
      sweep.passes += 1;
    } else if (res.max_abs_dev > sweep.worst_dev) {
      std::ostringstream os;
      os << "instance " << i << " lambda=" << lambda << " dev=" << res.max_abs_dev;
      sweep.worst_instance = os.str();
    }
    sweep.worst_dev = std::max(sweep.worst_dev, res.max_abs_dev);
  }
  return sweep;
}

BoundSweep run_bound_sweep(std::size_t instances, double gamma, std::uint64_t seed) {
  BoundSweep sweep;
  sweep.instances = instances;
  sweep.worst_sq_tv_margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mix(0.0, 1.0);
  for (std::size_t i = 0; i < instances; ++i) {
    const auto mdp = oracle::random_mdp(4, 3, gamma, rng);
    const auto pi_old = oracle::random_policy(4, 3, rng);
    // perturb towards a random policy; small mixtures keep pairs close,
    // large ones stress the bound
    const auto pi_rand = oracle::random_policy(4, 3, rng);
    const double w = mix(rng);
    oracle::ExactPolicy pi_new = pi_old;
    for (std::size_t k = 0; k < pi_new.probs.size(); ++k)
      pi_new.probs[k] = (1.0 - w) * pi_old.probs[k] + w * pi_rand.probs[k];
    const auto rep = oracle::bound_check(mdp, pi_old, pi_new);
    if (rep.sq_tv_holds) sweep.sq_tv_holds += 1;
    if (rep.paper_tv_holds) sweep.paper_tv_holds += 1;
    if (rep.sq_kl_holds) sweep.sq_kl_holds += 1;
    if (rep.paper_kl_holds) sweep.paper_kl_holds += 1;
    const double margin = rep.v_new - rep.rhs_sq_tv;
    if (margin < sweep.worst_sq_tv_margin) {
      sweep.worst_sq_tv_margin = margin;
      std::ostringstream os;
      os << "instance " << i << " margin=" << margin << " alpha_tv=" << rep.alpha_tv;
      sweep.worst_instance = os.str();
    }
  }
  return sweep;
}

RolloutBatch synthetic_batch(const Agent& agent, std::size_t num_actors,
                             std::size_t horizon, std::mt19937_64& rng) {
  RolloutBatch b;
  b.num_actors = num_actors;
  b.horizon = horizon;
  b.obs_dim = agent.obs_dim;
  const std::size_t n = num_actors * horizon;
  b.observations.resize(n * b.obs_dim);
  std::uniform_real_distribution<double> obs_dist(-1.0, 1.0);
  std::normal_distribution<double> adv_dist(0.0, 1.0);
  for (auto& v : b.observations) v = obs_dist(rng);
  b.actions.resize(n);
  b.old_log_probs.resize(n);
  b.values.resize(n);
  b.rewards.assign(n, 0.0);
  b.dones.assign(n, 0);
  b.bootstrap_values.assign(num_actors, 0.0);
  b.advantages.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> obs(b.obs_at(i), b.obs_dim);
    const ActionSample as = sample(agent.dist(obs), rng);
    b.actions[i] = as.action;
    b.old_log_probs[i] = as.log_prob;
    b.values[i] = agent.state_value(obs);
    b.advantages[i] = adv_dist(rng);
  }
  b.norm_advantages = normalize(b.advantages);
  b.returns = returns(b.advantages, b.values);
  return b;
}

Eq16Sweep run_eq16_sweep(std::size_t instances, std::uint64_t seed) {
  Eq16Sweep sweep;
  sweep.instances = instances;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lam0(0.3, 3.0);
  for (std::size_t i = 0; i < instances; ++i) {
    const bool continuous = (i % 2 == 1);
    const std::size_t obs_dim = 3 + i % 3;
    const std::size_t act_dim = 2 + i % 2;
    Agent proto = Agent::make(continuous, obs_dim, act_dim, {8, 8}, rng);
    RolloutBatch batch = synthetic_batch(proto, 2, 16, rng);

    Hyperparameters hp;
    hp.c1 = 0.0;
    hp.c2 = 0.0;
    hp.num_actors = 2;
    hp.horizon = 16;
    hp.epochs = 1;
    hp.minibatch_size = 32;  // M = p*T, one minibatch
    hp.iterations = 10;
    hp.lambda0 = lam0(rng);

    Schedule sched = schedule_at(hp, 0);
    std::vector<std::size_t> all(batch.size());
    std::iota(all.begin(), all.end(), 0);

    Agent ppo_agent = proto;
    AdamState pa = AdamState::like(ppo_agent.policy);
    AdamState va = AdamState::like(ppo_agent.value);
    combined_update(batch, all, ppo_agent, pa, va, sched, hp, Algorithm::kPpo);

    Agent lam_agent = proto;
    AdamState pb = AdamState::like(lam_agent.policy);
    AdamState vb = AdamState::like(lam_agent.value);
    combined_update(batch, all, lam_agent, pb, vb, sched, hp, Algorithm::kPpoLambda);

    std::vector<double> fa, fb;
    ppo_agent.policy.flatten(fa);
    lam_agent.policy.flatten(fb);
    double dev = 0;
    for (std::size_t k = 0; k < fa.size(); ++k)
      dev = std::max(dev, std::abs(fa[k] - fb[k]) / std::max(1.0, std::abs(fa[k])));
    sweep.worst_rel_dev = std::max(sweep.worst_rel_dev, dev);
    if (dev <= 1e-10) sweep.passes += 1;
  }
  return sweep;
}

PinskerSweep run_pinsker_sweep(std::size_t instances, std::uint64_t seed) {
  PinskerSweep sweep;
  sweep.instances = instances;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    const auto p = oracle::random_policy(1, 2 + i % 5, rng);
    const auto q = oracle::random_policy(1, 2 + i % 5, rng);
    const auto d = oracle::divergences(p, q);
    // single-row policies: mean KL(old,new) is the row KL, max KL its reverse
    const bool ok = d.max_tv * d.max_tv <= d.mean_kl_old_new + 1e-12 &&
                    d.max_tv * d.max_tv <= d.max_kl_new_old + 1e-12;
    if (ok) sweep.holds_both_directions += 1;
  }
  return sweep;
}

std::string report_json(const StationarySweep* s, const BoundSweep* b, const Eq16Sweep* e,
                        const PinskerSweep* p) {
  nlohmann::json j;
  if (s) {
    j["stationary_point"] = {{"instances", s->instances},
                             {"passes", s->passes},
                             {"worst_dev", s->worst_dev},
                             {"worst_instance", s->worst_instance},
                             {"pass", s->pass()}};
  }
  if (b) {
    j["performance_bound"] = {{"instances", b->instances},
                              {"sq_tv_holds", b->sq_tv_holds},
                              {"paper_tv_holds", b->paper_tv_holds},
                              {"sq_kl_holds", b->sq_kl_holds},
                              {"paper_kl_holds", b->paper_kl_holds},
                              {"worst_sq_tv_margin", b->worst_sq_tv_margin},
                              {"worst_instance", b->worst_instance},
                              {"pass", b->pass()}};
  }
  if (e) {
    j["eq16_equivalence"] = {{"instances", e->instances},
                             {"passes", e->passes},
                             {"worst_rel_dev", e->worst_rel_dev},
                             {"pass", e->pass()}};
  }
  if (p) {
    j["pinsker"] = {{"instances", p->instances},
                    {"holds_both_directions", p->holds_both_directions},
                    {"pass", p->pass()}};
  }
  return j.dump(2) + "\n";
}

}  // namespace verify
}  // namespace ppolab
