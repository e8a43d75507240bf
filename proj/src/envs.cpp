#include "ppolab/envs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace ppolab {

void TabularMDP::validate() const {
  if (num_states == 0 || num_actions == 0)
    throw std::invalid_argument("TabularMDP: empty state or action set");
  if (transitions.size() != num_states * num_actions * num_states ||
      rewards.size() != num_states * num_actions || initial_dist.size() != num_states)
    throw std::invalid_argument("TabularMDP: tensor shape mismatch");
  for (std::size_t s = 0; s < num_states; ++s)
    for (std::size_t a = 0; a < num_actions; ++a) {
      double sum = 0;
      for (std::size_t s2 = 0; s2 < num_states; ++s2) {
        const double v = p(s, a, s2);
        if (v < 0) throw std::invalid_argument("TabularMDP: negative probability");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("TabularMDP: transition row does not sum to 1");
    }
  double sum = 0;
  for (double v : initial_dist) {
    if (v < 0) throw std::invalid_argument("TabularMDP: negative initial probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("TabularMDP: initial distribution does not sum to 1");
  if (gamma < 0 || gamma > 1) throw std::invalid_argument("TabularMDP: bad gamma");
}

TabularMDP TabularMDP::from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  TabularMDP m;
  m.num_states = j.at("num_states").get<std::size_t>();
  m.num_actions = j.at("num_actions").get<std::size_t>();
  m.gamma = j.at("gamma").get<double>();
  m.horizon = j.at("horizon").get<std::size_t>();
  const auto& tr = j.at("transitions");
  for (std::size_t s = 0; s < m.num_states; ++s)
    for (std::size_t a = 0; a < m.num_actions; ++a)
      for (std::size_t s2 = 0; s2 < m.num_states; ++s2)
        m.transitions.push_back(tr.at(s).at(a).at(s2).get<double>());
  const auto& rw = j.at("rewards");
  for (std::size_t s = 0; s < m.num_states; ++s)
    for (std::size_t a = 0; a < m.num_actions; ++a)
      m.rewards.push_back(rw.at(s).at(a).get<double>());
  for (const auto& v : j.at("initial_dist")) m.initial_dist.push_back(v.get<double>());
  m.validate();
  return m;
}

TabularMDP TabularMDP::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open MDP file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

namespace {

class TabularEnv final : public Env {
 public:
  explicit TabularEnv(TabularMDP mdp) : mdp_(std::move(mdp)) { mdp_.validate(); }

  std::size_t obs_dim() const override { return mdp_.num_states; }
  bool continuous_actions() const override { return false; }
  std::size_t act_dim() const override { return mdp_.num_actions; }

  std::vector<double> reset(std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0;
    state_ = mdp_.num_states - 1;
    for (std::size_t s = 0; s < mdp_.num_states; ++s) {
      acc += mdp_.initial_dist[s];
      if (u < acc) {
        state_ = s;
        break;
      }
    }
    steps_ = 0;
    done_ = false;
    return one_hot(state_);
  }

  std::pair<double, bool> step(const Action& action, std::mt19937_64& rng,
                               std::vector<double>& obs) override {
    if (done_) throw std::logic_error("TabularEnv: step after done");
    const auto a = static_cast<std::size_t>(action.index);
    if (a >= mdp_.num_actions) throw std::invalid_argument("TabularEnv: bad action");
    const double reward = mdp_.r(state_, a);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0;
    std::size_t next = mdp_.num_states - 1;
    for (std::size_t s2 = 0; s2 < mdp_.num_states; ++s2) {
      acc += mdp_.p(state_, a, s2);
      if (u < acc) {
        next = s2;
        break;
      }
    }
    state_ = next;
    steps_ += 1;
    done_ = steps_ >= mdp_.horizon;
    obs = one_hot(state_);
    return {reward, done_};
  }

  std::unique_ptr<Env> clone() const override { return std::make_unique<TabularEnv>(mdp_); }

 private:
  std::vector<double> one_hot(std::size_t s) const {
    std::vector<double> o(mdp_.num_states, 0.0);
    o[s] = 1.0;
    return o;
  }

  TabularMDP mdp_;
  std::size_t state_ = 0;
  std::size_t steps_ = 0;
  bool done_ = false;
};

class Gridworld final : public Env {
 public:
  static constexpr int kSize = 5;
  static constexpr int kHorizon = 50;

  std::size_t obs_dim() const override { return kSize * kSize; }
  bool continuous_actions() const override { return false; }
  std::size_t act_dim() const override { return 4; }

  std::vector<double> reset(std::mt19937_64&) override {
    row_ = 0;
    col_ = 0;
    steps_ = 0;
    done_ = false;
    return one_hot();
  }

  std::pair<double, bool> step(const Action& action, std::mt19937_64&,
                               std::vector<double>& obs) override {
    if (done_) throw std::logic_error("Gridworld: step after done");
    static constexpr int dr[4] = {-1, 1, 0, 0};
    static constexpr int dc[4] = {0, 0, -1, 1};
    const int a = action.index;
    if (a < 0 || a >= 4) throw std::invalid_argument("Gridworld: bad action");
    const int nr = row_ + dr[a];
    const int nc = col_ + dc[a];
    if (nr >= 0 && nr < kSize && nc >= 0 && nc < kSize) {
      row_ = nr;
      col_ = nc;
    }
    steps_ += 1;
    double reward = -0.01;
    if (row_ == kSize - 1 && col_ == kSize - 1) {
      reward += 1.0;
      done_ = true;
    } else if (steps_ >= kHorizon) {
      done_ = true;
    }
    obs = one_hot();
    return {reward, done_};
  }

  std::unique_ptr<Env> clone() const override { return std::make_unique<Gridworld>(*this); }

 private:
  std::vector<double> one_hot() const {
    std::vector<double> o(kSize * kSize, 0.0);
    o[row_ * kSize + col_] = 1.0;
    return o;
  }

  int row_ = 0;
  int col_ = 0;
  int steps_ = 0;
  bool done_ = false;
};

class CartPole final : public Env {
 public:
  std::size_t obs_dim() const override { return 4; }
  bool continuous_actions() const override { return false; }
  std::size_t act_dim() const override { return 2; }

  std::vector<double> reset(std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> unif(-0.05, 0.05);
    for (auto& v : s_) v = unif(rng);
    steps_ = 0;
    done_ = false;
    return {s_[0], s_[1], s_[2], s_[3]};
  }

  std::pair<double, bool> step(const Action& action, std::mt19937_64&,
                               std::vector<double>& obs) override {
    if (done_) throw std::logic_error("CartPole: step after done");
    if (action.index < 0 || action.index > 1)
      throw std::invalid_argument("CartPole: bad action");
    const double force = action.index == 1 ? kForce : -kForce;
    double x = s_[0], x_dot = s_[1], theta = s_[2], theta_dot = s_[3];
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    const double temp =
        (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
    const double theta_acc =
        (kGravity * sin_t - cos_t * temp) /
        (kLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / kTotalMass));
    const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;
    x += kDt * x_dot;
    x_dot += kDt * x_acc;
    theta += kDt * theta_dot;
    theta_dot += kDt * theta_acc;
    s_ = {x, x_dot, theta, theta_dot};
    steps_ += 1;
    done_ = std::abs(x) > kXLimit || std::abs(theta) > kThetaLimit || steps_ >= 500;
    obs = {x, x_dot, theta, theta_dot};
    return {1.0, done_};
  }

  std::unique_ptr<Env> clone() const override { return std::make_unique<CartPole>(*this); }

 private:
  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kTotalMass = kCartMass + kPoleMass;
  static constexpr double kLength = 0.5;  // half pole length
  static constexpr double kPoleMassLength = kPoleMass * kLength;
  static constexpr double kForce = 10.0;
  static constexpr double kDt = 0.02;
  static constexpr double kThetaLimit = 12.0 * 3.14159265358979312 / 180.0;
  static constexpr double kXLimit = 2.4;

  std::array<double, 4> s_{};
  int steps_ = 0;
  bool done_ = false;
};

class PointMass final : public Env {
 public:
  std::size_t obs_dim() const override { return 4; }
  bool continuous_actions() const override { return true; }
  std::size_t act_dim() const override { return 2; }

  std::vector<double> reset(std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    pos_ = {unif(rng), unif(rng)};
    vel_ = {0.0, 0.0};
    steps_ = 0;
    done_ = false;
    return {pos_[0], pos_[1], vel_[0], vel_[1]};
  }

  std::pair<double, bool> step(const Action& action, std::mt19937_64&,
                               std::vector<double>& obs) override {
    if (done_) throw std::logic_error("PointMass: step after done");
    if (action.values.size() != 2) throw std::invalid_argument("PointMass: bad action");
    const double ax = std::clamp(action.values[0], -1.0, 1.0);
    const double ay = std::clamp(action.values[1], -1.0, 1.0);
    vel_[0] += kDt * ax;
    vel_[1] += kDt * ay;
    pos_[0] += kDt * vel_[0];
    pos_[1] += kDt * vel_[1];
    steps_ += 1;
    done_ = steps_ >= 100;
    const double reward =
        -(pos_[0] * pos_[0] + pos_[1] * pos_[1]) - 0.1 * (ax * ax + ay * ay);
    obs = {pos_[0], pos_[1], vel_[0], vel_[1]};
    return {reward, done_};
  }

  std::unique_ptr<Env> clone() const override { return std::make_unique<PointMass>(*this); }

 private:
  static constexpr double kDt = 0.1;
  std::array<double, 2> pos_{};
  std::array<double, 2> vel_{};
  int steps_ = 0;
  bool done_ = false;
};

}  // namespace

std::unique_ptr<Env> make_tabular_env(TabularMDP mdp) {
  return std::make_unique<TabularEnv>(std::move(mdp));
}
std::unique_ptr<Env> make_gridworld() { return std::make_unique<Gridworld>(); }
std::unique_ptr<Env> make_cartpole() { return std::make_unique<CartPole>(); }
std::unique_ptr<Env> make_pointmass() { return std::make_unique<PointMass>(); }

std::unique_ptr<Env> make_env(const std::string& id) {
  if (id == "gridworld") return make_gridworld();
  if (id == "cartpole") return make_cartpole();
  if (id == "pointmass") return make_pointmass();
  if (id.rfind("tabular:", 0) == 0)
    return make_tabular_env(TabularMDP::from_json_file(id.substr(8)));
  throw std::invalid_argument("unknown environment id: " + id);
}

RolloutBatch rollout(const Agent& frozen, std::vector<std::unique_ptr<Env>>& envs,
                     std::vector<std::vector<double>>& current_obs,
                     std::vector<bool>& needs_reset, std::size_t horizon,
                     std::vector<std::mt19937_64>& rngs,
                     std::vector<double>& episode_return_acc, std::size_t max_threads) {
  const std::size_t p = envs.size();
  if (rngs.size() != p || current_obs.size() != p || needs_reset.size() != p ||
      episode_return_acc.size() != p)
    throw std::invalid_argument("rollout: actor state arrays must match env count");

  RolloutBatch batch;
  batch.num_actors = p;
  batch.horizon = horizon;
  batch.obs_dim = frozen.obs_dim;
  const std::size_t n = p * horizon;
  batch.observations.assign(n * batch.obs_dim, 0.0);
  batch.actions.assign(n, Action{});
  batch.rewards.assign(n, 0.0);
  batch.dones.assign(n, 0);
  batch.old_log_probs.assign(n, 0.0);
  batch.values.assign(n, 0.0);
  batch.bootstrap_values.assign(p, 0.0);

  std::vector<std::vector<double>> per_actor_episodes(p);

  auto run_actor = [&](std::size_t i) {
    Env& env = *envs[i];
    std::mt19937_64& rng = rngs[i];
    for (std::size_t t = 0; t < horizon; ++t) {
      if (needs_reset[i]) {
        current_obs[i] = env.reset(rng);
        needs_reset[i] = false;
        episode_return_acc[i] = 0.0;
      }
      const std::size_t idx = i * horizon + t;
      std::copy(current_obs[i].begin(), current_obs[i].end(),
                batch.observations.begin() + idx * batch.obs_dim);
      const DistParams d = frozen.dist(current_obs[i]);
      const ActionSample as = sample(d, rng);
      batch.values[idx] = frozen.state_value(current_obs[i]);
      const auto [reward, done] = env.step(as.action, rng, current_obs[i]);
      batch.actions[idx] = as.action;
      batch.old_log_probs[idx] = as.log_prob;
      batch.rewards[idx] = reward;
      batch.dones[idx] = done ? 1 : 0;
      episode_return_acc[i] += reward;
      if (done) {
        per_actor_episodes[i].push_back(episode_return_acc[i]);
        needs_reset[i] = true;
      }
    }
    // tail bootstrap; zeroed by the done flag when the segment ended
    if (!needs_reset[i]) batch.bootstrap_values[i] = frozen.state_value(current_obs[i]);
  };

  if (max_threads <= 1 || p <= 1) {
    for (std::size_t i = 0; i < p; ++i) run_actor(i);
  } else {
    std::vector<std::thread> pool;
    const std::size_t workers = std::min(max_threads, p);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < p; i += workers) run_actor(i);
      });
    for (auto& th : pool) th.join();
  }

  // deterministic merge order by actor index
  for (std::size_t i = 0; i < p; ++i)
    batch.episode_returns.insert(batch.episode_returns.end(), per_actor_episodes[i].begin(),
                                 per_actor_episodes[i].end());
  return batch;
}

}  // namespace ppolab
