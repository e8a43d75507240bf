#include "ppolab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace ppolab {
namespace oracle {

void ExactPolicy::validate() const {
  if (probs.size() != num_states * num_actions)
    throw std::invalid_argument("ExactPolicy: shape mismatch");
  for (std::size_t s = 0; s < num_states; ++s) {
    double sum = 0;
    for (std::size_t a = 0; a < num_actions; ++a) {
      if (pi(s, a) < 0) throw std::invalid_argument("ExactPolicy: negative probability");
      sum += pi(s, a);
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("ExactPolicy: row does not sum to 1");
  }
}

ExactPolicy random_policy(std::size_t num_states, std::size_t num_actions,
                          std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  ExactPolicy p;
  p.num_states = num_states;
  p.num_actions = num_actions;
  p.probs.resize(num_states * num_actions);
  for (std::size_t s = 0; s < num_states; ++s) {
    double sum = 0;
    for (std::size_t a = 0; a < num_actions; ++a) {
      p.probs[s * num_actions + a] = unif(rng);
      sum += p.probs[s * num_actions + a];
    }
    for (std::size_t a = 0; a < num_actions; ++a) p.probs[s * num_actions + a] /= sum;
  }
  return p;
}

TabularMDP random_mdp(std::size_t num_states, std::size_t num_actions, double gamma,
                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  std::uniform_real_distribution<double> rew(-1.0, 1.0);
  TabularMDP m;
  m.num_states = num_states;
  m.num_actions = num_actions;
  m.gamma = gamma;
  m.horizon = 1000;
  m.transitions.resize(num_states * num_actions * num_states);
  m.rewards.resize(num_states * num_actions);
  m.initial_dist.resize(num_states);
  for (std::size_t s = 0; s < num_states; ++s)
    for (std::size_t a = 0; a < num_actions; ++a) {
      double sum = 0;
      for (std::size_t s2 = 0; s2 < num_states; ++s2) {
        const double v = unif(rng);
        m.transitions[(s * num_actions + a) * num_states + s2] = v;
        sum += v;
      }
      for (std::size_t s2 = 0; s2 < num_states; ++s2)
        m.transitions[(s * num_actions + a) * num_states + s2] /= sum;
      m.rewards[s * num_actions + a] = rew(rng);
    }
  double sum = 0;
  for (auto& v : m.initial_dist) {
    v = unif(rng);
    sum += v;
  }
  for (auto& v : m.initial_dist) v /= sum;
  // remove residual normalization error so validate()'s 1e-12 gate holds
  for (std::size_t s = 0; s < num_states; ++s)
    for (std::size_t a = 0; a < num_actions; ++a) {
      double rs = 0;
      for (std::size_t s2 = 0; s2 < num_states; ++s2)
        rs += m.transitions[(s * num_actions + a) * num_states + s2];
      m.transitions[(s * num_actions + a) * num_states + num_states - 1] += 1.0 - rs;
    }
  double is = std::accumulate(m.initial_dist.begin(), m.initial_dist.end(), 0.0);
  m.initial_dist.back() += 1.0 - is;
  m.validate();
  return m;
}

namespace {

Eigen::MatrixXd policy_transition(const TabularMDP& mdp, const ExactPolicy& pi) {
  const auto n = static_cast<Eigen::Index>(mdp.num_states);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < mdp.num_states; ++s)
    for (std::size_t a = 0; a < mdp.num_actions; ++a)
      for (std::size_t s2 = 0; s2 < mdp.num_states; ++s2)
        P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2)) +=
            pi.pi(s, a) * mdp.p(s, a, s2);
  return P;
}

Eigen::VectorXd policy_reward(const TabularMDP& mdp, const ExactPolicy& pi) {
  const auto n = static_cast<Eigen::Index>(mdp.num_states);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
  for (std::size_t s = 0; s < mdp.num_states; ++s)
    for (std::size_t a = 0; a < mdp.num_actions; ++a)
      r(static_cast<Eigen::Index>(s)) += pi.pi(s, a) * mdp.r(s, a);
  return r;
}

}  // namespace

std::vector<double> exact_policy_eval(const TabularMDP& mdp, const ExactPolicy& pi) {
  if (mdp.gamma >= 1.0) throw std::invalid_argument("exact_policy_eval: gamma must be < 1");
  const auto n = static_cast<Eigen::Index>(mdp.num_states);
  const Eigen::MatrixXd P = policy_transition(mdp, pi);
  const Eigen::VectorXd r = policy_reward(mdp, pi);
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - mdp.gamma * P;
  const Eigen::VectorXd v = A.partialPivLu().solve(r);
  if ((A * v - r).lpNorm<Eigen::Infinity>() > 1e-10)
    throw std::runtime_error("exact_policy_eval: solve residual too large");
  return {v.data(), v.data() + n};
}

QandA exact_q_and_advantage(const TabularMDP& mdp, const ExactPolicy& pi) {
  const auto v = exact_policy_eval(mdp, pi);
  QandA out;
  out.q.resize(mdp.num_states * mdp.num_actions);
  out.a.resize(mdp.num_states * mdp.num_actions);
  for (std::size_t s = 0; s < mdp.num_states; ++s)
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      double q = mdp.r(s, a);
      for (std::size_t s2 = 0; s2 < mdp.num_states; ++s2)
        q += mdp.gamma * mdp.p(s, a, s2) * v[s2];
      out.q[s * mdp.num_actions + a] = q;
      out.a[s * mdp.num_actions + a] = q - v[s];
    }
  return out;
}

std::vector<double> discounted_visitation(const TabularMDP& mdp, const ExactPolicy& pi) {
  if (mdp.gamma >= 1.0) throw std::invalid_argument("discounted_visitation: gamma must be < 1");
  const auto n = static_cast<Eigen::Index>(mdp.num_states);
  const Eigen::MatrixXd P = policy_transition(mdp, pi);
  Eigen::VectorXd rho0(n);
  for (std::size_t s = 0; s < mdp.num_states; ++s)
    rho0(static_cast<Eigen::Index>(s)) = mdp.initial_dist[s];
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - mdp.gamma * P.transpose();
  const Eigen::VectorXd rho = A.partialPivLu().solve(rho0);
  return {rho.data(), rho.data() + n};
}

double surrogate_L(const TabularMDP& mdp, const ExactPolicy& pi_old,
                   const ExactPolicy& pi_new) {
  const auto v_old = exact_policy_eval(mdp, pi_old);
  const auto qa = exact_q_and_advantage(mdp, pi_old);
  const auto rho = discounted_visitation(mdp, pi_old);
  double v0 = 0;
  for (std::size_t s = 0; s < mdp.num_states; ++s) v0 += mdp.initial_dist[s] * v_old[s];
  double l = v0;
  for (std::size_t s = 0; s < mdp.num_states; ++s)
    for (std::size_t a = 0; a < mdp.num_actions; ++a)
      l += rho[s] * pi_new.pi(s, a) * qa.a[s * mdp.num_actions + a];
  return l;
}

Divergences divergences(const ExactPolicy& pi_old, const ExactPolicy& pi_new) {
  if (pi_old.num_states != pi_new.num_states || pi_old.num_actions != pi_new.num_actions)
    throw std::invalid_argument("divergences: shape mismatch");
  Divergences d;
  double kl_old_new_sum = 0;
  for (std::size_t s = 0; s < pi_old.num_states; ++s) {
    double tv = 0, kl_on = 0, kl_no = 0;
    for (std::size_t a = 0; a < pi_old.num_actions; ++a) {
      const double po = pi_old.pi(s, a);
      const double pn = pi_new.pi(s, a);
      tv += 0.5 * std::abs(po - pn);
      if (po > 0) {
        if (pn <= 0) {
          kl_on = std::numeric_limits<double>::infinity();
          d.kl_infinite = true;
        } else {
          kl_on += po * std::log(po / pn);
        }
      }
      if (pn > 0) {
        if (po <= 0) {
          kl_no = std::numeric_limits<double>::infinity();
          d.kl_infinite = true;
        } else {
          kl_no += pn * std::log(pn / po);
        }
      }
    }
    d.max_tv = std::max(d.max_tv, tv);
    kl_old_new_sum += kl_on;
    d.max_kl_new_old = std::max(d.max_kl_new_old, kl_no);
  }
  d.mean_kl_old_new = kl_old_new_sum / static_cast<double>(pi_old.num_states);
  return d;
}

BoundReport bound_check(const TabularMDP& mdp, const ExactPolicy& pi_old,
                        const ExactPolicy& pi_new) {
  BoundReport r;
  const auto v_new = exact_policy_eval(mdp, pi_new);
  for (std::size_t s = 0; s < mdp.num_states; ++s)
    r.v_new += mdp.initial_dist[s] * v_new[s];
  r.l_old_new = surrogate_L(mdp, pi_old, pi_new);
  const auto qa = exact_q_and_advantage(mdp, pi_old);
  for (double a : qa.a) r.epsilon = std::max(r.epsilon, std::abs(a));
  const auto d = divergences(pi_old, pi_new);
  r.alpha_tv = d.max_tv;
  r.alpha_kl = d.max_kl_new_old;
  const double g = mdp.gamma;
  const double c_sq = 4.0 * r.epsilon * g / ((1.0 - g) * (1.0 - g));
  const double c_paper = 4.0 * r.epsilon * g / (1.0 - g * g);
  r.rhs_sq_tv = r.l_old_new - c_sq * r.alpha_tv * r.alpha_tv;
  r.rhs_paper_tv = r.l_old_new - c_paper * r.alpha_tv * r.alpha_tv;
  r.rhs_sq_kl = r.l_old_new - c_sq * r.alpha_kl * r.alpha_kl;
  r.rhs_paper_kl = r.l_old_new - c_paper * r.alpha_kl * r.alpha_kl;
  const double tol = 1e-9;  // exact-arithmetic slack
  r.sq_tv_holds = r.v_new >= r.rhs_sq_tv - tol;
  r.paper_tv_holds = r.v_new >= r.rhs_paper_tv - tol;
  r.sq_kl_holds = r.v_new >= r.rhs_sq_kl - tol;
  r.paper_kl_holds = r.v_new >= r.rhs_paper_kl - tol;
  return r;
}

namespace {

// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0;
  std::size_t rho = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    if (u[i] - (css - 1.0) / static_cast<double>(i + 1) > 0) rho = i + 1;
  }
  css = 0;
  for (std::size_t i = 0; i < rho; ++i) css += u[i];
  const double theta = (css - 1.0) / static_cast<double>(rho);
  for (auto& x : v) x = std::max(x - theta, 0.0);
  return v;
}

double lagrangian(const std::vector<double>& pi, const std::vector<double>& pi_old,
                  const std::vector<double>& adv, double lambda) {
  double val = 0;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    val += pi[a] * adv[a];
    if (pi[a] > 0) val -= lambda * pi[a] * std::log(pi[a] / pi_old[a]);
  }
  return val;
}

}  // namespace

StationaryPointResult verify_stationary_point(const std::vector<double>& pi_old_row,
                                              const std::vector<double>& adv_row,
                                              double lambda) {
  if (lambda <= 0) throw std::invalid_argument("verify_stationary_point: lambda <= 0");
  const std::size_t n = pi_old_row.size();
  if (n == 0 || n > 8 || adv_row.size() != n)
    throw std::invalid_argument("verify_stationary_point: bad row sizes");

  StationaryPointResult res;

  // closed form: pi_old * exp(A/lambda), renormalized (shift for stability)
  const double amax = *std::max_element(adv_row.begin(), adv_row.end());
  res.closed_form.resize(n);
  double z = 0;
  for (std::size_t a = 0; a < n; ++a) {
    res.closed_form[a] = pi_old_row[a] * std::exp((adv_row[a] - amax) / lambda);
    z += res.closed_form[a];
  }
  for (auto& x : res.closed_form) x /= z;

  // gradient magnitude scales with lambda; keep the effective step stable.
  // The KL curvature is lambda/pi_a, so components driven toward tiny
  // probabilities need much smaller steps than the bulk: anneal through
  // decreasing step phases instead of using one fixed step.
  const double step0 = 1e-2 / std::max(1.0, lambda);
  const double phase_steps[] = {step0,        step0 * 0.3,  step0 * 0.1,  step0 * 0.03,
                                step0 * 0.01, step0 * 3e-3, step0 * 1e-3, step0 * 3e-4,
                                step0 * 1e-4};
  const int iters_per_phase = 4000;
  const int restarts = 5;
  double best_val = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> pi(n);
    if (r == 0) {
      pi = pi_old_row;
    } else {
      double s = 0;
      for (auto& x : pi) {
        x = unif(rng);
        s += x;
      }
      for (auto& x : pi) x /= s;
    }
    for (const double step : phase_steps) {
      for (int it = 0; it < iters_per_phase; ++it) {
        std::vector<double> g(n);
        for (std::size_t a = 0; a < n; ++a) {
          const double pa = std::max(pi[a], 1e-12);
          g[a] = adv_row[a] - lambda * (std::log(pa / pi_old_row[a]) + 1.0);
        }
        for (std::size_t a = 0; a < n; ++a) pi[a] += step * g[a];
        pi = project_simplex(pi);
      }
    }
    const double val = lagrangian(pi, pi_old_row, adv_row, lambda);
    if (val > best_val) {
      best_val = val;
      res.numeric = pi;
    }
  }
  for (std::size_t a = 0; a < n; ++a)
    res.max_abs_dev = std::max(res.max_abs_dev, std::abs(res.numeric[a] - res.closed_form[a]));
  res.converged = res.max_abs_dev < 1e-3;
  return res;
}

}  // namespace oracle
}  // namespace ppolab
