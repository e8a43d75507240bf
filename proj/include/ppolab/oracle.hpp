#pragma once

#include <random>
#include <vector>

#include "ppolab/envs.hpp"

namespace ppolab {
namespace oracle {

// Explicit action-probability table; rows are states.
struct ExactPolicy {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> probs;  // [s][a]

  double pi(std::size_t s, std::size_t a) const { return probs[s * num_actions + a]; }
  void validate() const;
};

ExactPolicy random_policy(std::size_t num_states, std::size_t num_actions,
                          std::mt19937_64& rng);
TabularMDP random_mdp(std::size_t num_states, std::size_t num_actions, double gamma,
                      std::mt19937_64& rng);

// Solves (I - gamma P_pi) V = R_pi exactly (infinite-horizon discounted).
std::vector<double> exact_policy_eval(const TabularMDP& mdp, const ExactPolicy& pi);

struct QandA {
  std::vector<double> q;  // [s][a]
  std::vector<double> a;  // [s][a]
};
QandA exact_q_and_advantage(const TabularMDP& mdp, const ExactPolicy& pi);

// Unnormalized discounted occupancy, total mass 1/(1-gamma).
std::vector<double> discounted_visitation(const TabularMDP& mdp, const ExactPolicy& pi);

// L_old(new) = V_old + sum_s rho_old(s) sum_a pi_new(s,a) A_old(s,a)
double surrogate_L(const TabularMDP& mdp, const ExactPolicy& pi_old,
                   const ExactPolicy& pi_new);

struct Divergences {
  double max_tv = 0.0;
  double mean_kl_old_new = 0.0;
  double max_kl_new_old = 0.0;
  bool kl_infinite = false;  // support mismatch
};
Divergences divergences(const ExactPolicy& pi_old, const ExactPolicy& pi_new);

struct BoundReport {
  double v_new = 0.0;          // initial-state-weighted value of pi_new
  double l_old_new = 0.0;
  double epsilon = 0.0;        // max_{s,a} |A_old(s,a)|
  double alpha_tv = 0.0;
  double alpha_kl = 0.0;
  double rhs_sq_tv = 0.0;      // (1-gamma)^2 denominator, alpha = max TV
  double rhs_paper_tv = 0.0;   // 1-gamma^2 denominator, alpha = max TV
  double rhs_sq_kl = 0.0;
  double rhs_paper_kl = 0.0;
  bool sq_tv_holds = false;
  bool paper_tv_holds = false;
  bool sq_kl_holds = false;
  bool paper_kl_holds = false;
};
BoundReport bound_check(const TabularMDP& mdp, const ExactPolicy& pi_old,
                        const ExactPolicy& pi_new);

struct StationaryPointResult {
  std::vector<double> numeric;      // simplex maximizer found numerically
  std::vector<double> closed_form;  // normalized pi_old * exp(A/lambda)
  double max_abs_dev = 0.0;
  bool converged = true;
};

// Maximizes sum_a pi*A - lambda*(KL(pi||pi_old) - delta) over the simplex by
// projected gradient ascent with restarts; compares against the closed form.
StationaryPointResult verify_stationary_point(const std::vector<double>& pi_old_row,
                                              const std::vector<double>& adv_row,
                                              double lambda);

}  // namespace oracle
}  // namespace ppolab
