#pragma once

#include <cstdint>
#include <string>

#include "ppolab/oracle.hpp"
#include "ppolab/trainer.hpp"

namespace ppolab {
namespace verify {

struct StationarySweep {
  std::size_t instances = 0;
  std::size_t passes = 0;
  double worst_dev = 0.0;
  std::string worst_instance;
  bool pass(double tol = 1e-4) const { return passes == instances && worst_dev <= tol; }
};

// Random (pi_old, A, lambda) rows; numeric simplex maximizer vs closed form.
StationarySweep run_stationary_sweep(std::size_t instances, std::uint64_t seed);

struct BoundSweep {
  std::size_t instances = 0;
  std::size_t sq_tv_holds = 0;     // (1-gamma)^2 denominator, alpha = max TV
  std::size_t paper_tv_holds = 0;  // 1-gamma^2 denominator
  std::size_t sq_kl_holds = 0;
  std::size_t paper_kl_holds = 0;
  double worst_sq_tv_margin = 0.0;  // min of v_new - rhs over the sweep
  std::string worst_instance;
  bool pass() const { return sq_tv_holds == instances; }
};

BoundSweep run_bound_sweep(std::size_t instances, double gamma, std::uint64_t seed);

struct Eq16Sweep {
  std::size_t instances = 0;
  std::size_t passes = 0;
  double worst_rel_dev = 0.0;
  bool pass(double tol = 1e-10) const {
    return passes == instances && worst_rel_dev <= tol;
  }
};

// One PPO iteration vs one PPO-lambda iteration with c1=c2=0, K=1, M=p*T:
// resulting parameters must coincide.
Eq16Sweep run_eq16_sweep(std::size_t instances, std::uint64_t seed);

struct PinskerSweep {
  std::size_t instances = 0;
  std::size_t holds_both_directions = 0;
  bool pass() const { return holds_both_directions == instances; }
};

// D_TV^2 <= D_KL in both argument orders on random categorical row pairs.
PinskerSweep run_pinsker_sweep(std::size_t instances, std::uint64_t seed);

// Synthetic batch with self-consistent old log-probs; shared by the eq16
// sweep and the test suites.
RolloutBatch synthetic_batch(const Agent& agent, std::size_t num_actors,
                             std::size_t horizon, std::mt19937_64& rng);

std::string report_json(const StationarySweep* s, const BoundSweep* b, const Eq16Sweep* e,
                        const PinskerSweep* p);

}  // namespace verify
}  // namespace ppolab
