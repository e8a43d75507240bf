#pragma once

#include <array>
#include <string>
#include <vector>

#include "ppolab/envs.hpp"
#include "ppolab/objectives.hpp"

namespace ppolab {

struct CurveRow {
  std::size_t iteration = 0;
  double mean_episode_return = 0.0;
  std::size_t episode_count = 0;
  double delta = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double clip_fraction = 0.0;
  std::array<double, 10> vanish_by_decile{};  // clipped fraction per |adv| decile
  double mean_kl_new_old = 0.0;
  std::vector<double> mean_abs_log_ratio_per_epoch;  // K entries, ppo-lambda
  double surrogate_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  std::size_t env_steps = 0;
  double wall_time_s = 0.0;  // diagnostics only; kept out of curve.csv
  bool halted = false;       // non-finite parameters, run stopped here
};

struct LearningCurve {
  std::vector<CurveRow> rows;
  std::int64_t ratio_clamps = 0;
  std::size_t skipped_minibatches = 0;
};

struct TrainConfig {
  Algorithm algorithm = Algorithm::kPpoLambda;
  std::string env_id = "gridworld";
  Hyperparameters hp;
  std::uint64_t seed = 0;
  std::string out_dir;  // empty = no file output
  std::vector<std::size_t> hidden = {64, 64};
  std::size_t rollout_threads = 1;

  void validate() const;
};

struct TrainResult {
  LearningCurve curve;
  Agent agent;
};

TrainResult train(const TrainConfig& config);

struct EvalResult {
  double mean = 0.0;
  double stddev = 0.0;
};

// Runs the stochastic policy without learning.
EvalResult evaluate(const Agent& agent, Env& env, std::size_t episodes, std::mt19937_64& rng);

// Fast learning = mean return over all rows; final performance = mean over
// the last 10 rows. Requires >= 10 rows.
std::pair<double, double> scoring_metrics(const LearningCurve& curve);

struct ClipDiagnostics {
  std::array<double, 10> clipped_fraction_by_decile{};
  std::array<std::size_t, 10> bucket_sizes{};
  double overall_clipped_fraction = 0.0;
};

// Buckets samples by |normalized advantage| decile and reports the fraction
// whose surrogate branch is clipped under the current policy.
ClipDiagnostics clip_diagnostics(const RolloutBatch& batch, const Agent& agent,
                                 const Schedule& sched);

struct ReplayResult {
  std::vector<double> mean_abs_log_ratio_per_epoch;
  std::vector<ClipDiagnostics> diagnostics_per_epoch;  // decile x epoch matrix
};

// Fixed-batch replay: K epochs of full-batch updates on one frozen batch.
// The harness behind the adaptive-decay property and the decile report.
ReplayResult replay_fixed_batch(const RolloutBatch& batch, Agent& agent,
                                const Schedule& sched, const Hyperparameters& hp,
                                Algorithm algorithm);

}  // namespace ppolab
