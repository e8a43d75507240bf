#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

namespace ppolab {

struct CategoricalParams {
  std::vector<double> logits;
};

// Diagonal Gaussian; log_std is state-independent in practice but carried
// here so distribution ops stay self-contained.
struct GaussianParams {
  std::vector<double> mean;
  std::vector<double> log_std;
};

using DistParams = std::variant<CategoricalParams, GaussianParams>;

struct Action {
  int index = -1;                 // categorical
  std::vector<double> values;     // gaussian

  static Action discrete(int i) { return Action{i, {}}; }
  static Action continuous(std::vector<double> v) { return Action{-1, std::move(v)}; }
};

struct ActionSample {
  Action action;
  double log_prob = 0.0;
};

// Counts exponent clamps in prob_ratio; one per trainer run.
struct RatioGuard {
  std::int64_t clamped = 0;
};

std::vector<double> softmax(const std::vector<double>& logits);

double log_prob(const DistParams& dist, const Action& action);
double entropy(const DistParams& dist);
ActionSample sample(const DistParams& dist, std::mt19937_64& rng);
Action mode(const DistParams& dist);

// exp(logp_new - logp_old) with the exponent clamped to [-30, 30].
double prob_ratio(double logp_new, double logp_old, RatioGuard* guard = nullptr);

// Analytic KL(p || q); both arguments must be the same family and size.
double kl_divergence(const DistParams& p, const DistParams& q);

// Gradients with respect to the distribution parameters, used to seed the
// network backward pass. Gaussian gradients are returned as (d/dmean,
// d/dlog_std) concatenated: mean block first.
std::vector<double> log_prob_grad(const DistParams& dist, const Action& action);
std::vector<double> entropy_grad(const DistParams& dist);

}  // namespace ppolab
