#include "ppolab/advantage.hpp"

#include <cmath>
#include <stdexcept>

namespace ppolab {

std::vector<double> gae(const std::vector<double>& rewards, const std::vector<double>& values,
                        const std::vector<std::uint8_t>& dones, double bootstrap, double gamma,
                        double lambda_gae) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw std::invalid_argument("gae: array length mismatch");
  if (gamma < 0 || gamma > 1 || lambda_gae < 0 || lambda_gae > 1)
    throw std::invalid_argument("gae: gamma/lambda out of [0,1]");
  std::vector<double> adv(n);
  double carry = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double not_done = dones[t] ? 0.0 : 1.0;
    const double next_value = (t + 1 < n) ? values[t + 1] : bootstrap;
    const double delta = rewards[t] + gamma * not_done * next_value - values[t];
    carry = delta + gamma * lambda_gae * not_done * carry;
    adv[t] = carry;
  }
  return adv;
}

std::vector<double> returns(const std::vector<double>& advantages,
                            const std::vector<double>& values) {
  if (advantages.size() != values.size())
    throw std::invalid_argument("returns: length mismatch");
  std::vector<double> out(advantages.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = advantages[i] + values[i];
  return out;
}

std::vector<double> normalize(const std::vector<double>& advantages) {
  if (advantages.empty()) throw std::invalid_argument("normalize: empty batch");
  double mean = 0;
  for (double a : advantages) mean += a;
  mean /= static_cast<double>(advantages.size());
  double var = 0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(advantages.size());
  const double denom = std::sqrt(var) + 1e-8;
  std::vector<double> out(advantages.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (advantages[i] - mean) / denom;
  return out;
}

void compute_advantages(RolloutBatch& batch, double gamma, double lambda_gae) {
  const std::size_t T = batch.horizon;
  batch.advantages.assign(batch.size(), 0.0);
  for (std::size_t i = 0; i < batch.num_actors; ++i) {
    std::vector<double> r(batch.rewards.begin() + i * T, batch.rewards.begin() + (i + 1) * T);
    std::vector<double> v(batch.values.begin() + i * T, batch.values.begin() + (i + 1) * T);
    std::vector<std::uint8_t> d(batch.dones.begin() + i * T, batch.dones.begin() + (i + 1) * T);
    auto adv = gae(r, v, d, batch.bootstrap_values[i], gamma, lambda_gae);
    std::copy(adv.begin(), adv.end(), batch.advantages.begin() + i * T);
  }
  batch.returns = returns(batch.advantages, batch.values);
  batch.norm_advantages = normalize(batch.advantages);
}

}  // namespace ppolab
