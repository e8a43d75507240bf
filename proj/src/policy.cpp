#include "ppolab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ppolab {

namespace {
constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)

double logsumexp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}
}  // namespace

std::vector<double> softmax(const std::vector<double>& logits) {
  const double lse = logsumexp(logits);
  std::vector<double> p(logits.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(logits[i] - lse);
  return p;
}

double log_prob(const DistParams& dist, const Action& action) {
  if (const auto* c = std::get_if<CategoricalParams>(&dist)) {
    if (action.index < 0 || action.index >= static_cast<int>(c->logits.size()))
      throw std::invalid_argument("log_prob: action index out of range");
    return c->logits[action.index] - logsumexp(c->logits);
  }
  const auto& g = std::get<GaussianParams>(dist);
  if (action.values.size() != g.mean.size())
    throw std::invalid_argument("log_prob: action dimension mismatch");
  double lp = 0;
  for (std::size_t i = 0; i < g.mean.size(); ++i) {
    const double z = (action.values[i] - g.mean[i]) * std::exp(-g.log_std[i]);
    lp += -0.5 * z * z - g.log_std[i] - 0.5 * kLogTwoPi;
  }
  return lp;
}

double entropy(const DistParams& dist) {
  if (const auto* c = std::get_if<CategoricalParams>(&dist)) {
    const auto p = softmax(c->logits);
    double h = 0;
    for (double q : p)
      if (q > 0) h -= q * std::log(q);
    return h;
  }
  const auto& g = std::get<GaussianParams>(dist);
  double h = 0;
  for (double ls : g.log_std) h += ls + 0.5 * (1.0 + kLogTwoPi);
  return h;
}

ActionSample sample(const DistParams& dist, std::mt19937_64& rng) {
  if (const auto* c = std::get_if<CategoricalParams>(&dist)) {
    const auto p = softmax(c->logits);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0;
    int idx = static_cast<int>(p.size()) - 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc += p[i];
      if (u < acc) {
        idx = static_cast<int>(i);
        break;
      }
    }
    Action a = Action::discrete(idx);
    return {a, log_prob(dist, a)};
  }
  const auto& g = std::get<GaussianParams>(dist);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(g.mean.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = g.mean[i] + std::exp(g.log_std[i]) * normal(rng);
  Action a = Action::continuous(std::move(v));
  return {a, log_prob(dist, a)};
}

Action mode(const DistParams& dist) {
  if (const auto* c = std::get_if<CategoricalParams>(&dist)) {
    const auto it = std::max_element(c->logits.begin(), c->logits.end());
    return Action::discrete(static_cast<int>(it - c->logits.begin()));
  }
  return Action::continuous(std::get<GaussianParams>(dist).mean);
}

double prob_ratio(double logp_new, double logp_old, RatioGuard* guard) {
  double d = logp_new - logp_old;
  if (d > 30.0 || d < -30.0) {
    if (guard) guard->clamped += 1;
    d = std::clamp(d, -30.0, 30.0);
  }
  return std::exp(d);
}

double kl_divergence(const DistParams& p, const DistParams& q) {
  if (p.index() != q.index())
    throw std::invalid_argument("kl_divergence: family mismatch");
  if (const auto* cp = std::get_if<CategoricalParams>(&p)) {
    const auto& cq = std::get<CategoricalParams>(q);
    if (cp->logits.size() != cq.logits.size())
      throw std::invalid_argument("kl_divergence: size mismatch");
    const double lp = logsumexp(cp->logits);
    const double lq = logsumexp(cq.logits);
    double kl = 0;
    for (std::size_t i = 0; i < cp->logits.size(); ++i) {
      const double pi = std::exp(cp->logits[i] - lp);
      kl += pi * ((cp->logits[i] - lp) - (cq.logits[i] - lq));
    }
    return std::max(kl, 0.0);
  }
  const auto& gp = std::get<GaussianParams>(p);
  const auto& gq = std::get<GaussianParams>(q);
  if (gp.mean.size() != gq.mean.size())
    throw std::invalid_argument("kl_divergence: size mismatch");
  double kl = 0;
  for (std::size_t i = 0; i < gp.mean.size(); ++i) {
    const double vr = std::exp(2.0 * (gp.log_std[i] - gq.log_std[i]));
    const double dm = gp.mean[i] - gq.mean[i];
    kl += gq.log_std[i] - gp.log_std[i] +
          0.5 * (vr + dm * dm * std::exp(-2.0 * gq.log_std[i]) - 1.0);
  }
  return std::max(kl, 0.0);
}

std::vector<double> log_prob_grad(const DistParams& dist, const Action& action) {
  if (const auto* c = std::get_if<CategoricalParams>(&dist)) {
    auto g = softmax(c->logits);
    for (auto& v : g) v = -v;
    g[action.index] += 1.0;
    return g;
  }
  const auto& gp = std::get<GaussianParams>(dist);
  const std::size_t d = gp.mean.size();
  std::vector<double> g(2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    const double inv_var = std::exp(-2.0 * gp.log_std[i]);
    const double diff = action.values[i] - gp.mean[i];
    g[i] = diff * inv_var;                       // d/dmean
    g[d + i] = diff * diff * inv_var - 1.0;      // d/dlog_std
  }
  return g;
}

std::vector<double> entropy_grad(const DistParams& dist) {
  if (const auto* c = std::get_if<CategoricalParams>(&dist)) {
    const auto p = softmax(c->logits);
    const double h = entropy(dist);
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double lp = p[i] > 0 ? std::log(p[i]) : 0.0;
      g[i] = -p[i] * (lp + h);
    }
    return g;
  }
  const auto& gp = std::get<GaussianParams>(dist);
  std::vector<double> g(2 * gp.mean.size(), 0.0);
  for (std::size_t i = 0; i < gp.mean.size(); ++i) g[gp.mean.size() + i] = 1.0;
  return g;
}

}  // namespace ppolab
