#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ppolab/policy.hpp"

using namespace ppolab;

TEST_CASE("log_prob: uniform categorical") {
  DistParams d = CategoricalParams{{0.0, 0.0}};
  CHECK(log_prob(d, Action::discrete(0)) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(log_prob(d, Action::discrete(1)) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("log_prob: gaussian at the mean with unit std") {
  DistParams d = GaussianParams{{0.7}, {0.0}};
  CHECK(log_prob(d, Action::continuous({0.7})) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("log_prob: softmax shift invariance") {
  DistParams a = CategoricalParams{{1.0, -0.5, 2.0}};
  DistParams b = CategoricalParams{{1.0 + 7.3, -0.5 + 7.3, 2.0 + 7.3}};
  for (int i = 0; i < 3; ++i)
    CHECK(log_prob(a, Action::discrete(i)) ==
          doctest::Approx(log_prob(b, Action::discrete(i))).epsilon(1e-12));
}

TEST_CASE("log_prob: out of range index throws") {
  DistParams d = CategoricalParams{{0.0, 0.0}};
  CHECK_THROWS_AS(log_prob(d, Action::discrete(2)), std::invalid_argument);
  CHECK_THROWS_AS(log_prob(d, Action::discrete(-1)), std::invalid_argument);
}

TEST_CASE("entropy: uniform categorical is ln|A|") {
  DistParams d = CategoricalParams{{0.3, 0.3, 0.3, 0.3}};
  CHECK(entropy(d) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("entropy: near-deterministic categorical approaches zero") {
  DistParams d = CategoricalParams{{50.0, 0.0, 0.0}};
  CHECK(entropy(d) >= 0.0);
  CHECK(entropy(d) < 1e-12);
}

TEST_CASE("entropy: 2-dim unit gaussian closed form") {
  DistParams d = GaussianParams{{0.0, 0.0}, {0.0, 0.0}};
  CHECK(entropy(d) == doctest::Approx(2.8378770664093453).epsilon(1e-12));
}

TEST_CASE("entropy: categorical bounded by ln|A|, maximal at uniform") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unif(-3, 3);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> logits(4);
    for (auto& v : logits) v = unif(rng);
    CHECK(entropy(DistParams{CategoricalParams{logits}}) <= std::log(4.0) + 1e-12);
  }
}

TEST_CASE("sample: deterministic-limit categorical picks the argmax") {
  DistParams d = CategoricalParams{{0.0, 80.0, 0.0}};
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) CHECK(sample(d, rng).action.index == 1);
}

TEST_CASE("sample: uniform 2-action frequency concentrates") {
  DistParams d = CategoricalParams{{0.0, 0.0}};
  std::mt19937_64 rng(3);
  int zeros = 0;
  const int n = 100000;
  for (int t = 0; t < n; ++t)
    if (sample(d, rng).action.index == 0) ++zeros;
  const double freq = static_cast<double>(zeros) / n;
  CHECK(freq > 0.49);
  CHECK(freq < 0.51);
}

TEST_CASE("sample: gaussian with tiny std returns the mean") {
  DistParams d = GaussianParams{{1.5, -2.0}, {-20.0, -20.0}};
  std::mt19937_64 rng(4);
  const auto s = sample(d, rng);
  CHECK(s.action.values[0] == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(s.action.values[1] == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("sample: recorded log_prob matches recomputation") {
  std::mt19937_64 rng(5);
  DistParams c = CategoricalParams{{0.2, -0.7, 1.1}};
  DistParams g = GaussianParams{{0.0, 1.0}, {-0.3, 0.4}};
  for (int t = 0; t < 50; ++t) {
    const auto sc = sample(c, rng);
    CHECK(sc.log_prob == log_prob(c, sc.action));
    const auto sg = sample(g, rng);
    CHECK(sg.log_prob == log_prob(g, sg.action));
  }
}

TEST_CASE("prob_ratio: identity and direct evaluation") {
  CHECK(prob_ratio(-1.7, -1.7) == 1.0);
  CHECK(prob_ratio(std::log(1.2) - 0.5, -0.5) == doctest::Approx(1.2).epsilon(1e-12));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unif(-5, 0);
  for (int t = 0; t < 100; ++t) {
    const double a = unif(rng), b = unif(rng);
    CHECK(prob_ratio(a, b) == doctest::Approx(std::exp(a) / std::exp(b)).epsilon(1e-12));
  }
}

TEST_CASE("prob_ratio: clamps extreme exponents and counts them") {
  RatioGuard guard;
  const double r = prob_ratio(100.0, 0.0, &guard);
  CHECK(r == doctest::Approx(std::exp(30.0)));
  CHECK(guard.clamped == 1);
  prob_ratio(0.0, 100.0, &guard);
  CHECK(guard.clamped == 2);
}

TEST_CASE("kl: zero at equality, positive otherwise") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-2, 2);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> lp(3), lq(3);
    for (auto& v : lp) v = unif(rng);
    for (auto& v : lq) v = unif(rng);
    DistParams p = CategoricalParams{lp};
    DistParams q = CategoricalParams{lq};
    CHECK(kl_divergence(p, p) <= 1e-12);
    CHECK(kl_divergence(p, q) >= 0.0);
  }
}

TEST_CASE("kl: two-point categorical closed form") {
  // (0.5,0.5) vs (0.25,0.75): 0.5 ln2 + 0.5 ln(2/3)
  DistParams p = CategoricalParams{{0.0, 0.0}};
  DistParams q = CategoricalParams{{std::log(0.25), std::log(0.75)}};
  const double want = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  CHECK(kl_divergence(p, q) == doctest::Approx(want).epsilon(1e-12));
  CHECK(want == doctest::Approx(0.14384103622589045).epsilon(1e-10));
}

TEST_CASE("kl: unit gaussians one apart") {
  DistParams p = GaussianParams{{0.0}, {0.0}};
  DistParams q = GaussianParams{{1.0}, {0.0}};
  CHECK(kl_divergence(p, q) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("kl: family mismatch throws") {
  DistParams p = CategoricalParams{{0.0, 0.0}};
  DistParams q = GaussianParams{{0.0}, {0.0}};
  CHECK_THROWS_AS(kl_divergence(p, q), std::invalid_argument);
}

TEST_CASE("log_prob_grad and entropy_grad match finite differences") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(-1, 1);
  const double h = 1e-6;

  for (int t = 0; t < 20; ++t) {
    std::vector<double> logits(4);
    for (auto& v : logits) v = unif(rng);
    const Action a = Action::discrete(t % 4);
    const auto g = log_prob_grad(DistParams{CategoricalParams{logits}}, a);
    const auto ge = entropy_grad(DistParams{CategoricalParams{logits}});
    for (std::size_t i = 0; i < logits.size(); ++i) {
      auto bump = logits;
      bump[i] += h;
      const double lp_p = log_prob(DistParams{CategoricalParams{bump}}, a);
      const double he_p = entropy(DistParams{CategoricalParams{bump}});
      bump[i] -= 2 * h;
      const double lp_m = log_prob(DistParams{CategoricalParams{bump}}, a);
      const double he_m = entropy(DistParams{CategoricalParams{bump}});
      CHECK(std::abs(g[i] - (lp_p - lp_m) / (2 * h)) < 1e-6 * (1 + std::abs(g[i])));
      CHECK(std::abs(ge[i] - (he_p - he_m) / (2 * h)) < 1e-6 * (1 + std::abs(ge[i])));
    }
  }

  for (int t = 0; t < 20; ++t) {
    GaussianParams gp{{unif(rng), unif(rng)}, {unif(rng) * 0.5, unif(rng) * 0.5}};
    const Action a = Action::continuous({unif(rng), unif(rng)});
    const auto g = log_prob_grad(DistParams{gp}, a);
    for (std::size_t i = 0; i < 4; ++i) {
      GaussianParams p = gp, m = gp;
      if (i < 2) {
        p.mean[i] += h;
        m.mean[i] -= h;
      } else {
        p.log_std[i - 2] += h;
        m.log_std[i - 2] -= h;
      }
      const double fd =
          (log_prob(DistParams{p}, a) - log_prob(DistParams{m}, a)) / (2 * h);
      CHECK(std::abs(g[i] - fd) < 1e-6 * (1 + std::abs(g[i])));
    }
  }
}
