#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace ppolab {

// Row-major dense matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// One dense layer plus its gradient accumulators. A layer with an empty
// weight matrix is a bare parameter block (e.g. Gaussian log-std); it is
// skipped by the MLP forward pass but still owned by the optimizer.
struct Layer {
  Matrix w;
  std::vector<double> b;
  Matrix gw;
  std::vector<double> gb;

  Layer() = default;
  Layer(std::size_t out, std::size_t in)
      : w(out, in), b(out, 0.0), gw(out, in), gb(out, 0.0) {}

  bool dense() const { return w.rows > 0; }
};

// Ordered stack of layers. Hidden layers are tanh-activated, final dense
// layer is linear. Deep copy (the default copy) yields an independent set,
// which is how the trainer freezes the rollout policy.
struct ParameterSet {
  std::vector<Layer> layers;

  std::size_t flat_size() const;
  void flatten(std::vector<double>& out) const;
  void unflatten(std::span<const double> flat);
  void flatten_grads(std::vector<double>& out) const;
  void zero_grads();
  bool finite() const;
  bool grads_finite() const;
};

// Activations recorded by forward(); enough to replay the chain rule.
struct Tape {
  std::vector<double> input;
  // Per dense layer: pre-activation z and post-activation a (a==z for the
  // final layer).
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
};

struct AdamState {
  std::vector<Layer> moments1;  // gradients unused, w/b reused as storage
  std::vector<Layer> moments2;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState like(const ParameterSet& params);
};

// Builds a tanh MLP: sizes = {in, h1, ..., out}. hidden_gain scales the
// orthogonal init of hidden layers, out_gain the final layer.
ParameterSet make_mlp(const std::vector<std::size_t>& sizes, std::mt19937_64& rng,
                      double hidden_gain = 1.41421356237309515,
                      double out_gain = 1.0);

std::vector<double> forward(const ParameterSet& params, std::span<const double> input,
                            Tape* tape = nullptr);

// Accumulates exact reverse-mode gradients of sum(output * output_grad)
// into the parameter gradient buffers. Additive across calls.
void backward(ParameterSet& params, const Tape& tape, std::span<const double> output_grad);

// Bias-corrected Adam step; zeroes the gradient accumulators afterwards.
// Throws std::runtime_error on non-finite gradients.
void adam_step(ParameterSet& params, AdamState& state, double learning_rate);

// Central finite differences of a scalar function over the flat parameter
// vector; the test-side oracle for backward().
std::vector<double> finite_diff_grad(const std::function<double(ParameterSet&)>& f,
                                     ParameterSet params, double h);

}  // namespace ppolab
