#include "ppolab/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace ppolab {

std::size_t ParameterSet::flat_size() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.data.size() + l.b.size();
  return n;
}

void ParameterSet::flatten(std::vector<double>& out) const {
  out.clear();
  out.reserve(flat_size());
  for (const auto& l : layers) {
    out.insert(out.end(), l.w.data.begin(), l.w.data.end());
    out.insert(out.end(), l.b.begin(), l.b.end());
  }
}

void ParameterSet::unflatten(std::span<const double> flat) {
  std::size_t k = 0;
  for (auto& l : layers) {
    for (auto& v : l.w.data) v = flat[k++];
    for (auto& v : l.b) v = flat[k++];
  }
  if (k != flat.size()) throw std::invalid_argument("unflatten: size mismatch");
}

void ParameterSet::flatten_grads(std::vector<double>& out) const {
  out.clear();
  out.reserve(flat_size());
  for (const auto& l : layers) {
    out.insert(out.end(), l.gw.data.begin(), l.gw.data.end());
    out.insert(out.end(), l.gb.begin(), l.gb.end());
  }
}

void ParameterSet::zero_grads() {
  for (auto& l : layers) {
    std::fill(l.gw.data.begin(), l.gw.data.end(), 0.0);
    std::fill(l.gb.begin(), l.gb.end(), 0.0);
  }
}

static bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

bool ParameterSet::finite() const {
  for (const auto& l : layers)
    if (!all_finite(l.w.data) || !all_finite(l.b)) return false;
  return true;
}

bool ParameterSet::grads_finite() const {
  for (const auto& l : layers)
    if (!all_finite(l.gw.data) || !all_finite(l.gb)) return false;
  return true;
}

AdamState AdamState::like(const ParameterSet& params) {
  AdamState s;
  for (const auto& l : params.layers) {
    Layer z;
    z.w = Matrix(l.w.rows, l.w.cols);
    z.b.assign(l.b.size(), 0.0);
    s.moments1.push_back(z);
    s.moments2.push_back(z);
  }
  return s;
}

// Orthogonalizes a Gaussian random matrix with modified Gram-Schmidt over
// whichever dimension is shorter, then scales by gain.
static Matrix orthogonal_init(std::size_t rows, std::size_t cols, double gain,
                              std::mt19937_64& rng) {
  const bool wide = cols > rows;
  const std::size_t n = wide ? cols : rows;   // vector length
  const std::size_t m = wide ? rows : cols;   // number of vectors
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> q(m, std::vector<double>(n));
  for (auto& v : q)
    for (auto& x : v) x = normal(rng);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double dot = 0;
      for (std::size_t k = 0; k < n; ++k) dot += q[i][k] * q[j][k];
      for (std::size_t k = 0; k < n; ++k) q[i][k] -= dot * q[j][k];
    }
    double norm = 0;
    for (double x : q[i]) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-12) norm = 1.0;
    for (auto& x : q[i]) x /= norm;
  }
  Matrix w(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      w(r, c) = gain * (wide ? q[r][c] : q[c][r]);
  return w;
}

ParameterSet make_mlp(const std::vector<std::size_t>& sizes, std::mt19937_64& rng,
                      double hidden_gain, double out_gain) {
  if (sizes.size() < 2) throw std::invalid_argument("make_mlp: need at least in/out");
  ParameterSet p;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const bool last = (i + 2 == sizes.size());
    Layer l(sizes[i + 1], sizes[i]);
    l.w = orthogonal_init(sizes[i + 1], sizes[i], last ? out_gain : hidden_gain, rng);
    l.gw = Matrix(l.w.rows, l.w.cols);
    p.layers.push_back(std::move(l));
  }
  return p;
}

std::vector<double> forward(const ParameterSet& params, std::span<const double> input,
                            Tape* tape) {
  std::size_t last_dense = 0;
  bool any = false;
  for (std::size_t i = 0; i < params.layers.size(); ++i)
    if (params.layers[i].dense()) {
      last_dense = i;
      any = true;
    }
  if (!any) throw std::invalid_argument("forward: no dense layers");
  if (params.layers[0].dense() && params.layers[0].w.cols != input.size())
    throw std::invalid_argument("forward: input size mismatch");

  std::vector<double> x(input.begin(), input.end());
  if (tape) {
    tape->input = x;
    tape->pre.clear();
    tape->post.clear();
  }
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const Layer& l = params.layers[i];
    if (!l.dense()) continue;
    if (l.w.cols != x.size()) throw std::invalid_argument("forward: layer shape mismatch");
    std::vector<double> z(l.w.rows);
    for (std::size_t r = 0; r < l.w.rows; ++r) {
      double acc = l.b[r];
      const double* wr = &l.w.data[r * l.w.cols];
      for (std::size_t c = 0; c < l.w.cols; ++c) acc += wr[c] * x[c];
      z[r] = acc;
    }
    const bool last = (i == last_dense);
    std::vector<double> a = z;
    if (!last)
      for (auto& v : a) v = std::tanh(v);
    if (tape) {
      tape->pre.push_back(z);
      tape->post.push_back(a);
    }
    x = std::move(a);
  }
  return x;
}

void backward(ParameterSet& params, const Tape& tape, std::span<const double> output_grad) {
  std::vector<std::size_t> dense;
  for (std::size_t i = 0; i < params.layers.size(); ++i)
    if (params.layers[i].dense()) dense.push_back(i);
  if (dense.size() != tape.pre.size())
    throw std::invalid_argument("backward: tape does not match parameter set");
  if (output_grad.size() != tape.pre.back().size())
    throw std::invalid_argument("backward: output grad size mismatch");

  std::vector<double> delta(output_grad.begin(), output_grad.end());
  for (std::size_t k = dense.size(); k-- > 0;) {
    Layer& l = params.layers[dense[k]];
    const bool last = (k + 1 == dense.size());
    if (!last) {
      // through tanh: a = tanh(z), da/dz = 1 - a^2
      const auto& a = tape.post[k];
      for (std::size_t r = 0; r < delta.size(); ++r) delta[r] *= 1.0 - a[r] * a[r];
    }
    const std::vector<double>& in = (k == 0) ? tape.input : tape.post[k - 1];
    for (std::size_t r = 0; r < l.w.rows; ++r) {
      l.gb[r] += delta[r];
      double* gr = &l.gw.data[r * l.w.cols];
      for (std::size_t c = 0; c < l.w.cols; ++c) gr[c] += delta[r] * in[c];
    }
    if (k > 0) {
      std::vector<double> prev(l.w.cols, 0.0);
      for (std::size_t r = 0; r < l.w.rows; ++r) {
        const double* wr = &l.w.data[r * l.w.cols];
        for (std::size_t c = 0; c < l.w.cols; ++c) prev[c] += wr[c] * delta[r];
      }
      delta = std::move(prev);
    }
  }
}

void adam_step(ParameterSet& params, AdamState& state, double learning_rate) {
  if (learning_rate < 0) throw std::invalid_argument("adam_step: negative rate");
  if (!params.grads_finite()) throw std::runtime_error("adam_step: non-finite gradient");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    Layer& l = params.layers[i];
    auto update = [&](double& p, double g, double& m, double& v) {
      m = state.beta1 * m + (1.0 - state.beta1) * g;
      v = state.beta2 * v + (1.0 - state.beta2) * g * g;
      p -= learning_rate * (m / bc1) / (std::sqrt(v / bc2) + state.eps);
    };
    for (std::size_t k = 0; k < l.w.data.size(); ++k)
      update(l.w.data[k], l.gw.data[k], state.moments1[i].w.data[k], state.moments2[i].w.data[k]);
    for (std::size_t k = 0; k < l.b.size(); ++k)
      update(l.b[k], l.gb[k], state.moments1[i].b[k], state.moments2[i].b[k]);
  }
  params.zero_grads();
}

std::vector<double> finite_diff_grad(const std::function<double(ParameterSet&)>& f,
                                     ParameterSet params, double h) {
  if (h <= 0) throw std::invalid_argument("finite_diff_grad: h must be positive");
  std::vector<double> flat;
  params.flatten(flat);
  std::vector<double> grad(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double orig = flat[i];
    flat[i] = orig + h;
    params.unflatten(flat);
    const double fp = f(params);
    flat[i] = orig - h;
    params.unflatten(flat);
    const double fm = f(params);
    flat[i] = orig;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  params.unflatten(flat);
  return grad;
}

}  // namespace ppolab
