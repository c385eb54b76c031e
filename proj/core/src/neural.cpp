#include "oran/neural.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oran {

MlpModel make_mlp(const std::vector<int>& sizes, Rng& rng, double learning_rate,
                  double momentum, bool residual, bool zero_last_layer,
                  double last_layer_noise) {
  if (sizes.size() < 2) throw std::invalid_argument("make_mlp: need >= 2 layers");
  if (residual && sizes.front() != sizes.back())
    throw std::invalid_argument("make_mlp: residual model needs equal in/out widths");
  MlpModel m;
  m.sizes = sizes;
  m.residual = residual;
  m.learning_rate = learning_rate;
  m.momentum = momentum;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Matrix w(sizes[l + 1], sizes[l]);
    const bool last = (l + 2 == sizes.size());
    const double bound = std::sqrt(6.0 / (sizes[l] + sizes[l + 1]));
    for (double& x : w.v) {
      if (last && zero_last_layer)
        x = last_layer_noise > 0.0 ? rng.uniform(-last_layer_noise, last_layer_noise) : 0.0;
      else
        x = rng.uniform(-bound, bound);
    }
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(sizes[l + 1], 0.0);
  }
  if (momentum > 0.0) {
    for (const Matrix& w : m.weights) m.weight_velocity.emplace_back(w.rows, w.cols);
    for (const auto& b : m.biases) m.bias_velocity.emplace_back(b.size(), 0.0);
  }
  return m;
}

namespace {

void affine(const Matrix& w, const std::vector<double>& b,
            const std::vector<double>& x, std::vector<double>& y) {
  y.assign(w.rows, 0.0);
  for (int r = 0; r < w.rows; ++r) {
    double acc = b[r];
    const double* row = &w.v[static_cast<std::size_t>(r) * w.cols];
    for (int c = 0; c < w.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

}  // namespace

std::vector<double> forward(const MlpModel& model, const std::vector<double>& input) {
  if (static_cast<int>(input.size()) != model.input_size())
    throw std::invalid_argument("forward: input size mismatch");
  std::vector<double> a = input;
  std::vector<double> next;
  for (int l = 0; l < model.num_layers(); ++l) {
    affine(model.weights[l], model.biases[l], a, next);
    if (l + 1 < model.num_layers())
      for (double& x : next) x = x > 0.0 ? x : 0.0;
    a.swap(next);
  }
  if (model.residual)
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += input[i];
  return a;
}

ForwardCache forward_cached(const MlpModel& model, const std::vector<double>& input) {
  if (static_cast<int>(input.size()) != model.input_size())
    throw std::invalid_argument("forward_cached: input size mismatch");
  ForwardCache cache;
  cache.activations.reserve(model.num_layers() + 1);
  cache.activations.push_back(input);
  std::vector<double> next;
  for (int l = 0; l < model.num_layers(); ++l) {
    affine(model.weights[l], model.biases[l], cache.activations.back(), next);
    if (l + 1 < model.num_layers())
      for (double& x : next) x = x > 0.0 ? x : 0.0;
    cache.activations.push_back(next);
  }
  if (model.residual) {
    auto& out = cache.activations.back();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += input[i];
  }
  return cache;
}

Gradients Gradients::zeros_like(const MlpModel& model) {
  Gradients g;
  for (const Matrix& w : model.weights) g.weights.emplace_back(w.rows, w.cols);
  for (const auto& b : model.biases) g.biases.emplace_back(b.size(), 0.0);
  return g;
}

void Gradients::scale(double s) {
  for (Matrix& w : weights)
    for (double& x : w.v) x *= s;
  for (auto& b : biases)
    for (double& x : b) x *= s;
}

std::vector<double> backward_from_output(const MlpModel& model,
                                         const ForwardCache& cache,
                                         const std::vector<double>& output_grad,
                                         Gradients& grads) {
  const int L = model.num_layers();
  // delta: dL/d(pre-activation of layer l). The output layer is linear, so
  // its delta equals output_grad directly (the residual path adds nothing to
  // parameter gradients, only to the input gradient).
  std::vector<double> delta = output_grad;
  std::vector<double> prev;
  for (int l = L - 1; l >= 0; --l) {
    // Post-activation of layer l-1 (or the input), pre-residual.
    const std::vector<double>& a_in = cache.activations[l];
    Matrix& gw = grads.weights[l];
    for (int r = 0; r < gw.rows; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      double* row = &gw.v[static_cast<std::size_t>(r) * gw.cols];
      for (int c = 0; c < gw.cols; ++c) row[c] += d * a_in[c];
      grads.biases[l][r] += d;
    }
    // dL/d(a_in) = W^T delta, gated by ReLU' except at the input.
    prev.assign(model.sizes[l], 0.0);
    const Matrix& w = model.weights[l];
    for (int r = 0; r < w.rows; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      const double* row = &w.v[static_cast<std::size_t>(r) * w.cols];
      for (int c = 0; c < w.cols; ++c) prev[c] += d * row[c];
    }
    if (l > 0)
      for (int c = 0; c < model.sizes[l]; ++c)
        if (a_in[c] <= 0.0) prev[c] = 0.0;
    delta.swap(prev);
  }
  if (model.residual)
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] += output_grad[i];
  return delta;
}

Gradients backward_td(const MlpModel& model, const std::vector<double>& input,
                      int action_index, double td_target) {
  if (action_index < 0 || action_index >= model.output_size())
    throw std::invalid_argument("backward_td: action index out of range");
  const ForwardCache cache = forward_cached(model, input);
  std::vector<double> output_grad(model.output_size(), 0.0);
  // d/dQ[a] of 0.5 (y - Q[a])^2 = Q[a] - y.
  output_grad[action_index] = cache.output()[action_index] - td_target;
  Gradients grads = Gradients::zeros_like(model);
  backward_from_output(model, cache, output_grad, grads);
  return grads;
}

void sgd_step(MlpModel& model, const Gradients& grads, double scale) {
  const double lr = model.learning_rate;
  if (model.momentum > 0.0) {
    for (int l = 0; l < model.num_layers(); ++l) {
      Matrix& v = model.weight_velocity[l];
      for (std::size_t i = 0; i < v.v.size(); ++i) {
        v.v[i] = model.momentum * v.v[i] + grads.weights[l].v[i] * scale;
        model.weights[l].v[i] -= lr * v.v[i];
      }
      auto& vb = model.bias_velocity[l];
      for (std::size_t i = 0; i < vb.size(); ++i) {
        vb[i] = model.momentum * vb[i] + grads.biases[l][i] * scale;
        model.biases[l][i] -= lr * vb[i];
      }
    }
    return;
  }
  for (int l = 0; l < model.num_layers(); ++l) {
    for (std::size_t i = 0; i < model.weights[l].v.size(); ++i)
      model.weights[l].v[i] -= lr * grads.weights[l].v[i] * scale;
    for (std::size_t i = 0; i < model.biases[l].size(); ++i)
      model.biases[l][i] -= lr * grads.biases[l][i] * scale;
  }
}

MlpModel sync_target(const MlpModel& online) { return online; }

int argmax_action(const std::vector<double>& q) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(q.size()); ++i)
    if (q[i] > q[best]) best = i;
  return best;
}

int epsilon_greedy(const std::vector<double>& q, double epsilon, Rng& rng) {
  if (q.empty()) throw std::invalid_argument("epsilon_greedy: empty Q-table");
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("epsilon_greedy: epsilon outside [0, 1]");
  const double u = rng.uniform();
  if (u < epsilon) return static_cast<int>(rng.uniform_int(q.size()));
  return argmax_action(q);
}

namespace {

constexpr char kMagic[4] = {'M', 'L', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& x) {
  out.write(reinterpret_cast<const char*>(&x), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T x{};
  in.read(reinterpret_cast<char*>(&x), sizeof(T));
  if (!in) throw std::runtime_error("model checkpoint truncated");
  return x;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::istream& in, std::vector<double>& v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw std::runtime_error("model checkpoint truncated");
}

}  // namespace

void save_model(const MlpModel& model, std::ostream& out) {
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(model.sizes.size()));
  for (int s : model.sizes) write_pod(out, static_cast<std::uint32_t>(s));
  write_pod(out, static_cast<std::uint8_t>(model.residual ? 1 : 0));
  write_pod(out, model.learning_rate);
  write_pod(out, model.momentum);
  for (const Matrix& w : model.weights) write_doubles(out, w.v);
  for (const auto& b : model.biases) write_doubles(out, b);
  const std::uint8_t has_velocity = model.momentum > 0.0 ? 1 : 0;
  write_pod(out, has_velocity);
  if (has_velocity) {
    for (const Matrix& w : model.weight_velocity) write_doubles(out, w.v);
    for (const auto& b : model.bias_velocity) write_doubles(out, b);
  }
}

MlpModel load_model(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a model checkpoint");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const auto num_sizes = read_pod<std::uint32_t>(in);
  if (num_sizes < 2 || num_sizes > 64)
    throw std::runtime_error("corrupt checkpoint: bad layer count");
  MlpModel m;
  m.sizes.resize(num_sizes);
  for (auto& s : m.sizes) s = static_cast<int>(read_pod<std::uint32_t>(in));
  m.residual = read_pod<std::uint8_t>(in) != 0;
  m.learning_rate = read_pod<double>(in);
  m.momentum = read_pod<double>(in);
  for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) {
    Matrix w(m.sizes[l + 1], m.sizes[l]);
    read_doubles(in, w.v);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(m.sizes[l + 1], 0.0);
  }
  for (auto& b : m.biases) read_doubles(in, b);
  const auto has_velocity = read_pod<std::uint8_t>(in);
  if (has_velocity) {
    for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) {
      Matrix w(m.sizes[l + 1], m.sizes[l]);
      read_doubles(in, w.v);
      m.weight_velocity.push_back(std::move(w));
    }
    for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) {
      m.bias_velocity.emplace_back(m.sizes[l + 1], 0.0);
      read_doubles(in, m.bias_velocity.back());
    }
  }
  return m;
}

void save_model_file(const MlpModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_model(model, out);
}

MlpModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_model(in);
}

void ReplayBuffer::push(Transition t) {
  if (static_cast<int>(buffer_.size()) < capacity_) {
    buffer_.push_back(std::move(t));
  } else {
    buffer_[cursor_] = std::move(t);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<int> ReplayBuffer::sample_indices(int batch, Rng& rng) const {
  if (size() < batch)
    throw std::invalid_argument("ReplayBuffer: not enough transitions to sample");
  std::vector<int> idx(batch);
  for (int i = 0; i < batch; ++i)
    idx[i] = static_cast<int>(rng.uniform_int(buffer_.size()));
  return idx;
}

}  // namespace oran
