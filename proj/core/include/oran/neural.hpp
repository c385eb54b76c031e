#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "oran/rng.hpp"

namespace oran {

// Minimal dense matrix, row-major.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}
  double& operator()(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
};

// Feed-forward network: rectifier on hidden layers, identity output.
// Optionally adds the input to the output (residual) so a zero-initialized
// last layer yields an exact identity map; requires matching in/out widths.
struct MlpModel {
  std::vector<int> sizes;       // layer widths, input first
  std::vector<Matrix> weights;  // weights[l]: sizes[l+1] x sizes[l]
  std::vector<std::vector<double>> biases;
  bool residual = false;
  double learning_rate = 1.0e-3;
  double momentum = 0.0;
  std::vector<Matrix> weight_velocity;  // allocated when momentum > 0
  std::vector<std::vector<double>> bias_velocity;

  int input_size() const { return sizes.front(); }
  int output_size() const { return sizes.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
};

// Glorot-uniform init; seeded, deterministic. `zero_last_layer` zeroes the
// final affine so a residual model starts as the identity.
MlpModel make_mlp(const std::vector<int>& sizes, Rng& rng,
                  double learning_rate = 1.0e-3, double momentum = 0.0,
                  bool residual = false, bool zero_last_layer = false,
                  double last_layer_noise = 0.0);

std::vector<double> forward(const MlpModel& model, const std::vector<double>& input);

// Per-layer activations kept for backprop.
struct ForwardCache {
  std::vector<std::vector<double>> activations;  // [0]=input, [L]=output
  const std::vector<double>& output() const { return activations.back(); }
};

ForwardCache forward_cached(const MlpModel& model, const std::vector<double>& input);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static Gradients zeros_like(const MlpModel& model);
  void scale(double s);
};

// Backpropagates dL/d(output) through the cached pass, accumulating parameter
// gradients into `grads` and returning dL/d(input) (includes the residual
// pass-through when the model is residual).
std::vector<double> backward_from_output(const MlpModel& model,
                                         const ForwardCache& cache,
                                         const std::vector<double>& output_grad,
                                         Gradients& grads);

// Gradient of 0.5 * (td_target - Q(input)[action])^2 w.r.t. all parameters.
Gradients backward_td(const MlpModel& model, const std::vector<double>& input,
                      int action_index, double td_target);

// theta <- theta - lr * grad (with optional momentum). `scale` multiplies the
// gradient first, e.g. 1/batch for batch means.
void sgd_step(MlpModel& model, const Gradients& grads, double scale = 1.0);

MlpModel sync_target(const MlpModel& online);

// Epsilon-greedy over a Q-table; consumes one uniform draw, plus one more
// when exploring. Ties resolve to the lowest index.
int epsilon_greedy(const std::vector<double>& q, double epsilon, Rng& rng);
int argmax_action(const std::vector<double>& q);

// Versioned binary checkpoint; parameters round-trip bit-for-bit.
void save_model(const MlpModel& model, std::ostream& out);
MlpModel load_model(std::istream& in);
void save_model_file(const MlpModel& model, const std::string& path);
MlpModel load_model_file(const std::string& path);

// One decision-epoch experience record for the two-agent tuple.
struct Transition {
  std::vector<double> state_alpha;
  std::vector<double> state_beta;
  int action_alpha = 0;
  int action_beta = 0;
  double reward_alpha = 0.0;
  double reward_beta = 0.0;
  std::vector<double> next_state_alpha;
  std::vector<double> next_state_beta;
};

// Fixed-capacity ring buffer with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity) : capacity_(capacity) {}

  void push(Transition t);
  int size() const { return static_cast<int>(buffer_.size()); }
  int capacity() const { return capacity_; }
  const Transition& at(int i) const { return buffer_[i]; }
  std::vector<int> sample_indices(int batch, Rng& rng) const;

 private:
  int capacity_;
  std::vector<Transition> buffer_;
  int cursor_ = 0;
};

}  // namespace oran
