#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ris/rng.hpp"

namespace ris::neural {

// Dense real matrix, row-major; batches are (samples x features).
struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const double& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
  bool is_finite() const;
};

// C = A*B, C = A*B^T, C = A^T*B; the i-k-j kernels vectorize and carry the
// training loop, so keep them branch-free.
Mat matmul_nn(const Mat& a, const Mat& b);
Mat matmul_nt(const Mat& a, const Mat& b);
Mat matmul_tn(const Mat& a, const Mat& b);

enum class Act { linear, relu, tanh };

Act act_from_string(const std::string& s);
std::string act_to_string(Act a);

// Batch normalization over the batch dimension, applied after the layer
// activation. Running statistics follow the batch statistics with momentum
// 0.99 and are what eval mode uses.
struct BatchNorm {
  std::vector<double> gamma, beta;        // scale, shift
  std::vector<double> run_mean, run_var;  // eval-mode statistics
  double eps = 1e-5;
  double momentum = 0.99;

  explicit BatchNorm(std::size_t width)
      : gamma(width, 1.0), beta(width, 0.0), run_mean(width, 0.0), run_var(width, 1.0) {}
  BatchNorm() = default;
};

struct DenseLayer {
  Mat W;                  // in x out
  std::vector<double> b;  // out
  Act act = Act::linear;
  std::optional<BatchNorm> bn;  // applied after the activation
};

// A small fully connected network. train_mode selects between batch
// statistics (updating the running ones) and frozen running statistics.
struct DenseNet {
  std::vector<DenseLayer> layers;
  bool train_mode = false;

  std::size_t in_dim() const { return layers.front().W.rows; }
  std::size_t out_dim() const { return layers.back().W.cols; }
  bool same_arch(const DenseNet& other) const;
  bool is_finite() const;
};

// input -> h1 (hidden act, batch norm) -> h2 (hidden act) -> out (out act)
DenseNet make_mlp(std::size_t in, std::size_t h1, std::size_t h2, std::size_t out,
                  Act hidden, Act out_act, RngStream& rng);

DenseLayer make_layer(std::size_t in, std::size_t out, Act act, bool with_bn,
                      RngStream& rng);

// Per-layer intermediates kept for the backward pass.
struct LayerCache {
  Mat input;        // layer input
  Mat pre_act;      // X W + b
  Mat post_act;     // activation output (batch norm input)
  Mat normalized;   // (x - mean)/sqrt(var+eps), train-mode batch norm only
  std::vector<double> mean, var;  // statistics used by this pass
};

struct ForwardCache {
  bool valid = false;
  bool train_mode = false;
  std::vector<LayerCache> layers;
  Mat output;
};

// Plain forward pass. In train mode batch statistics are used and the
// running statistics are updated in place.
Mat forward(DenseNet& net, const Mat& batch);

// Forward pass that retains what backward needs. Does not update running
// statistics when the net is in eval mode.
Mat forward_cached(DenseNet& net, const Mat& batch, ForwardCache& cache);

struct LayerGrads {
  Mat dW;
  std::vector<double> db;
  std::vector<double> dgamma, dbeta;  // empty when the layer has no batch norm
};

struct Gradients {
  std::vector<LayerGrads> layers;
  Mat dinput;  // gradient with respect to the network input
  bool is_finite() const;
};

// Backpropagates upstream (dLoss/dOutput, batch x out) through the cached
// pass; requires a prior forward_cached on the same net.
Gradients backward(const DenseNet& net, const ForwardCache& cache, const Mat& upstream);

// Adaptive-moment optimizer state; the learning rate decays once per
// episode via decay_lr, not per step.
struct AdamState {
  struct Slot {
    std::vector<double> m, v;
  };
  std::vector<Slot> w_slots, b_slots, gamma_slots, beta_slots;
  std::size_t step = 0;
  double lr = 1e-3;
  double decay_lambda = 0.005;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

AdamState make_adam(const DenseNet& net, double lr, double decay_lambda);

void adam_step(DenseNet& net, const Gradients& grads, AdamState& st);

// mu <- (1 - lambda) * mu
void decay_lr(AdamState& st);

// target <- tau * train + (1 - tau) * target, every parameter and every
// batch-norm statistic; architectures must match.
void soft_update(DenseNet& target, const DenseNet& train, double tau);

// Flat self-describing text records, full double precision.
void save_net(const DenseNet& net, std::ostream& os);
DenseNet load_net(std::istream& is);
void save_net_file(const DenseNet& net, const std::string& path);
DenseNet load_net_file(const std::string& path);

}  // namespace ris::neural
