#pragma once

#include <vector>

#include "mimic/rng.hpp"
#include "mimic/rotation.hpp"

namespace mimic {

// Fully connected net with LeakyReLU hidden activations and a linear output.
// Forward/backward are hand-rolled batch matrix ops; rows are samples.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int input_dim, const std::vector<int>& hidden, int output_dim, double leaky_slope);

  // Scaled orthogonal init (QR of a Gaussian matrix), zero biases.
  void init_orthogonal(Rng& rng, double hidden_gain, double output_gain);

  struct Workspace {
    std::vector<MatX> activations;  // activations[0] = input, per layer after
    std::vector<MatX> preacts;      // pre-activation per layer
  };

  MatX forward(const MatX& x) const;
  MatX forward(const MatX& x, Workspace& ws) const;

  // Accumulate parameter gradients for dL/dy into grads (same shapes as
  // weights/biases). Returns nothing; inputs are not differentiated.
  void backward(const MatX& dy, const Workspace& ws, std::vector<MatX>* dw,
                std::vector<VecX>* db) const;

  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  int layer_count() const { return static_cast<int>(weights_.size()); }
  int param_count() const;

  std::vector<MatX>& weights() { return weights_; }
  std::vector<VecX>& biases() { return biases_; }
  const std::vector<MatX>& weights() const { return weights_; }
  const std::vector<VecX>& biases() const { return biases_; }
  double leaky_slope() const { return leaky_slope_; }

  std::vector<MatX> zero_weight_grads() const;
  std::vector<VecX> zero_bias_grads() const;

 private:
  int input_dim_ = 0;
  int output_dim_ = 0;
  double leaky_slope_ = 0.01;
  std::vector<MatX> weights_;  // out x in per layer
  std::vector<VecX> biases_;
};

}  // namespace mimic
