#pragma once

#include <string>

#include "mimic/mlp.hpp"
#include "mimic/normalizer.hpp"

namespace mimic {

// Diagonal-Gaussian actor plus a separate critic trunk. log_std is state
// independent. Hidden layers default to [256, 256] with LeakyReLU.
struct PolicyParams {
  Mlp actor;
  Mlp critic;
  VecX log_std;
  RunningNormalizer obs_norm;

  int obs_dim() const { return actor.input_dim(); }
  int act_dim() const { return actor.output_dim(); }

  // Order: actor weights/biases per layer, critic likewise, then log_std.
  int param_count() const;
  VecX flatten() const;
  void set_from_flat(const VecX& theta);
};

struct PolicyInit {
  int obs_dim = 234;
  int act_dim = 12;
  std::vector<int> hidden = {256, 256};
  double leaky_slope = 0.01;
  double init_log_std = -1.3862943611198906;  // ln(0.25)
  uint64_t seed = 0;
};

PolicyParams make_policy(const PolicyInit& init);

struct PolicyOutput {
  VecX mean;
  VecX log_std;
  double value = 0.0;
};

// Deterministic forward pass through observation normalization (frozen at
// call time), actor, and critic.
PolicyOutput policy_forward(const PolicyParams& params, const VecX& obs);

VecX sample_action(const PolicyParams& params, const VecX& mean, Rng& rng);
double gaussian_log_prob(const VecX& mean, const VecX& log_std, const VecX& action);
double gaussian_entropy(const VecX& log_std);

// Self-describing binary checkpoint: format version, shapes, normalizer
// state, flat weights; little-endian 8-byte floats. Round-trips bit-exactly.
void save_checkpoint(const PolicyParams& params, const std::string& path);
PolicyParams load_checkpoint(const std::string& path);

}  // namespace mimic
