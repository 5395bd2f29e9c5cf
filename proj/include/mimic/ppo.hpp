#pragma once

#include <vector>

#include "mimic/config.hpp"
#include "mimic/policy.hpp"

namespace mimic {

struct PPOConfig {
  double clip_ratio = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double entropy_coef = 1e-4;
  double value_coef = 0.5;
  double learning_rate = 3e-4;
  int epochs = 3;
  int minibatch_size = 512;
  int num_envs = 100;
  std::vector<int> hidden = {256, 256};
  double leaky_slope = 0.01;
  double init_log_std = -1.3862943611198906;  // ln(0.25)

  static PPOConfig from_config(const KeyValueConfig& kv);
  static PPOConfig from_file(const std::string& path);
  KeyValueConfig to_config() const;
};

// Generalized advantage estimation over one flat sequence. terminals[t]
// marks a true (contact) termination at step t, which bootstraps 0; the end
// of the sequence bootstraps final_value (V of the truncation state).
void gae(const VecX& rewards, const VecX& values, const std::vector<uint8_t>& terminals,
         double final_value, double gamma, double lambda, VecX* advantages, VecX* returns);

struct EpisodeRollout {
  MatX obs;      // T x obs_dim, raw (unnormalized)
  MatX actions;  // T x act_dim
  VecX logprobs;
  VecX values;
  VecX rewards;
  bool terminated = false;   // contact termination (vs horizon truncation)
  double bootstrap_value = 0.0;
};

struct RolloutBuffer {
  std::vector<EpisodeRollout> episodes;

  int total_steps() const;
};

struct PPOStats {
  double surrogate_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double total_loss = 0.0;
  bool aborted = false;  // non-finite loss, update skipped
};

// Loss and flat-parameter gradient on one minibatch (already normalized
// observations). Shared by the optimizer and the finite-difference tests.
struct PPOBatch {
  MatX obs_normalized;
  MatX actions;
  VecX old_logprobs;
  VecX advantages;  // normalized
  VecX returns;
};

PPOStats ppo_loss_and_grad(const PolicyParams& params, const PPOBatch& batch,
                           const PPOConfig& cfg, VecX* flat_grad);

class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(int dim, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(VecX* theta, const VecX& grad);
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_ = 3e-4, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  VecX m_, v_;
};

// Clipped-surrogate update over the merged buffer: advantages normalized
// once per batch, then cfg.epochs passes of seeded minibatch Adam steps.
PPOStats ppo_update(PolicyParams* params, AdamOptimizer* opt, const RolloutBuffer& buffer,
                    const PPOConfig& cfg, Rng& rng);

}  // namespace mimic
