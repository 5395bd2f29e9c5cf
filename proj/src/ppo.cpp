#include "mimic/ppo.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace mimic {

PPOConfig PPOConfig::from_config(const KeyValueConfig& kv) {
  PPOConfig c;
  c.clip_ratio = kv.get_double("clip_ratio", c.clip_ratio);
  c.gamma = kv.get_double("gamma", c.gamma);
  c.gae_lambda = kv.get_double("gae_lambda", c.gae_lambda);
  c.entropy_coef = kv.get_double("entropy_coef", c.entropy_coef);
  c.value_coef = kv.get_double("value_coef", c.value_coef);
  c.learning_rate = kv.get_double("learning_rate", c.learning_rate);
  c.epochs = static_cast<int>(kv.get_int("epochs", c.epochs));
  c.minibatch_size = static_cast<int>(kv.get_int("minibatch_size", c.minibatch_size));
  c.num_envs = static_cast<int>(kv.get_int("num_envs", c.num_envs));
  if (kv.has("hidden")) {
    c.hidden.clear();
    for (double h : kv.get_doubles("hidden")) c.hidden.push_back(static_cast<int>(h));
  }
  c.leaky_slope = kv.get_double("leaky_slope", c.leaky_slope);
  c.init_log_std = kv.get_double("init_log_std", c.init_log_std);
  if (c.gamma <= 0.0 || c.gamma > 1.0) throw std::runtime_error("ppo config: gamma in (0,1]");
  if (c.gae_lambda < 0.0 || c.gae_lambda > 1.0)
    throw std::runtime_error("ppo config: lambda in [0,1]");
  if (c.clip_ratio <= 0.0) throw std::runtime_error("ppo config: clip_ratio must be > 0");
  return c;
}

PPOConfig PPOConfig::from_file(const std::string& path) {
  return from_config(KeyValueConfig::from_file(path));
}

KeyValueConfig PPOConfig::to_config() const {
  KeyValueConfig kv;
  kv.set_double("clip_ratio", clip_ratio);
  kv.set_double("gamma", gamma);
  kv.set_double("gae_lambda", gae_lambda);
  kv.set_double("entropy_coef", entropy_coef);
  kv.set_double("value_coef", value_coef);
  kv.set_double("learning_rate", learning_rate);
  kv.set_int("epochs", epochs);
  kv.set_int("minibatch_size", minibatch_size);
  kv.set_int("num_envs", num_envs);
  std::vector<double> h(hidden.begin(), hidden.end());
  kv.set_doubles("hidden", h);
  kv.set_double("leaky_slope", leaky_slope);
  kv.set_double("init_log_std", init_log_std);
  return kv;
}

void gae(const VecX& rewards, const VecX& values, const std::vector<uint8_t>& terminals,
         double final_value, double gamma, double lambda, VecX* advantages, VecX* returns) {
  const Eigen::Index n = rewards.size();
  advantages->resize(n);
  returns->resize(n);
  double last_gae = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double next_value = terminals[t] ? 0.0 : (t + 1 < n ? values[t + 1] : final_value);
    const double not_done = terminals[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_value - values[t];
    last_gae = delta + gamma * lambda * not_done * last_gae;
    (*advantages)[t] = last_gae;
    (*returns)[t] = last_gae + values[t];
  }
}

int RolloutBuffer::total_steps() const {
  int n = 0;
  for (const EpisodeRollout& ep : episodes) n += static_cast<int>(ep.rewards.size());
  return n;
}

PPOStats ppo_loss_and_grad(const PolicyParams& params, const PPOBatch& batch,
                           const PPOConfig& cfg, VecX* flat_grad) {
  const Eigen::Index n = batch.obs_normalized.rows();
  const Eigen::Index d = params.act_dim();
  PPOStats stats;

  Mlp::Workspace actor_ws, critic_ws;
  const MatX mean = params.actor.forward(batch.obs_normalized, actor_ws);
  const MatX value = params.critic.forward(batch.obs_normalized, critic_ws);

  const VecX std = params.log_std.array().exp();
  const VecX inv_var = (-2.0 * params.log_std.array()).exp();
  const double log2pi = std::log(2.0 * std::numbers::pi);

  // New log-probabilities of the stored actions.
  VecX logp(n);
  MatX diff = batch.actions - mean;  // n x d
  for (Eigen::Index i = 0; i < n; ++i) {
    double lp = -0.5 * static_cast<double>(d) * log2pi - params.log_std.sum();
    for (Eigen::Index j = 0; j < d; ++j) lp -= 0.5 * diff(i, j) * diff(i, j) * inv_var[j];
    logp[i] = lp;
  }

  // Clipped surrogate; gradient flows through the branch max() selects and
  // inside the clip band both branches coincide.
  double pg_loss = 0.0, kl = 0.0;
  Eigen::Index clipped_count = 0;
  VecX dlogp = VecX::Zero(n);  // dL/dlogp per sample
  const double lo = 1.0 - cfg.clip_ratio, hi = 1.0 + cfg.clip_ratio;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double logratio = logp[i] - batch.old_logprobs[i];
    const double ratio = std::exp(logratio);
    const double adv = batch.advantages[i];
    const double pg1 = -adv * ratio;
    const double pg2 = -adv * std::clamp(ratio, lo, hi);
    if (pg1 >= pg2) {
      pg_loss += pg1;
      dlogp[i] = -adv * ratio / static_cast<double>(n);
    } else {
      pg_loss += pg2;  // clipped branch, zero gradient
    }
    if (ratio < lo || ratio > hi) ++clipped_count;
    kl += (ratio - 1.0) - logratio;
  }
  pg_loss /= static_cast<double>(n);
  stats.surrogate_loss = pg_loss;
  stats.clip_fraction = static_cast<double>(clipped_count) / static_cast<double>(n);
  stats.approx_kl = kl / static_cast<double>(n);

  // Value MSE.
  const VecX verr = value.col(0) - batch.returns;
  stats.value_loss = 0.5 * verr.squaredNorm() / static_cast<double>(n);

  stats.entropy = gaussian_entropy(params.log_std);
  stats.total_loss =
      pg_loss + cfg.value_coef * stats.value_loss - cfg.entropy_coef * stats.entropy;
  if (!std::isfinite(stats.total_loss)) {
    stats.aborted = true;
    return stats;
  }
  if (flat_grad == nullptr) return stats;

  // Backward. dlogp/dmean_j = diff_j / var_j; dlogp/dlogstd_j = z_j^2 - 1.
  MatX dmean(n, d);
  VecX dlog_std = VecX::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double z2 = diff(i, j) * diff(i, j) * inv_var[j];
      dmean(i, j) = dlogp[i] * diff(i, j) * inv_var[j];
      dlog_std[j] += dlogp[i] * (z2 - 1.0);
    }
  }
  dlog_std.array() -= cfg.entropy_coef;  // entropy bonus, dH/dlogstd = 1

  MatX dvalue = (cfg.value_coef / static_cast<double>(n)) * verr;

  std::vector<MatX> actor_dw = params.actor.zero_weight_grads();
  std::vector<VecX> actor_db = params.actor.zero_bias_grads();
  std::vector<MatX> critic_dw = params.critic.zero_weight_grads();
  std::vector<VecX> critic_db = params.critic.zero_bias_grads();
  params.actor.backward(dmean, actor_ws, &actor_dw, &actor_db);
  params.critic.backward(dvalue, critic_ws, &critic_dw, &critic_db);

  flat_grad->resize(params.param_count());
  Eigen::Index at = 0;
  auto pack = [&](const std::vector<MatX>& dw, const std::vector<VecX>& db) {
    for (size_t l = 0; l < dw.size(); ++l) {
      const MatX& w = dw[l];
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) (*flat_grad)[at++] = w(i, j);
      (*flat_grad).segment(at, db[l].size()) = db[l];
      at += db[l].size();
    }
  };
  pack(actor_dw, actor_db);
  pack(critic_dw, critic_db);
  flat_grad->segment(at, d) = dlog_std;
  return stats;
}

AdamOptimizer::AdamOptimizer(int dim, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), t_(0) {
  m_ = VecX::Zero(dim);
  v_ = VecX::Zero(dim);
}

void AdamOptimizer::step(VecX* theta, const VecX& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  theta->array() -= lr_ * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_);
}

PPOStats ppo_update(PolicyParams* params, AdamOptimizer* opt, const RolloutBuffer& buffer,
                    const PPOConfig& cfg, Rng& rng) {
  const int total = buffer.total_steps();
  if (total == 0) throw std::runtime_error("ppo_update: empty buffer");
  const int obs_dim = params->obs_dim();
  const int act_dim = params->act_dim();

  MatX obs(total, obs_dim);
  MatX actions(total, act_dim);
  VecX old_logprobs(total), advantages(total), returns(total);
  int at = 0;
  for (const EpisodeRollout& ep : buffer.episodes) {
    const int steps = static_cast<int>(ep.rewards.size());
    VecX adv, ret;
    std::vector<uint8_t> terminals(steps, 0);
    if (ep.terminated && steps > 0) terminals[steps - 1] = 1;
    gae(ep.rewards, ep.values, terminals, ep.bootstrap_value, cfg.gamma, cfg.gae_lambda, &adv,
        &ret);
    obs.middleRows(at, steps) = ep.obs;
    actions.middleRows(at, steps) = ep.actions;
    old_logprobs.segment(at, steps) = ep.logprobs;
    advantages.segment(at, steps) = adv;
    returns.segment(at, steps) = ret;
    at += steps;
  }

  // Per-batch advantage normalization, once, before the epochs.
  const double adv_mean = advantages.mean();
  const double adv_std =
      std::sqrt((advantages.array() - adv_mean).square().sum() / advantages.size());
  advantages = (advantages.array() - adv_mean) / (adv_std + 1e-8);

  // Normalize observations with the stats used during the rollout.
  const MatX obs_n = params->obs_norm.normalize_batch(obs);

  VecX theta = params->flatten();
  PPOStats last;
  std::vector<int> indices(total);
  std::iota(indices.begin(), indices.end(), 0);
  const int mb = std::min(cfg.minibatch_size, total);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(indices);
    for (int start = 0; start < total; start += mb) {
      const int count = std::min(mb, total - start);
      PPOBatch batch;
      batch.obs_normalized.resize(count, obs_dim);
      batch.actions.resize(count, act_dim);
      batch.old_logprobs.resize(count);
      batch.advantages.resize(count);
      batch.returns.resize(count);
      for (int i = 0; i < count; ++i) {
        const int src = indices[start + i];
        batch.obs_normalized.row(i) = obs_n.row(src);
        batch.actions.row(i) = actions.row(src);
        batch.old_logprobs[i] = old_logprobs[src];
        batch.advantages[i] = advantages[src];
        batch.returns[i] = returns[src];
      }
      VecX grad;
      const PPOStats stats = ppo_loss_and_grad(*params, batch, cfg, &grad);
      if (stats.aborted) {
        last = stats;
        return last;  // leave parameters as they were
      }
      opt->step(&theta, grad);
      params->set_from_flat(theta);
      last = stats;
    }
  }
  return last;
}

}  // namespace mimic
