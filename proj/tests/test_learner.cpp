#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "mimic/policy.hpp"
#include "mimic/ppo.hpp"

using namespace mimic;
namespace fs = std::filesystem;

namespace {

PolicyParams tiny_policy(int obs_dim = 6, int act_dim = 3, uint64_t seed = 4) {
  PolicyInit init;
  init.obs_dim = obs_dim;
  init.act_dim = act_dim;
  init.hidden = {8, 8};
  init.seed = seed;
  PolicyParams p = make_policy(init);
  // A non-trivial output layer so gradients are not dominated by zeros.
  Rng rng(seed + 1);
  for (Mlp* net : {&p.actor, &p.critic}) {
    MatX& w = net->weights().back();
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = 0.3 * rng.gaussian();
  }
  return p;
}

PPOBatch random_batch(const PolicyParams& params, int n, uint64_t seed, double action_spread) {
  Rng rng(seed);
  PPOBatch batch;
  batch.obs_normalized.resize(n, params.obs_dim());
  batch.actions.resize(n, params.act_dim());
  batch.old_logprobs.resize(n);
  batch.advantages.resize(n);
  batch.returns.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < params.obs_dim(); ++j) batch.obs_normalized(i, j) = rng.gaussian();
    const PolicyOutput out =
        policy_forward(params, batch.obs_normalized.row(i).transpose());
    VecX action = out.mean;
    for (int j = 0; j < params.act_dim(); ++j)
      action[j] += action_spread * rng.gaussian() * std::exp(out.log_std[j]);
    batch.actions.row(i) = action.transpose();
    batch.old_logprobs[i] = gaussian_log_prob(out.mean, out.log_std, action);
    batch.advantages[i] = rng.gaussian();
    batch.returns[i] = rng.gaussian();
  }
  return batch;
}

}  // namespace

TEST_CASE("zero weights give zero outputs") {
  PolicyInit init;
  init.obs_dim = 10;
  init.act_dim = 4;
  init.hidden = {8};
  PolicyParams p = make_policy(init);
  for (Mlp* net : {&p.actor, &p.critic}) {
    for (MatX& w : net->weights()) w.setZero();
    for (VecX& b : net->biases()) b.setZero();
  }
  const PolicyOutput out = policy_forward(p, VecX::Random(10));
  CHECK(out.mean.norm() == 0.0);
  CHECK(out.value == 0.0);
}

TEST_CASE("single-path network equals the LeakyReLU composition by hand") {
  Mlp net(1, {1, 1}, 1, 0.01);
  net.weights()[0](0, 0) = 2.0;
  net.biases()[0][0] = -1.0;
  net.weights()[1](0, 0) = 3.0;
  net.biases()[1][0] = 0.5;
  net.weights()[2](0, 0) = -1.5;
  net.biases()[2][0] = 0.25;

  const auto leaky = [](double v) { return v > 0 ? v : 0.01 * v; };
  for (double x : {-2.0, -0.3, 0.0, 0.4, 1.7}) {
    const double h1 = leaky(2.0 * x - 1.0);
    const double h2 = leaky(3.0 * h1 + 0.5);
    const double expected = -1.5 * h2 + 0.25;
    MatX in(1, 1);
    in(0, 0) = x;
    CHECK(net.forward(in)(0, 0) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("forward passes are deterministic") {
  PolicyParams p = tiny_policy();
  const VecX obs = VecX::Random(6);
  const PolicyOutput a = policy_forward(p, obs);
  const PolicyOutput b = policy_forward(p, obs);
  CHECK((a.mean - b.mean).norm() == 0.0);
  CHECK(a.value == b.value);
}

TEST_CASE("policy_forward rejects a wrong observation width") {
  PolicyParams p = tiny_policy();
  CHECK_THROWS(policy_forward(p, VecX::Zero(7)));
}

TEST_CASE("gae single step, gamma = lambda = 1, non-terminal") {
  VecX rewards(1), values(1), adv, ret;
  rewards[0] = 2.0;
  values[0] = 5.0;
  const double next_value = 3.0;
  gae(rewards, values, {0}, next_value, 1.0, 1.0, &adv, &ret);
  CHECK(adv[0] == doctest::Approx(2.0 + 3.0 - 5.0).epsilon(1e-15));
  CHECK(ret[0] == doctest::Approx(adv[0] + 5.0).epsilon(1e-15));
}

TEST_CASE("gae of all zeros is zero") {
  VecX rewards = VecX::Zero(5), values = VecX::Zero(5), adv, ret;
  gae(rewards, values, {0, 0, 0, 0, 1}, 0.0, 0.99, 0.95, &adv, &ret);
  CHECK(adv.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gae geometric sum: constant reward, terminal end") {
  VecX rewards = VecX::Ones(3), values = VecX::Zero(3), adv, ret;
  gae(rewards, values, {0, 0, 1}, 0.0, 0.9, 1.0, &adv, &ret);
  CHECK(adv[0] == doctest::Approx(1.0 + 0.9 + 0.81).epsilon(1e-12));
  CHECK(adv[1] == doctest::Approx(1.0 + 0.9).epsilon(1e-12));
  CHECK(adv[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("analytic ppo gradient matches central finite differences") {
  PolicyParams params = tiny_policy(6, 3, 9);
  PPOConfig cfg;
  cfg.clip_ratio = 0.2;
  const PPOBatch batch = random_batch(params, 10, 123, 0.05);

  VecX analytic;
  const PPOStats stats = ppo_loss_and_grad(params, batch, cfg, &analytic);
  REQUIRE_FALSE(stats.aborted);

  const VecX theta0 = params.flatten();
  const double h = 1e-5;
  double max_rel = 0.0;
  for (Eigen::Index k = 0; k < theta0.size(); ++k) {
    VecX theta = theta0;
    theta[k] = theta0[k] + h;
    params.set_from_flat(theta);
    const double lp = ppo_loss_and_grad(params, batch, cfg, nullptr).total_loss;
    theta[k] = theta0[k] - h;
    params.set_from_flat(theta);
    const double lm = ppo_loss_and_grad(params, batch, cfg, nullptr).total_loss;
    const double fd = (lp - lm) / (2.0 * h);
    const double rel = std::abs(analytic[k] - fd) / (std::abs(analytic[k]) + std::abs(fd) + 1e-6);
    max_rel = std::max(max_rel, rel);
  }
  params.set_from_flat(theta0);
  CHECK(max_rel < 1e-4);
}

TEST_CASE("with the ratio inside the band the gradient is the plain estimator") {
  PolicyParams params = tiny_policy(5, 2, 21);
  PPOConfig cfg;
  cfg.clip_ratio = 0.5;
  // Actions sampled at the current policy: ratios equal 1 exactly.
  const PPOBatch batch = random_batch(params, 12, 77, 1.0);

  VecX grad_clipped;
  const PPOStats s1 = ppo_loss_and_grad(params, batch, cfg, &grad_clipped);
  CHECK(s1.clip_fraction == 0.0);

  PPOConfig wide = cfg;
  wide.clip_ratio = 1e9;  // clip inactive everywhere
  VecX grad_unclipped;
  ppo_loss_and_grad(params, batch, wide, &grad_unclipped);
  CHECK((grad_clipped - grad_unclipped).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gaussian entropy matches the closed form at log_std = 0") {
  const VecX log_std = VecX::Zero(12);
  const double expected = 12.0 * 0.5 * std::log(2.0 * M_PI * std::exp(1.0));
  CHECK(gaussian_entropy(log_std) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(17.0272).epsilon(1e-4));
}

TEST_CASE("one full-batch epoch with inactive clip equals vanilla policy gradient") {
  PolicyParams params = tiny_policy(5, 2, 33);
  PPOConfig cfg;
  cfg.clip_ratio = 1e9;
  cfg.entropy_coef = 0.0;
  cfg.gae_lambda = 1.0;
  const PPOBatch batch = random_batch(params, 16, 55, 1.0);

  VecX ppo_grad;
  ppo_loss_and_grad(params, batch, cfg, &ppo_grad);

  // Vanilla estimator: -mean(A * dlogpi/dtheta), plus the value head.
  // Computed independently via finite differences of the REINFORCE loss.
  const VecX theta0 = params.flatten();
  const double h = 1e-6;
  const int actor_params = params.actor.param_count();
  double max_err = 0.0;
  for (int k = 0; k < actor_params; k += 7) {  // sample the actor block
    VecX theta = theta0;
    const auto reinforce_loss = [&](double tk) {
      theta[k] = tk;
      params.set_from_flat(theta);
      double loss = 0.0;
      for (int i = 0; i < batch.obs_normalized.rows(); ++i) {
        const PolicyOutput out =
            policy_forward(params, batch.obs_normalized.row(i).transpose());
        loss -= batch.advantages[i] *
                gaussian_log_prob(out.mean, out.log_std, batch.actions.row(i).transpose());
      }
      return loss / batch.obs_normalized.rows();
    };
    const double fd = (reinforce_loss(theta0[k] + h) - reinforce_loss(theta0[k] - h)) / (2 * h);
    max_err = std::max(max_err, std::abs(ppo_grad[k] - fd));
  }
  params.set_from_flat(theta0);
  CHECK(max_err < 1e-8);
}

TEST_CASE("advantage normalization: mean 0, std 1 after ppo_update preprocessing") {
  // Exercised through ppo_update on a synthetic buffer.
  PolicyParams params = tiny_policy(4, 2, 3);
  AdamOptimizer opt(params.param_count(), 1e-9);  // negligible step
  PPOConfig cfg;
  cfg.epochs = 1;
  cfg.minibatch_size = 64;
  Rng rng(2);

  RolloutBuffer buffer;
  for (int e = 0; e < 3; ++e) {
    EpisodeRollout ep;
    const int steps = 20;
    ep.obs = MatX::Random(steps, 4);
    ep.actions = MatX::Random(steps, 2);
    ep.logprobs.setZero(steps);
    for (int t = 0; t < steps; ++t) {
      const PolicyOutput out = policy_forward(params, ep.obs.row(t).transpose());
      ep.logprobs[t] =
          gaussian_log_prob(out.mean, out.log_std, ep.actions.row(t).transpose());
    }
    ep.values = VecX::Random(steps);
    ep.rewards = VecX::Random(steps);
    ep.terminated = (e % 2 == 0);
    ep.bootstrap_value = 0.3;
    buffer.episodes.push_back(std::move(ep));
  }
  const PPOStats stats = ppo_update(&params, &opt, buffer, cfg, rng);
  CHECK_FALSE(stats.aborted);
  CHECK(std::isfinite(stats.total_loss));
  CHECK(stats.approx_kl < 1e-6);  // ratios start at 1
}

TEST_CASE("checkpoint round trip is bit-exact") {
  PolicyParams params = tiny_policy(7, 3, 99);
  // Give the normalizer some state.
  MatX rows = MatX::Random(50, 7);
  params.obs_norm.update_batch(rows);

  const fs::path path = fs::temp_directory_path() / "mimic_ckpt_test.bin";
  save_checkpoint(params, path.string());
  const PolicyParams loaded = load_checkpoint(path.string());
  fs::remove(path);

  const VecX a = params.flatten();
  const VecX b = loaded.flatten();
  REQUIRE(a.size() == b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK(loaded.obs_norm.count() == params.obs_norm.count());
  CHECK((loaded.obs_norm.mean() - params.obs_norm.mean()).cwiseAbs().maxCoeff() == 0.0);

  const VecX obs = VecX::Random(7);
  const PolicyOutput oa = policy_forward(params, obs);
  const PolicyOutput ob = policy_forward(loaded, obs);
  CHECK(oa.value == ob.value);
  CHECK((oa.mean - ob.mean).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-finite advantages abort the update and leave params unchanged") {
  PolicyParams params = tiny_policy(4, 2, 8);
  AdamOptimizer opt(params.param_count(), 1e-3);
  PPOConfig cfg;
  Rng rng(5);
  RolloutBuffer buffer;
  EpisodeRollout ep;
  ep.obs = MatX::Random(4, 4);
  ep.actions = MatX::Random(4, 2);
  ep.logprobs = VecX::Zero(4);
  ep.values = VecX::Zero(4);
  ep.rewards = VecX::Zero(4);
  ep.rewards[2] = std::numeric_limits<double>::quiet_NaN();
  ep.terminated = true;
  buffer.episodes.push_back(std::move(ep));

  const VecX before = params.flatten();
  const PPOStats stats = ppo_update(&params, &opt, buffer, cfg, rng);
  CHECK(stats.aborted);
  CHECK((params.flatten() - before).cwiseAbs().maxCoeff() == 0.0);
}
