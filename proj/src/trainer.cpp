#include "mimic/trainer.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;

namespace mimic {

TrainOptions TrainOptions::from_config(const KeyValueConfig& kv) {
  TrainOptions o;
  o.iterations = static_cast<int>(kv.get_int("iterations", o.iterations));
  o.seed = static_cast<uint64_t>(kv.get_int("seed", 0));
  o.threads = static_cast<int>(kv.get_int("threads", o.threads));
  o.use_ams = kv.get_bool("use_ams", o.use_ams);
  o.eval_period = static_cast<int>(kv.get_int("eval_period", o.eval_period));
  o.ams_mix = kv.get_double("ams_mix", o.ams_mix);
  o.out_dir = kv.get_string("out_dir", o.out_dir);
  return o;
}

KeyValueConfig TrainOptions::to_config() const {
  KeyValueConfig kv;
  kv.set_int("iterations", iterations);
  kv.set_int("seed", static_cast<int64_t>(seed));
  kv.set_int("threads", threads);
  kv.set("use_ams", use_ams ? "true" : "false");
  kv.set_int("eval_period", eval_period);
  kv.set_double("ams_mix", ams_mix);
  kv.set("out_dir", out_dir);
  return kv;
}

RolloutBuffer collect_rollouts(const Dataset& dataset, const std::vector<std::string>& clip_ids,
                               const PolicyParams& params, const EnvConfig& env_cfg,
                               const SimConfig& sim_cfg, const RobotModel& model, uint64_t seed,
                               uint64_t iteration, int threads,
                               std::vector<EpisodeResult>* episode_results) {
  const int n = static_cast<int>(clip_ids.size());
  RolloutBuffer buffer;
  buffer.episodes.resize(n);
  if (episode_results) episode_results->resize(n);

  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int e = next.fetch_add(1);
      if (e >= n) break;
      const MotionClip& clip = dataset.at(clip_ids[e]);
      EpisodeRollout ep;
      const int max_steps = episode_steps(clip, env_cfg);
      ep.obs.resize(max_steps, params.obs_dim());
      ep.actions.resize(max_steps, params.act_dim());
      ep.logprobs.resize(max_steps);
      ep.values.resize(max_steps);
      int t = 0;

      const PolicyFn policy = [&](const VecX& obs, Rng& rng) {
        const PolicyOutput out = policy_forward(params, obs);
        const VecX action = sample_action(params, out.mean, rng);
        ep.obs.row(t) = obs.transpose();
        ep.actions.row(t) = action.transpose();
        ep.logprobs[t] = gaussian_log_prob(out.mean, out.log_std, action);
        ep.values[t] = out.value;
        ++t;
        return Vec12(action);
      };

      EpisodeResult result;
      try {
        result = run_episode(clip, policy, env_cfg, sim_cfg, model,
                             Rng::derive(seed, iteration, static_cast<uint64_t>(e)).next());
      } catch (const InvalidStart&) {
        result = EpisodeResult{};  // zero-step episode, dropped below
      }

      const int steps = result.steps_survived;
      ep.obs.conservativeResize(steps, Eigen::NoChange);
      ep.actions.conservativeResize(steps, Eigen::NoChange);
      ep.logprobs.conservativeResize(steps);
      ep.values.conservativeResize(steps);
      ep.rewards.resize(steps);
      for (int k = 0; k < steps; ++k) ep.rewards[k] = result.rewards[k];
      ep.terminated = !result.success;
      if (result.success && result.final_obs.size() == params.obs_dim())
        ep.bootstrap_value = policy_forward(params, result.final_obs).value;
      buffer.episodes[e] = std::move(ep);
      if (episode_results) (*episode_results)[e] = std::move(result);
    }
  };

  const int nthreads = std::max(1, std::min(threads, n));
  std::vector<std::thread> pool;
  for (int w = 1; w < nthreads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // Drop zero-length episodes (divergence at the very first step).
  RolloutBuffer cleaned;
  for (auto& ep : buffer.episodes)
    if (ep.rewards.size() > 0) cleaned.episodes.push_back(std::move(ep));
  return cleaned;
}

std::string train_log_csv_header() {
  return "iteration,mean_episode_return,mean_step_reward,failed_count,set_u,set_s,"
         "surrogate_loss,value_loss,entropy,clip_fraction,approx_kl";
}

std::string train_log_csv_row(const TrainLogRow& row) {
  std::string s = std::to_string(row.iteration);
  s += "," + format_double(row.mean_episode_return);
  s += "," + format_double(row.mean_step_reward);
  s += "," + std::to_string(row.failed_count);
  s += "," + std::to_string(row.set_u);
  s += "," + std::to_string(row.set_s);
  s += "," + format_double(row.stats.surrogate_loss);
  s += "," + format_double(row.stats.value_loss);
  s += "," + format_double(row.stats.entropy);
  s += "," + format_double(row.stats.clip_fraction);
  s += "," + format_double(row.stats.approx_kl);
  return s;
}

TrainResult train(const Dataset& dataset, const RobotModel& model, const SimConfig& sim_cfg,
                  const EnvConfig& env_cfg, const PPOConfig& ppo_cfg, const TrainOptions& opts) {
  if (dataset.size() == 0) throw ValidationError("train: dataset is empty");

  PolicyInit init;
  init.obs_dim = observation_dim(env_cfg);
  init.act_dim = kNumJoints;
  init.hidden = ppo_cfg.hidden;
  init.leaky_slope = ppo_cfg.leaky_slope;
  init.init_log_std = ppo_cfg.init_log_std;
  init.seed = opts.seed;

  TrainResult result;
  result.params = make_policy(init);
  AdamOptimizer opt(result.params.param_count(), ppo_cfg.learning_rate);
  Rng update_rng = Rng::derive(opts.seed, 0x0bda7e);

  SampleSets sets = ams_init(dataset, opts.seed, opts.eval_period, opts.ams_mix);
  Rng uniform_rng = Rng::derive(opts.seed, 0x0441f0);
  const std::vector<std::string> all_ids = dataset.ids();

  std::ofstream log_file;
  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    log_file.open(fs::path(opts.out_dir) / "training_log.csv");
    log_file << train_log_csv_header() << "\n";
  }

  for (int iter = 1; iter <= opts.iterations; ++iter) {
    std::vector<std::string> batch;
    if (opts.use_ams) {
      batch = ams_draw_batch(&sets, ppo_cfg.num_envs);
    } else {
      batch.reserve(ppo_cfg.num_envs);
      for (int e = 0; e < ppo_cfg.num_envs; ++e)
        batch.push_back(all_ids[uniform_rng.uniform_int(all_ids.size())]);
    }

    std::vector<EpisodeResult> episodes;
    RolloutBuffer buffer =
        collect_rollouts(dataset, batch, result.params, env_cfg, sim_cfg, model, opts.seed,
                         static_cast<uint64_t>(iter), opts.threads, &episodes);
    if (buffer.episodes.empty()) throw std::runtime_error("train: every episode diverged");

    TrainLogRow row;
    row.iteration = iter;
    double total_return = 0.0;
    long total_steps = 0;
    for (const EpisodeResult& ep : episodes) {
      total_return += ep.total_return;
      total_steps += ep.steps_survived;
    }
    row.mean_episode_return = total_return / static_cast<double>(episodes.size());
    row.mean_step_reward =
        total_steps > 0 ? total_return / static_cast<double>(total_steps) : 0.0;

    row.stats = ppo_update(&result.params, &opt, buffer, ppo_cfg, update_rng);
    if (row.stats.aborted)
      std::cerr << "warning: iteration " << iter << " update aborted (non-finite loss)\n";

    // Normalizer statistics update after the policy update, in slot order.
    for (const EpisodeRollout& ep : buffer.episodes)
      result.params.obs_norm.update_batch(ep.obs);

    if (iter % opts.eval_period == 0 || iter == opts.iterations) {
      const EvalReport report = ams_evaluate_and_repartition(
          &sets, dataset, result.params, env_cfg, sim_cfg, model, opts.seed, opts.threads);
      result.evals.push_back(report);
      result.last_failed_count = report.failed_count;
      row.failed_count = report.failed_count;
      if (!opts.out_dir.empty()) {
        save_checkpoint(result.params,
                        (fs::path(opts.out_dir) / ("checkpoint_iter" + std::to_string(iter) + ".bin"))
                            .string());
      }
    }
    row.set_u = static_cast<int>(sets.unsuccessful.size());
    row.set_s = static_cast<int>(sets.successful.size());

    result.log.push_back(row);
    if (log_file) log_file << train_log_csv_row(row) << "\n";
  }

  if (!opts.out_dir.empty() && opts.final_checkpoint)
    save_checkpoint(result.params, (fs::path(opts.out_dir) / "checkpoint_final.bin").string());
  return result;
}

}  // namespace mimic
