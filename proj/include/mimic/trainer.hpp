#pragma once

#include <string>

#include "mimic/ams.hpp"
#include "mimic/ppo.hpp"

namespace mimic {

struct TrainOptions {
  int iterations = 200;
  uint64_t seed = 0;
  int threads = 2;
  bool use_ams = true;          // off = uniform clip sampling
  int eval_period = 200;        // repartition + checkpoint cadence
  double ams_mix = 0.7;
  std::string out_dir;          // empty = no files written
  bool final_checkpoint = true;

  static TrainOptions from_config(const KeyValueConfig& kv);
  KeyValueConfig to_config() const;
};

struct TrainLogRow {
  int iteration = 0;
  double mean_episode_return = 0.0;
  double mean_step_reward = 0.0;
  int failed_count = -1;  // -1 when no evaluation ran this iteration
  int set_u = 0;
  int set_s = 0;
  PPOStats stats;
};

struct TrainResult {
  PolicyParams params;
  std::vector<TrainLogRow> log;
  std::vector<EvalReport> evals;
  int last_failed_count = -1;
};

// Rollout a batch of episodes (one env instance per slot) with the
// stochastic policy. Episode e of iteration i uses the RNG stream
// derive(seed, i, e), and results merge in slot order, so the outcome does
// not depend on thread scheduling.
RolloutBuffer collect_rollouts(const Dataset& dataset, const std::vector<std::string>& clip_ids,
                               const PolicyParams& params, const EnvConfig& env_cfg,
                               const SimConfig& sim_cfg, const RobotModel& model, uint64_t seed,
                               uint64_t iteration, int threads,
                               std::vector<EpisodeResult>* episode_results = nullptr);

TrainResult train(const Dataset& dataset, const RobotModel& model, const SimConfig& sim_cfg,
                  const EnvConfig& env_cfg, const PPOConfig& ppo_cfg, const TrainOptions& opts);

std::string train_log_csv_header();
std::string train_log_csv_row(const TrainLogRow& row);

}  // namespace mimic
