#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mimic/rng.hpp"
#include "mimic/sampling.hpp"
#include "mimic/sim.hpp"

namespace mimic {

// Reward r = w1 exp(-k1|x_ref - x|^2) + w2 exp(-k2|R_ref - R|_F^2)
//          + w3 exp(-k3|e_ref - e|^2), e = the four feet in the origin frame.
struct RewardWeights {
  double w1 = 0.7, w2 = 0.5, w3 = 0.15;
  double k1 = 12.5, k2 = 20.0, k3 = 40.0;
};

struct EnvConfig {
  double control_dt = 0.02;
  double max_episode_seconds = 10.0;
  int action_smoothing_window = 2;  // 1 disables smoothing
  // Residuals are taken about the current reference pose instead of the
  // nominal stand pose (the "action prior" ablation).
  bool action_prior_reference = false;
  bool include_current_frame = false;  // observation ablation
  std::vector<double> window_offsets =
      std::vector<double>(kWindowOffsets.begin(), kWindowOffsets.end());
  bool velocity_in_base_frame = false;  // v_t frame; world by default
  Vec12 nominal_pose = nominal_stand_pose();
  RewardWeights reward;

  void validate() const;
  static EnvConfig from_config(const KeyValueConfig& kv);
  static EnvConfig from_file(const std::string& path);
  KeyValueConfig to_config() const;
};

// Observation layout: robot block (x 3, R row-major 9, q 12, v 3, omega 3,
// qd 12) then the reference window frames, 24 values each.
constexpr int kRobotBlockDim = 42;
int observation_dim(const EnvConfig& cfg);

// probed_offsets, when non-null, records which reference offsets were read.
VecX observe(const RobotState& state, const MotionClip& clip, double t, const EnvConfig& cfg,
             std::vector<double>* probed_offsets = nullptr);

// Moving-average smoothing (window two), then clamp of nominal + residual to
// the joint limits. In action-prior mode the residual is about q_ref(t).
Vec12 process_action(const Vec12& raw, const Vec12& prev_raw, const EnvConfig& cfg,
                     const RobotModel& model, const MotionClip* clip = nullptr, double t = 0.0);

double reward(const RobotState& state, const MotionClip& clip, double t,
              const RewardWeights& w, const RobotModel& model);

// Contact-based termination, no penalty attached.
bool terminated(const RobotState& state, const SimConfig& sim_cfg);

struct TrajectoryRow {
  double t = 0.0;
  double reward = 0.0;
  Vec3 com = Vec3::Zero();
  Vec3 ref_com = Vec3::Zero();
  std::array<bool, kNumLegs> foot_contact{};
  bool terminated = false;
};

struct EpisodeResult {
  double total_return = 0.0;
  int steps_survived = 0;
  int max_steps = 0;
  bool success = false;
  bool diverged = false;
  VecX final_obs;  // for value bootstrapping at horizon truncation
  std::vector<double> rewards;
  std::vector<TrajectoryRow> trajectory;  // filled when record_trajectory
};

using PolicyFn = std::function<Vec12(const VecX& obs, Rng& rng)>;

// Fixed-rate episode: reset from clip frame 0, then observe -> policy ->
// process_action -> sim step -> reward -> termination at 1/control_dt Hz
// until the clip ends (capped at max_episode_seconds). Success means no
// early termination over the whole horizon.
EpisodeResult run_episode(const MotionClip& clip, const PolicyFn& policy, const EnvConfig& cfg,
                          const SimConfig& sim_cfg, const RobotModel& model, uint64_t seed,
                          bool record_trajectory = false);

int episode_steps(const MotionClip& clip, const EnvConfig& cfg);

std::string trajectory_csv_header();
std::string trajectory_csv_row(const TrajectoryRow& row, double base_height, double ref_height);
void write_trajectory_csv(const EpisodeResult& result, const std::string& path);

}  // namespace mimic
