#include "mimic/env.hpp"

#include <cmath>
#include <fstream>

#include "mimic/config.hpp"

namespace mimic {

void EnvConfig::validate() const {
  if (control_dt <= 0) throw ValidationError("env config: control_dt must be > 0");
  if (action_smoothing_window != 1 && action_smoothing_window != 2)
    throw ValidationError("env config: action_smoothing_window must be 1 or 2");
  if (window_offsets.empty() && !include_current_frame)
    throw ValidationError("env config: reference block would be empty");
}

EnvConfig EnvConfig::from_config(const KeyValueConfig& kv) {
  EnvConfig c;
  c.control_dt = kv.get_double("control_dt", c.control_dt);
  c.max_episode_seconds = kv.get_double("max_episode_seconds", c.max_episode_seconds);
  c.action_smoothing_window =
      static_cast<int>(kv.get_int("action_smoothing_window", c.action_smoothing_window));
  c.action_prior_reference = kv.get_bool("action_prior_reference", c.action_prior_reference);
  c.include_current_frame = kv.get_bool("include_current_frame", c.include_current_frame);
  c.window_offsets = kv.get_doubles("window_offsets", c.window_offsets);
  c.velocity_in_base_frame = kv.get_bool("velocity_in_base_frame", c.velocity_in_base_frame);
  if (kv.has("nominal_pose")) {
    const auto vals = kv.get_doubles("nominal_pose");
    if (vals.size() != kNumJoints)
      throw ValidationError("env config: nominal_pose needs 12 values");
    for (int j = 0; j < kNumJoints; ++j) c.nominal_pose[j] = vals[j];
  }
  c.reward.w1 = kv.get_double("reward_w1", c.reward.w1);
  c.reward.w2 = kv.get_double("reward_w2", c.reward.w2);
  c.reward.w3 = kv.get_double("reward_w3", c.reward.w3);
  c.reward.k1 = kv.get_double("reward_k1", c.reward.k1);
  c.reward.k2 = kv.get_double("reward_k2", c.reward.k2);
  c.reward.k3 = kv.get_double("reward_k3", c.reward.k3);
  c.validate();
  return c;
}

EnvConfig EnvConfig::from_file(const std::string& path) {
  return from_config(KeyValueConfig::from_file(path));
}

KeyValueConfig EnvConfig::to_config() const {
  KeyValueConfig kv;
  kv.set_double("control_dt", control_dt);
  kv.set_double("max_episode_seconds", max_episode_seconds);
  kv.set_int("action_smoothing_window", action_smoothing_window);
  kv.set("action_prior_reference", action_prior_reference ? "true" : "false");
  kv.set("include_current_frame", include_current_frame ? "true" : "false");
  kv.set_doubles("window_offsets", window_offsets);
  kv.set("velocity_in_base_frame", velocity_in_base_frame ? "true" : "false");
  std::vector<double> pose(nominal_pose.data(), nominal_pose.data() + kNumJoints);
  kv.set_doubles("nominal_pose", pose);
  kv.set_double("reward_w1", reward.w1);
  kv.set_double("reward_w2", reward.w2);
  kv.set_double("reward_w3", reward.w3);
  kv.set_double("reward_k1", reward.k1);
  kv.set_double("reward_k2", reward.k2);
  kv.set_double("reward_k3", reward.k3);
  return kv;
}

int observation_dim(const EnvConfig& cfg) {
  const int ref_frames =
      static_cast<int>(cfg.window_offsets.size()) + (cfg.include_current_frame ? 1 : 0);
  return kRobotBlockDim + ReferenceFrame::kDim * ref_frames;
}

VecX observe(const RobotState& state, const MotionClip& clip, double t, const EnvConfig& cfg,
             std::vector<double>* probed_offsets) {
  VecX obs(observation_dim(cfg));
  obs.segment<3>(0) = state.position;
  obs.segment<9>(3) = flatten_row_major(state.rotation);
  obs.segment<12>(12) = state.q;
  obs.segment<3>(24) =
      cfg.velocity_in_base_frame ? Vec3(state.rotation.transpose() * state.lin_vel) : state.lin_vel;
  obs.segment<3>(27) = state.ang_vel;
  obs.segment<12>(30) = state.qd;

  int at = kRobotBlockDim;
  const ReferenceWindow window = sample_window_at(clip, t, cfg.window_offsets);
  for (const ReferenceFrame& f : window.frames) {
    obs.segment<ReferenceFrame::kDim>(at) = f.flatten();
    at += ReferenceFrame::kDim;
  }
  if (cfg.include_current_frame) {
    obs.segment<ReferenceFrame::kDim>(at) = sample_frame(clip, t).flatten();
    at += ReferenceFrame::kDim;
  }
  if (probed_offsets) {
    probed_offsets->assign(cfg.window_offsets.begin(), cfg.window_offsets.end());
    if (cfg.include_current_frame) probed_offsets->push_back(0.0);
  }
  return obs;
}

Vec12 process_action(const Vec12& raw, const Vec12& prev_raw, const EnvConfig& cfg,
                     const RobotModel& model, const MotionClip* clip, double t) {
  const Vec12 smoothed =
      cfg.action_smoothing_window == 2 ? Vec12(0.5 * (raw + prev_raw)) : raw;
  Vec12 anchor = cfg.nominal_pose;
  if (cfg.action_prior_reference) {
    if (clip == nullptr)
      throw ValidationError("process_action: action-prior mode needs the reference clip");
    anchor = sample_frame(*clip, t).joints;
  }
  return model.clamp_to_limits(anchor + smoothed);
}

double reward(const RobotState& state, const MotionClip& clip, double t,
              const RewardWeights& w, const RobotModel& model) {
  const ReferenceFrame ref = sample_frame(clip, t);
  const double com_err2 = (ref.com - state.position).squaredNorm();
  const double rot_err2 = (ref.rotation - state.rotation).squaredNorm();  // Frobenius
  const auto feet = fk_feet(model, state.base(), state.q);
  const auto ref_feet = fk_feet(model, BasePose{ref.com, ref.rotation}, ref.joints);
  double ee_err2 = 0.0;
  for (int leg = 0; leg < kNumLegs; ++leg) ee_err2 += (ref_feet[leg] - feet[leg]).squaredNorm();
  return w.w1 * std::exp(-w.k1 * com_err2) + w.w2 * std::exp(-w.k2 * rot_err2) +
         w.w3 * std::exp(-w.k3 * ee_err2);
}

bool terminated(const RobotState& state, const SimConfig& sim_cfg) {
  return contact_violation(state, sim_cfg);
}

int episode_steps(const MotionClip& clip, const EnvConfig& cfg) {
  const double horizon = std::min(clip.duration, cfg.max_episode_seconds);
  return static_cast<int>(std::ceil(horizon / cfg.control_dt - 1e-9));
}

EpisodeResult run_episode(const MotionClip& clip, const PolicyFn& policy, const EnvConfig& cfg,
                          const SimConfig& sim_cfg, const RobotModel& model, uint64_t seed,
                          bool record_trajectory) {
  EpisodeResult result;
  result.max_steps = episode_steps(clip, cfg);
  Rng rng(seed);

  RobotState state = sim_reset(model, sim_cfg, clip);
  Vec12 prev_raw = Vec12::Zero();
  bool early_stop = false;

  for (int k = 0; k < result.max_steps; ++k) {
    const double t = k * cfg.control_dt;
    const VecX obs = observe(state, clip, t, cfg);
    const Vec12 raw = policy(obs, rng);
    const Vec12 target = process_action(raw, prev_raw, cfg, model, &clip, t);
    prev_raw = raw;

    try {
      state = sim_step(model, sim_cfg, state, target);
    } catch (const SimDiverged&) {
      result.diverged = true;
      early_stop = true;
      break;
    }

    const double t_next = (k + 1) * cfg.control_dt;
    const double r = reward(state, clip, t_next, cfg.reward, model);
    result.rewards.push_back(r);
    result.total_return += r;
    result.steps_survived = k + 1;

    const bool term = terminated(state, sim_cfg);
    if (record_trajectory) {
      TrajectoryRow row;
      row.t = t_next;
      row.reward = r;
      row.com = state.position;
      row.ref_com = sample_frame(clip, t_next).com;
      for (int leg = 0; leg < kNumLegs; ++leg)
        row.foot_contact[leg] = state.contacts.in_contact[foot_body(leg)];
      row.terminated = term;
      result.trajectory.push_back(row);
    }
    if (term) {
      early_stop = true;
      break;
    }
  }

  result.success = !early_stop && result.steps_survived == result.max_steps;
  result.final_obs = observe(state, clip, result.steps_survived * cfg.control_dt, cfg);
  return result;
}

std::string trajectory_csv_header() {
  return "t,r,x,y,z,ref_x,ref_y,ref_z,base_height,ref_height,"
         "contact_fr,contact_fl,contact_rr,contact_rl,terminated";
}

std::string trajectory_csv_row(const TrajectoryRow& row, double base_height, double ref_height) {
  std::string s = format_double_short(row.t);
  s += "," + format_double(row.reward);
  for (int i = 0; i < 3; ++i) s += "," + format_double(row.com[i]);
  for (int i = 0; i < 3; ++i) s += "," + format_double(row.ref_com[i]);
  s += "," + format_double(base_height);
  s += "," + format_double(ref_height);
  for (int leg = 0; leg < kNumLegs; ++leg) s += row.foot_contact[leg] ? ",1" : ",0";
  s += row.terminated ? ",1" : ",0";
  return s;
}

void write_trajectory_csv(const EpisodeResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << trajectory_csv_header() << "\n";
  for (const TrajectoryRow& row : result.trajectory)
    out << trajectory_csv_row(row, row.com.z(), row.ref_com.z()) << "\n";
}

}  // namespace mimic
