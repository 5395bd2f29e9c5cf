#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mimic/env.hpp"
#include "mimic/synthesize.hpp"

using namespace mimic;

namespace {

MotionClip stand_clip(const RobotModel& model, double duration = 10.0) {
  GaitSpec spec;
  spec.type = MotionType::kStand;
  spec.duration = duration;
  return synthesize_clip(spec, model);
}

// Robot state equal to a reference frame, velocities zero.
RobotState state_from_frame(const ReferenceFrame& f) {
  RobotState s;
  s.position = f.com;
  s.rotation = f.rotation;
  s.q = f.joints;
  return s;
}

}  // namespace

TEST_CASE("observation has length 234 with the documented block offsets") {
  RobotModel model;
  EnvConfig cfg;
  CHECK(observation_dim(cfg) == 234);

  const MotionClip clip = stand_clip(model, 2.0);
  RobotState s;
  s.position = Vec3(1, 2, 3);
  s.rotation = rot_z(0.3);
  for (int j = 0; j < 12; ++j) s.q[j] = 100.0 + j;
  s.lin_vel = Vec3(4, 5, 6);
  s.ang_vel = Vec3(7, 8, 9);
  for (int j = 0; j < 12; ++j) s.qd[j] = 200.0 + j;

  const VecX obs = observe(s, clip, 1.0, cfg);
  REQUIRE(obs.size() == 234);
  CHECK(obs.segment<3>(0).isApprox(s.position));
  CHECK(obs.segment<9>(3).isApprox(flatten_row_major(s.rotation)));
  CHECK(obs.segment<12>(12).isApprox(s.q));
  CHECK(obs.segment<3>(24).isApprox(s.lin_vel));
  CHECK(obs.segment<3>(27).isApprox(s.ang_vel));
  CHECK(obs.segment<12>(30).isApprox(s.qd));
  // Reference block: 8 frames of 24 in (q, R, x) order.
  const ReferenceWindow w = sample_window(clip, 1.0);
  for (int i = 0; i < 8; ++i)
    CHECK(obs.segment<24>(42 + 24 * i).isApprox(w.frames[i].flatten()));
}

TEST_CASE("ablation lengths: current frame adds 24, window size k gives 42+24k") {
  EnvConfig cfg;
  cfg.include_current_frame = true;
  CHECK(observation_dim(cfg) == 258);
  for (int k = 1; k <= 8; ++k) {
    EnvConfig sub;
    sub.window_offsets.assign(kWindowOffsets.begin(), kWindowOffsets.begin() + k);
    CHECK(observation_dim(sub) == 42 + 24 * k);
  }
  EnvConfig current_only;
  current_only.window_offsets.clear();
  current_only.include_current_frame = true;
  CHECK(observation_dim(current_only) == 66);
}

TEST_CASE("constant clip: robot block matches every window frame") {
  RobotModel model;
  EnvConfig cfg;
  const MotionClip clip = stand_clip(model, 2.0);
  const RobotState s = state_from_frame(clip.frames.front());
  const VecX obs = observe(s, clip, 1.0, cfg);
  for (int i = 0; i < 8; ++i) {
    const int at = 42 + 24 * i;
    CHECK(obs.segment<12>(at).isApprox(s.q));
    CHECK(obs.segment<9>(at + 12).isApprox(flatten_row_major(s.rotation)));
    CHECK(obs.segment<3>(at + 21).isApprox(s.position));
  }
}

TEST_CASE("default observation never reads the reference at offset zero") {
  RobotModel model;
  EnvConfig cfg;
  const MotionClip clip = stand_clip(model, 2.0);
  const RobotState s = state_from_frame(clip.frames.front());
  for (double t : {0.0, 0.5, 1.0, 1.98}) {
    std::vector<double> probed;
    observe(s, clip, t, cfg, &probed);
    for (double off : probed) CHECK(off != 0.0);
  }
}

TEST_CASE("process_action: zero action maps to the nominal pose exactly") {
  RobotModel model;
  EnvConfig cfg;
  const Vec12 target = process_action(Vec12::Zero(), Vec12::Zero(), cfg, model);
  CHECK((target - cfg.nominal_pose).norm() == 0.0);
}

TEST_CASE("process_action clamps hips to +-0.5") {
  RobotModel model;
  EnvConfig cfg;
  Vec12 raw = Vec12::Zero();
  raw[0] = 0.71 - cfg.nominal_pose[0];  // push FR hip toward 0.7
  const Vec12 target = process_action(raw, raw, cfg, model);
  CHECK(target[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("process_action averages the last two raw actions") {
  RobotModel model;
  EnvConfig cfg;
  Vec12 raw = Vec12::Zero();
  raw[0] = 0.2;
  const Vec12 target = process_action(raw, Vec12::Zero(), cfg, model);
  CHECK(target[0] == doctest::Approx(cfg.nominal_pose[0] + 0.1).epsilon(1e-12));
}

TEST_CASE("process_action action-prior mode anchors on the reference pose") {
  RobotModel model;
  EnvConfig cfg;
  cfg.action_prior_reference = true;
  const MotionClip clip = stand_clip(model, 2.0);
  const Vec12 target = process_action(Vec12::Zero(), Vec12::Zero(), cfg, model, &clip, 0.5);
  CHECK((target - model.clamp_to_limits(clip.frames.front().joints)).norm() < 1e-12);
}

TEST_CASE("reward is 1.35 under perfect tracking") {
  RobotModel model;
  RewardWeights w;
  const MotionClip clip = stand_clip(model, 2.0);
  const RobotState s = state_from_frame(clip.frames.front());
  CHECK(reward(s, clip, 0.0, w, model) == doctest::Approx(1.35).epsilon(1e-12));
}

TEST_CASE("reward matches the hand-derived CoM-offset value") {
  RobotModel model;
  RewardWeights w;
  const MotionClip clip = stand_clip(model, 2.0);
  RobotState s = state_from_frame(clip.frames.front());
  s.position += Vec3(0.1, 0.0, 0.0);

  // CoM term decays; the end-effector term decays with the same 0.1 m shift
  // on all four feet. Expected value evaluated independently.
  const double expected = 0.7 * std::exp(-12.5 * 0.01) + 0.5 +
                          0.15 * std::exp(-40.0 * 4.0 * 0.01);
  CHECK(reward(s, clip, 0.0, w, model) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("reward matches the hand-derived rotation-flip value") {
  RobotModel model;
  RewardWeights w;
  // Feet at the rotated positions too: build the reference from the flipped
  // state so only the rotation term differs.
  GaitSpec spec;
  spec.type = MotionType::kStand;
  spec.duration = 1.0;
  const MotionClip clip = synthesize_clip(spec, model);
  RobotState s = state_from_frame(clip.frames.front());
  s.rotation = rot_z(M_PI) * s.rotation;
  // |R_ref - R|_F^2 = 8 for a pi yaw flip.
  const double rot_err2 = (clip.frames.front().rotation - s.rotation).squaredNorm();
  CHECK(rot_err2 == doctest::Approx(8.0).epsilon(1e-12));
  // Feet move under the flip, so compute the e-term directly.
  const auto feet = fk_feet(model, s.base(), s.q);
  const auto ref_feet =
      fk_feet(model, BasePose{clip.frames.front().com, clip.frames.front().rotation},
              clip.frames.front().joints);
  double ee2 = 0;
  for (int leg = 0; leg < kNumLegs; ++leg) ee2 += (ref_feet[leg] - feet[leg]).squaredNorm();
  const double expected = 0.7 + 0.5 * std::exp(-20.0 * 8.0) + 0.15 * std::exp(-40.0 * ee2);
  CHECK(reward(s, clip, 0.0, w, model) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("reward stays in (0, 1.35] over randomized inputs") {
  RobotModel model;
  RewardWeights w;
  Rng rng(77);
  const MotionClip clip = stand_clip(model, 2.0);
  for (int trial = 0; trial < 20000; ++trial) {
    RobotState s;
    s.position = Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-1, 2));
    s.rotation = rot_z(rng.uniform(-3, 3)) * rot_y(rng.uniform(-1.5, 1.5)) *
                 rot_x(rng.uniform(-1.5, 1.5));
    for (int j = 0; j < 12; ++j) s.q[j] = rng.uniform(-2.5, 2.0);
    const double r = reward(s, clip, rng.uniform(0.0, 2.0), w, model);
    CHECK(r > 0.0);
    CHECK(r <= 1.35 + 1e-12);
  }
}

TEST_CASE("reward is invariant under a shared rigid transform") {
  RobotModel model;
  RewardWeights w;
  Rng rng(31);
  GaitSpec spec;
  spec.type = MotionType::kTrot;
  spec.speed = 0.4;
  spec.duration = 2.0;
  const MotionClip clip = synthesize_clip(spec, model);

  for (int trial = 0; trial < 10; ++trial) {
    RobotState s = state_from_frame(sample_frame(clip, 0.7));
    s.position += Vec3(rng.uniform(-0.05, 0.05), 0, rng.uniform(0.0, 0.03));
    s.rotation = rot_z(rng.uniform(-0.2, 0.2)) * s.rotation;
    const double r0 = reward(s, clip, 0.7, w, model);

    // Same yaw+translation applied to both the state and every clip frame.
    const Mat3 turn = rot_z(rng.uniform(-3, 3));
    const Vec3 shift(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-0.5, 0.5));
    MotionClip moved = clip;
    for (ReferenceFrame& f : moved.frames) {
      f.com = turn * f.com + shift;
      f.rotation = turn * f.rotation;
    }
    RobotState sm = s;
    sm.position = turn * s.position + shift;
    sm.rotation = turn * s.rotation;
    const double r1 = reward(sm, moved, 0.7, w, model);
    CHECK(std::abs(r1 - r0) < 1e-9);
  }
}

TEST_CASE("termination applies no reward penalty") {
  RobotModel model;
  RewardWeights w;
  SimConfig sim_cfg;
  const MotionClip clip = stand_clip(model, 2.0);
  RobotState s = state_from_frame(clip.frames.front());
  s.position.z() = 0.04;  // fallen
  s.contacts = detect_contacts(model, s);
  CHECK(terminated(s, sim_cfg));
  // Reward at the terminal state is the same formula, no extra term.
  const double direct = reward(s, clip, 0.0, w, model);
  CHECK(direct > 0.0);
  CHECK(direct <= 1.35);
}

TEST_CASE("stand episode with the zero policy succeeds with r > 1 per step") {
  RobotModel model;
  EnvConfig cfg;
  SimConfig sim_cfg;
  const MotionClip clip = stand_clip(model);
  const PolicyFn zero_policy = [](const VecX&, Rng&) { return Vec12::Zero(); };
  const EpisodeResult ep = run_episode(clip, zero_policy, cfg, sim_cfg, model, 1);
  CHECK(ep.success);
  CHECK(ep.max_steps == 500);
  CHECK(ep.steps_survived == 500);
  CHECK(ep.total_return / ep.steps_survived > 1.0);
}

TEST_CASE("large random actions terminate the episode early") {
  RobotModel model;
  EnvConfig cfg;
  SimConfig sim_cfg;
  const MotionClip clip = stand_clip(model);
  const PolicyFn wild = [](const VecX&, Rng& rng) {
    Vec12 a;
    for (int j = 0; j < 12; ++j) a[j] = 3.0 * rng.gaussian();
    return a;
  };
  const EpisodeResult ep = run_episode(clip, wild, cfg, sim_cfg, model, 3);
  CHECK_FALSE(ep.success);
  CHECK(ep.steps_survived < ep.max_steps);
}

TEST_CASE("episodes cap at 500 steps on a 10 s clip and are seed-deterministic") {
  RobotModel model;
  EnvConfig cfg;
  SimConfig sim_cfg;
  const MotionClip clip = stand_clip(model);
  CHECK(episode_steps(clip, cfg) == 500);

  const PolicyFn noisy = [](const VecX&, Rng& rng) {
    Vec12 a;
    for (int j = 0; j < 12; ++j) a[j] = 0.05 * rng.gaussian();
    return a;
  };
  const EpisodeResult a = run_episode(clip, noisy, cfg, sim_cfg, model, 42);
  const EpisodeResult b = run_episode(clip, noisy, cfg, sim_cfg, model, 42);
  CHECK(a.total_return == b.total_return);
  CHECK(a.steps_survived == b.steps_survived);
  CHECK(a.success == b.success);

  // Clips longer than the cap still stop at max_episode_seconds.
  GaitSpec long_spec;
  long_spec.type = MotionType::kStand;
  long_spec.duration = 14.0;
  const MotionClip long_clip = synthesize_clip(long_spec, model);
  CHECK(episode_steps(long_clip, cfg) == 500);
}
