#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mimic/kinematics.hpp"
#include "mimic/rng.hpp"

using namespace mimic;

namespace {

Vec12 random_in_limit_pose(const RobotModel& m, Rng& rng) {
  Vec12 q;
  for (int leg = 0; leg < kNumLegs; ++leg)
    for (int j = 0; j < 3; ++j)
      q[3 * leg + j] = rng.uniform(m.limits.lower(j), m.limits.upper(j));
  return q;
}

}  // namespace

TEST_CASE("fk at zero pose puts feet straight below the thigh axes") {
  RobotModel m;
  BasePose base;
  const auto feet = fk_feet(m, base, Vec12::Zero());
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3 expected = m.mounts[leg] + Vec3(0.0, m.lateral_offset(leg), 0.0) +
                          Vec3(0.0, 0.0, -(m.thigh_length + m.calf_length));
    CHECK((feet[leg] - expected).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("fk equivariance under rigid transforms") {
  RobotModel m;
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec12 q = random_in_limit_pose(m, rng);
    BasePose a;
    a.position = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.2, 1.0));
    a.rotation = (rot_z(rng.uniform(-3, 3)) * rot_y(rng.uniform(-1, 1)) * rot_x(rng.uniform(-1, 1)));

    const Vec3 shift(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Mat3 turn = rot_z(rng.uniform(-3, 3)) * rot_x(rng.uniform(-0.5, 0.5));
    BasePose b;
    b.position = turn * a.position + shift;
    b.rotation = turn * a.rotation;

    const auto feet_a = fk_feet(m, a, q);
    const auto feet_b = fk_feet(m, b, q);
    for (int leg = 0; leg < kNumLegs; ++leg)
      CHECK((feet_b[leg] - (turn * feet_a[leg] + shift)).norm() < 1e-10);
  }
}

TEST_CASE("base yaw rotates foot positions with the base") {
  RobotModel m;
  BasePose base;
  const Vec12 q = nominal_stand_pose();
  const auto feet0 = fk_feet(m, base, q);
  base.rotation = rot_z(M_PI / 2);
  const auto feet1 = fk_feet(m, base, q);
  for (int leg = 0; leg < kNumLegs; ++leg)
    CHECK((feet1[leg] - rot_z(M_PI / 2) * feet0[leg]).norm() < 1e-12);
}

TEST_CASE("nominal pose foot drop matches the planar two-link formula") {
  RobotModel m;
  m.thigh_length = 0.2;
  m.calf_length = 0.2;
  // Independent symbolic evaluation of the in-plane chain at a_m.
  const double expected_drop = 0.2 * std::cos(0.75) + 0.2 * std::cos(0.75 - 1.5);
  const Vec3 q_leg(0.0, 0.75, -1.5);
  const Vec3 foot = fk_foot_base_frame(m, kFR, q_leg);
  const Vec3 hip_point = m.mounts[kFR] + Vec3(0.0, m.lateral_offset(kFR), 0.0);
  CHECK(hip_point.z() - foot.z() == doctest::Approx(expected_drop).epsilon(1e-12));
  CHECK(foot.x() == doctest::Approx(hip_point.x()).epsilon(1e-12));
}

TEST_CASE("fk_links: knee depends only on hip and thigh") {
  RobotModel m;
  BasePose base;
  base.position = Vec3(0, 0, 1.0);
  Vec12 q = nominal_stand_pose();
  const auto links_a = fk_links(m, base, q);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    CHECK(links_a.feet[leg].z() > 0.0);
    CHECK(links_a.knees[leg].z() > 0.0);
    CHECK(links_a.hips[leg].z() > 0.0);
  }
  // Change calf angles only; knees must not move.
  Vec12 q2 = q;
  for (int leg = 0; leg < kNumLegs; ++leg) q2[3 * leg + 2] = -0.7;
  const auto links_b = fk_links(m, base, q2);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    CHECK((links_a.knees[leg] - links_b.knees[leg]).norm() < 1e-12);
    CHECK((links_a.feet[leg] - links_b.feet[leg]).norm() > 1e-3);
  }
  // Knee = hip point + rotated thigh vector.
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3 thigh = links_a.knees[leg] - links_a.hips[leg];
    CHECK(thigh.norm() == doctest::Approx(m.thigh_length).epsilon(1e-12));
  }
}

TEST_CASE("fk_links: sit-like pitch drops the rear knees") {
  RobotModel m;
  BasePose base;
  base.position = Vec3(0, 0, 0.25);
  base.rotation = rot_y(-0.4);  // nose up
  Vec12 q = nominal_stand_pose();
  const auto links = fk_links(m, base, q);
  CHECK(links.knees[kRR].z() < links.knees[kFR].z());
  CHECK(links.knees[kRL].z() < links.knees[kFL].z());
}

TEST_CASE("ik law-of-cosines case: target 0.2 m below the hip pitch axis") {
  RobotModel m;
  m.thigh_length = 0.2;
  m.calf_length = 0.2;
  const Vec3 hip_point = m.mounts[kFR] + Vec3(0.0, m.lateral_offset(kFR), 0.0);
  const Vec3 target = hip_point + Vec3(0.0, 0.0, -0.2);
  const IkResult ik = ik_leg(m, kFR, target);
  // Interior bend angle 2*pi/3 from cos = (0.04 - 0.04 - 0.04) / (2 * 0.04).
  CHECK(ik.angles[2] == doctest::Approx(-2.0943951023931953).epsilon(1e-9));
  CHECK_FALSE(ik.clamped);
  const Vec3 foot = fk_foot_base_frame(m, kFR, ik.angles);
  CHECK((foot - target).norm() < 1e-9);
}

TEST_CASE("ik at full extension requests calf 0 and clamps to the limit") {
  RobotModel m;
  const Vec3 hip_point = m.mounts[kFL] + Vec3(0.0, m.lateral_offset(kFL), 0.0);
  const Vec3 target = hip_point + Vec3(0.0, 0.0, -(m.thigh_length + m.calf_length));
  const IkResult ik = ik_leg(m, kFL, target);
  CHECK(ik.clamped);
  CHECK(ik.joints_clamped[2]);
  CHECK(ik.angles[2] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("fk/ik round trip over random in-limit poses") {
  RobotModel m;
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec12 q = random_in_limit_pose(m, rng);
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Vec3 q_leg = q.segment<3>(3 * leg);
      const Vec3 foot = fk_foot_base_frame(m, leg, q_leg);
      const IkResult ik = ik_leg(m, leg, foot);
      for (int j = 0; j < 3; ++j) CHECK(std::abs(ik.angles[j] - q_leg[j]) < 1e-9);
    }
  }
}

TEST_CASE("ik strict mode throws on unreachable targets, graceful projects") {
  RobotModel m;
  const Vec3 hip_point = m.mounts[kFR] + Vec3(0.0, m.lateral_offset(kFR), 0.0);
  const Vec3 too_far = hip_point + Vec3(0.0, 0.0, -1.0);
  CHECK_THROWS_AS(ik_leg(m, kFR, too_far), UnreachableTarget);
  const IkResult ik = ik_leg(m, kFR, too_far, /*graceful=*/true);
  CHECK(ik.projected);
  CHECK(m.within_limits([&] {
    Vec12 q = Vec12::Zero();
    q.segment<3>(0) = ik.angles;
    q.segment<3>(3) = Vec3(0, 0.5, -1.0);
    q.segment<3>(6) = Vec3(0, 0.5, -1.0);
    q.segment<3>(9) = Vec3(0, 0.5, -1.0);
    return q;
  }()));
}

TEST_CASE("ik output always respects joint limits") {
  RobotModel m;
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const Vec3 target(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.2));
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const IkResult ik = ik_leg(m, leg, target, /*graceful=*/true);
      for (int j = 0; j < 3; ++j) {
        CHECK(ik.angles[j] >= m.limits.lower(j) - 1e-12);
        CHECK(ik.angles[j] <= m.limits.upper(j) + 1e-12);
      }
    }
  }
}

TEST_CASE("knee-hint ik reduces knee error across a morphological gap") {
  RobotModel m;
  // Source skeleton with the same reach but a different thigh/calf split, in
  // a folded pose: the plain solution picks a different thigh direction.
  RobotModel source = m;
  source.thigh_length = 0.26;
  source.calf_length = 0.14;
  source.limits.thigh_max = 2.0;
  source.limits.calf_min = -2.8;
  const Vec3 q_src(0.0, 1.2, -2.4);
  const Vec3 foot = fk_foot_base_frame(source, kRR, q_src);
  const Vec3 knee = fk_knee_base_frame(source, kRR, q_src);

  const IkResult plain = ik_leg(m, kRR, foot, /*graceful=*/true);
  const IkResult hinted = ik_leg_with_knee_hint(m, kRR, foot, knee);
  const double err_plain = (fk_knee_base_frame(m, kRR, plain.angles) - knee).norm();
  const double err_hint = (fk_knee_base_frame(m, kRR, hinted.angles) - knee).norm();
  CHECK(err_hint < err_plain);
}

TEST_CASE("leg jacobian matches finite differences") {
  RobotModel m;
  Rng rng(11);
  BasePose base;
  base.position = Vec3(0.1, -0.2, 0.5);
  base.rotation = rot_z(0.7) * rot_x(0.2);
  const Vec3 q_leg(0.2, 0.8, -1.2);
  const Mat3 j = leg_jacobian(m, base, kFL, q_leg);
  const double h = 1e-7;
  for (int k = 0; k < 3; ++k) {
    Vec3 qp = q_leg, qm = q_leg;
    qp[k] += h;
    qm[k] -= h;
    const Vec3 num = (base.rotation * fk_foot_base_frame(m, kFL, qp) -
                      base.rotation * fk_foot_base_frame(m, kFL, qm)) /
                     (2 * h);
    CHECK((j.col(k) - num).norm() < 1e-6);
  }
}
