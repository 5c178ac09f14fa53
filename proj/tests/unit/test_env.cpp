#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "valvebench/common/errors.hpp"
#include "valvebench/env/angles.hpp"
#include "valvebench/env/contact.hpp"
#include "valvebench/env/gripper_env.hpp"
#include "valvebench/env/reward.hpp"
#include "valvebench/env/scripted_controller.hpp"
#include "valvebench/env/toy_env.hpp"

using namespace valvebench;
using namespace valvebench::env;

namespace {

constexpr double kRad = std::numbers::pi / 180.0;

double brute_angdiff(double a, double b) {
  const double base = std::fmod(a - b, 360.0);
  double best = base;
  for (double c : {base - 360.0, base + 360.0}) {
    if (std::abs(c) < std::abs(best)) best = c;
  }
  return best == -180.0 ? 180.0 : best;
}

Eigen::Matrix4d rot_z(double deg) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  const double c = std::cos(deg * kRad), s = std::sin(deg * kRad);
  m(0, 0) = c; m(0, 1) = -s;
  m(1, 0) = s; m(1, 1) = c;
  return m;
}

Eigen::Matrix4d rot_y(double deg) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  const double c = std::cos(deg * kRad), s = std::sin(deg * kRad);
  m(0, 0) = c; m(0, 2) = s;
  m(2, 0) = -s; m(2, 2) = c;
  return m;
}

Eigen::Matrix4d trans(double x, double y, double z) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 3) = x; m(1, 3) = y; m(2, 3) = z;
  return m;
}

// Base frame faces the valve axis with x; flexion tilts the hanging link
// toward +x, i.e. a negative rotation about y.
Eigen::Vector3d fk_oracle(std::size_t finger, double abd, double f1, double f2,
                          const FingerGeometry& g) {
  const double phi = 120.0 * double(finger);
  const Eigen::Matrix4d t = trans(g.base_radius * std::cos(phi * kRad), g.base_radius * std::sin(phi * kRad),
                                  g.base_height) *
                            rot_z(phi + 180.0 + abd) * rot_y(-f1) * trans(0, 0, -g.link1) * rot_y(-f2) *
                            trans(0, 0, -g.link2);
  return t.block<3, 1>(0, 3);
}

}  // namespace

TEST_CASE("angdiff examples and wrap convention") {
  CHECK(angdiff(90, 90) == 0.0);
  CHECK(angdiff(10, 350) == doctest::Approx(20.0));
  CHECK(angdiff(350, 10) == doctest::Approx(-20.0));
  CHECK(angdiff(180, 0) == 180.0);
  CHECK(angdiff(0, 180) == 180.0);
  CHECK(wrap360(-30) == doctest::Approx(330.0));
  CHECK(wrap360(720) == 0.0);
  CHECK(wrap360(-1e-20) < 360.0);
}

TEST_CASE("angdiff equals brute-force candidate enumeration") {
  CounterRng rng(1, 99);
  for (int i = 0; i < 1'000'000; ++i) {
    const double a = rng.uniform(-1000, 1000);
    const double b = rng.uniform(-1000, 1000);
    const double d = angdiff(a, b);
    REQUIRE(d > -180.0);
    REQUIRE(d <= 180.0);
    REQUIRE(d == doctest::Approx(brute_angdiff(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("reward examples") {
  auto r = compute_reward({0, 30, 90, 3});
  CHECK(r.reward == doctest::Approx(30.0 / 90.0).epsilon(1e-15));
  CHECK_FALSE(r.reached);
  CHECK(r.branch == RewardBranch::Progress);

  r = compute_reward({45, 89, 90, 3});
  CHECK(r.reward == 10.0);
  CHECK(r.reached);

  r = compute_reward({120, 120, 90, 3});
  CHECK(r.reward == -1.0);
  CHECK(r.branch == RewardBranch::Stagnation);

  const RewardContext back{0, 350, 90, 3};
  CHECK(back.gap_after() == doctest::Approx(100.0));
  CHECK(back.gap_after() == doctest::Approx(std::abs(brute_angdiff(90, 350))));
  r = compute_reward(back);
  CHECK(r.reward == doctest::Approx(-10.0 / 90.0).epsilon(1e-15));
}

TEST_CASE("reached is reported on the stagnation branch too") {
  const auto r = compute_reward({89, 90, 90, 3});
  CHECK(r.reward == -1.0);
  CHECK(r.reached);
}

TEST_CASE("zero starting gap with a large move is an invariant violation") {
  CHECK_THROWS_AS(compute_reward({90, 150, 90, 3}), InvariantViolation);
  CHECK_THROWS_AS(compute_reward({0, 10, 90, 0}), ContractViolation);
}

TEST_CASE("reward branches are exclusive and bounded") {
  CounterRng rng(2, 99);
  for (int i = 0; i < 200000; ++i) {
    RewardContext c{rng.uniform(0, 360), rng.uniform(0, 360), rng.uniform(0, 360), rng.uniform(0.5, 10)};
    if (c.gap_before() == 0.0) continue;
    const auto r = compute_reward(c);
    const double gb = c.gap_before(), ga = c.gap_after(), p = c.progress();
    REQUIRE(gb <= 180.0);
    REQUIRE(ga <= 180.0);
    const int fired = int(std::abs(p) < c.epsilon) + int(std::abs(p) >= c.epsilon && ga < c.epsilon) +
                      int(std::abs(p) >= c.epsilon && ga >= c.epsilon);
    REQUIRE(fired == 1);
    REQUIRE(r.reached == (ga < c.epsilon));
    if (r.branch == RewardBranch::Progress) {
      REQUIRE(r.reward <= 1.0);
      REQUIRE(r.reward >= -180.0 / gb);
    }
  }
}

TEST_CASE("goal offsets per task") {
  CounterRng rng(3, 1);
  CHECK(sample_goal_offset(TaskKind::Fixed90, rng) == 90.0);
  CHECK(rng.cursor() == 0);
  for (int i = 0; i < 1000; ++i) {
    const double d = sample_goal_offset(TaskKind::Choice90_180_270, rng);
    REQUIRE((d == 90.0 || d == 180.0 || d == 270.0));
    const double e = sample_goal_offset(TaskKind::Range30_330, rng);
    REQUIRE(e >= 30.0);
    REQUIRE(e <= 330.0);
  }
  CHECK(task_from_string("90_180_270") == TaskKind::Choice90_180_270);
  CHECK(task_name(TaskKind::Range30_330) == "30_330");
  CHECK_THROWS(task_from_string("45"));
}

TEST_CASE("Fixed90 goal wraps with the modulo") {
  EnvConfig cfg;
  GripperValveEnv env(cfg);
  env.reset_to(300, wrap360(300 + 90));
  CHECK(env.goal_angle() == doctest::Approx(30.0));
}

TEST_CASE("fingertip kinematics: degenerate cases") {
  FingerGeometry g;
  for (std::size_t f = 0; f < 3; ++f) {
    const double phi = 120.0 * double(f) * kRad;
    const auto straight = fingertip_position(f, 0, 0, 0, g);
    CHECK(straight.x() == doctest::Approx(g.base_radius * std::cos(phi)));
    CHECK(straight.y() == doctest::Approx(g.base_radius * std::sin(phi)));
    CHECK(straight.z() == doctest::Approx(g.base_height - g.link1 - g.link2));

    const auto level = fingertip_position(f, 0, 90, 0, g);
    // Signed coordinate along the finger's azimuth: negative once the tip passes the axis.
    CHECK(level.x() * std::cos(phi) + level.y() * std::sin(phi) ==
          doctest::Approx(g.base_radius - g.link1 - g.link2));
    CHECK(level.z() == doctest::Approx(g.base_height));
  }
}

TEST_CASE("fingertip kinematics match a homogeneous-transform chain") {
  FingerGeometry g;
  CounterRng rng(4, 1);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t f = rng.below(3);
    const double a = rng.uniform(-30, 30), f1 = rng.uniform(0, 100), f2 = rng.uniform(0, 110);
    const auto tip = fingertip_position(f, a, f1, f2, g);
    const auto ref = fk_oracle(f, a, f1, f2, g);
    REQUIRE((tip - ref).norm() < 1e-9);
  }
}

TEST_CASE("valve tips lie on the prong circle") {
  const auto t0 = valve_tip_positions(0, 50);
  CHECK(t0[0].x() == doctest::Approx(50));
  CHECK(t0[1].y() == doctest::Approx(50));
  CHECK(t0[2].x() == doctest::Approx(-50));
  CHECK(t0[3].y() == doctest::Approx(-50));
  const auto t45 = valve_tip_positions(45, 50);
  for (const auto& t : t45) {
    CHECK(std::abs(t.x()) == doctest::Approx(50 / std::sqrt(2.0)));
    CHECK(std::abs(t.y()) == doctest::Approx(50 / std::sqrt(2.0)));
  }
  CounterRng rng(5, 1);
  for (int i = 0; i < 1000; ++i) {
    for (const auto& t : valve_tip_positions(rng.uniform(0, 360), 50)) REQUIRE(t.norm() == doctest::Approx(50));
  }
}

TEST_CASE("contact rule: a finger dragging prong 0 through +10 degrees turns the valve +10") {
  ContactParams p;
  ContactState prev;
  prev.tips[0] = {30.0, 0.0, 0.0};
  prev.tips[1] = {200.0, 0.0, 50.0};
  prev.tips[2] = {200.0, 0.0, 50.0};
  prev.engaged = {0, kNoProng, kNoProng};
  CHECK(engaged_prong(prev.tips[0], 0.0, p) == 0);

  TipPositions next = prev.tips;
  next[0] = {30.0 * std::cos(10 * kRad), 30.0 * std::sin(10 * kRad), 0.0};
  const auto adv = advance_valve(prev, next, 0.0, p);
  CHECK(adv.delta_deg == doctest::Approx(10.0));
  CHECK(adv.contributors == 1);
  CHECK(adv.contacts.engaged[0] == 0);
}

TEST_CASE("contact rule: clamping, averaging and no-contact cases") {
  ContactParams p;
  ContactState prev;
  prev.tips[0] = {30.0, 0.0, 0.0};
  prev.tips[1] = {0.0, 30.0, 0.0};
  prev.tips[2] = {200.0, 0.0, 50.0};
  prev.engaged = {0, 1, kNoProng};

  TipPositions next = prev.tips;
  next[0] = {30.0 * std::cos(60 * kRad), 30.0 * std::sin(60 * kRad), 0.0};
  const auto clamped = advance_valve(prev, next, 0.0, p);
  CHECK(clamped.delta_deg == doctest::Approx(p.max_valve_step));

  next[0] = {30.0 * std::cos(8 * kRad), 30.0 * std::sin(8 * kRad), 0.0};
  next[1] = {30.0 * std::cos(94 * kRad), 30.0 * std::sin(94 * kRad), 0.0};
  CHECK(advance_valve(prev, next, 0.0, p).delta_deg == doctest::Approx(6.0));

  // Lifted out of the band: nothing moves.
  next[0] = {30.0, 5.0, 30.0};
  next[1] = {0.0, 30.0, 30.0};
  CHECK(advance_valve(prev, next, 0.0, p).delta_deg == 0.0);

  // Not engaged before: first touch does not drag.
  ContactState free;
  free.tips = prev.tips;
  next = prev.tips;
  next[0] = {30.0 * std::cos(10 * kRad), 30.0 * std::sin(10 * kRad), 0.0};
  CHECK(advance_valve(free, next, 0.0, p).delta_deg == 0.0);

  // Near the hub or above the band nothing engages.
  CHECK(engaged_prong({5.0, 0.0, 0.0}, 0.0, p) == kNoProng);
  CHECK(engaged_prong({30.0, 0.0, p.contact_height + 1.0}, 0.0, p) == kNoProng);
}

TEST_CASE("retracted fingers leave the valve static with -1 every step") {
  GripperValveEnv env(EnvConfig{});
  env.reset_to(40, 130);
  const std::vector<double> retract(9, -1.0);
  int steps = 0;
  StepResult r;
  do {
    r = env.step(retract);
    ++steps;
    CHECK(env.valve_angle() == 40.0);
    CHECK(r.reward == -1.0);
  } while (!r.done);
  CHECK(steps == 50);
  CHECK(r.step_index == 50);
  CHECK_FALSE(r.reached);
  CHECK_THROWS_AS(env.step(retract), ContractViolation);
}

TEST_CASE("step before reset is a contract violation") {
  GripperValveEnv env(EnvConfig{});
  CHECK_THROWS_AS(env.step(std::vector<double>(9, 0.0)), ContractViolation);
}

TEST_CASE("actions are clamped before mapping") {
  const auto lim = JointLimits::defaults();
  const std::vector<double> wild{5, -5, 2, -2, 1.5, 0, 0.5, -0.5, 100};
  const auto t = action_to_targets(wild, lim);
  CHECK(lim.contains(t));
  CHECK(t[0] == 30.0);
  CHECK(t[1] == 0.0);
  CHECK(t[5] == 55.0);
  const auto back = targets_to_action(t, lim);
  CHECK(back[0] == 1.0);
  CHECK(back[7] == doctest::Approx(-0.5));
}

TEST_CASE("random rollouts keep every invariant") {
  EnvConfig cfg;
  GripperValveEnv env(cfg);
  CounterRng valve(6, 1), goal(6, 2), act(6, 3);
  for (int ep = 0; ep < 40; ++ep) {
    auto obs = env.reset({valve, goal});
    REQUIRE(obs.size() == 19);
    int steps = 0;
    bool done = false;
    while (!done) {
      std::vector<double> a(9);
      for (auto& v : a) v = act.uniform(-1.2, 1.2);
      const double before = env.valve_angle();
      const auto prev_q = env.joints();
      const auto r = env.step(a);
      ++steps;
      REQUIRE(r.observation.size() == 19);
      for (double v : r.observation) REQUIRE(std::abs(v) <= 1.0 + 1e-12);
      REQUIRE(env.valve_angle() >= 0.0);
      REQUIRE(env.valve_angle() < 360.0);
      REQUIRE(std::abs(angdiff(env.valve_angle(), before)) <= cfg.contact.max_valve_step + 1e-9);
      REQUIRE(cfg.limits.contains(env.joints()));
      for (std::size_t i = 0; i < 9; ++i) REQUIRE(std::abs(env.joints()[i] - prev_q[i]) <= cfg.max_joint_step + 1e-12);
      const auto& raw = env.observation().values;
      for (std::size_t k = 0; k < 4; ++k) {
        REQUIRE(std::hypot(raw[9 + 2 * k], raw[10 + 2 * k]) == doctest::Approx(cfg.contact.prong_length));
      }
      REQUIRE(r.done == (r.reached || steps == 50));
      done = r.done;
    }
    REQUIRE(steps <= 50);
  }
}

TEST_CASE("normalize and denormalize are inverse") {
  EnvConfig cfg;
  GripperValveEnv env(cfg);
  env.reset_to(123.4, 213.4);
  const auto norm = normalize(env.observation(), cfg);
  const auto raw = denormalize(norm, cfg);
  for (std::size_t i = 0; i < 19; ++i) CHECK(raw.values[i] == doctest::Approx(env.observation().values[i]));
}

TEST_CASE("env state save/load resumes the same trajectory") {
  EnvConfig cfg;
  GripperValveEnv a(cfg);
  CounterRng v(7, 1), g(7, 2), act(7, 3);
  a.reset({v, g});
  std::vector<double> u(9);
  for (int i = 0; i < 10; ++i) {
    for (auto& x : u) x = act.uniform(-1, 1);
    a.step(u);
  }
  std::stringstream ss;
  ArchiveWriter w(ss);
  a.save_state(w);
  GripperValveEnv b(cfg);
  ArchiveReader r(ss);
  b.load_state(r);
  for (int i = 0; i < 15; ++i) {
    for (auto& x : u) x = act.uniform(-1, 1);
    const auto ra = a.step(u);
    const auto rb = b.step(u);
    REQUIRE(ra.observation == rb.observation);
    REQUIRE(ra.reward == rb.reward);
    if (ra.done) break;
  }
}

TEST_CASE("finger ik inverts forward kinematics") {
  FingerGeometry g;
  const auto lim = JointLimits::defaults();
  CounterRng rng(8, 1);
  int solved = 0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t f = rng.below(3);
    const auto tip = fingertip_position(f, rng.uniform(-30, 30), rng.uniform(0, 100), rng.uniform(0, 110), g);
    const auto q = finger_ik(f, tip, g, lim);
    if (!q) continue;
    ++solved;
    const auto again = fingertip_position(f, (*q)[0], (*q)[1], (*q)[2], g);
    REQUIRE((again - tip).norm() < 1e-6);
  }
  CHECK(solved > 250);
}

TEST_CASE("scripted controller solves Fixed90 from seeded starts") {
  EnvConfig cfg;
  GripperValveEnv env(cfg);
  ScriptedController ctl(cfg);
  CounterRng v(9, 1), g(9, 2);
  for (int ep = 0; ep < 20; ++ep) {
    env.reset({v, g});
    ctl.begin_episode();
    StepResult r;
    do {
      r = env.step(ctl.act(env.observation()));
    } while (!r.done);
    CHECK(r.reached);
  }
}

TEST_CASE("toy env: turning toward the goal reaches it") {
  ToyAngleEnv env(3.0, 20.0, 50);
  CounterRng v(10, 1), g(10, 2);
  for (int ep = 0; ep < 50; ++ep) {
    auto obs = env.reset({v, g});
    StepResult r;
    do {
      const double a = std::clamp(obs[0] * 180.0 / 20.0, -1.0, 1.0);
      r = env.step(std::vector<double>{a});
      obs = r.observation;
    } while (!r.done);
    REQUIRE(r.reached);
    REQUIRE(r.step_index <= 10);
  }
}
