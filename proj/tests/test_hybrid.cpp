#include <doctest.h>

#include <fstream>
#include <random>

#include "stride/hybrid/randomize.hpp"
#include "stride/rbd/dynamics.hpp"
#include "stride/hybrid/sim.hpp"
#include "test_support.hpp"

using namespace stride;
using hybrid::SimConfig;
using hybrid::SimState;
using rbd::Foot;

namespace {

// Standing state: both feet on the ground, COM between them.
SimState standing_state() {
  SimState s;
  s.domain = Domain::Dsp;
  s.x.q << 0.0, 0.0, 0.0, 0.25, -0.5, -0.25, 0.5;
  // Raise the base so both feet sit exactly at z = 0.
  const Vec2d foot = rbd::foot_position(s.model, s.x.q, Foot::Left);
  s.x.q[1] -= foot[1];
  return s;
}

// Flight state translating ballistically (joints frozen: zero joint rates).
SimState flight_state(double z_clear, double vx, double vz) {
  SimState s;
  s.domain = Domain::Flight;
  s.landing_foot = Foot::Right;
  s.x.q << 0.0, 0.0, 0.0, 0.25, -0.5, -0.25, -0.5;
  const Vec2d foot = rbd::foot_position(s.model, s.x.q, Foot::Right);
  s.x.q[1] += z_clear - foot[1];
  s.x.v[0] = vx;
  s.x.v[1] = vz;
  return s;
}

}  // namespace

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.physics_dt = 2e-3;
  cfg.control_dt = 1e-3;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.physics_dt = 3e-4;
  cfg.control_dt = 1e-3;  // not an integer multiple
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.physics_dt = 2.5e-4;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("impact guard is the signed foot height with a direction gate") {
  SimState s = flight_state(0.1, 0.0, 1.0);
  CHECK(hybrid::guard_impact(s) == doctest::Approx(0.1).epsilon(1e-9));

  // Foot at zero but rising: one step must not trigger a transition.
  SimState rising = flight_state(0.0, 0.0, 2.0);
  SimConfig cfg;
  const SimState next = hybrid::step(rising, Vec4d::Zero(), cfg);
  CHECK(next.domain == Domain::Flight);
  for (const auto& e : next.events) CHECK(e.kind != hybrid::Event::Kind::Transition);
}

TEST_CASE("takeoff guard: standing equilibrium carries the robot weight") {
  SimState s = standing_state();
  SimConfig cfg;
  const auto statics = testing::oracle_gravity_compensation(
      s.model, s.x.q, {Foot::Left, Foot::Right});
  const SimState next = hybrid::step(s, statics.u, cfg);
  const double total_fz = next.force_left[1] + next.force_right[1];
  CHECK(total_fz == doctest::Approx(s.model.total_mass() * s.model.gravity).epsilon(1e-3));
  CHECK(hybrid::guard_takeoff(next, next.force_left) > 0.0);
  CHECK(next.domain == Domain::Dsp);
}

TEST_CASE("bisected impact time brackets the projectile landing time") {
  // Ballistic translation: every material point follows a parabola, so the
  // landing foot height is z(t) = z0 + vz t - g t^2 / 2 exactly.
  const double z0 = 0.08, vz = 0.3;
  SimState s = flight_state(z0, 1.0, vz);
  const double g = s.model.gravity;
  const double t_star = (vz + std::sqrt(vz * vz + 2 * g * z0)) / g;

  SimConfig cfg;
  cfg.guard_time_tol = 1e-10;
  double event_time = -1;
  for (int k = 0; k < 400; ++k) {
    s = hybrid::step(s, Vec4d::Zero(), cfg);
    for (const auto& e : s.events) {
      if (e.kind == hybrid::Event::Kind::Transition) {
        event_time = e.time;
        break;
      }
    }
    if (event_time >= 0) break;
  }
  REQUIRE(event_time >= 0);
  CHECK(s.domain == Domain::SspRight);
  // RK4 on a quadratic is exact; the only slack is the bisection tolerance.
  CHECK(std::abs(event_time - t_star) < 1e-6);

  // Event-time error decreases about linearly in the bisection tolerance.
  auto landing_error = [&](double tol) {
    SimState st = flight_state(z0, 1.0, vz);
    SimConfig c;
    c.guard_time_tol = tol;
    c.guard_tol = 0.0;  // isolate the time tolerance
    for (int k = 0; k < 400; ++k) {
      st = hybrid::step(st, Vec4d::Zero(), c);
      for (const auto& e : st.events)
        if (e.kind == hybrid::Event::Kind::Transition) return std::abs(e.time - t_star);
    }
    return 1e9;
  };
  const double err_coarse = landing_error(1e-4);
  const double err_fine = landing_error(5e-5);
  CHECK(err_fine <= err_coarse + 1e-12);
  CHECK(err_coarse < 1e-4);
  CHECK(err_fine < 5e-5);
}

TEST_CASE("flight segments are ballistic and stance segments pin the foot") {
  SimState s = flight_state(0.3, 0.5, 0.2);
  SimConfig cfg;
  // COM vertical acceleration equals -g during flight.
  const auto k0 = rbd::evaluate_kinematics(s.model, s.x.q, s.x.v);
  const Vec2d v0 = k0.com.jac * s.x.v;
  const int n = 100;
  SimState st = s;
  for (int i = 0; i < n; ++i) st = hybrid::step(st, Vec4d::Zero(), cfg);
  const auto k1 = rbd::evaluate_kinematics(st.model, st.x.q, st.x.v);
  const Vec2d v1 = k1.com.jac * st.x.v;
  const double dt = n * cfg.physics_dt;
  CHECK((v1[1] - v0[1]) / dt == doctest::Approx(-s.model.gravity).epsilon(1e-6));
  CHECK((v1[0] - v0[0]) / dt == doctest::Approx(0.0).scale(1e-6));
  CHECK(st.force_left.norm() == 0.0);
  CHECK(st.force_right.norm() == 0.0);

  // Pinned stance foot drifts less than 1e-8 m per step.
  SimState ssp = standing_state();
  ssp.domain = Domain::SspLeft;
  ssp.x = rbd::impact_map(ssp.model, ssp.x, Foot::Left);
  ssp.stance_anchor = rbd::foot_position(ssp.model, ssp.x.q, Foot::Left);
  const Vec4d hold(10.0, 5.0, -3.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const Vec2d before = rbd::foot_position(ssp.model, ssp.x.q, Foot::Left);
    ssp = hybrid::step(ssp, hold, cfg);
    if (ssp.domain != Domain::SspLeft) break;
    const Vec2d after = rbd::foot_position(ssp.model, ssp.x.q, Foot::Left);
    CHECK((after - before).norm() < 1e-8);
  }
}

TEST_CASE("friction violation is flagged at the correct step") {
  SimState s = standing_state();
  s.mu = 1e-4;  // deliberately tiny cone
  SimConfig cfg;
  // Shear the stance feet by commanding asymmetric hip torques.
  const Vec4d u(30.0, 0.0, 30.0, 0.0);
  bool flagged = false;
  for (int i = 0; i < 20 && !flagged; ++i) {
    s = hybrid::step(s, u, cfg);
    for (const auto& e : s.events) {
      if (e.kind == hybrid::Event::Kind::FrictionViolation) {
        flagged = true;
        const Vec2d f = e.foot == Foot::Left ? s.force_left : s.force_right;
        CHECK(std::abs(f[0]) > s.mu * f[1]);
        CHECK(e.value == doctest::Approx(std::abs(f[0]) - s.mu * f[1]).epsilon(1e-9));
      }
    }
  }
  CHECK(flagged);
}

TEST_CASE("rollout: degenerate duration, clock contract, determinism") {
  SimState s = standing_state();
  SimConfig cfg;
  auto zero_ctrl = [](const SimState&) { return Vec4d::Zero(); };

  const auto empty = hybrid::rollout(zero_ctrl, s, 0.0, cfg);
  CHECK(empty.rows.size() == 1);

  const auto tr = hybrid::rollout(zero_ctrl, s, 0.5, cfg);
  REQUIRE(tr.rows.size() >= 2);
  for (size_t i = 1; i < tr.rows.size(); ++i) {
    CHECK(tr.rows[i].t - tr.rows[i - 1].t == doctest::Approx(cfg.control_dt).epsilon(1e-9));
  }

  // Open-loop replay of the recorded torques reproduces states bit-identically.
  std::mt19937 rng2(5);
  std::normal_distribution<double> n(0.0, 3.0);
  std::vector<Vec4d> torques;
  auto noisy_ctrl = [&](const SimState&) {
    Vec4d u;
    for (int i = 0; i < 4; ++i) u[i] = n(rng2);
    torques.push_back(u);
    return u;
  };
  const auto first = hybrid::rollout(noisy_ctrl, s, 0.3, cfg);
  size_t idx = 0;
  auto replay_ctrl = [&](const SimState&) { return torques.at(idx++); };
  const auto second = hybrid::rollout(replay_ctrl, s, 0.3, cfg);
  REQUIRE(first.rows.size() == second.rows.size());
  for (size_t i = 0; i < first.rows.size(); ++i) {
    CHECK(first.rows[i].q == second.rows[i].q);  // bit-identical
    CHECK(first.rows[i].v == second.rows[i].v);
  }
}

TEST_CASE("every domain change corresponds to a registered transition") {
  CHECK(hybrid::transition_registered(Domain::SspLeft, Domain::Flight));
  CHECK(hybrid::transition_registered(Domain::Flight, Domain::SspRight));
  CHECK_FALSE(hybrid::transition_registered(Domain::Flight, Domain::Dsp));

  // Drop from flight; verify the trace only contains registered hops.
  SimState s = flight_state(0.2, 0.3, 0.0);
  SimConfig cfg;
  auto zero_ctrl = [](const SimState&) { return Vec4d::Zero(); };
  const auto tr = hybrid::rollout(zero_ctrl, s, 1.0, cfg, {.stop_on_fall = false});
  int transitions = 0;
  for (const auto& e : tr.events) {
    if (e.kind != hybrid::Event::Kind::Transition) continue;
    ++transitions;
    CHECK(hybrid::transition_registered(e.from, e.to));
  }
  CHECK(transitions >= 1);
}

TEST_CASE("randomize: identity, ranges, determinism, rejection") {
  rbd::RobotModel base;
  hybrid::RandomizeConfig cfg;

  // Zero-width ranges reproduce the base model.
  hybrid::RandomizeConfig zero;
  zero.torso_com_offset_x = zero.torso_com_offset_z = {0, 0};
  zero.added_torso_mass = {0, 0};
  zero.pd_gain_scale = {1, 1};
  zero.joint_damping = {0, 0};
  zero.armature = {0, 0};
  zero.ground_friction = {0.8, 0.8};
  zero.impulse_magnitude = 0.0;
  const auto same = hybrid::randomize(base, zero, 3);
  CHECK(same.model.torso_mass == base.torso_mass);
  CHECK(same.model.torso_com_offset_x == base.torso_com_offset_x);
  CHECK(same.model.joint_damping == base.joint_damping);
  CHECK(same.impulses.empty());

  // Samples land inside the configured ranges.
  std::mt19937 seed_rng(17);
  for (int i = 0; i < 200; ++i) {
    const auto r = hybrid::randomize(base, cfg, seed_rng());
    CHECK(r.model.torso_mass >= base.torso_mass + cfg.added_torso_mass.lo);
    CHECK(r.model.torso_mass <= base.torso_mass + cfg.added_torso_mass.hi);
    CHECK(r.ground_friction >= cfg.ground_friction.lo);
    CHECK(r.ground_friction <= cfg.ground_friction.hi);
    for (int j = 0; j < 4; ++j) {
      CHECK(r.pd_gain_scale[j] >= cfg.pd_gain_scale.lo);
      CHECK(r.pd_gain_scale[j] <= cfg.pd_gain_scale.hi);
    }
    for (const auto& imp : r.impulses) CHECK(imp.delta_v.norm() <= cfg.impulse_magnitude + 1e-12);
  }

  // Identical seed, identical model.
  const auto a = hybrid::randomize(base, cfg, 99);
  const auto b = hybrid::randomize(base, cfg, 99);
  CHECK(a.model.torso_mass == b.model.torso_mass);
  CHECK(a.model.armature == b.model.armature);
  REQUIRE(a.impulses.size() == b.impulses.size());
  for (size_t i = 0; i < a.impulses.size(); ++i) {
    CHECK(a.impulses[i].time == b.impulses[i].time);
    CHECK(a.impulses[i].delta_v == b.impulses[i].delta_v);
  }

  // Ranges that can produce nonpositive mass are rejected.
  hybrid::RandomizeConfig bad = cfg;
  bad.added_torso_mass = {-20.0, -15.0};
  CHECK_THROWS(hybrid::randomize(base, bad, 1));
}

TEST_CASE("scheduled impulses kick the base velocity") {
  SimState s = standing_state();
  s.impulses = {{0.01, Vec2d(0.3, 0.0)}};
  SimConfig cfg;
  double vx_before = s.x.v[0];
  bool seen = false;
  for (int i = 0; i < 30; ++i) {
    const double v_pre = s.x.v[0];
    s = hybrid::step(s, Vec4d::Zero(), cfg);
    for (const auto& e : s.events) {
      if (e.kind == hybrid::Event::Kind::Impulse) {
        seen = true;
        CHECK(s.x.v[0] - v_pre >= 0.25);  // kick applied before integration
      }
    }
  }
  CHECK(seen);
  (void)vx_before;
}

TEST_CASE("trace csv writes the documented header") {
  SimState s = standing_state();
  SimConfig cfg;
  auto zero_ctrl = [](const SimState&) { return Vec4d::Zero(); };
  const auto tr = hybrid::rollout(zero_ctrl, s, 0.1, cfg);
  const std::string path = "/tmp/stride_test_trace.csv";
  hybrid::write_trace_csv(tr, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "t,q0,q1,q2,q3,q4,q5,q6,v0,v1,v2,v3,v4,v5,v6,domain,phase,u0,u1,u2,u3,"
        "Flx,Flz,Frx,Frz,y0,y1,y2,y3,yd0,yd1,yd2,yd3,V,r_v,r_vdot,r_dom,r_reg,r_total");
  const std::string summary = hybrid::trace_summary_json(tr);
  CHECK(summary.find("\"diverged\"") != std::string::npos);
}
