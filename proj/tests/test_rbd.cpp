#include <doctest.h>

#include <random>

#include "stride/ad/dual.hpp"
#include "stride/rbd/dynamics.hpp"
#include "stride/rbd/model.hpp"
#include "stride/rbd/outputs.hpp"
#include "test_support.hpp"

using namespace stride;
using rbd::Foot;
using rbd::GenState;
using rbd::RobotModel;

namespace {

// RK4 on the unconstrained/constrained dynamics, test-local.
GenState rk4_step(const RobotModel& m, const GenState& s, const Vec4d& u,
                  const rbd::ContactSet& contacts, double dt) {
  auto f = [&](const GenState& x) {
    auto acc = rbd::constrained_fwd_dynamics(m, x, u, contacts);
    return std::make_pair(x.v, acc.qdd);
  };
  auto [k1q, k1v] = f(s);
  GenState s2{s.q + 0.5 * dt * k1q, s.v + 0.5 * dt * k1v};
  auto [k2q, k2v] = f(s2);
  GenState s3{s.q + 0.5 * dt * k2q, s.v + 0.5 * dt * k2v};
  auto [k3q, k3v] = f(s3);
  GenState s4{s.q + dt * k3q, s.v + dt * k3v};
  auto [k4q, k4v] = f(s4);
  GenState out;
  out.q = s.q + dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
  out.v = s.v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  return out;
}

}  // namespace

TEST_CASE("mass matrix is symmetric positive definite at random q") {
  RobotModel m;
  std::mt19937 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Vec7d q = testing::random_state_q(rng);
    const Mat77d mm = rbd::mass_matrix(m, q);
    CHECK((mm - mm.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::SelfAdjointEigenSolver<Mat77d> eig(mm);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("mass matrix rejects non-finite input") {
  RobotModel m;
  Vec7d q = Vec7d::Zero();
  q[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(rbd::mass_matrix(m, q), std::invalid_argument);
}

TEST_CASE("kinetic energy matches the per-link kinematics oracle") {
  RobotModel m;
  std::mt19937 rng(13);
  for (int i = 0; i < 100; ++i) {
    const Vec7d q = testing::random_state_q(rng);
    const Vec7d v = testing::random_state_v(rng);
    const double ke_m = 0.5 * v.dot(rbd::mass_matrix(m, q) * v);
    const double ke_oracle = testing::oracle_kinetic_energy(m, q, v);
    CHECK(ke_m == doctest::Approx(ke_oracle).epsilon(1e-7));
  }
}

TEST_CASE("mass matrix equals the finite-difference Hessian of the energy oracle") {
  RobotModel m;
  std::mt19937 rng(17);
  const double h = 1e-2;  // KE is quadratic in v: central differences are exact
  for (int trial = 0; trial < 5; ++trial) {
    const Vec7d q = testing::random_state_q(rng);
    const Vec7d v = testing::random_state_v(rng);
    const Mat77d mm = rbd::mass_matrix(m, q);
    const double scale = mm.cwiseAbs().maxCoeff();
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 7; ++j) {
        Vec7d vpp = v, vpm = v, vmp = v, vmm_ = v;
        vpp[i] += h; vpp[j] += h;
        vpm[i] += h; vpm[j] -= h;
        vmp[i] -= h; vmp[j] += h;
        vmm_[i] -= h; vmm_[j] -= h;
        const double hess =
            (testing::oracle_kinetic_energy(m, q, vpp) - testing::oracle_kinetic_energy(m, q, vpm) -
             testing::oracle_kinetic_energy(m, q, vmp) + testing::oracle_kinetic_energy(m, q, vmm_)) /
            (4 * h * h);
        CHECK(std::abs(hess - mm(i, j)) / scale < 1e-5);
      }
    }
  }
}

TEST_CASE("bias forces at rest equal the gravity gradient") {
  RobotModel m;
  std::mt19937 rng(19);
  for (int i = 0; i < 20; ++i) {
    const Vec7d q = testing::random_state_q(rng);
    const Vec7d h_vec = rbd::bias_forces(m, q, Vec7d(Vec7d::Zero()));
    const double h = 1e-6;
    for (int k = 0; k < 7; ++k) {
      Vec7d qp = q, qm = q;
      qp[k] += h;
      qm[k] -= h;
      const double dpe =
          (testing::oracle_potential_energy(m, qp) - testing::oracle_potential_energy(m, qm)) /
          (2 * h);
      CHECK(h_vec[k] == doctest::Approx(dpe).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("energy is conserved on an unactuated contact-free rollout") {
  RobotModel m;
  std::mt19937 rng(23);
  GenState s{testing::random_state_q(rng), testing::random_state_v(rng, 1.0)};
  const double e0 = testing::oracle_total_energy(m, s.q, s.v);
  const double dt = 1e-4;
  for (int k = 0; k < 1000; ++k) s = rk4_step(m, s, Vec4d::Zero(), {}, dt);
  const double e1 = testing::oracle_total_energy(m, s.q, s.v);
  CHECK(std::abs(e1 - e0) < 1e-6);
}

TEST_CASE("power balance holds on an actuated contact-free rollout") {
  RobotModel m;
  std::mt19937 rng(29);
  GenState s{testing::random_state_q(rng), testing::random_state_v(rng, 1.0)};
  const Vec4d u(3.0, -2.0, 1.5, 0.5);
  const auto b = m.actuation_matrix();
  const double dt = 1e-4;
  const double delta = 1e-5;  // short FD probe around each sample
  for (int k = 0; k < 200; ++k) {
    const GenState fwd = rk4_step(m, s, u, {}, delta);
    const GenState bwd = rk4_step(m, s, u, {}, -delta);
    const double de = (testing::oracle_total_energy(m, fwd.q, fwd.v) -
                       testing::oracle_total_energy(m, bwd.q, bwd.v)) /
                      (2 * delta);
    const double power = u.dot(b.transpose() * s.v);
    CHECK(std::abs(de - power) < 1e-6 * std::max(1.0, std::abs(power)));
    s = rk4_step(m, s, u, {}, dt);
  }
}

TEST_CASE("contact jacobian maps velocities to foot-point velocity") {
  RobotModel m;
  std::mt19937 rng(31);
  for (int i = 0; i < 50; ++i) {
    const Vec7d q = testing::random_state_q(rng);
    const Vec7d v = testing::random_state_v(rng);
    const auto [jac, drift] = rbd::contact_jacobian(m, q, v, Foot::Right);
    const double h = 1e-6;
    const Vec2d fd = (testing::oracle_foot_position(m, q + h * v, Foot::Right) -
                      testing::oracle_foot_position(m, q - h * v, Foot::Right)) /
                     (2 * h);
    CHECK((jac * v - fd).norm() < 1e-6);
    // v = 0 -> drift = 0
    const auto [jac0, drift0] = rbd::contact_jacobian(m, q, Vec7d(Vec7d::Zero()), Foot::Right);
    CHECK(drift0.norm() == 0.0);
    (void)jac0;
    (void)drift;
  }
}

TEST_CASE("constraint acceleration identity d/dt(J v) = J qdd + Jdot v on a pinned rollout") {
  RobotModel m;
  std::mt19937 rng(37);
  GenState s;
  s.q << 0.0, 0.75, 0.05, 0.3, -0.6, -0.25, -0.4;
  s.v = testing::random_state_v(rng, 0.5);
  const rbd::ContactSet pinned{Foot::Left};
  // Project the initial velocity so the stance foot starts stationary.
  s = rbd::impact_map(m, s, Foot::Left);
  const double dt = 1e-5;
  const Vec4d u(1.0, 2.0, -1.0, 0.5);
  for (int k = 0; k < 20; ++k) {
    const GenState prev = s;
    const GenState next = rk4_step(m, prev, u, pinned, dt);
    const GenState nexter = rk4_step(m, next, u, pinned, dt);
    const auto [jp, dp] = rbd::contact_jacobian(m, prev.q, prev.v, Foot::Left);
    const auto [jc, dc] = rbd::contact_jacobian(m, next.q, next.v, Foot::Left);
    const auto [jn, dn] = rbd::contact_jacobian(m, nexter.q, nexter.v, Foot::Left);
    (void)dp; (void)dn;
    const Vec2d fd = ((jn * nexter.v) - (jp * prev.v)) / (2 * dt);
    const auto acc = rbd::constrained_fwd_dynamics(m, next, u, pinned);
    const Vec2d analytic = jc * acc.qdd + dc;
    CHECK((fd - analytic).norm() < 1e-5);
    s = next;
  }
}

TEST_CASE("ballistic flight: COM acceleration (0, -g), angular momentum conserved") {
  RobotModel m;
  std::mt19937 rng(41);
  const GenState s{testing::random_state_q(rng), testing::random_state_v(rng)};
  const auto acc = rbd::constrained_fwd_dynamics(m, s, Vec4d(Vec4d::Zero()), {});
  CHECK(acc.forces.size() == 0);

  const auto k = rbd::evaluate_kinematics(m, s.q, s.v);
  const Vec2d com_acc = k.com.jac * acc.qdd + k.com.drift;
  CHECK(std::abs(com_acc[0]) < 1e-9);
  CHECK(com_acc[1] == doctest::Approx(-m.gravity).epsilon(1e-9));

  // Angular momentum about the COM along a ballistic rollout.
  auto ang_mom = [&](const GenState& x) {
    const auto kk = rbd::evaluate_kinematics(m, x.q, x.v);
    const Vec2d vcom = kk.com.jac * x.v;
    double l = 0;
    for (const auto& link : kk.links) {
      const Vec2d r = link.com.p - kk.com.p;
      const Vec2d vel = link.com.jac * x.v - vcom;
      l += link.mass * (r[0] * vel[1] - r[1] * vel[0]);
      l += link.inertia * link.angle_jac.dot(x.v);
    }
    return l;
  };
  GenState x = s;
  const double l0 = ang_mom(x);
  for (int i = 0; i < 100; ++i) x = rk4_step(m, x, Vec4d::Zero(), {}, 1e-4);
  CHECK(ang_mom(x) == doctest::Approx(l0).epsilon(1e-8));
}

TEST_CASE("single stance contact: constraint acceleration is zero by construction") {
  RobotModel m;
  std::mt19937 rng(43);
  for (int i = 0; i < 50; ++i) {
    const GenState s{testing::random_state_q(rng), testing::random_state_v(rng)};
    const Vec4d u = Vec4d::Random() * 10.0;
    const auto acc = rbd::constrained_fwd_dynamics(m, s, u, {Foot::Left});
    const auto [jac, drift] = rbd::contact_jacobian(m, s.q, s.v, Foot::Left);
    CHECK((jac * acc.qdd + drift).norm() < 1e-10);
  }
}

TEST_CASE("constrained dynamics matches a dense generic KKT solve") {
  RobotModel m;
  std::mt19937 rng(47);
  for (int i = 0; i < 100; ++i) {
    const GenState s{testing::random_state_q(rng), testing::random_state_v(rng)};
    const Vec4d u = Vec4d::Random() * 20.0;
    const rbd::ContactSet contacts =
        (i % 3 == 0) ? rbd::ContactSet{Foot::Left}
                     : (i % 3 == 1) ? rbd::ContactSet{Foot::Right}
                                    : rbd::ContactSet{Foot::Left, Foot::Right};
    const int h = contacts.total_dim();
    const int n = 7 + h;

    const Mat77d mm = rbd::mass_matrix(m, s.q);
    const Vec7d bias = rbd::bias_forces(m, s.q, s.v);
    MatXd a = MatXd::Zero(n, n);
    VecXd b = VecXd::Zero(n);
    a.topLeftCorner(7, 7) = mm;
    b.head(7) = m.actuation_matrix() * u - bias;
    int row = 7;
    for (int c = 0; c < contacts.size(); ++c) {
      const auto [jac, drift] = rbd::contact_jacobian(m, s.q, s.v, contacts[c].foot);
      a.block(row, 0, 2, 7) = jac;
      a.block(0, row, 7, 2) = -jac.transpose();
      b.segment(row, 2) = -drift;
      row += 2;
    }
    const VecXd sol = a.fullPivLu().solve(b);

    const auto acc = rbd::constrained_fwd_dynamics(m, s, u, contacts);
    VecXd mine(n);
    mine.head(7) = acc.qdd;
    mine.tail(h) = acc.forces;
    CHECK((mine - sol).norm() / std::max(1.0, sol.norm()) < 1e-9);
  }
}

TEST_CASE("impact map: zero momentum, idempotence, energy decrease, dense oracle") {
  RobotModel m;
  std::mt19937 rng(53);

  GenState rest{testing::random_state_q(rng), Vec7d::Zero()};
  const GenState post_rest = rbd::impact_map(m, rest, Foot::Left);
  CHECK(post_rest.q == rest.q);
  CHECK(post_rest.v.norm() == 0.0);

  for (int i = 0; i < 1000; ++i) {
    const GenState s{testing::random_state_q(rng), testing::random_state_v(rng)};
    const GenState post = rbd::impact_map(m, s, Foot::Right);

    CHECK(post.q == s.q);  // exact q-invariance

    const auto [jac, drift] = rbd::contact_jacobian(m, post.q, post.v, Foot::Right);
    (void)drift;
    CHECK((jac * post.v).norm() < 1e-10);

    const GenState twice = rbd::impact_map(m, post, Foot::Right);
    CHECK((twice.v - post.v).norm() < 1e-10);

    const Mat77d mm = rbd::mass_matrix(m, s.q);
    CHECK(post.v.dot(mm * post.v) <= s.v.dot(mm * s.v) + 1e-12);

    // Dense impulse KKT oracle.
    MatXd a = MatXd::Zero(9, 9);
    VecXd b = VecXd::Zero(9);
    a.topLeftCorner(7, 7) = mm;
    a.block(7, 0, 2, 7) = jac;
    a.block(0, 7, 7, 2) = -jac.transpose();
    b.head(7) = mm * s.v;
    const VecXd sol = a.fullPivLu().solve(b);
    CHECK((post.v - sol.head(7)).norm() / std::max(1.0, sol.head(7).norm()) < 1e-9);
  }
}

TEST_CASE("takeoff reset is the identity") {
  std::mt19937 rng(59);
  for (int i = 0; i < 100; ++i) {
    const GenState s{testing::random_state_q(rng), testing::random_state_v(rng)};
    const GenState r = rbd::takeoff_reset(s);
    CHECK(r.q == s.q);  // bit-identical
    CHECK(r.v == s.v);

    RobotModel m;
    const GenState a = rbd::impact_map(m, rbd::takeoff_reset(s), Foot::Left);
    const GenState b = rbd::impact_map(m, s, Foot::Left);
    CHECK(a.v == b.v);
  }
}

TEST_CASE("outputs: DSP symmetry, coincident feet, FD of y") {
  RobotModel m;

  // Mirrored pose (q_lh, q_lk) = -(q_rh, q_rk) puts the COM over the feet
  // midpoint.
  GenState sym;
  sym.q << 0.0, 0.7, 0.0, 0.4, -0.8, -0.4, 0.8;
  const auto y_dsp = rbd::outputs(m, sym, Domain::Dsp);
  CHECK(y_dsp.y[0] == doctest::Approx(0.0).scale(1.0));

  // Swing foot placed on the stance foot -> swing outputs (0, 0).
  GenState coincident;
  coincident.q << 0.0, 0.7, 0.1, 0.3, -0.5, 0.3, -0.5;
  const auto y_ssp = rbd::outputs(m, coincident, Domain::SspLeft);
  CHECK(y_ssp.y[2] == doctest::Approx(0.0).scale(1.0));
  CHECK(y_ssp.y[3] == doctest::Approx(0.0).scale(1.0));

  // ydot matches finite differences of y along a rollout.
  std::mt19937 rng(61);
  for (Domain d : {Domain::SspLeft, Domain::SspRight, Domain::Flight, Domain::Dsp}) {
    const GenState s{testing::random_state_q(rng), testing::random_state_v(rng)};
    const double h = 1e-6;
    const GenState sp{s.q + h * s.v, s.v};
    const GenState sm{s.q - h * s.v, s.v};
    const VecXd fd = (rbd::outputs(m, sp, d).y - rbd::outputs(m, sm, d).y) / (2 * h);
    const auto out = rbd::outputs(m, s, d);
    CHECK((out.ydot - fd).norm() < 1e-6);
  }

  CHECK_THROWS_AS(rbd::stance_foot(Domain::Flight), std::invalid_argument);
}

TEST_CASE("dynamics are evaluable on dual scalars and derivatives match FD") {
  using stride::ad::Dual;
  RobotModel m;
  std::mt19937 rng(67);
  const Vec7d q0 = testing::random_state_q(rng);
  const Vec7d v0 = testing::random_state_v(rng);
  const Vec4d u0 = Vec4d(5.0, -3.0, 2.0, 1.0);

  // Seed q[3] and check d(qdd)/d(q3) of the constrained dynamics.
  rbd::GenStateT<Dual> s;
  for (int i = 0; i < 7; ++i) {
    s.q[i] = (i == 3) ? Dual::seed(q0[i], 1, 0) : Dual(q0[i]);
    s.v[i] = Dual(v0[i]);
  }
  Vec4<Dual> u;
  for (int i = 0; i < 4; ++i) u[i] = Dual(u0[i]);
  const auto acc = rbd::constrained_fwd_dynamics(m, s, u, {Foot::Left});

  const double h = 1e-6;
  rbd::GenState sp{q0, v0}, sm{q0, v0};
  sp.q[3] += h;
  sm.q[3] -= h;
  const Vec7d fd = (rbd::constrained_fwd_dynamics(m, sp, u0, {Foot::Left}).qdd -
                    rbd::constrained_fwd_dynamics(m, sm, u0, {Foot::Left}).qdd) /
                   (2 * h);
  for (int i = 0; i < 7; ++i) {
    CHECK(acc.qdd[i].derivatives(1)[0] ==
          doctest::Approx(fd[i]).epsilon(1e-6).scale(std::max(1.0, std::abs(fd[i]))));
  }
}

TEST_CASE("model validation rejects bad parameters and loads json") {
  RobotModel bad;
  bad.thigh_mass = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  RobotModel inverted;
  inverted.q_min[3] = 2.0;
  inverted.q_max[3] = -2.0;
  CHECK_THROWS_AS(inverted.validate(), std::invalid_argument);

  const auto m = rbd::model_from_json_text(R"({"model": {"torso_mass": 12.5,
    "joint_damping": [0.1, 0.1, 0.1, 0.1]}})");
  CHECK(m.torso_mass == 12.5);
  CHECK(m.joint_damping[0] == 0.1);
  CHECK(m.thigh_mass == 2.0);  // default retained

  CHECK_THROWS(rbd::model_from_json_text(R"({"model": {"torso_mass": -2}})"));
}
