#pragma once

// Shared oracles and random-state helpers for the unit and acceptance suites.
// Everything here is deliberately written against the model conventions
// directly (no reuse of the library's kinematics assembly) so the tests stay
// an independent check.

#include <random>

#include <vector>

#include "stride/common.hpp"
#include "stride/rbd/dynamics.hpp"
#include "stride/rbd/model.hpp"

namespace stride::testing {

inline Vec7d random_state_q(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec7d q;
  q[0] = u(rng);
  q[1] = 0.8 + 0.3 * u(rng);
  q[2] = 0.5 * u(rng);
  q[3] = 1.2 * u(rng);
  q[4] = -1.15 + 1.0 * u(rng);  // knee within [-2.15, -0.15]
  q[5] = 1.2 * u(rng);
  q[6] = -1.15 + 1.0 * u(rng);
  return q;
}

inline Vec7d random_state_v(std::mt19937& rng, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec7d v;
  for (int i = 0; i < 7; ++i) v[i] = scale * u(rng);
  return v;
}

// Independent forward kinematics: per-link COM positions and absolute angles,
// written out directly from the model conventions.
struct LinkPose {
  Vec2d com;
  double angle;
  double mass;
  double inertia;
};

inline std::array<LinkPose, 5> oracle_link_poses(const rbd::RobotModel& m, const Vec7d& q) {
  const double x = q[0], z = q[1], th = q[2];
  auto up = [](double a) { return Vec2d(-std::sin(a), std::cos(a)); };
  auto dn = [](double a) { return Vec2d(std::sin(a), -std::cos(a)); };
  const Vec2d hip(x, z);
  std::array<LinkPose, 5> links;
  links[0] = {hip + m.torso_com * up(th), th, m.torso_mass, m.torso_inertia};
  const double a_lth = th + q[3], a_lsh = th + q[3] + q[4];
  const double a_rth = th + q[5], a_rsh = th + q[5] + q[6];
  links[1] = {hip + m.thigh_com * dn(a_lth), a_lth, m.thigh_mass, m.thigh_inertia};
  links[2] = {hip + m.thigh_length * dn(a_lth) + m.shank_com * dn(a_lsh), a_lsh, m.shank_mass,
              m.shank_inertia};
  links[3] = {hip + m.thigh_com * dn(a_rth), a_rth, m.thigh_mass, m.thigh_inertia};
  links[4] = {hip + m.thigh_length * dn(a_rth) + m.shank_com * dn(a_rsh), a_rsh, m.shank_mass,
              m.shank_inertia};
  return links;
}

inline Vec2d oracle_foot_position(const rbd::RobotModel& m, const Vec7d& q, rbd::Foot f) {
  const double th = q[2];
  const int hip_idx = f == rbd::Foot::Left ? 3 : 5;
  auto dn = [](double a) { return Vec2d(std::sin(a), -std::cos(a)); };
  const double a_th = th + q[hip_idx];
  const double a_sh = a_th + q[hip_idx + 1];
  return Vec2d(q[0], q[1]) + m.thigh_length * dn(a_th) + m.shank_length * dn(a_sh);
}

inline double oracle_potential_energy(const rbd::RobotModel& m, const Vec7d& q) {
  double pe = 0;
  for (const LinkPose& l : oracle_link_poses(m, q)) pe += l.mass * m.gravity * l.com[1];
  return pe;
}

// Kinetic energy via finite-difference link velocities along q(t) = q + t v.
inline double oracle_kinetic_energy(const rbd::RobotModel& m, const Vec7d& q, const Vec7d& v,
                                    double h = 1e-6) {
  const auto plus = oracle_link_poses(m, q + h * v);
  const auto minus = oracle_link_poses(m, q - h * v);
  double ke = 0;
  for (size_t i = 0; i < plus.size(); ++i) {
    const Vec2d vel = (plus[i].com - minus[i].com) / (2 * h);
    const double omega = (plus[i].angle - minus[i].angle) / (2 * h);
    ke += 0.5 * plus[i].mass * vel.squaredNorm() + 0.5 * plus[i].inertia * omega * omega;
  }
  return ke;
}

// Closed-form link COM velocities and angular rates, for energy checks that
// need exact (noise-free) values.
inline double oracle_kinetic_energy_exact(const rbd::RobotModel& m, const Vec7d& q,
                                          const Vec7d& v) {
  const double th = q[2];
  const Vec2d vhip(v[0], v[1]);
  auto dup = [](double a) { return Vec2d(-std::cos(a), -std::sin(a)); };
  auto ddn = [](double a) { return Vec2d(std::cos(a), std::sin(a)); };

  double ke = 0;
  {  // torso
    const Vec2d vc = vhip + m.torso_com * v[2] * dup(th);
    ke += 0.5 * m.torso_mass * vc.squaredNorm() + 0.5 * m.torso_inertia * v[2] * v[2];
  }
  for (int leg = 0; leg < 2; ++leg) {
    const int hip = leg == 0 ? 3 : 5;
    const double a_th = th + q[hip], a_sh = a_th + q[hip + 1];
    const double w_th = v[2] + v[hip], w_sh = w_th + v[hip + 1];
    const Vec2d v_thigh = vhip + m.thigh_com * w_th * ddn(a_th);
    const Vec2d v_shank = vhip + m.thigh_length * w_th * ddn(a_th) + m.shank_com * w_sh * ddn(a_sh);
    ke += 0.5 * m.thigh_mass * v_thigh.squaredNorm() + 0.5 * m.thigh_inertia * w_th * w_th;
    ke += 0.5 * m.shank_mass * v_shank.squaredNorm() + 0.5 * m.shank_inertia * w_sh * w_sh;
  }
  return ke;
}

inline double oracle_total_energy(const rbd::RobotModel& m, const Vec7d& q, const Vec7d& v) {
  return oracle_kinetic_energy_exact(m, q, v) + oracle_potential_energy(m, q);
}

// Statics oracle: solves B u + J_h^T F = H(q, 0) for the minimum-norm
// (u, F) via a dense least-squares solve. Returns the actuator torques and
// stacked contact forces (left then right when both feet are given).
struct StaticsSolution {
  Vec4d u;
  VecXd forces;
};

inline StaticsSolution oracle_gravity_compensation(const rbd::RobotModel& m, const Vec7d& q,
                                                   const std::vector<rbd::Foot>& feet) {
  const Vec7d zero = Vec7d::Zero();
  const Vec7d h = rbd::bias_forces(m, q, zero);
  const int nf = static_cast<int>(feet.size());
  MatXd a(7, 4 + 2 * nf);
  a.leftCols(4) = m.actuation_matrix();
  for (int i = 0; i < nf; ++i) {
    const auto [jac, drift] = rbd::contact_jacobian(m, q, zero, feet[i]);
    (void)drift;
    a.middleCols(4 + 2 * i, 2) = jac.transpose();
  }
  const VecXd sol = a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(h);
  StaticsSolution out;
  out.u = sol.head(4);
  out.forces = sol.tail(2 * nf);
  return out;
}

}  // namespace stride::testing
