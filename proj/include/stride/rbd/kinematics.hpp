#pragma once

#include "stride/ad/dual.hpp"
#include "stride/common.hpp"
#include "stride/rbd/model.hpp"

namespace stride::rbd {

/// A chain point together with its position Jacobian and acceleration drift
/// term (the value of p_ddot when qdd = 0). Velocity is J * v, acceleration is
/// J * qdd + drift.
template <typename T>
struct PointKin {
  Vec2<T> p = Vec2<T>::Zero();
  Mat27<T> jac = Mat27<T>::Zero();
  Vec2<T> drift = Vec2<T>::Zero();
};

namespace detail {

// Appends one rigid segment of length `len` to a chain point. The segment's
// absolute angle phi is a linear function of q with constant gradient
// `angle_jac`; `up` selects the torso convention (pointing along +z at
// phi = 0) versus the leg convention (pointing along -z).
template <typename T>
PointKin<T> append_segment(const PointKin<T>& parent, const T& phi,
                           const T& phidot, const Vec7d& angle_jac, double len,
                           bool up) {
  using std::cos;
  using std::sin;
  using stride::ad::cos;
  using stride::ad::sin;
  const T s = sin(phi);
  const T c = cos(phi);
  Vec2<T> dir, ddir;  // unit vector along the segment and its d/dphi
  if (up) {
    dir << -s, c;
    ddir << -c, -s;
  } else {
    dir << s, -c;
    ddir << c, s;
  }
  PointKin<T> out;
  out.p = parent.p + T(len) * dir;
  out.jac = parent.jac + (T(len) * ddir) * angle_jac.transpose().template cast<T>();
  // Segment drift at qdd = 0: -phidot^2 * segment vector.
  out.drift = parent.drift - (phidot * phidot * T(len)) * dir;
  return out;
}

}  // namespace detail

/// Per-link world-frame kinematics: COM point data plus the (constant)
/// angular Jacobian row for the link's absolute angle.
template <typename T>
struct LinkKin {
  PointKin<T> com;
  Vec7d angle_jac = Vec7d::Zero();  // absolute angle = angle_jac . q + const
  double mass = 0;
  double inertia = 0;
};

/// Full kinematic evaluation at (q, v): link COMs, knees, feet, total COM.
/// Link order: torso, left thigh, left shank, right thigh, right shank.
template <typename T>
struct Kinematics {
  LinkKin<T> links[5];
  PointKin<T> foot[2];  // indexed by Foot
  PointKin<T> com;      // mass-weighted COM of all links
};

template <typename T>
Kinematics<T> evaluate_kinematics(const RobotModel& m, const Vec7<T>& q,
                                  const Vec7<T>& v) {
  Kinematics<T> k;

  PointKin<T> base;
  base.p << q[0], q[1];
  base.jac.setZero();
  base.jac(0, 0) = T(1);
  base.jac(1, 1) = T(1);

  auto angle_row = [](std::initializer_list<int> idx) {
    Vec7d row = Vec7d::Zero();
    for (int i : idx) row[i] = 1.0;
    return row;
  };

  // Torso: COM offset perturbation applied in the torso frame.
  {
    const Vec7d w = angle_row({2});
    const T phi = q[2];
    const T phidot = v[2];
    LinkKin<T>& torso = k.links[0];
    torso.com = detail::append_segment(base, phi, phidot, w,
                                       m.torso_com + m.torso_com_offset_z, true);
    if (m.torso_com_offset_x != 0.0) {
      // Perpendicular offset: the torso-frame x axis at pitch phi.
      using std::cos;
      using std::sin;
      using stride::ad::cos;
      using stride::ad::sin;
      const T s = sin(phi), c = cos(phi);
      Vec2<T> ax, dax;
      ax << c, s;
      dax << -s, c;
      torso.com.p += T(m.torso_com_offset_x) * ax;
      torso.com.jac += (T(m.torso_com_offset_x) * dax) * w.transpose().template cast<T>();
      torso.com.drift -= (phidot * phidot * T(m.torso_com_offset_x)) * ax;
    }
    torso.angle_jac = w;
    torso.mass = m.torso_mass;
    torso.inertia = m.torso_inertia;
  }

  // Legs: hip -> thigh -> shank -> point foot.
  struct LegIdx {
    int hip, knee, thigh_link, shank_link, foot;
  };
  const LegIdx legs[2] = {{3, 4, 1, 2, 0}, {5, 6, 3, 4, 1}};
  for (const LegIdx& leg : legs) {
    const Vec7d w_th = angle_row({2, leg.hip});
    const Vec7d w_sh = angle_row({2, leg.hip, leg.knee});
    const T phi_th = q[2] + q[leg.hip];
    const T phidot_th = v[2] + v[leg.hip];
    const T phi_sh = phi_th + q[leg.knee];
    const T phidot_sh = phidot_th + v[leg.knee];

    LinkKin<T>& thigh = k.links[leg.thigh_link];
    thigh.com = detail::append_segment(base, phi_th, phidot_th, w_th, m.thigh_com, false);
    thigh.angle_jac = w_th;
    thigh.mass = m.thigh_mass;
    thigh.inertia = m.thigh_inertia;

    const PointKin<T> knee =
        detail::append_segment(base, phi_th, phidot_th, w_th, m.thigh_length, false);

    LinkKin<T>& shank = k.links[leg.shank_link];
    shank.com = detail::append_segment(knee, phi_sh, phidot_sh, w_sh, m.shank_com, false);
    shank.angle_jac = w_sh;
    shank.mass = m.shank_mass;
    shank.inertia = m.shank_inertia;

    k.foot[leg.foot] =
        detail::append_segment(knee, phi_sh, phidot_sh, w_sh, m.shank_length, false);
  }

  const double m_tot = m.total_mass();
  for (const LinkKin<T>& link : k.links) {
    const T w = T(link.mass / m_tot);
    k.com.p += w * link.com.p;
    k.com.jac += w * link.com.jac;
    k.com.drift += w * link.com.drift;
  }
  return k;
}

template <typename T>
const PointKin<T>& foot_point(const Kinematics<T>& k, Foot f) {
  return k.foot[f == Foot::Left ? 0 : 1];
}

/// Foot position only (no velocity-dependent terms needed).
template <typename T>
Vec2<T> foot_position(const RobotModel& m, const Vec7<T>& q, Foot f) {
  const Vec7<T> v = Vec7<T>::Zero();
  return foot_point(evaluate_kinematics(m, q, v), f).p;
}

}  // namespace stride::rbd
