#pragma once

#include "stride/rbd/dynamics.hpp"

namespace stride::hybrid {

/// One classic RK4 step on the constrained dynamics; each stage solves the
/// contact KKT system. Shared verbatim by the simulator and the trajectory
/// optimizer (which instantiates it with AD scalars).
template <typename T>
rbd::GenStateT<T> rk4_constrained(const rbd::RobotModel& m, const rbd::GenStateT<T>& s,
                                  const Vec4<T>& u, const rbd::ContactSet& contacts,
                                  const T& dt) {
  auto accel = [&](const rbd::GenStateT<T>& x) {
    return rbd::constrained_fwd_dynamics(m, x, u, contacts).qdd;
  };
  const T half = dt * T(0.5);
  const Vec7<T> k1q = s.v;
  const Vec7<T> k1v = accel(s);
  const rbd::GenStateT<T> s2{s.q + half * k1q, s.v + half * k1v};
  const Vec7<T> k2q = s2.v;
  const Vec7<T> k2v = accel(s2);
  const rbd::GenStateT<T> s3{s.q + half * k2q, s.v + half * k2v};
  const Vec7<T> k3q = s3.v;
  const Vec7<T> k3v = accel(s3);
  const rbd::GenStateT<T> s4{s.q + dt * k3q, s.v + dt * k3v};
  const Vec7<T> k4q = s4.v;
  const Vec7<T> k4v = accel(s4);
  const T sixth = dt / T(6.0);
  rbd::GenStateT<T> out;
  out.q = s.q + sixth * (k1q + T(2.0) * k2q + T(2.0) * k3q + k4q);
  out.v = s.v + sixth * (k1v + T(2.0) * k2v + T(2.0) * k3v + k4v);
  return out;
}

}  // namespace stride::hybrid
