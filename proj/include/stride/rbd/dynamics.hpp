#pragma once

#include <utility>

#include "stride/ad/dual.hpp"
#include "stride/common.hpp"
#include "stride/rbd/kinematics.hpp"
#include "stride/rbd/model.hpp"

namespace stride::rbd {

/// Dense LU solve with partial pivoting, templated so AD scalars can flow
/// through. Throws SingularKkt when the pivot collapses. Capacity covers the
/// largest KKT system here: 7 coordinates + two planar contacts.
template <typename T, int Cap = kNumCoords + 2 * kContactDim>
Eigen::Matrix<T, Eigen::Dynamic, 1, 0, Cap, 1> solve_dense(
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, 0, Cap, Cap> a,
    Eigen::Matrix<T, Eigen::Dynamic, 1, 0, Cap, 1> b) {
  using stride::ad::value_of;
  const int n = static_cast<int>(a.rows());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(value_of(a(col, col)));
    for (int r = col + 1; r < n; ++r) {
      const double cand = std::abs(value_of(a(r, col)));
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (best < 1e-12) throw SingularKkt("singular linear system (pivot " + std::to_string(best) + ")");
    if (piv != col) {
      a.row(piv).swap(a.row(col));
      std::swap(b[piv], b[col]);
    }
    const T inv_p = T(1.0) / a(col, col);
    for (int r = col + 1; r < n; ++r) {
      const T f = a(r, col) * inv_p;
      if (value_of(f) == 0.0 && std::is_same_v<T, double>) continue;
      a.row(r).tail(n - col - 1) -= f * a.row(col).tail(n - col - 1);
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    T acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= a(r, c) * b[c];
    b[r] = acc / a(r, r);
  }
  return b;
}

template <typename T>
void require_finite(const Vec7<T>& x, const char* what) {
  for (int i = 0; i < x.size(); ++i)
    if (!stride::ad::is_finite(x[i]))
      throw std::invalid_argument(std::string("non-finite ") + what + " at index " +
                                  std::to_string(i));
}

/// Mass-inertia matrix M(q): per-link Sum of m J^T J + I w w^T, plus reflected
/// rotor inertia on the actuated diagonal. Symmetric positive definite.
template <typename T>
Mat77<T> mass_matrix(const RobotModel& m, const Vec7<T>& q) {
  require_finite(q, "q");
  const Vec7<T> v = Vec7<T>::Zero();
  const Kinematics<T> k = evaluate_kinematics(m, q, v);
  Mat77<T> mm = Mat77<T>::Zero();
  for (const LinkKin<T>& link : k.links) {
    mm += T(link.mass) * (link.com.jac.transpose() * link.com.jac);
    const Vec7<T> w = link.angle_jac.template cast<T>();
    mm += T(link.inertia) * (w * w.transpose());
  }
  for (int j = 0; j < kNumActuators; ++j) mm(3 + j, 3 + j) += T(m.armature[j]);
  return mm;
}

/// Bias forces H(q, v): Coriolis/centrifugal plus gravity plus joint damping,
/// assembled by projecting per-link drift accelerations (virtual power).
/// M qdd + H = B u + J_h^T F.
template <typename T>
Vec7<T> bias_forces(const RobotModel& m, const Vec7<T>& q, const Vec7<T>& v) {
  require_finite(q, "q");
  require_finite(v, "v");
  const Kinematics<T> k = evaluate_kinematics(m, q, v);
  Vec7<T> h = Vec7<T>::Zero();
  for (const LinkKin<T>& link : k.links) {
    h += T(link.mass) * (link.com.jac.transpose() * link.com.drift);
    // Gravity: dPE/dq with PE = sum m g z_com.
    h += T(link.mass * m.gravity) * link.com.jac.row(1).transpose();
  }
  for (int j = 0; j < kNumActuators; ++j) h[3 + j] += T(m.joint_damping[j]) * v[3 + j];
  return h;
}

/// Contact Jacobian J_h (h x 7) and drift Jdot*v for one foot, so that the
/// holonomic constraint reads J_h qdd + Jdot v = 0.
template <typename T>
std::pair<Mat27<T>, Vec2<T>> contact_jacobian(const RobotModel& m, const Vec7<T>& q,
                                              const Vec7<T>& v, Foot foot) {
  const Kinematics<T> k = evaluate_kinematics(m, q, v);
  const PointKin<T>& fp = foot_point(k, foot);
  return {fp.jac, fp.drift};
}

template <typename T>
struct ConstrainedAccel {
  Vec7<T> qdd;
  // Stacked per-contact wrenches, ContactSet order, 2 rows each.
  Eigen::Matrix<T, Eigen::Dynamic, 1, 0, 2 * kContactDim, 1> forces;
};

/// Forward dynamics under the active holonomic contacts: solves the KKT system
///   [M  -J^T] [qdd]   [B u - H]
///   [J    0 ] [ F ] = [-Jdot v]
/// With no contacts this reduces to qdd = M^{-1} (B u - H) and F is empty.
/// A kinematically degenerate contact set raises SingularKkt.
template <typename T>
ConstrainedAccel<T> constrained_fwd_dynamics(const RobotModel& m, const GenStateT<T>& s,
                                             const Vec4<T>& u, const ContactSet& contacts) {
  const int h = contacts.total_dim();
  const int n = kNumCoords + h;
  using MatK = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, 0, kNumCoords + 2 * kContactDim,
                             kNumCoords + 2 * kContactDim>;
  using VecK = Eigen::Matrix<T, Eigen::Dynamic, 1, 0, kNumCoords + 2 * kContactDim, 1>;

  const Kinematics<T> k = evaluate_kinematics(m, s.q, s.v);

  Mat77<T> mm = Mat77<T>::Zero();
  Vec7<T> bias = Vec7<T>::Zero();
  for (const LinkKin<T>& link : k.links) {
    mm += T(link.mass) * (link.com.jac.transpose() * link.com.jac);
    const Vec7<T> w = link.angle_jac.template cast<T>();
    mm += T(link.inertia) * (w * w.transpose());
    bias += T(link.mass) * (link.com.jac.transpose() * link.com.drift);
    bias += T(link.mass * m.gravity) * link.com.jac.row(1).transpose();
  }
  for (int j = 0; j < kNumActuators; ++j) {
    mm(3 + j, 3 + j) += T(m.armature[j]);
    bias[3 + j] += T(m.joint_damping[j]) * s.v[3 + j];
  }

  Vec7<T> rhs_dyn = -bias;
  for (int j = 0; j < kNumActuators; ++j) rhs_dyn[3 + j] += u[j];

  MatK a = MatK::Zero(n, n);
  VecK b = VecK::Zero(n);
  a.topLeftCorner(kNumCoords, kNumCoords) = mm;
  b.head(kNumCoords) = rhs_dyn;
  int row = kNumCoords;
  for (int c = 0; c < contacts.size(); ++c) {
    const PointKin<T>& fp = foot_point(k, contacts[c].foot);
    a.block(row, 0, kContactDim, kNumCoords) = fp.jac;
    a.block(0, row, kNumCoords, kContactDim) = -fp.jac.transpose();
    b.segment(row, kContactDim) = -fp.drift;
    row += kContactDim;
  }

  const VecK sol = solve_dense<T>(a, b);
  ConstrainedAccel<T> out;
  out.qdd = sol.head(kNumCoords);
  out.forces = sol.tail(h);
  return out;
}

/// Plastic impact at the given foot: positions unchanged, velocities projected
/// onto the contact constraint, v+ = (I - M^{-1} J^T (J M^{-1} J^T)^{-1} J) v-.
/// Solved as the impulse KKT system [M, -J^T; J, 0][v+; Lambda] = [M v-; 0].
template <typename T>
GenStateT<T> impact_map(const RobotModel& m, const GenStateT<T>& s, Foot foot) {
  constexpr int n = kNumCoords + kContactDim;
  using MatK = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, 0, kNumCoords + 2 * kContactDim,
                             kNumCoords + 2 * kContactDim>;
  using VecK = Eigen::Matrix<T, Eigen::Dynamic, 1, 0, kNumCoords + 2 * kContactDim, 1>;

  const Mat77<T> mm = mass_matrix(m, s.q);
  const auto [jac, drift] = contact_jacobian(m, s.q, s.v, foot);
  (void)drift;

  MatK a = MatK::Zero(n, n);
  VecK b = VecK::Zero(n);
  a.topLeftCorner(kNumCoords, kNumCoords) = mm;
  a.block(kNumCoords, 0, kContactDim, kNumCoords) = jac;
  a.block(0, kNumCoords, kNumCoords, kContactDim) = -jac.transpose();
  b.head(kNumCoords) = mm * s.v;

  const VecK sol = solve_dense<T>(a, b);
  GenStateT<T> out;
  out.q = s.q;
  out.v = sol.head(kNumCoords);
  return out;
}

/// Take-off reset: the identity map.
template <typename T>
GenStateT<T> takeoff_reset(const GenStateT<T>& s) {
  return s;
}

}  // namespace stride::rbd
