#pragma once

#include <vector>

#include "stride/common.hpp"
#include "stride/rbd/kinematics.hpp"
#include "stride/rbd/model.hpp"

namespace stride::rbd {

/// Outputs with enough structure for feedback linearization:
/// ydot = J v, yddot = J qdd + drift.
template <typename T>
struct OutputKin {
  VecX<T> y;
  VecX<T> ydot;
  MatX<T> jac;    // dim x 7
  VecX<T> drift;  // Jdot v
};

inline int output_dim(Domain d) { return d == Domain::Dsp ? 3 : 4; }

inline std::vector<std::string> output_names(Domain d) {
  switch (d) {
    case Domain::SspLeft:
    case Domain::SspRight:
      return {"com_z", "pitch", "swing_x", "swing_z"};
    case Domain::Flight:
      return {"hip_st", "knee_st", "hip_sw", "knee_sw"};
    case Domain::Dsp:
      return {"com_x", "com_z", "pitch"};
  }
  return {};
}

/// Stance foot for a domain; SSP only (others have no unique stance leg).
inline Foot stance_foot(Domain d) {
  if (d == Domain::SspLeft) return Foot::Left;
  if (d == Domain::SspRight) return Foot::Right;
  throw std::invalid_argument("domain has no stance foot");
}

/// Virtual-constraint outputs for the active domain:
///  - SSP: [COM z, torso pitch, swing foot x, swing foot z], positions
///    relative to the stance foot point.
///  - FLT: stance-side then swing-side joint angles (the stance side is the
///    one that was in stance during the preceding SSP).
///  - DSP: [COM x, COM z, torso pitch] relative to the midpoint of the feet.
/// `flt_stance` names the pre-flight stance leg so the joint ordering stays
/// phase-consistent across a running cycle.
template <typename T>
OutputKin<T> outputs(const RobotModel& m, const GenStateT<T>& s, Domain domain,
                     Foot flt_stance = Foot::Left) {
  const Kinematics<T> k = evaluate_kinematics(m, s.q, s.v);
  OutputKin<T> out;

  auto rel = [](const PointKin<T>& a, const PointKin<T>& b, int axis) {
    struct Row {
      T y;
      Eigen::Matrix<T, 1, kNumCoords> jac;
      T drift;
    };
    return Row{a.p[axis] - b.p[axis], a.jac.row(axis) - b.jac.row(axis),
               a.drift[axis] - b.drift[axis]};
  };

  switch (domain) {
    case Domain::SspLeft:
    case Domain::SspRight: {
      const Foot st = stance_foot(domain);
      const PointKin<T>& stp = foot_point(k, st);
      const PointKin<T>& swp = foot_point(k, other_foot(st));
      out.y.resize(4);
      out.jac.setZero(4, kNumCoords);
      out.drift.resize(4);
      const auto com_z = rel(k.com, stp, 1);
      out.y[0] = com_z.y;
      out.jac.row(0) = com_z.jac;
      out.drift[0] = com_z.drift;
      out.y[1] = s.q[2];
      out.jac(1, 2) = T(1);
      out.drift[1] = T(0);
      const auto sw_x = rel(swp, stp, 0);
      const auto sw_z = rel(swp, stp, 1);
      out.y[2] = sw_x.y;
      out.jac.row(2) = sw_x.jac;
      out.drift[2] = sw_x.drift;
      out.y[3] = sw_z.y;
      out.jac.row(3) = sw_z.jac;
      out.drift[3] = sw_z.drift;
      break;
    }
    case Domain::Flight: {
      // Joint angles are frame-independent; ordering is stance side first.
      const int st_hip = flt_stance == Foot::Left ? 3 : 5;
      const int sw_hip = flt_stance == Foot::Left ? 5 : 3;
      const int idx[4] = {st_hip, st_hip + 1, sw_hip, sw_hip + 1};
      out.y.resize(4);
      out.jac.setZero(4, kNumCoords);
      out.drift = VecX<T>::Zero(4);
      for (int i = 0; i < 4; ++i) {
        out.y[i] = s.q[idx[i]];
        out.jac(i, idx[i]) = T(1);
      }
      break;
    }
    case Domain::Dsp: {
      const PointKin<T>& fl = foot_point(k, Foot::Left);
      const PointKin<T>& fr = foot_point(k, Foot::Right);
      PointKin<T> mid;
      mid.p = T(0.5) * (fl.p + fr.p);
      mid.jac = T(0.5) * (fl.jac + fr.jac);
      mid.drift = T(0.5) * (fl.drift + fr.drift);
      out.y.resize(3);
      out.jac.setZero(3, kNumCoords);
      out.drift.resize(3);
      const auto cx = rel(k.com, mid, 0);
      const auto cz = rel(k.com, mid, 1);
      out.y[0] = cx.y;
      out.jac.row(0) = cx.jac;
      out.drift[0] = cx.drift;
      out.y[1] = cz.y;
      out.jac.row(1) = cz.jac;
      out.drift[1] = cz.drift;
      out.y[2] = s.q[2];
      out.jac(2, 2) = T(1);
      out.drift[2] = T(0);
      break;
    }
  }
  out.ydot = out.jac * s.v;
  return out;
}

}  // namespace stride::rbd
