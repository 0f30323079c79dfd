#pragma once

#include <string>

#include "stride/common.hpp"

namespace stride::rbd {

enum class Foot { Left, Right };

inline Foot other_foot(Foot f) { return f == Foot::Left ? Foot::Right : Foot::Left; }
inline const char* to_string(Foot f) { return f == Foot::Left ? "left" : "right"; }

/// Kinematic and inertial description of the planar five-link biped:
/// torso, two thighs, two shanks, point feet. The floating base (x, z, pitch)
/// sits at the hip joint, which is shared by both legs.
///
/// Coordinates: q = [base x, base z, pitch, left hip, left knee,
///                   right hip, right knee]. Joint angles are relative to the
/// parent link; pitch is the torso angle from vertical (CCW positive).
struct RobotModel {
  double torso_mass = 10.0;
  double thigh_mass = 2.0;
  double shank_mass = 1.0;

  double torso_length = 0.5;
  double thigh_length = 0.4;
  double shank_length = 0.4;

  // COM distance from the proximal joint along the link axis.
  double torso_com = 0.25;
  double thigh_com = 0.2;
  double shank_com = 0.2;

  // Rotational inertia about the link COM.
  double torso_inertia = 0.21;   // ~ m L^2 / 12 for a 10 kg, 0.5 m rod
  double thigh_inertia = 0.027;
  double shank_inertia = 0.014;

  // COM perturbation in the torso frame (randomization hook): the torso COM
  // sits at hip + R(pitch) * (com_offset_x, torso_com + com_offset_z).
  double torso_com_offset_x = 0.0;
  double torso_com_offset_z = 0.0;

  double gravity = 9.81;

  // Per-actuated-joint viscous damping and reflected rotor inertia,
  // order [lh, lk, rh, rk].
  Vec4d joint_damping = Vec4d::Zero();
  Vec4d armature = Vec4d::Zero();

  Vec7d q_min = (Vec7d() << -1e9, 0.0, -1.2, -1.6, -2.4, -1.6, -2.4).finished();
  Vec7d q_max = (Vec7d() << 1e9, 2.0, 1.2, 1.6, -0.02, 1.6, -0.02).finished();
  Vec4d tau_lim = Vec4d::Constant(120.0);

  /// B maps the 4 actuator torques into the 7 generalized coordinates.
  /// The floating-base rows are zero (underactuated base).
  Eigen::Matrix<double, kNumCoords, kNumActuators> actuation_matrix() const {
    Eigen::Matrix<double, kNumCoords, kNumActuators> b;
    b.setZero();
    b.block<4, 4>(3, 0).setIdentity();
    return b;
  }

  double total_mass() const { return torso_mass + 2 * thigh_mass + 2 * shank_mass; }

  /// Throws std::invalid_argument when a physical invariant is violated
  /// (nonpositive mass/length/inertia, inverted limits, nonpositive torque
  /// limits, negative damping/armature).
  void validate() const;
};

/// Loads the `model` section of a JSON config file. Missing fields keep their
/// defaults; the result is validated before being returned.
RobotModel load_model(const std::string& path);
RobotModel model_from_json_text(const std::string& text);

/// Generalized positions and velocities, templated so AD scalars flow through.
template <typename T>
struct GenStateT {
  Vec7<T> q = Vec7<T>::Zero();
  Vec7<T> v = Vec7<T>::Zero();
};

using GenState = GenStateT<double>;

/// One active planar point contact (h = 2 rows: horizontal, vertical).
struct Contact {
  Foot foot;
  int dim = kContactDim;
};

/// Zero, one, or two active foot contacts; no duplicate feet.
struct ContactSet {
  ContactSet() = default;
  ContactSet(std::initializer_list<Foot> feet) {
    for (Foot f : feet) add(f);
  }
  void add(Foot f) {
    for (int i = 0; i < n_; ++i)
      if (contacts_[i].foot == f) throw std::invalid_argument("duplicate foot contact");
    if (n_ >= 2) throw std::invalid_argument("more than two contacts");
    contacts_[n_++] = Contact{f, kContactDim};
  }
  int size() const { return n_; }
  bool empty() const { return n_ == 0; }
  const Contact& operator[](int i) const { return contacts_[i]; }
  int total_dim() const {
    int d = 0;
    for (int i = 0; i < n_; ++i) d += contacts_[i].dim;
    return d;
  }
  bool has(Foot f) const {
    for (int i = 0; i < n_; ++i)
      if (contacts_[i].foot == f) return true;
    return false;
  }

 private:
  Contact contacts_[2] = {};
  int n_ = 0;
};

}  // namespace stride::rbd
