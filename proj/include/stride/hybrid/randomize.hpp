#pragma once

#include <random>

#include "stride/hybrid/sim.hpp"
#include "stride/rbd/model.hpp"

namespace stride::hybrid {

struct Range {
  double lo = 0;
  double hi = 0;
  bool zero_width() const { return lo == hi; }
};

/// Per-episode randomization ranges. All defaults are configuration, not
/// reported values. `restitution` is inert under the rigid contact model and
/// kept only so configs carry it explicitly.
struct RandomizeConfig {
  Range torso_com_offset_x{-0.03, 0.03};  // m
  Range torso_com_offset_z{-0.03, 0.03};  // m
  Range added_torso_mass{-0.5, 1.0};      // kg
  Range pd_gain_scale{0.9, 1.1};
  Range joint_damping{0.0, 0.1};      // N m s
  Range armature{0.0, 0.005};         // kg m^2
  Range ground_friction{0.6, 1.0};
  Range restitution{0.0, 0.0};        // inert: rigid plastic contact
  Range impulse_interval{3.0, 5.0};   // s between base-velocity kicks
  double impulse_magnitude = 0.5;     // max kick speed, m/s
  double schedule_horizon = 30.0;     // s of impulse schedule to generate
};

struct RandomizedModel {
  rbd::RobotModel model;
  double ground_friction = 0.8;
  Vec4d pd_gain_scale = Vec4d::Ones();
  std::vector<Impulse> impulses;
};

/// Samples a perturbed model plus episode schedule. Deterministic in `seed`;
/// zero-width ranges reproduce the base model exactly. Ranges that would make
/// a mass or inertia nonpositive are rejected at sampling time.
RandomizedModel randomize(const rbd::RobotModel& base, const RandomizeConfig& cfg, unsigned seed);

}  // namespace stride::hybrid
