#include "stride/hybrid/randomize.hpp"

#include <cmath>

namespace stride::hybrid {

namespace {

double sample(std::mt19937& rng, const Range& r) {
  if (r.lo > r.hi) throw std::invalid_argument("randomize: range lo > hi");
  if (r.zero_width()) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

}  // namespace

RandomizedModel randomize(const rbd::RobotModel& base, const RandomizeConfig& cfg, unsigned seed) {
  std::mt19937 rng(seed);
  RandomizedModel out;
  out.model = base;

  out.model.torso_com_offset_x = base.torso_com_offset_x + sample(rng, cfg.torso_com_offset_x);
  out.model.torso_com_offset_z = base.torso_com_offset_z + sample(rng, cfg.torso_com_offset_z);
  out.model.torso_mass = base.torso_mass + sample(rng, cfg.added_torso_mass);
  for (int j = 0; j < kNumActuators; ++j) {
    out.pd_gain_scale[j] = sample(rng, cfg.pd_gain_scale);
    out.model.joint_damping[j] = base.joint_damping[j] + sample(rng, cfg.joint_damping);
    out.model.armature[j] = base.armature[j] + sample(rng, cfg.armature);
  }
  out.ground_friction = sample(rng, cfg.ground_friction);
  sample(rng, cfg.restitution);  // drawn for stream stability; inert under rigid contact

  out.model.validate();  // rejects nonpositive masses/inertias from bad ranges

  // Periodic velocity kicks in random planar directions.
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> mag(0.0, cfg.impulse_magnitude);
  double t = 0;
  while (cfg.impulse_magnitude > 0.0) {
    const double gap = sample(rng, cfg.impulse_interval);
    if (gap <= 0.0) break;
    t += gap;
    if (t >= cfg.schedule_horizon) break;
    const double a = angle(rng);
    const double v = mag(rng);
    out.impulses.push_back({t, Vec2d(v * std::cos(a), v * std::sin(a))});
  }
  return out;
}

}  // namespace stride::hybrid
