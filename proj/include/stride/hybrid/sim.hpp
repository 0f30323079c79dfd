#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stride/hybrid/domain.hpp"
#include "stride/rbd/model.hpp"
#include "stride/rbd/outputs.hpp"

namespace stride::hybrid {

struct SimConfig {
  double physics_dt = 1e-3;
  double control_dt = 20e-3;
  double friction_mu = 0.8;
  double guard_tol = 1e-9;       // on the guard value
  double guard_time_tol = 1e-9;  // on the bisected event time (s)
  unsigned seed = 0;

  int substeps() const { return static_cast<int>(std::round(control_dt / physics_dt)); }
  void validate() const {
    if (!(physics_dt > 0) || !(control_dt > 0))
      throw std::invalid_argument("sim: dt must be positive");
    if (physics_dt > control_dt)
      throw std::invalid_argument("sim: physics dt must be <= control dt");
    const double k = control_dt / physics_dt;
    if (std::abs(k - std::round(k)) > 1e-9)
      throw std::invalid_argument("sim: control dt must be an integer multiple of physics dt");
  }
};

/// Base-velocity kick applied at a scheduled wall time.
struct Impulse {
  double time;
  Vec2d delta_v;
};

struct Event {
  enum class Kind { Transition, FrictionViolation, Impulse };
  Kind kind;
  double time;
  Domain from = Domain::SspLeft;
  Domain to = Domain::SspLeft;
  rbd::Foot foot = rbd::Foot::Left;
  double value = 0;  // guard value / |F_x| - mu F_z / kick magnitude
};

struct SimState {
  rbd::GenState x;
  Domain domain = Domain::SspLeft;
  double time = 0;
  double phase = 0;          // in [0, 1) over one full gait cycle
  double gait_period = 0;    // 0: phase clock disabled
  Vec2d stance_anchor = Vec2d::Zero();
  rbd::Foot landing_foot = rbd::Foot::Right;  // swing foot expected to touch down
  Vec2d force_left = Vec2d::Zero();
  Vec2d force_right = Vec2d::Zero();
  rbd::RobotModel model;    // per-episode (possibly randomized) instance
  double mu = 0.8;          // ground friction for this instance
  std::vector<Impulse> impulses;  // sorted schedule
  size_t next_impulse = 0;
  std::vector<Event> events;  // events raised by the most recent step()

  rbd::Foot stance() const { return rbd::stance_foot(domain); }
  rbd::Foot swing() const { return other_foot(stance()); }
};

/// Signed height of the foot expected to touch down (swing in SSP, landing
/// foot in FLT). Positive above ground.
double guard_impact(const SimState& s);

/// Vertical contact force on the stance foot; crossing zero from above is the
/// take-off guard.
double guard_takeoff(const SimState& s, const Vec2d& stance_force);

/// Advances one physics dt: semi-explicit RK4 on the active domain's
/// constrained dynamics, guard detection by sign change with bisection to
/// tolerance, registered reset map + relabel on crossing, stance-anchor
/// update on touchdown, scheduled impulses, friction-cone monitoring.
/// Events raised during the step are left in state.events.
SimState step(const SimState& s, const Vec4d& u, const SimConfig& cfg);

using Controller = std::function<Vec4d(const SimState&)>;

struct TraceRow {
  double t = 0;
  Vec7d q = Vec7d::Zero();
  Vec7d v = Vec7d::Zero();
  Domain domain = Domain::SspLeft;
  double phase = 0;
  Vec4d u = Vec4d::Zero();
  Vec2d f_left = Vec2d::Zero();
  Vec2d f_right = Vec2d::Zero();
  Vec4d y = Vec4d::Zero();      // active outputs, zero-padded to 4
  Vec4d y_ref = Vec4d::Zero();  // reference outputs when a gait is attached
  double clf_value = 0;
  double r_v = 0, r_vdot = 0, r_dom = 0, r_reg = 0, r_total = 0;
  bool has_reward = false;
};

struct Trace {
  std::vector<TraceRow> rows;
  std::vector<Event> events;
  bool diverged = false;
  std::string failure;  // empty on clean completion
  double duration() const { return rows.empty() ? 0.0 : rows.back().t - rows.front().t; }
};

struct RolloutOptions {
  bool stop_on_fall = true;
  double fall_base_z = 0.35;
  double fall_pitch = 1.0;
  // Called once per control step after stepping, to fill reward/reference
  // columns (receives the pre-step state, applied torque, post-step state).
  std::function<void(const SimState&, const Vec4d&, const SimState&, TraceRow&)> annotate;
};

/// Runs the controller at control dt for `duration` seconds. The trace gets
/// one row per control step (plus the initial sample); transition events are
/// accumulated. Divergence and falls terminate early with a recorded cause.
Trace rollout(const Controller& controller, const SimState& init, double duration,
              const SimConfig& cfg, const RolloutOptions& options = {});

/// Writes the documented trace CSV (one row per control step).
void write_trace_csv(const Trace& trace, const std::string& path);

/// Compact JSON summary of a rollout (duration, domains visited, events,
/// failure cause, mean forward speed).
std::string trace_summary_json(const Trace& trace);

}  // namespace stride::hybrid
