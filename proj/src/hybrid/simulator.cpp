#include <cmath>

#include "stride/hybrid/integrate.hpp"
#include "stride/hybrid/sim.hpp"

namespace stride::hybrid {

namespace {

Vec2d foot_height_probe(const rbd::RobotModel& m, const rbd::GenState& x, rbd::Foot f) {
  const auto k = rbd::evaluate_kinematics(m, x.q, x.v);
  const auto& fp = rbd::foot_point(k, f);
  return {fp.p[1], double(fp.jac.row(1) * x.v)};  // (height, vertical velocity)
}

struct ContactForces {
  Vec2d left = Vec2d::Zero();
  Vec2d right = Vec2d::Zero();
};

ContactForces contact_forces(const rbd::RobotModel& m, const rbd::GenState& x, const Vec4d& u,
                             Domain d) {
  ContactForces f;
  const rbd::ContactSet contacts = contact_set(d);
  if (contacts.empty()) return f;
  const auto acc = rbd::constrained_fwd_dynamics(m, x, u, contacts);
  for (int c = 0; c < contacts.size(); ++c) {
    const Vec2d fc = acc.forces.segment(2 * c, 2);
    (contacts[c].foot == rbd::Foot::Left ? f.left : f.right) = fc;
  }
  return f;
}

// Candidate guard crossing within one physics step.
struct GuardHit {
  double tau;         // event time within the step
  Domain to;
  ResetId reset;
  rbd::Foot foot;     // touching/unloading foot
  double guard_value;
};

}  // namespace

double guard_impact(const SimState& s) {
  const rbd::Foot f = s.domain == Domain::Flight ? s.landing_foot : s.swing();
  return foot_height_probe(s.model, s.x, f)[0];
}

double guard_takeoff(const SimState& s, const Vec2d& stance_force) {
  (void)s;
  return stance_force[1];
}

namespace {

// Guard evaluation used both for crossing detection and inside bisection.
// Returns the signed guard value for a transition candidate at state x.
double guard_value(const rbd::RobotModel& m, const rbd::GenState& x, const Vec4d& u, Domain d,
                   const Transition& tr, rbd::Foot foot) {
  if (tr.guard == GuardId::SwingTouchdown) return foot_height_probe(m, x, foot)[0];
  // StanceForceZero: normal force on the unloading foot.
  const ContactForces f = contact_forces(m, x, u, d);
  return (foot == rbd::Foot::Left ? f.left : f.right)[1];
}

// The foot a transition candidate watches, given the current state.
rbd::Foot guard_foot(const SimState& s, const Transition& tr) {
  switch (tr.guard) {
    case GuardId::SwingTouchdown:
      return s.domain == Domain::Flight ? s.landing_foot : s.swing();
    case GuardId::StanceForceZero:
      if (s.domain == Domain::Dsp) {
        // DSP -> SSP_L means the right foot unloads and vice versa.
        return tr.to == Domain::SspLeft ? rbd::Foot::Right : rbd::Foot::Left;
      }
      return s.stance();
  }
  return rbd::Foot::Left;
}

bool candidate_applies(const SimState& s, const Transition& tr) {
  if (tr.from != s.domain) return false;
  if (s.domain == Domain::Flight) {
    // The landing foot determines which SSP we enter.
    const Domain expected =
        s.landing_foot == rbd::Foot::Left ? Domain::SspLeft : Domain::SspRight;
    return tr.to == expected;
  }
  return true;
}

}  // namespace

SimState step(const SimState& s0, const Vec4d& u, const SimConfig& cfg) {
  SimState s = s0;
  s.events.clear();

  // Scheduled base-velocity impulses.
  while (s.next_impulse < s.impulses.size() && s.impulses[s.next_impulse].time <= s.time) {
    const Impulse& imp = s.impulses[s.next_impulse];
    s.x.v[0] += imp.delta_v[0];
    s.x.v[1] += imp.delta_v[1];
    s.events.push_back(
        {Event::Kind::Impulse, s.time, s.domain, s.domain, rbd::Foot::Left, imp.delta_v.norm()});
    ++s.next_impulse;
  }

  double remaining = cfg.physics_dt;
  int hops = 0;
  while (remaining > 0 && hops < 4) {
    const rbd::ContactSet contacts = contact_set(s.domain);
    const rbd::GenState x_next = rk4_constrained(s.model, s.x, u, contacts, remaining);

    // Detect the earliest guard crossing inside (0, remaining].
    std::optional<GuardHit> hit;
    for (const Transition& tr : transitions()) {
      if (!candidate_applies(s, tr)) continue;
      const rbd::Foot foot = guard_foot(s, tr);
      const double pre = guard_value(s.model, s.x, u, s.domain, tr, foot);
      const double post = guard_value(s.model, x_next, u, s.domain, tr, foot);
      if (!(pre > 0.0 && post <= 0.0)) continue;
      if (tr.guard == GuardId::SwingTouchdown) {
        // Direction gate: the foot must be moving down at the crossing.
        if (foot_height_probe(s.model, x_next, foot)[1] >= 0.0) continue;
      }
      // Bisect the event time.
      double lo = 0.0, hi = remaining;
      double g_hi = post;
      for (int it = 0; it < 80 && (hi - lo) > cfg.guard_time_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const rbd::GenState xm = rk4_constrained(s.model, s.x, u, contacts, mid);
        const double gm = guard_value(s.model, xm, u, s.domain, tr, foot);
        if (std::abs(gm) < cfg.guard_tol) {
          lo = hi = mid;
          g_hi = gm;
          break;
        }
        if (gm > 0.0)
          lo = mid;
        else {
          hi = mid;
          g_hi = gm;
        }
      }
      const double tau = hi;
      if (!hit || tau < hit->tau) hit = GuardHit{tau, tr.to, tr.reset, foot, g_hi};
    }

    if (!hit) {
      s.x = x_next;
      s.time += remaining;
      remaining = 0;
      break;
    }

    // Advance to the event, apply the reset, relabel, and continue.
    rbd::GenState x_event = rk4_constrained(s.model, s.x, u, contacts, hit->tau);
    const Domain from = s.domain;
    if (hit->reset == ResetId::ImpactTouching) x_event = rbd::impact_map(s.model, x_event, hit->foot);
    s.x = x_event;
    s.domain = hit->to;
    s.time += hit->tau;
    remaining -= hit->tau;
    ++hops;
    s.events.push_back({Event::Kind::Transition, s.time, from, hit->to, hit->foot, hit->guard_value});
    if (hit->to == Domain::SspLeft || hit->to == Domain::SspRight) {
      s.stance_anchor = rbd::foot_position(s.model, s.x.q, rbd::stance_foot(hit->to));
      s.landing_foot = other_foot(rbd::stance_foot(hit->to));
    } else if (hit->to == Domain::Flight) {
      s.landing_foot = other_foot(rbd::stance_foot(from));
    }
  }

  // Record contact forces and watch the friction cone.
  const ContactForces f = contact_forces(s.model, s.x, u, s.domain);
  s.force_left = f.left;
  s.force_right = f.right;
  const rbd::ContactSet active = contact_set(s.domain);
  for (int c = 0; c < active.size(); ++c) {
    const Vec2d fc = active[c].foot == rbd::Foot::Left ? f.left : f.right;
    const double excess = std::abs(fc[0]) - s.mu * fc[1];
    if (excess > 0.0)
      s.events.push_back({Event::Kind::FrictionViolation, s.time, s.domain, s.domain,
                          active[c].foot, excess});
  }

  if (s.gait_period > 0) {
    s.phase = std::fmod(s.phase + cfg.physics_dt / s.gait_period, 1.0);
  }

  for (int i = 0; i < kNumCoords; ++i) {
    if (!std::isfinite(s.x.q[i]) || !std::isfinite(s.x.v[i]))
      throw SimDiverged("non-finite state at t=" + std::to_string(s.time));
  }
  return s;
}

Trace rollout(const Controller& controller, const SimState& init, double duration,
              const SimConfig& cfg, const RolloutOptions& options) {
  cfg.validate();
  Trace trace;
  SimState s = init;

  auto sample = [&](const SimState& st, const Vec4d& u) {
    TraceRow row;
    row.t = st.time;
    row.q = st.x.q;
    row.v = st.x.v;
    row.domain = st.domain;
    row.phase = st.phase;
    row.u = u;
    row.f_left = st.force_left;
    row.f_right = st.force_right;
    const auto out = rbd::outputs(st.model, st.x, st.domain);
    row.y.head(out.y.size()) = out.y;
    return row;
  };

  trace.rows.push_back(sample(s, Vec4d::Zero()));

  const int n_steps = static_cast<int>(std::round(duration / cfg.control_dt));
  for (int k = 0; k < n_steps; ++k) {
    const SimState pre = s;
    Vec4d u;
    try {
      u = controller(s);
      for (int sub = 0; sub < cfg.substeps(); ++sub) {
        s = step(s, u, cfg);
        for (const Event& e : s.events) trace.events.push_back(e);
      }
    } catch (const SimDiverged& e) {
      trace.diverged = true;
      trace.failure = e.what();
      break;
    } catch (const SingularKkt& e) {
      trace.diverged = true;
      trace.failure = std::string("singular KKT: ") + e.what();
      break;
    }
    TraceRow row = sample(s, u);
    if (options.annotate) options.annotate(pre, u, s, row);
    trace.rows.push_back(std::move(row));

    if (options.stop_on_fall &&
        (s.x.q[1] < options.fall_base_z || std::abs(s.x.q[2]) > options.fall_pitch)) {
      trace.failure = "fell";
      break;
    }
  }
  return trace;
}

}  // namespace stride::hybrid
