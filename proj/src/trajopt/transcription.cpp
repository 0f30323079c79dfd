#include "stride/trajopt/transcription.hpp"

#include <cmath>

#include "stride/trajopt/bezier.hpp"

namespace stride::trajopt {

namespace {

constexpr int kStateDim = 2 * kNumCoords;

template <typename Vec>
rbd::GenStateT<typename Vec::Scalar> unpack_state(const Vec& in, int off) {
  rbd::GenStateT<typename Vec::Scalar> s;
  for (int i = 0; i < kNumCoords; ++i) {
    s.q[i] = in[off + i];
    s.v[i] = in[off + kNumCoords + i];
  }
  return s;
}

std::vector<int> state_vars(const Layout& lay, int k) {
  std::vector<int> v(kStateDim);
  for (int i = 0; i < kStateDim; ++i) v[i] = lay.x_off(k) + i;
  return v;
}

void append_range(std::vector<int>& vars, int off, int count) {
  for (int i = 0; i < count; ++i) vars.push_back(off + i);
}

}  // namespace

void TranscriptionSpec::validate() const {
  if (sequence.empty()) throw std::invalid_argument("transcription: empty domain sequence");
  for (const Phase& p : sequence)
    if (p.nodes < 2) throw std::invalid_argument("transcription: every domain needs >= 2 nodes");
  for (size_t d = 0; d + 1 < sequence.size(); ++d) {
    if (!hybrid::transition_registered(sequence[d].domain, sequence[d + 1].domain))
      throw std::invalid_argument("transcription: unregistered transition in sequence");
  }
  if (half_gait_symmetry &&
      (sequence.size() != 2 || sequence.front().domain != Domain::SspLeft ||
       sequence.back().domain != Domain::Flight))
    throw std::invalid_argument("transcription: half-gait remap expects [SSP_L, FLT]");
  if (bezier_degree < 2 || bezier_degree > 10)
    throw std::invalid_argument("transcription: bezier degree out of range");
  const int n = total_nodes();
  for (int j : switch_nodes())
    if (j < 1 || j >= n - 1) throw std::invalid_argument("transcription: switch node not interior");
}

Layout::Layout(const TranscriptionSpec& spec) {
  degree_ = spec.bezier_degree;
  for (const auto& p : spec.sequence) {
    domain_nodes_.push_back(p.nodes);
    outputs_per_domain_.push_back(rbd::output_dim(p.domain));
    n_nodes_ += p.nodes;
  }
  u_base_end_ = n_nodes_ * kStateDim + n_nodes_ * kNumActuators;
  alpha_base_ = u_base_end_ + num_domains();
  int off = 0;
  for (int d = 0; d < num_domains(); ++d) {
    alpha_row_off_.push_back(off);
    off += outputs_per_domain_[d] * (degree_ + 1);
  }
  size_ = alpha_base_ + off;
  if (spec.half_gait_symmetry) step_off_ = size_++;
}

int Layout::domain_of_node(int k) const {
  int at = 0;
  for (size_t d = 0; d < domain_nodes_.size(); ++d) {
    at += domain_nodes_[d];
    if (k < at) return static_cast<int>(d);
  }
  throw std::out_of_range("node index");
}

int Layout::node_in_domain(int k) const {
  int at = 0;
  for (int nodes : domain_nodes_) {
    if (k < at + nodes) return k - at;
    at += nodes;
  }
  throw std::out_of_range("node index");
}

double Layout::node_phase(int k) const {
  const int d = domain_of_node(k);
  return static_cast<double>(node_in_domain(k)) / (domain_nodes_[d] - 1);
}

std::pair<double, double> leg_ik(const rbd::RobotModel& m, const Vec2d& hip, const Vec2d& foot,
                                 double pitch) {
  const double l1 = m.thigh_length, l2 = m.shank_length;
  Vec2d d = foot - hip;
  double r = d.norm();
  const double r_max = l1 + l2 - 1e-4;
  if (r < std::abs(l1 - l2) + 1e-4) throw std::invalid_argument("leg_ik: target too close");
  if (r > r_max) {
    d *= r_max / r;
    r = r_max;
  }
  const double cos_knee = std::clamp((l1 * l1 + l2 * l2 - r * r) / (2 * l1 * l2), -1.0, 1.0);
  const double knee = std::acos(cos_knee) - M_PI;  // <= 0: backward bend
  const double phi = std::atan2(d[0], -d[1]);
  const double cos_hip = std::clamp((l1 * l1 + r * r - l2 * l2) / (2 * l1 * r), -1.0, 1.0);
  const double hip_angle = phi + std::acos(cos_hip) - pitch;
  return {hip_angle, knee};
}

Transcription assemble_nlp(const rbd::RobotModel& model, const TranscriptionSpec& spec,
                           const GaitTask& task) {
  spec.validate();
  model.validate();

  Transcription tr{NlpProblem{}, Layout(spec), spec, task, Vec7d::Zero()};
  const Layout& lay = tr.layout;
  NlpProblem& nlp = tr.nlp;
  nlp.n = lay.size();
  nlp.lower = VecXd::Constant(nlp.n, -std::numeric_limits<double>::infinity());
  nlp.upper = VecXd::Constant(nlp.n, std::numeric_limits<double>::infinity());

  const int n_nodes = lay.num_nodes();
  const int n_domains = lay.num_domains();
  const int deg = lay.degree();
  const bool running = spec.half_gait_symmetry;

  // Nominal posture: hips over the stance point at the task base height.
  {
    const auto [hip, knee] =
        leg_ik(model, Vec2d(0.0, task.base_height), Vec2d(running ? 0.0 : task.stance_width / 2, 0.0),
               0.0);
    tr.q_nominal << 0.0, task.base_height, 0.0, hip, knee, running ? hip : -hip, knee;
  }

  // ---- Bounds ----
  // Knees stay clear of the straight-leg singularity inside the NLP even if
  // the model's own limit allows it.
  Vec7d q_lo = model.q_min, q_hi = model.q_max;
  q_hi[4] = std::min(q_hi[4], -0.15);
  q_hi[6] = std::min(q_hi[6], -0.15);
  for (int k = 0; k < n_nodes; ++k) {
    for (int i = 0; i < kNumCoords; ++i) {
      nlp.lower[lay.x_off(k) + i] = q_lo[i];
      nlp.upper[lay.x_off(k) + i] = q_hi[i];
      nlp.lower[lay.x_off(k) + kNumCoords + i] = -20.0;
      nlp.upper[lay.x_off(k) + kNumCoords + i] = 20.0;
    }
    for (int j = 0; j < kNumActuators; ++j) {
      nlp.lower[lay.u_off(k) + j] = -model.tau_lim[j];
      nlp.upper[lay.u_off(k) + j] = model.tau_lim[j];
    }
  }
  for (int d = 0; d < n_domains; ++d) {
    const Domain dom = spec.sequence[d].domain;
    double lo = 0.12, hi = 0.6;
    if (dom == Domain::Flight) lo = task.min_flight, hi = 0.3;
    if (dom == Domain::Dsp) lo = hi = task.standing_duration;
    if (task.frozen_durations) lo = hi = (*task.frozen_durations)[d];
    nlp.lower[lay.t_off(d)] = lo;
    nlp.upper[lay.t_off(d)] = hi;
  }
  for (int d = 0; d < n_domains; ++d) {
    const int n_out = rbd::output_dim(spec.sequence[d].domain);
    for (int i = 0; i < n_out; ++i) {
      for (int c = 0; c <= deg; ++c) {
        nlp.lower[lay.alpha_off(d, i) + c] = -50.0;
        nlp.upper[lay.alpha_off(d, i) + c] = 50.0;
      }
    }
  }
  if (running) {
    nlp.lower[lay.step_off()] = 0.05;
    nlp.upper[lay.step_off()] = 2.0;
  }

  // ---- Dynamics defects (per domain interval) ----
  for (int k = 0; k + 1 < n_nodes; ++k) {
    const int d = lay.domain_of_node(k);
    if (lay.domain_of_node(k + 1) != d) continue;  // switch handled by reset
    const Domain dom = spec.sequence[d].domain;
    const double inv_intervals = 1.0 / (lay.nodes_in_domain(d) - 1);
    std::vector<int> vars = state_vars(lay, k);
    append_range(vars, lay.u_off(k), kNumActuators);
    vars.push_back(lay.t_off(d));
    append_range(vars, lay.x_off(k + 1), kStateDim);
    nlp.blocks.push_back(make_block(
        "defect", Block::Kind::Equality, std::move(vars), kStateDim,
        [model, dom, inv_intervals](const auto& in, auto& out) {
          using T = typename std::decay_t<decltype(in)>::Scalar;
          const auto x = unpack_state(in, 0);
          Vec4<T> u;
          for (int j = 0; j < kNumActuators; ++j) u[j] = in[kStateDim + j];
          const T dt = in[kStateDim + kNumActuators] * T(inv_intervals);
          const auto pred = discretize_step(model, dom, x, u, dt);
          const int next = kStateDim + kNumActuators + 1;
          for (int i = 0; i < kNumCoords; ++i) {
            out[i] = pred.q[i] - in[next + i];
            out[kNumCoords + i] = pred.v[i] - in[next + kNumCoords + i];
          }
        }));
  }

  // ---- Switch nodes: guard + reset ----
  const auto switches = spec.switch_nodes();
  for (int j : switches) {
    const int d = lay.domain_of_node(j);
    const Domain from = spec.sequence[d].domain;
    const Domain to = spec.sequence[d + 1].domain;
    if (!(from == Domain::SspLeft || from == Domain::SspRight) || to != Domain::Flight)
      throw std::invalid_argument("transcription: only SSP->FLT switches are supported");
    const rbd::Foot stance = rbd::stance_foot(from);

    // Take-off guard: vertical contact force reaches zero.
    {
      std::vector<int> vars = state_vars(lay, j);
      append_range(vars, lay.u_off(j), kNumActuators);
      nlp.blocks.push_back(make_block(
          "guard_takeoff", Block::Kind::Equality, std::move(vars), 1,
          [model, stance](const auto& in, auto& out) {
            using T = typename std::decay_t<decltype(in)>::Scalar;
            const auto x = unpack_state(in, 0);
            Vec4<T> u;
            for (int i = 0; i < kNumActuators; ++i) u[i] = in[kStateDim + i];
            const auto acc = rbd::constrained_fwd_dynamics(model, x, u, {stance});
            out[0] = acc.forces[1];
          },
          1e-2));
    }
    // Identity reset across the switch.
    {
      std::vector<int> vars = state_vars(lay, j);
      append_range(vars, lay.x_off(j + 1), kStateDim);
      nlp.blocks.push_back(make_block("reset", Block::Kind::Equality, std::move(vars), kStateDim,
                                      [](const auto& in, auto& out) {
                                        for (int i = 0; i < kStateDim; ++i)
                                          out[i] = in[i] - in[kStateDim + i];
                                      }));
    }
  }

  // ---- Bezier output fitting at every node (position level) ----
  for (int k = 0; k < n_nodes; ++k) {
    const int d = lay.domain_of_node(k);
    const Domain dom = spec.sequence[d].domain;
    const int n_out = rbd::output_dim(dom);
    const double s = lay.node_phase(k);
    std::vector<int> vars;
    append_range(vars, lay.x_off(k), kNumCoords);  // q only
    for (int i = 0; i < n_out; ++i) append_range(vars, lay.alpha_off(d, i), deg + 1);
    nlp.blocks.push_back(make_block(
        "fit", Block::Kind::Equality, std::move(vars), n_out,
        [model, dom, s, n_out, deg](const auto& in, auto& out) {
          using T = typename std::decay_t<decltype(in)>::Scalar;
          rbd::GenStateT<T> x;
          for (int i = 0; i < kNumCoords; ++i) x.q[i] = in[i];
          x.v.setZero();
          const auto y = rbd::outputs(model, x, dom, rbd::Foot::Left);
          for (int i = 0; i < n_out; ++i) {
            VecX<T> row(deg + 1);
            for (int c = 0; c <= deg; ++c) row[c] = in[kNumCoords + i * (deg + 1) + c];
            out[i] = y.y[i] - bezier_eval(row, s).value;
          }
        }));
  }

  // ---- Friction cone and unilateral force at stance nodes ----
  for (int k = 0; k < n_nodes; ++k) {
    const Domain dom = spec.sequence[lay.domain_of_node(k)].domain;
    if (dom == Domain::Flight) continue;
    const rbd::ContactSet contacts = hybrid::contact_set(dom);
    const double mu = task.mu;
    std::vector<int> vars = state_vars(lay, k);
    append_range(vars, lay.u_off(k), kNumActuators);
    nlp.blocks.push_back(make_block(
        "friction", Block::Kind::Inequality, std::move(vars), 3 * contacts.size(),
        [model, contacts, mu](const auto& in, auto& out) {
          using T = typename std::decay_t<decltype(in)>::Scalar;
          const auto x = unpack_state(in, 0);
          Vec4<T> u;
          for (int i = 0; i < kNumActuators; ++i) u[i] = in[kStateDim + i];
          const auto acc = rbd::constrained_fwd_dynamics(model, x, u, contacts);
          for (int c = 0; c < contacts.size(); ++c) {
            const T fx = acc.forces[2 * c], fz = acc.forces[2 * c + 1];
            out[3 * c + 0] = -fz;
            out[3 * c + 1] = fx - T(mu) * fz;
            out[3 * c + 2] = -fx - T(mu) * fz;
          }
        },
        1e-2));
  }

  // ---- Objective residual rows: sum |u|^2 dt + w_post |q - q_nom|^2 ----
  for (int k = 0; k < n_nodes; ++k) {
    const int d = lay.domain_of_node(k);
    const double inv_intervals = 1.0 / (lay.nodes_in_domain(d) - 1);
    const double w_eff = task.w_effort;
    std::vector<int> vars;
    append_range(vars, lay.u_off(k), kNumActuators);
    vars.push_back(lay.t_off(d));
    nlp.blocks.push_back(make_block(
        "obj_effort", Block::Kind::Objective, std::move(vars), kNumActuators,
        [w_eff, inv_intervals](const auto& in, auto& out) {
          using T = typename std::decay_t<decltype(in)>::Scalar;
          using stride::ad::sqrt;
          using std::sqrt;
          const T scale = sqrt(T(w_eff * inv_intervals) * in[kNumActuators]);
          for (int j = 0; j < kNumActuators; ++j) out[j] = scale * in[j];
        }));

    const Vec7d q_nom = tr.q_nominal;
    const double w_sqrt = std::sqrt(task.w_posture);
    std::vector<int> qvars;
    append_range(qvars, lay.x_off(k) + 1, kNumCoords - 1);  // base x rides the gait
    nlp.blocks.push_back(
        make_block("obj_posture", Block::Kind::Objective, std::move(qvars), kNumCoords - 1,
                   [w_sqrt, q_nom](const auto& in, auto& out) {
                     using T = typename std::decay_t<decltype(in)>::Scalar;
                     for (int i = 1; i < kNumCoords; ++i)
                       out[i - 1] = T(w_sqrt) * (in[i - 1] - T(q_nom[i]));
                   }));
  }

  const int last = n_nodes - 1;

  if (running) {
    // ---- Stance-foot frame pin at node 0 ----
    {
      std::vector<int> vars;
      append_range(vars, lay.x_off(0), kNumCoords);
      nlp.blocks.push_back(make_block(
          "pin_stance", Block::Kind::Equality, std::move(vars), 2,
          [model](const auto& in, auto& out) {
            using T = typename std::decay_t<decltype(in)>::Scalar;
            Vec7<T> q;
            for (int i = 0; i < kNumCoords; ++i) q[i] = in[i];
            const Vec2<T> p = rbd::foot_position(model, q, rbd::Foot::Left);
            out[0] = p[0];
            out[1] = p[1];
          }));
    }
    // ---- Terminal touchdown guard: landing foot height reaches zero ----
    {
      std::vector<int> vars;
      append_range(vars, lay.x_off(last), kNumCoords);
      nlp.blocks.push_back(make_block(
          "guard_touchdown", Block::Kind::Equality, std::move(vars), 1,
          [model](const auto& in, auto& out) {
            using T = typename std::decay_t<decltype(in)>::Scalar;
            Vec7<T> q;
            for (int i = 0; i < kNumCoords; ++i) q[i] = in[i];
            out[0] = rbd::foot_position(model, q, rbd::Foot::Right)[1];
          },
          1e-2));
    }
    // ---- Touchdown must be a descending crossing ----
    {
      const double vmin = task.touchdown_speed_min;
      std::vector<int> vars = state_vars(lay, last);
      nlp.blocks.push_back(make_block(
          "touchdown_speed", Block::Kind::Inequality, std::move(vars), 1,
          [model, vmin](const auto& in, auto& out) {
            using T = typename std::decay_t<decltype(in)>::Scalar;
            const auto x = unpack_state(in, 0);
            const auto k = rbd::evaluate_kinematics(model, x.q, x.v);
            const auto& fp = rbd::foot_point(k, rbd::Foot::Right);
            out[0] = fp.jac.row(1).dot(x.v) + T(vmin);  // zdot <= -vmin
          },
          1e-2));
    }
    // ---- Periodicity: impact + leg remap + frame shift back to node 0 ----
    {
      std::vector<int> vars = state_vars(lay, last);
      for (int i : state_vars(lay, 0)) vars.push_back(i);
      vars.push_back(lay.step_off());
      nlp.blocks.push_back(make_block(
          "periodicity", Block::Kind::Equality, std::move(vars), kStateDim,
          [model](const auto& in, auto& out) {
            using T = typename std::decay_t<decltype(in)>::Scalar;
            auto x_end = unpack_state(in, 0);
            const auto post = symmetry_remap(rbd::impact_map(model, x_end, rbd::Foot::Right));
            const T step = in[2 * kStateDim];
            for (int i = 0; i < kNumCoords; ++i) {
              T dq = post.q[i] - in[kStateDim + i];
              if (i == 0) dq -= step;  // new stance frame sits one step ahead
              out[i] = dq;
              out[kNumCoords + i] = post.v[i] - in[kStateDim + kNumCoords + i];
            }
          }));
    }
    // ---- Impact invariance: post-reset outputs ride the Bezier at phase 0 ----
    {
      const int n_out = rbd::output_dim(Domain::SspLeft);
      std::vector<int> vars = state_vars(lay, last);
      for (int i = 0; i < n_out; ++i) append_range(vars, lay.alpha_off(0, i), deg + 1);
      vars.push_back(lay.t_off(0));
      nlp.blocks.push_back(make_block(
          "impact_invariance", Block::Kind::Equality, std::move(vars), 2 * n_out,
          [model, n_out, deg](const auto& in, auto& out) {
            using T = typename std::decay_t<decltype(in)>::Scalar;
            const auto x_end = unpack_state(in, 0);
            const auto post = symmetry_remap(rbd::impact_map(model, x_end, rbd::Foot::Right));
            const auto y = rbd::outputs(model, post, Domain::SspLeft);
            const T t_ssp = in[kStateDim + n_out * (deg + 1)];
            for (int i = 0; i < n_out; ++i) {
              VecX<T> row(deg + 1);
              for (int c = 0; c <= deg; ++c) row[c] = in[kStateDim + i * (deg + 1) + c];
              const auto b = bezier_eval(row, 0.0);
              out[2 * i] = y.y[i] - b.value;
              out[2 * i + 1] = y.ydot[i] - b.d1 / t_ssp;
            }
          }));
    }
    // ---- Step length ties the landing point; speed ties step to time ----
    {
      std::vector<int> vars;
      append_range(vars, lay.x_off(last), kNumCoords);
      vars.push_back(lay.step_off());
      nlp.blocks.push_back(make_block(
          "step_length", Block::Kind::Equality, std::move(vars), 1,
          [model](const auto& in, auto& out) {
            using T = typename std::decay_t<decltype(in)>::Scalar;
            Vec7<T> q;
            for (int i = 0; i < kNumCoords; ++i) q[i] = in[i];
            out[0] = rbd::foot_position(model, q, rbd::Foot::Right)[0] - in[kNumCoords];
          }));
    }
    {
      const double speed = task.speed;
      std::vector<int> vars = {lay.step_off(), lay.t_off(0), lay.t_off(1)};
      nlp.blocks.push_back(make_block(
          "speed", Block::Kind::Equality, std::move(vars), 1,
          [speed](const auto& in, auto& out) {
            using T = typename std::decay_t<decltype(in)>::Scalar;
            out[0] = in[0] - T(speed) * (in[1] + in[2]);
          },
          1e-3));
    }
    // ---- Swing-foot clearance at interior nodes ----
    for (int k = 1; k < last; ++k) {
      const double floor = task.clearance_min;
      std::vector<int> vars;
      append_range(vars, lay.x_off(k), kNumCoords);
      nlp.blocks.push_back(make_block(
          "clearance", Block::Kind::Inequality, std::move(vars), 1,
          [model, floor](const auto& in, auto& out) {
            using T = typename std::decay_t<decltype(in)>::Scalar;
            Vec7<T> q;
            for (int i = 0; i < kNumCoords; ++i) q[i] = in[i];
            out[0] = T(floor) - rbd::foot_position(model, q, rbd::Foot::Right)[1];
          },
          1e-2));
    }
  } else {
    // ---- Standing (DSP-only): static periodic pose ----
    // Feet pinned at +-stance_width/2 at node 0.
    {
      const double w = task.stance_width;
      std::vector<int> vars;
      append_range(vars, lay.x_off(0), kNumCoords);
      nlp.blocks.push_back(make_block(
          "pin_feet", Block::Kind::Equality, std::move(vars), 4,
          [model, w](const auto& in, auto& out) {
            using T = typename std::decay_t<decltype(in)>::Scalar;
            Vec7<T> q;
            for (int i = 0; i < kNumCoords; ++i) q[i] = in[i];
            const Vec2<T> pl = rbd::foot_position(model, q, rbd::Foot::Left);
            const Vec2<T> pr = rbd::foot_position(model, q, rbd::Foot::Right);
            out[0] = pl[0] + T(w / 2);
            out[1] = pl[1];
            out[2] = pr[0] - T(w / 2);
            out[3] = pr[1];
          }));
    }
    // Rest at node 0; exact periodicity over the window.
    {
      std::vector<int> vars;
      append_range(vars, lay.x_off(0) + kNumCoords, kNumCoords);
      nlp.blocks.push_back(make_block("rest", Block::Kind::Equality, std::move(vars), kNumCoords,
                                      [](const auto& in, auto& out) {
                                        for (int i = 0; i < kNumCoords; ++i) out[i] = in[i];
                                      }));
    }
    {
      std::vector<int> vars = state_vars(lay, last);
      for (int i : state_vars(lay, 0)) vars.push_back(i);
      nlp.blocks.push_back(make_block("periodicity", Block::Kind::Equality, std::move(vars),
                                      kStateDim, [](const auto& in, auto& out) {
                                        for (int i = 0; i < kStateDim; ++i)
                                          out[i] = in[i] - in[kStateDim + i];
                                      }));
    }
  }

  nlp.init = initial_guess(model, tr);
  nlp.check();
  return tr;
}

VecXd initial_guess(const rbd::RobotModel& model, const Transcription& tr) {
  const Layout& lay = tr.layout;
  const TranscriptionSpec& spec = tr.spec;
  const GaitTask& task = tr.task;
  VecXd z = VecXd::Zero(lay.size());

  const int n_nodes = lay.num_nodes();
  std::vector<double> t_at_node(n_nodes);
  std::vector<double> durations;
  for (size_t d = 0; d < spec.sequence.size(); ++d) {
    double t0 = 0;
    for (size_t e = 0; e < d; ++e) t0 += durations[e];
    double dur = task.standing_duration;
    if (spec.sequence[d].domain == Domain::SspLeft || spec.sequence[d].domain == Domain::SspRight)
      dur = task.t_ssp_init;
    if (spec.sequence[d].domain == Domain::Flight) dur = task.t_flt_init;
    if (task.frozen_durations) dur = (*task.frozen_durations)[d];
    durations.push_back(dur);
  }
  {
    int k = 0;
    double t0 = 0;
    for (size_t d = 0; d < spec.sequence.size(); ++d) {
      const int nodes = spec.sequence[d].nodes;
      for (int i = 0; i < nodes; ++i, ++k)
        t_at_node[k] = t0 + durations[d] * i / (nodes - 1);
      t0 += durations[d];
    }
  }
  const double t_total = t_at_node.back();

  auto pose_at = [&](double t) {
    Vec7d q;
    if (!spec.half_gait_symmetry) {
      q << 0.0, task.base_height, 0.0, 0.0, 0.0, 0.0, 0.0;
      const auto [lh, lk] =
          leg_ik(model, Vec2d(0, task.base_height), Vec2d(-task.stance_width / 2, 0), 0.0);
      const auto [rh, rk] =
          leg_ik(model, Vec2d(0, task.base_height), Vec2d(task.stance_width / 2, 0), 0.0);
      q[3] = lh;
      q[4] = lk;
      q[5] = rh;
      q[6] = rk;
      return q;
    }
    const double step = task.speed * t_total;
    const double s_tot = t / t_total;
    const double t_ssp = durations[0];
    const Vec2d hip(task.speed * t - 0.35 * step, task.base_height - 0.02 * std::sin(M_PI * s_tot));
    // Stance foot holds the origin through SSP then lifts gently.
    Vec2d stance(0.0, 0.0);
    if (t > t_ssp) stance[1] = 0.04 * (t - t_ssp) / std::max(1e-9, t_total - t_ssp);
    const Vec2d swing((2 * s_tot - 1) * step, 0.08 * std::sin(M_PI * s_tot));
    q << hip[0], hip[1], 0.0, 0.0, 0.0, 0.0, 0.0;
    const auto [lh, lk] = leg_ik(model, hip, stance, 0.0);
    const auto [rh, rk] = leg_ik(model, hip, swing, 0.0);
    q[3] = lh;
    q[4] = lk;
    q[5] = rh;
    q[6] = rk;
    return q;
  };

  // States: kinematic arc; velocities by central differences in node time.
  for (int k = 0; k < n_nodes; ++k) {
    const Vec7d q = pose_at(t_at_node[k]);
    const double h = 1e-5;
    const Vec7d qp = pose_at(std::min(t_total, t_at_node[k] + h));
    const Vec7d qm = pose_at(std::max(0.0, t_at_node[k] - h));
    const Vec7d v = (qp - qm) / (std::min(t_total, t_at_node[k] + h) - std::max(0.0, t_at_node[k] - h));
    for (int i = 0; i < kNumCoords; ++i) {
      z[lay.x_off(k) + i] = q[i];
      z[lay.x_off(k) + kNumCoords + i] = spec.half_gait_symmetry ? v[i] : 0.0;
    }
  }
  for (size_t d = 0; d < spec.sequence.size(); ++d) z[lay.t_off(d)] = durations[d];
  if (spec.half_gait_symmetry) z[lay.step_off()] = task.speed * t_total;

  // Torques by inverse dynamics along the arc (least squares over u and F),
  // so the initial dynamics defects start small.
  for (int k = 0; k < n_nodes; ++k) {
    const int d = lay.domain_of_node(k);
    const Domain dom = spec.sequence[d].domain;
    const rbd::ContactSet contacts = hybrid::contact_set(dom);
    rbd::GenState xk;
    for (int i = 0; i < kNumCoords; ++i) {
      xk.q[i] = z[lay.x_off(k) + i];
      xk.v[i] = z[lay.x_off(k) + kNumCoords + i];
    }
    Vec7d accel = Vec7d::Zero();
    if (k + 1 < n_nodes && lay.domain_of_node(k + 1) == d) {
      const double dt = durations[d] / (spec.sequence[d].nodes - 1);
      for (int i = 0; i < kNumCoords; ++i)
        accel[i] = (z[lay.x_off(k + 1) + kNumCoords + i] - xk.v[i]) / dt;
    }
    const Mat77d mass = rbd::mass_matrix(model, xk.q);
    const Vec7d bias = rbd::bias_forces(model, xk.q, xk.v);
    const int h = contacts.total_dim();
    MatXd a(kNumCoords, kNumActuators + h);
    a.leftCols(kNumActuators) = model.actuation_matrix();
    for (int c = 0; c < contacts.size(); ++c) {
      const auto [jac, drift] = rbd::contact_jacobian(model, xk.q, xk.v, contacts[c].foot);
      (void)drift;
      a.middleCols(kNumActuators + 2 * c, 2) = jac.transpose();
    }
    const VecXd sol = a.colPivHouseholderQr().solve((mass * accel + bias).eval());
    for (int j = 0; j < kNumActuators; ++j) {
      z[lay.u_off(k) + j] = std::clamp(sol[j], -model.tau_lim[j], model.tau_lim[j]);
    }
  }

  // Bezier rows: least-squares fit of the arc's outputs.
  for (int d = 0; d < lay.num_domains(); ++d) {
    const Domain dom = spec.sequence[d].domain;
    const int n_out = rbd::output_dim(dom);
    std::vector<int> nodes;
    for (int k = 0; k < n_nodes; ++k)
      if (lay.domain_of_node(k) == d) nodes.push_back(k);
    VecXd s_samples(nodes.size());
    MatXd y_samples(nodes.size(), n_out);
    for (size_t i = 0; i < nodes.size(); ++i) {
      s_samples[i] = lay.node_phase(nodes[i]);
      rbd::GenState x;
      for (int c = 0; c < kNumCoords; ++c) x.q[c] = z[lay.x_off(nodes[i]) + c];
      const auto y = rbd::outputs(model, x, dom, rbd::Foot::Left);
      y_samples.row(i) = y.y.transpose();
    }
    for (int i = 0; i < n_out; ++i) {
      const VecXd coeffs = bezier_fit(s_samples, y_samples.col(i), lay.degree());
      for (int c = 0; c <= lay.degree(); ++c) z[lay.alpha_off(d, i) + c] = coeffs[c];
    }
  }
  return z;
}

}  // namespace stride::trajopt
