#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stride/hybrid/domain.hpp"
#include "stride/hybrid/integrate.hpp"
#include "stride/rbd/outputs.hpp"
#include "stride/trajopt/nlp.hpp"

namespace stride::trajopt {

/// One RK4 step of the domain's constrained dynamics (AD-transparent; same
/// code path as the simulator's physics stepper).
template <typename T>
rbd::GenStateT<T> discretize_step(const rbd::RobotModel& m, Domain domain,
                                  const rbd::GenStateT<T>& x, const Vec4<T>& u, const T& dt) {
  return hybrid::rk4_constrained(m, x, u, hybrid::contact_set(domain), dt);
}

/// Half-gait leg relabel: swaps left/right joint coordinates and velocities.
/// An exact involution; the base-x frame shift that accompanies it in the
/// periodicity constraint is applied by the constraint itself so the map
/// stays involutive on arbitrary states.
template <typename T>
rbd::GenStateT<T> symmetry_remap(const rbd::GenStateT<T>& s) {
  rbd::GenStateT<T> out = s;
  out.q[3] = s.q[5];
  out.q[4] = s.q[6];
  out.q[5] = s.q[3];
  out.q[6] = s.q[4];
  out.v[3] = s.v[5];
  out.v[4] = s.v[6];
  out.v[5] = s.v[3];
  out.v[6] = s.v[4];
  return out;
}

/// Planar two-link leg inverse kinematics: joint angles placing the point
/// foot at `foot` for a hip at `hip` and torso pitch `pitch`. Knees bend
/// backward (negative knee angle). Throws when the target is out of reach.
std::pair<double, double> leg_ik(const rbd::RobotModel& m, const Vec2d& hip, const Vec2d& foot,
                                 double pitch);

/// Fixed domain sequence with per-domain node counts. Switch nodes (the set
/// J) sit at the last node of every non-terminal domain; each carries the
/// registered guard/reset pair of the (from, to) transition.
struct TranscriptionSpec {
  struct Phase {
    Domain domain;
    int nodes;
  };
  std::vector<Phase> sequence;
  bool half_gait_symmetry = false;  // running: remap + impact close the orbit
  int bezier_degree = 7;

  int total_nodes() const {
    int n = 0;
    for (const Phase& p : sequence) n += p.nodes;
    return n;
  }
  /// Indices of the pre-switch nodes (set J), strictly inside [1, N-1].
  std::vector<int> switch_nodes() const {
    std::vector<int> idx;
    int at = 0;
    for (size_t d = 0; d + 1 < sequence.size(); ++d) {
      at += sequence[d].nodes;
      idx.push_back(at - 1);
    }
    return idx;
  }
  void validate() const;

  static TranscriptionSpec running(int ssp_nodes = 12, int flt_nodes = 6) {
    return {{{Domain::SspLeft, ssp_nodes}, {Domain::Flight, flt_nodes}}, true, 7};
  }
  static TranscriptionSpec standing(int nodes = 4) {
    return {{{Domain::Dsp, nodes}}, false, 7};
  }
};

/// Flat decision-vector layout (documented for warm starting):
///   [ x_0 .. x_{N-1} | u_0 .. u_{N-1} | T_0 .. T_{D-1} | alpha rows | L ]
/// with x_k = (q, v) of width 14, u_k of width 4, one duration per domain,
/// one Bezier row of (degree+1) coefficients per domain per output, and the
/// step length L present only for half-gait problems.
class Layout {
 public:
  explicit Layout(const TranscriptionSpec& spec);

  int x_off(int k) const { return k * 2 * kNumCoords; }
  int u_off(int k) const { return n_nodes_ * 2 * kNumCoords + k * kNumActuators; }
  int t_off(int d) const { return u_base_end_ + d; }
  int alpha_off(int domain_idx, int output_idx) const {
    return alpha_base_ + alpha_row_off_[domain_idx] + output_idx * (degree_ + 1);
  }
  int step_off() const { return step_off_; }  // -1 when absent
  int size() const { return size_; }

  int num_nodes() const { return n_nodes_; }
  int num_domains() const { return static_cast<int>(domain_nodes_.size()); }
  int domain_of_node(int k) const;                // index into the sequence
  int node_in_domain(int k) const;                // local node index
  double node_phase(int k) const;                 // s in [0, 1] inside its domain
  int nodes_in_domain(int d) const { return domain_nodes_[d]; }
  int degree() const { return degree_; }

 private:
  std::vector<int> domain_nodes_;
  std::vector<int> alpha_row_off_;
  std::vector<int> outputs_per_domain_;
  int n_nodes_ = 0;
  int u_base_end_ = 0;
  int alpha_base_ = 0;
  int step_off_ = -1;
  int size_ = 0;
  int degree_ = 7;
};

/// Task data for one gait solve.
struct GaitTask {
  double speed = 1.5;           // v-bar (m/s); ignored for standing
  double mu = 0.8;              // friction cone
  double min_flight = 0.04;     // s, lower bound on the flight duration
  double t_ssp_init = 0.28;     // initial SSP duration
  double t_flt_init = 0.08;
  std::optional<Vec2d> frozen_durations;  // library entries keep T fixed
  double clearance_min = 0.0;   // swing-foot height floor at interior nodes
  double touchdown_speed_min = 0.05;  // required downward foot speed at impact
  double w_effort = 1.0;        // objective: sum |u|^2 dt
  double w_posture = 0.1;       // + w |q - q_nominal|^2
  double base_height = 0.72;    // nominal standing/running base height
  double stance_width = 0.3;    // standing: distance between feet
  double standing_duration = 0.3;
};

/// Assembled problem plus the layout needed to unpack solutions.
struct Transcription {
  NlpProblem nlp;
  Layout layout;
  TranscriptionSpec spec;
  GaitTask task;
  Vec7d q_nominal;
};

/// Packs the full hybrid trajectory optimization: multiple-shooting defects
/// per domain, guard + reset rows at every switch node, Bezier output fitting
/// at every node, periodicity through impact + symmetry remap for half gaits,
/// the step-length/average-speed coupling, friction-cone and clearance
/// inequalities, and torque/joint box bounds.
///
/// Row tally (documented formula, N nodes, D domains, n_out outputs/domain,
/// half-gait running): equalities 14(N-D) defects + 14(D-1) resets + (D-1)
/// take-off guards + n_out N fits + [14 periodicity + 2 stance pin + 1
/// terminal guard + 1 step length + 1 speed + 2 n_out invariance when
/// half_gait]; inequalities 3 per SSP node + 1 clearance per interior node +
/// [1 touchdown velocity when half_gait].
Transcription assemble_nlp(const rbd::RobotModel& model, const TranscriptionSpec& spec,
                           const GaitTask& task);

/// Kinematic cold-start guess: crouch-extend arc over the stance leg with the
/// swing foot swept from -L to +L, velocities by finite differences, zero
/// torques, Bezier rows least-squares fitted to the arc's outputs.
VecXd initial_guess(const rbd::RobotModel& model, const Transcription& tr);

}  // namespace stride::trajopt
