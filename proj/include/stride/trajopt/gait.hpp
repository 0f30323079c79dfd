#pragma once

#include <string>
#include <vector>

#include "stride/trajopt/transcription.hpp"

namespace stride::trajopt {

/// One gait-library entry: per-domain, per-output Bezier rows, domain
/// durations, speed/step metadata, and the optimized node trajectory (kept
/// for warm starting, feedforward replay, and diagnostics).
struct GaitParams {
  std::string output_set;  // "run_ssp_flt" or "stand_dsp"
  double speed = 0;        // average-speed tag (m/s); 0 for standing
  double step_length = 0;  // m per half gait
  std::vector<Domain> domains;
  VecXd durations;              // per domain (s)
  std::vector<MatXd> alpha;     // per domain: outputs x (degree + 1)
  std::vector<int> nodes_per_domain;
  MatXd x_nodes;  // num_nodes x 14
  MatXd u_nodes;  // num_nodes x 4

  int iterations = 0;      // solver inner iterations
  double max_residual = 0;
  std::string status;

  double total_time() const { return durations.sum(); }
  int degree() const { return alpha.empty() ? 0 : static_cast<int>(alpha[0].cols()) - 1; }
  bool is_standing() const { return output_set == "stand_dsp"; }

  /// Scheduled domain + local phase s in [0,1] at time t within the half
  /// gait (t wraps).
  struct PhasePoint {
    int domain_index;
    Domain domain;
    double s;
  };
  PhasePoint phase_at(double t_in_halfgait) const;

  /// Periodic initial condition (node 0 of the optimized trajectory).
  rbd::GenState initial_state() const;

  void validate() const;
};

struct GaitSolveResult {
  GaitParams gait;
  NlpSolution solution;
  bool success = false;
  std::string failure;  // "no-flight", solver status, ...
};

/// Builds and solves the running NLP (SSP followed by FLT with a take-off
/// condition between them, impact map + leg remap closing the orbit). A warm
/// gait seeds the decision vector; otherwise the kinematic cold start is
/// used. The average speed enters as the step-length equality.
GaitSolveResult optimize_gait(const rbd::RobotModel& model, const TranscriptionSpec& spec,
                              const GaitTask& task, const GaitParams* warm = nullptr,
                              const SolveOptions& opts = {});

/// Standing pose via the DSP-only problem.
GaitSolveResult optimize_standing(const rbd::RobotModel& model, const GaitTask& task,
                                  const SolveOptions& opts = {});

/// Packs a gait back into a decision vector for warm starting (inverse of the
/// solution unpacking; requires a layout-compatible spec).
VecXd pack_decision_vector(const GaitParams& gait, const Transcription& tr);

GaitParams unpack_solution(const Transcription& tr, const NlpSolution& sol);

}  // namespace stride::trajopt
