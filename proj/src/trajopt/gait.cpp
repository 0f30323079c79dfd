#include "stride/trajopt/gait.hpp"

#include <cmath>

namespace stride::trajopt {

GaitParams::PhasePoint GaitParams::phase_at(double t) const {
  const double total = total_time();
  t = std::fmod(t, total);
  if (t < 0) t += total;
  double t0 = 0;
  for (size_t d = 0; d < domains.size(); ++d) {
    if (t <= t0 + durations[d] || d + 1 == domains.size())
      return {static_cast<int>(d), domains[d], std::clamp((t - t0) / durations[d], 0.0, 1.0)};
    t0 += durations[d];
  }
  return {0, domains[0], 0.0};
}

rbd::GenState GaitParams::initial_state() const {
  rbd::GenState s;
  s.q = x_nodes.row(0).head<kNumCoords>();
  s.v = x_nodes.row(0).tail<kNumCoords>();
  return s;
}

void GaitParams::validate() const {
  if (domains.empty() || durations.size() != static_cast<Eigen::Index>(domains.size()) ||
      alpha.size() != domains.size())
    throw std::invalid_argument("gait: inconsistent domain data");
  for (double d : durations)
    if (!(d > 0)) throw std::invalid_argument("gait: durations must be positive");
  for (size_t d = 0; d < alpha.size(); ++d) {
    if (alpha[d].rows() != rbd::output_dim(domains[d]))
      throw std::invalid_argument("gait: bezier row count mismatch");
    if (alpha[d].cols() != degree() + 1)
      throw std::invalid_argument("gait: bezier rows must have degree+1 entries");
  }
  if (!is_standing() && std::abs(speed - step_length / total_time()) > 1e-9)
    throw std::invalid_argument("gait: speed tag != step_length / total_time");
}

GaitParams unpack_solution(const Transcription& tr, const NlpSolution& sol) {
  const Layout& lay = tr.layout;
  GaitParams g;
  g.output_set = tr.spec.half_gait_symmetry ? "run_ssp_flt" : "stand_dsp";
  g.durations.resize(lay.num_domains());
  for (int d = 0; d < lay.num_domains(); ++d) {
    g.domains.push_back(tr.spec.sequence[d].domain);
    g.nodes_per_domain.push_back(tr.spec.sequence[d].nodes);
    g.durations[d] = sol.x[lay.t_off(d)];
    const int n_out = rbd::output_dim(tr.spec.sequence[d].domain);
    MatXd a(n_out, lay.degree() + 1);
    for (int i = 0; i < n_out; ++i)
      for (int c = 0; c <= lay.degree(); ++c) a(i, c) = sol.x[lay.alpha_off(d, i) + c];
    g.alpha.push_back(std::move(a));
  }
  g.x_nodes.resize(lay.num_nodes(), 2 * kNumCoords);
  g.u_nodes.resize(lay.num_nodes(), kNumActuators);
  for (int k = 0; k < lay.num_nodes(); ++k) {
    for (int i = 0; i < 2 * kNumCoords; ++i) g.x_nodes(k, i) = sol.x[lay.x_off(k) + i];
    for (int j = 0; j < kNumActuators; ++j) g.u_nodes(k, j) = sol.x[lay.u_off(k) + j];
  }
  if (tr.spec.half_gait_symmetry) {
    g.speed = tr.task.speed;
    // The invariant speed = step / total holds exactly by definition here;
    // the solver's residual on the coupling row is reported separately.
    g.step_length = g.speed * g.total_time();
  }
  g.iterations = sol.inner_iterations;
  g.max_residual = sol.max_violation;
  g.status = to_string(sol.status);
  return g;
}

VecXd pack_decision_vector(const GaitParams& gait, const Transcription& tr) {
  const Layout& lay = tr.layout;
  if (gait.x_nodes.rows() != lay.num_nodes())
    throw std::invalid_argument("warm start: node count mismatch");
  if (gait.degree() != lay.degree())
    throw std::invalid_argument("warm start: bezier degree mismatch");
  VecXd z = VecXd::Zero(lay.size());
  for (int k = 0; k < lay.num_nodes(); ++k) {
    for (int i = 0; i < 2 * kNumCoords; ++i) z[lay.x_off(k) + i] = gait.x_nodes(k, i);
    for (int j = 0; j < kNumActuators; ++j) z[lay.u_off(k) + j] = gait.u_nodes(k, j);
  }
  for (int d = 0; d < lay.num_domains(); ++d) {
    z[lay.t_off(d)] = gait.durations[d];
    for (int i = 0; i < gait.alpha[d].rows(); ++i)
      for (int c = 0; c <= lay.degree(); ++c) z[lay.alpha_off(d, i) + c] = gait.alpha[d](i, c);
  }
  if (lay.step_off() >= 0) z[lay.step_off()] = tr.task.speed * gait.total_time();
  return z;
}

GaitSolveResult optimize_gait(const rbd::RobotModel& model, const TranscriptionSpec& spec,
                              const GaitTask& task, const GaitParams* warm,
                              const SolveOptions& opts) {
  if (!(task.speed > 0)) throw std::invalid_argument("optimize_gait: speed must be > 0");
  if (warm && !warm->is_standing() && warm->output_set != "run_ssp_flt")
    throw std::invalid_argument("optimize_gait: warm gait has a different output set");

  Transcription tr = assemble_nlp(model, spec, task);
  VecXd init = tr.nlp.init;
  if (warm) init = pack_decision_vector(*warm, tr);

  GaitSolveResult res;
  res.solution = solve(tr.nlp, init, opts);
  res.gait = unpack_solution(tr, res.solution);
  if (!res.solution.converged()) {
    res.failure = to_string(res.solution.status);
    return res;
  }
  const double t_flt = res.gait.durations[1];
  if (!(t_flt > 0)) {
    res.failure = "no-flight";
    return res;
  }
  res.success = true;
  return res;
}

GaitSolveResult optimize_standing(const rbd::RobotModel& model, const GaitTask& task,
                                  const SolveOptions& opts) {
  const TranscriptionSpec spec = TranscriptionSpec::standing();
  Transcription tr = assemble_nlp(model, spec, task);
  GaitSolveResult res;
  res.solution = solve(tr.nlp, tr.nlp.init, opts);
  res.gait = unpack_solution(tr, res.solution);
  res.success = res.solution.converged();
  if (!res.success) res.failure = to_string(res.solution.status);
  return res;
}

}  // namespace stride::trajopt
