#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "stride/ad/dual.hpp"
#include "stride/common.hpp"

namespace stride::trajopt {

using ad::Dual;

/// One objective term or constraint block: a small dense function of a subset
/// of the decision variables. Blocks keep their local input dimension at or
/// below ad::kMaxDeriv so one forward-mode pass yields the full local
/// Jacobian. Residual rows of distinct blocks occupy disjoint slices of the
/// global residual vector.
struct Block {
  enum class Kind {
    Objective,  // out_dim residual rows r; the objective adds |r|^2
    Equality,   // c(x) = 0
    Inequality  // g(x) <= 0
  };

  std::string name;       // category prefix used for residual reporting
  Kind kind;
  std::vector<int> vars;  // global indices of the block's inputs
  int out_dim = 0;
  // Relative tolerance of this block's rows: the block counts as feasible
  // when its violation is <= tol_feas * tol_factor (guards and cone rows use
  // 1e-2, the speed coupling 1e-3).
  double tol_factor = 1.0;

  std::function<void(const VecXd&, VecXd&)> eval_d;
  std::function<void(const VecX<Dual>&, VecX<Dual>&)> eval_ad;

  /// Local Jacobian (out_dim x vars.size()) and value by one seeded pass.
  void jacobian(const VecXd& local_in, VecXd& value, MatXd& jac) const;
};

/// Registers `f` (a generic lambda usable with double and Dual vectors) under
/// both scalar types.
template <typename F>
Block make_block(std::string name, Block::Kind kind, std::vector<int> vars, int out_dim, F f,
                 double tol_factor = 1.0) {
  Block b;
  b.name = std::move(name);
  b.kind = kind;
  b.vars = std::move(vars);
  b.out_dim = out_dim;
  b.tol_factor = tol_factor;
  if (static_cast<int>(b.vars.size()) > ad::kMaxDeriv)
    throw std::invalid_argument("block " + b.name + " exceeds the AD seed capacity");
  b.eval_d = [f](const VecXd& in, VecXd& out) { f(in, out); };
  b.eval_ad = [f](const VecX<Dual>& in, VecX<Dual>& out) { f(in, out); };
  return b;
}

/// Sparse nonlinear program: box-bounded variables, an objective assembled
/// from blocks, equality blocks, and inequality blocks (g <= 0).
struct NlpProblem {
  int n = 0;
  VecXd lower, upper;  // box bounds, +-inf allowed
  VecXd init;
  std::vector<Block> blocks;

  struct Tally {
    int objective_terms = 0;
    int equality_rows = 0;
    int inequality_rows = 0;
  };
  Tally tally() const {
    Tally t;
    for (const Block& b : blocks) {
      switch (b.kind) {
        case Block::Kind::Objective: t.objective_terms += b.out_dim; break;
        case Block::Kind::Equality: t.equality_rows += b.out_dim; break;
        case Block::Kind::Inequality: t.inequality_rows += b.out_dim; break;
      }
    }
    return t;
  }

  void check() const;

  /// Objective value at x.
  double objective(const VecXd& x) const;

  /// Stacked equality then inequality residuals at x (blocks in order).
  VecXd constraints(const VecXd& x) const;

  /// Max-norm violation: |c| for equalities, max(0, g) for inequalities.
  double max_violation(const VecXd& x) const;

  /// Max over blocks of violation / tol_factor; feasible when <= tol.
  double scaled_violation(const VecXd& x) const;

  /// Per-category (block-name prefix) max violation, for residual reports.
  std::map<std::string, double> violations_by_name(const VecXd& x) const;

  VecXd gather(const VecXd& x, const std::vector<int>& vars) const {
    VecXd local(vars.size());
    for (size_t i = 0; i < vars.size(); ++i) local[i] = x[vars[i]];
    return local;
  }
};

enum class SolveStatus { Converged, MaxIterations, Diverged };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::Diverged: return "diverged";
  }
  return "?";
}

struct SolveOptions {
  double tol_feas = 1e-6;   // max constraint violation at exit (guard and
                            // cone rows are scaled 100x tighter, speed 1000x)
  double tol_opt = 1e-4;    // projected-gradient norm of the augmented Lagrangian
  int max_outer = 150;
  int max_inner = 300;      // Gauss-Newton iterations per outer solve
  double mu0 = 100.0;
  double mu_factor = 10.0;
  double mu_max = 1e8;
  bool verbose = false;
};

struct NlpSolution {
  VecXd x;
  VecXd multipliers;                        // one per equality/slacked row
  std::map<std::string, double> residuals;  // per block-name max violation
  double objective = 0;
  double max_violation = 0;
  int inner_iterations = 0;
  int outer_iterations = 0;
  SolveStatus status = SolveStatus::MaxIterations;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// Augmented-Lagrangian method of multipliers. Inequalities enter through the
/// squared-slack conversion with the slack minimized in closed form per
/// evaluation, which reduces to the familiar max(0, lambda/mu + g) shifted
/// penalty. Inner iterations are projected Levenberg-Marquardt steps on the
/// augmented Lagrangian: the Gauss-Newton Hessian is assembled from the same
/// forward-mode block Jacobians that feed the gradient, and box bounds are
/// handled by projection with a backtracking line search. Never reports
/// convergence with residuals above tolerance. Deterministic for identical
/// inputs.
NlpSolution solve(const NlpProblem& problem, const VecXd& init, const SolveOptions& opts = {});

}  // namespace stride::trajopt
