#include <cmath>
#include <iostream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "stride/trajopt/nlp.hpp"

namespace stride::trajopt {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Augmented Lagrangian with analytically eliminated squared slacks: an
// inequality row g <= 0 with multiplier lam >= 0 contributes
// mu/2 max(0, lam/mu + g)^2 - lam^2/(2 mu), i.e. the slack s in g + s^2 = 0
// is minimized in closed form at every evaluation.
class AugLag {
 public:
  explicit AugLag(const NlpProblem& p) : p_(p) {
    for (const Block& b : p.blocks) {
      if (b.kind == Block::Kind::Objective) continue;
      rows_.push_back(&b);
      offsets_.push_back(n_rows_);
      n_rows_ += b.out_dim;
    }
    lambda_ = VecXd::Zero(n_rows_);
  }

  int n_rows() const { return n_rows_; }
  VecXd& lambda() { return lambda_; }
  const VecXd& lambda() const { return lambda_; }
  double& mu() { return mu_; }
  double mu() const { return mu_; }

  // Raw constraint values c(x)/g(x), block rows in order.
  VecXd constraint_vals(const VecXd& x) const {
    VecXd c(n_rows_);
    VecXd out;
    for (size_t i = 0; i < rows_.size(); ++i) {
      const Block& b = *rows_[i];
      out.resize(b.out_dim);
      b.eval_d(p_.gather(x, b.vars), out);
      c.segment(offsets_[i], b.out_dim) = out;
    }
    return c;
  }

  // Shifted residual entering the penalty: c + lam/mu for equalities,
  // max(0, g + lam/mu) for inequalities.
  double shifted(double raw, int row, bool inequality) const {
    const double t = raw + lambda_[row] / mu_;
    return inequality ? std::max(0.0, t) : t;
  }

  double value(const VecXd& x) const {
    double val = 0;
    VecXd out;
    for (const Block& b : p_.blocks) {
      if (b.kind != Block::Kind::Objective) continue;
      out.resize(b.out_dim);
      b.eval_d(p_.gather(x, b.vars), out);
      val += out.squaredNorm();
    }
    int at = 0;
    for (size_t i = 0; i < rows_.size(); ++i) {
      const Block& b = *rows_[i];
      out.resize(b.out_dim);
      b.eval_d(p_.gather(x, b.vars), out);
      for (int r = 0; r < b.out_dim; ++r, ++at) {
        const double t = shifted(out[r], at, b.kind == Block::Kind::Inequality);
        val += 0.5 * mu_ * t * t - 0.5 * lambda_[at] * lambda_[at] / mu_;
      }
    }
    (void)at;
    return val;
  }

  // One full AD pass: merit value, gradient, and the Gauss-Newton Hessian
  // 2 J_obj^T J_obj + mu J_act^T J_act as sparse triplets.
  double value_grad_hess(const VecXd& x, VecXd& grad, std::vector<Triplet>& hess) const {
    grad = VecXd::Zero(p_.n);
    hess.clear();
    double val = 0;
    VecXd cv;
    MatXd jac;
    auto add_outer = [&](const Block& b, const MatXd& j, int r, double w) {
      for (size_t a = 0; a < b.vars.size(); ++a) {
        const double ja = j(r, a);
        if (ja == 0.0) continue;
        for (size_t c = 0; c < b.vars.size(); ++c) {
          const double jc = j(r, c);
          if (jc == 0.0) continue;
          hess.emplace_back(b.vars[a], b.vars[c], w * ja * jc);
        }
      }
    };

    for (const Block& b : p_.blocks) {
      if (b.kind != Block::Kind::Objective) continue;
      b.jacobian(p_.gather(x, b.vars), cv, jac);
      val += cv.squaredNorm();
      for (int r = 0; r < b.out_dim; ++r) {
        for (size_t a = 0; a < b.vars.size(); ++a) grad[b.vars[a]] += 2.0 * cv[r] * jac(r, a);
        add_outer(b, jac, r, 2.0);
      }
    }
    int at = 0;
    for (size_t i = 0; i < rows_.size(); ++i) {
      const Block& b = *rows_[i];
      b.jacobian(p_.gather(x, b.vars), cv, jac);
      for (int r = 0; r < b.out_dim; ++r, ++at) {
        const bool ineq = b.kind == Block::Kind::Inequality;
        const double t = shifted(cv[r], at, ineq);
        val += 0.5 * mu_ * t * t - 0.5 * lambda_[at] * lambda_[at] / mu_;
        if (ineq && t <= 0.0) continue;  // inactive: slack absorbs the row
        const double w = mu_ * t;
        for (size_t a = 0; a < b.vars.size(); ++a) grad[b.vars[a]] += w * jac(r, a);
        add_outer(b, jac, r, mu_);
      }
    }
    return val;
  }

  bool is_inequality_row(int row) const {
    for (size_t i = 0; i < rows_.size(); ++i) {
      if (row < offsets_[i] + rows_[i]->out_dim)
        return rows_[i]->kind == Block::Kind::Inequality;
    }
    return false;
  }

  VecXd clamp(VecXd x) const {
    for (int i = 0; i < p_.n; ++i) x[i] = std::clamp(x[i], p_.lower[i], p_.upper[i]);
    return x;
  }

 private:
  const NlpProblem& p_;
  std::vector<const Block*> rows_;
  std::vector<int> offsets_;
  int n_rows_ = 0;
  VecXd lambda_;
  double mu_ = 10.0;
};

struct InnerResult {
  VecXd x;
  double pgrad_norm = 0;
  int iterations = 0;
  bool stalled = false;
};

// Projected Levenberg-Marquardt on the augmented Lagrangian.
InnerResult lm_minimize(const AugLag& al, const NlpProblem& p, VecXd x0, double tol,
                        int max_iter) {
  InnerResult res;
  VecXd x = al.clamp(std::move(x0));

  auto safe_value = [&](const VecXd& pt) {
    try {
      const double v = al.value(pt);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const SingularKkt&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  double delta = 1e-6;  // LM damping, Nielsen adaptation
  double nu = 2.0;
  VecXd grad;
  std::vector<Triplet> trips;
  for (int it = 0; it < max_iter; ++it) {
    const double f = al.value_grad_hess(x, grad, trips);
    res.pgrad_norm = (x - al.clamp(x - grad)).lpNorm<Eigen::Infinity>();
    if (res.pgrad_norm <= tol) break;

    // Epsilon-active bounds are eliminated from the Newton system so the
    // remaining step slides along the active set instead of fighting the
    // projection.
    std::vector<char> active(p.n, 0);
    for (int i = 0; i < p.n; ++i) {
      const double eps = 1e-10 * (1.0 + std::abs(x[i]));
      if (p.lower[i] == p.upper[i] || (x[i] <= p.lower[i] + eps && grad[i] > 0) ||
          (x[i] >= p.upper[i] - eps && grad[i] < 0))
        active[i] = 1;
    }
    std::vector<Triplet> reduced;
    reduced.reserve(trips.size() + p.n);
    for (const Triplet& t : trips)
      if (!active[t.row()] && !active[t.col()]) reduced.push_back(t);
    for (int i = 0; i < p.n; ++i)
      if (active[i]) reduced.emplace_back(i, i, 1.0);
    VecXd grad_free = grad;
    for (int i = 0; i < p.n; ++i)
      if (active[i]) grad_free[i] = 0.0;

    SpMat h(p.n, p.n);
    h.setFromTriplets(reduced.begin(), reduced.end());

    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      SpMat h_damped = h;
      for (int i = 0; i < p.n; ++i) h_damped.coeffRef(i, i) += delta;
      Eigen::SimplicialLDLT<SpMat> ldlt(h_damped);
      if (ldlt.info() != Eigen::Success) {
        delta = std::max(delta * nu, 1e-10);
        nu *= 2;
        continue;
      }
      const VecXd step = ldlt.solve(-grad_free);
      // The projection can bend a long Newton step into a model-ascent
      // direction, so search along the projected arc before blaming delta.
      bool took = false;
      double t = 1.0;
      for (int halv = 0; halv < 9 && !took; ++halv, t *= 0.5) {
        const VecXd x_new = al.clamp(x + t * step);
        const VecXd moved = x_new - x;
        const double f_new = safe_value(x_new);
        const double predicted =
            -(grad_free.dot(moved) + 0.5 * moved.dot(h.selfadjointView<Eigen::Lower>() * moved) +
              0.5 * delta * moved.squaredNorm());
        if (predicted > 0 && std::isfinite(f_new) && f - f_new > 1e-4 * predicted) {
          const double rho = (f - f_new) / predicted;
          x = x_new;
          took = true;
          delta = std::max(delta * std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3)), 1e-12);
          nu = 2.0;
        }
      }
      if (took) {
        accepted = true;
        break;
      }
      delta = std::max(delta * nu, 1e-10);
      nu *= 2;
      if (delta > 1e15) break;
    }
    ++res.iterations;
    if (!accepted) {
      res.stalled = true;
      break;
    }
  }
  res.x = std::move(x);
  return res;
}

}  // namespace

NlpSolution solve(const NlpProblem& problem, const VecXd& init, const SolveOptions& opts) {
  problem.check();
  if (init.size() != problem.n) throw std::invalid_argument("solve: init size mismatch");
  if (!init.allFinite()) throw std::invalid_argument("solve: init must be finite");

  AugLag al(problem);
  al.mu() = opts.mu0;

  VecXd x = al.clamp(init);
  NlpSolution sol;
  double eta = std::max(opts.tol_feas, 1.0 / std::pow(al.mu(), 0.1));
  double omega = std::max(opts.tol_opt, 1.0 / al.mu());
  bool diverged = false;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    const InnerResult inner =
        lm_minimize(al, problem, x, std::max(omega, opts.tol_opt), opts.max_inner);
    x = inner.x;
    sol.inner_iterations += inner.iterations;
    sol.outer_iterations = outer + 1;

    if (!x.allFinite()) {
      diverged = true;
      break;
    }
    const double viol = problem.max_violation(x);
    // Dual-scaled stationarity: with large multipliers the gradient of the
    // augmented Lagrangian cannot be driven to an absolute tolerance.
    const double dual_scale = std::max(1.0, al.lambda().lpNorm<Eigen::Infinity>() / 100.0);
    if (opts.verbose) {
      std::cerr << "[al] outer=" << outer << " inner=" << inner.iterations << " mu=" << al.mu()
                << " viol=" << viol << " pgrad=" << inner.pgrad_norm
                << (inner.stalled ? " (stalled)" : "") << '\n';
    }
    if (viol <= opts.tol_feas && inner.pgrad_norm <= opts.tol_opt * dual_scale) {
      sol.status = SolveStatus::Converged;
      break;
    }
    if (inner.stalled && al.mu() >= opts.mu_max) break;

    // Feasibility measured on the effective residuals.
    const VecXd c = al.constraint_vals(x);
    VecXd feas(c.size());
    for (int r = 0; r < c.size(); ++r)
      feas[r] = al.is_inequality_row(r) ? std::max(0.0, c[r]) : c[r];

    if (feas.lpNorm<Eigen::Infinity>() <= eta) {
      for (int r = 0; r < c.size(); ++r) {
        if (al.is_inequality_row(r))
          al.lambda()[r] = std::max(0.0, al.lambda()[r] + al.mu() * c[r]);
        else
          al.lambda()[r] += al.mu() * c[r];
      }
      eta = std::max(eta / std::pow(al.mu(), 0.9), 0.3 * opts.tol_feas);
      omega = std::max(omega / al.mu(), 0.5 * opts.tol_opt);
    } else {
      al.mu() = std::min(al.mu() * opts.mu_factor, opts.mu_max);
      eta = std::max(1.0 / std::pow(al.mu(), 0.1), 0.1 * opts.tol_feas);
      omega = std::max(1.0 / al.mu(), 0.5 * opts.tol_opt);
    }
  }

  sol.x = x;
  sol.multipliers = al.lambda();
  sol.objective = problem.objective(sol.x);
  sol.max_violation = problem.max_violation(sol.x);
  sol.residuals = problem.violations_by_name(sol.x);
  if (diverged || !sol.x.allFinite()) sol.status = SolveStatus::Diverged;
  return sol;
}

}  // namespace stride::trajopt
