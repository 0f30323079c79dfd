#include "stride/trajopt/nlp.hpp"

namespace stride::trajopt {

void Block::jacobian(const VecXd& local_in, VecXd& value, MatXd& jac) const {
  const int m = static_cast<int>(vars.size());
  VecX<Dual> in(m);
  for (int i = 0; i < m; ++i) in[i] = Dual::seed(local_in[i], m, i);
  VecX<Dual> out(out_dim);
  eval_ad(in, out);
  value.resize(out_dim);
  jac.resize(out_dim, m);
  for (int r = 0; r < out_dim; ++r) {
    value[r] = out[r].value();
    jac.row(r) = out[r].derivatives(m).transpose();
  }
}

void NlpProblem::check() const {
  if (lower.size() != n || upper.size() != n || init.size() != n)
    throw std::invalid_argument("nlp: bounds/init size mismatch");
  for (int i = 0; i < n; ++i)
    if (lower[i] > upper[i]) throw std::invalid_argument("nlp: lower > upper bound");
  for (const Block& b : blocks) {
    for (int v : b.vars)
      if (v < 0 || v >= n) throw std::invalid_argument("nlp: block " + b.name + " var out of range");
    if (b.out_dim <= 0) throw std::invalid_argument("nlp: block " + b.name + " empty output");
  }
}

double NlpProblem::objective(const VecXd& x) const {
  double obj = 0;
  VecXd out;
  for (const Block& b : blocks) {
    if (b.kind != Block::Kind::Objective) continue;
    out.resize(b.out_dim);
    b.eval_d(gather(x, b.vars), out);
    obj += out.squaredNorm();
  }
  return obj;
}

VecXd NlpProblem::constraints(const VecXd& x) const {
  int rows = 0;
  for (const Block& b : blocks)
    if (b.kind != Block::Kind::Objective) rows += b.out_dim;
  VecXd c(rows);
  int at = 0;
  VecXd out;
  for (const Block& b : blocks) {
    if (b.kind == Block::Kind::Objective) continue;
    out.resize(b.out_dim);
    b.eval_d(gather(x, b.vars), out);
    c.segment(at, b.out_dim) = out;
    at += b.out_dim;
  }
  return c;
}

double NlpProblem::max_violation(const VecXd& x) const {
  double worst = 0;
  VecXd out;
  for (const Block& b : blocks) {
    if (b.kind == Block::Kind::Objective) continue;
    out.resize(b.out_dim);
    b.eval_d(gather(x, b.vars), out);
    for (int r = 0; r < b.out_dim; ++r) {
      const double v = b.kind == Block::Kind::Equality ? std::abs(out[r]) : std::max(0.0, out[r]);
      worst = std::max(worst, v);
    }
  }
  return worst;
}

double NlpProblem::scaled_violation(const VecXd& x) const {
  double worst = 0;
  VecXd out;
  for (const Block& b : blocks) {
    if (b.kind == Block::Kind::Objective) continue;
    out.resize(b.out_dim);
    b.eval_d(gather(x, b.vars), out);
    for (int r = 0; r < b.out_dim; ++r) {
      const double v = b.kind == Block::Kind::Equality ? std::abs(out[r]) : std::max(0.0, out[r]);
      worst = std::max(worst, v / b.tol_factor);
    }
  }
  return worst;
}

std::map<std::string, double> NlpProblem::violations_by_name(const VecXd& x) const {
  std::map<std::string, double> worst;
  VecXd out;
  for (const Block& b : blocks) {
    if (b.kind == Block::Kind::Objective) continue;
    out.resize(b.out_dim);
    b.eval_d(gather(x, b.vars), out);
    double v = 0;
    for (int r = 0; r < b.out_dim; ++r)
      v = std::max(v, b.kind == Block::Kind::Equality ? std::abs(out[r]) : std::max(0.0, out[r]));
    auto [it, inserted] = worst.try_emplace(b.name, v);
    if (!inserted) it->second = std::max(it->second, v);
  }
  return worst;
}

}  // namespace stride::trajopt
