#pragma once

#include <algorithm>

#include "stride/ad/dual.hpp"
#include "stride/common.hpp"

namespace stride::trajopt {

/// Bernstein-basis evaluation of one Bezier coefficient row with analytic
/// first and second derivatives in the phase variable s. Time derivatives are
/// obtained by the caller through the chain rule with sdot = 1 / T_domain.
/// s outside [0, 1] is clamped and flagged (timing mismatch late/early in a
/// phase).
template <typename T>
struct BezierPoint {
  T value{};
  T d1{};  // d/ds
  T d2{};  // d^2/ds^2
  bool clamped = false;
};

inline const double* binomial_row(int degree) {
  static constexpr double table[11][11] = {
      {1},
      {1, 1},
      {1, 2, 1},
      {1, 3, 3, 1},
      {1, 4, 6, 4, 1},
      {1, 5, 10, 10, 5, 1},
      {1, 6, 15, 20, 15, 6, 1},
      {1, 7, 21, 35, 35, 21, 7, 1},
      {1, 8, 28, 56, 70, 56, 28, 8, 1},
      {1, 9, 36, 84, 126, 126, 84, 36, 9, 1},
      {1, 10, 45, 120, 210, 252, 210, 120, 45, 10, 1},
  };
  if (degree < 0 || degree > 10) throw std::invalid_argument("bezier: degree must be in [0, 10]");
  return table[degree];
}

template <typename T>
BezierPoint<T> bezier_eval(const VecX<T>& coeffs, double s) {
  const int degree = static_cast<int>(coeffs.size()) - 1;
  if (degree < 2) throw std::invalid_argument("bezier: need degree >= 2");

  BezierPoint<T> out;
  if (s < 0.0 || s > 1.0) {
    out.clamped = true;
    s = std::clamp(s, 0.0, 1.0);
  }

  auto bernstein_dot = [&](const VecX<T>& c) {
    const int b = static_cast<int>(c.size()) - 1;
    const double* binom = binomial_row(b);
    double one_minus[11];
    one_minus[b] = 1.0;
    for (int i = b - 1; i >= 0; --i) one_minus[i] = one_minus[i + 1] * (1.0 - s);
    T acc(0.0);
    double sp = 1.0;
    for (int i = 0; i <= b; ++i) {
      acc += c[i] * T(binom[i] * sp * one_minus[i]);
      sp *= s;
    }
    return acc;
  };

  out.value = bernstein_dot(coeffs);

  // Derivatives via the difference-coefficient curves.
  VecX<T> d1c(degree);
  for (int i = 0; i < degree; ++i)
    d1c[i] = T(static_cast<double>(degree)) * (coeffs[i + 1] - coeffs[i]);
  out.d1 = bernstein_dot(d1c);

  VecX<T> d2c(degree - 1);
  for (int i = 0; i < degree - 1; ++i)
    d2c[i] = T(static_cast<double>(degree - 1)) * (d1c[i + 1] - d1c[i]);
  out.d2 = bernstein_dot(d2c);
  return out;
}

/// Least-squares fit of one Bezier row (degree b) to samples y(s_k); used to
/// seed coefficient blocks from a kinematic initial trajectory.
VecXd bezier_fit(const VecXd& s_samples, const VecXd& y_samples, int degree);

}  // namespace stride::trajopt
