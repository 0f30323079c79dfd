#include "stride/trajopt/bezier.hpp"

namespace stride::trajopt {

VecXd bezier_fit(const VecXd& s_samples, const VecXd& y_samples, int degree) {
  if (s_samples.size() != y_samples.size())
    throw std::invalid_argument("bezier_fit: sample size mismatch");
  const int n = static_cast<int>(s_samples.size());
  const double* binom = binomial_row(degree);
  MatXd basis(n, degree + 1);
  for (int k = 0; k < n; ++k) {
    const double s = s_samples[k];
    for (int i = 0; i <= degree; ++i)
      basis(k, i) = binom[i] * std::pow(s, i) * std::pow(1.0 - s, degree - i);
  }
  return basis.colPivHouseholderQr().solve(y_samples);
}

}  // namespace stride::trajopt
