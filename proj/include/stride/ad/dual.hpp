#pragma once

#include <Eigen/Core>
#include <cassert>
#include <cmath>
#include <ostream>

namespace stride::ad {

/// Forward-mode dual number carrying a runtime-sized derivative vector with a
/// fixed compile-time capacity (no heap traffic inside hot loops).
///
/// An empty derivative vector means "constant with respect to all seeds";
/// binary operations treat it as an all-zero gradient of the partner's size.
/// This keeps plain literals cheap until they meet a seeded value.
template <int MaxN>
class DualT {
 public:
  using Grad = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, MaxN, 1>;
  static constexpr int kMaxDeriv = MaxN;

  DualT() : v_(0.0) {}
  DualT(double v) : v_(v) {}  // NOLINT: implicit by design, mirrors double
  DualT(double v, const Grad& g) : v_(v), g_(g) {}

  /// Independent variable: unit derivative e_index within a seed space of
  /// size dim.
  static DualT seed(double v, int dim, int index) {
    DualT d(v);
    d.g_.setZero(dim);
    d.g_[index] = 1.0;
    return d;
  }

  double value() const { return v_; }
  const Grad& grad() const { return g_; }

  /// Derivative vector padded to `dim` (empty grad reads as zero).
  Grad derivatives(int dim) const {
    if (g_.size() == 0) return Grad::Zero(dim);
    assert(g_.size() == dim);
    return g_;
  }

  DualT& operator+=(const DualT& o) {
    v_ += o.v_;
    accumulate(o.g_, 1.0);
    return *this;
  }
  DualT& operator-=(const DualT& o) {
    v_ -= o.v_;
    accumulate(o.g_, -1.0);
    return *this;
  }
  DualT& operator*=(const DualT& o) {
    if (g_.size() != 0) g_ *= o.v_;
    accumulate(o.g_, v_);
    v_ *= o.v_;
    return *this;
  }
  DualT& operator/=(const DualT& o) {
    const double inv = 1.0 / o.v_;
    if (g_.size() != 0) g_ *= inv;
    v_ *= inv;
    accumulate(o.g_, -v_ * inv);
    return *this;
  }

  friend DualT operator+(DualT a, const DualT& b) { return a += b; }
  friend DualT operator-(DualT a, const DualT& b) { return a -= b; }
  friend DualT operator*(DualT a, const DualT& b) { return a *= b; }
  friend DualT operator/(DualT a, const DualT& b) { return a /= b; }
  friend DualT operator-(DualT a) {
    a.v_ = -a.v_;
    a.g_ = -a.g_;
    return a;
  }
  friend DualT operator+(DualT a) { return a; }

  friend bool operator<(const DualT& a, const DualT& b) { return a.v_ < b.v_; }
  friend bool operator>(const DualT& a, const DualT& b) { return a.v_ > b.v_; }
  friend bool operator<=(const DualT& a, const DualT& b) { return a.v_ <= b.v_; }
  friend bool operator>=(const DualT& a, const DualT& b) { return a.v_ >= b.v_; }
  friend bool operator==(const DualT& a, const DualT& b) { return a.v_ == b.v_; }
  friend bool operator!=(const DualT& a, const DualT& b) { return a.v_ != b.v_; }

  /// Chain rule helper: value f(v), derivative df(v) * g.
  friend DualT chain(const DualT& x, double f, double df) {
    DualT r(f);
    if (x.g_.size() != 0) r.g_ = df * x.g_;
    return r;
  }

  friend std::ostream& operator<<(std::ostream& os, const DualT& d) {
    return os << d.v_;
  }

 private:
  void accumulate(const Grad& og, double scale) {
    if (og.size() == 0) return;
    if (g_.size() == 0) {
      g_ = scale * og;
    } else {
      assert(g_.size() == og.size());
      g_ += scale * og;
    }
  }

  double v_;
  Grad g_;
};

template <int N>
DualT<N> sin(const DualT<N>& x) {
  return chain(x, std::sin(x.value()), std::cos(x.value()));
}
template <int N>
DualT<N> cos(const DualT<N>& x) {
  return chain(x, std::cos(x.value()), -std::sin(x.value()));
}
template <int N>
DualT<N> tan(const DualT<N>& x) {
  const double c = std::cos(x.value());
  return chain(x, std::tan(x.value()), 1.0 / (c * c));
}
template <int N>
DualT<N> exp(const DualT<N>& x) {
  const double e = std::exp(x.value());
  return chain(x, e, e);
}
template <int N>
DualT<N> log(const DualT<N>& x) {
  return chain(x, std::log(x.value()), 1.0 / x.value());
}
template <int N>
DualT<N> sqrt(const DualT<N>& x) {
  const double s = std::sqrt(x.value());
  return chain(x, s, 0.5 / s);
}
template <int N>
DualT<N> tanh(const DualT<N>& x) {
  const double t = std::tanh(x.value());
  return chain(x, t, 1.0 - t * t);
}
template <int N>
DualT<N> abs(const DualT<N>& x) {
  return x.value() < 0.0 ? -x : x;
}
template <int N>
DualT<N> pow(const DualT<N>& x, double p) {
  return chain(x, std::pow(x.value(), p), p * std::pow(x.value(), p - 1.0));
}
template <int N>
DualT<N> atan2(const DualT<N>& y, const DualT<N>& x) {
  const double den = x.value() * x.value() + y.value() * y.value();
  DualT<N> r(std::atan2(y.value(), x.value()));
  r = r + (x * (y - y.value()) - y * (x - x.value())) / den;
  return r;
}
template <int N>
DualT<N> min(const DualT<N>& a, const DualT<N>& b) {
  return a.value() <= b.value() ? a : b;
}
template <int N>
DualT<N> max(const DualT<N>& a, const DualT<N>& b) {
  return a.value() >= b.value() ? a : b;
}

// Eigen scalar hooks.
template <int N>
const DualT<N>& conj(const DualT<N>& x) { return x; }
template <int N>
const DualT<N>& real(const DualT<N>& x) { return x; }
template <int N>
double imag(const DualT<N>&) { return 0.0; }
template <int N>
DualT<N> abs2(const DualT<N>& x) { return x * x; }

template <typename T>
double value_of(const T& x) { return x; }
template <int N>
double value_of(const DualT<N>& x) { return x.value(); }

template <typename T>
bool is_finite(const T& x) { return std::isfinite(x); }
template <int N>
bool is_finite(const DualT<N>& x) { return std::isfinite(x.value()); }

/// Derivative capacity used by the trajectory-optimization constraint blocks:
/// every block keeps its local input dimension at or below this.
inline constexpr int kMaxDeriv = 64;
using Dual = DualT<kMaxDeriv>;

}  // namespace stride::ad

namespace Eigen {

template <int N>
struct NumTraits<stride::ad::DualT<N>> : NumTraits<double> {
  using Real = stride::ad::DualT<N>;
  using NonInteger = stride::ad::DualT<N>;
  using Nested = stride::ad::DualT<N>;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 2 * N,
    MulCost = 2 * N,
  };
};

template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<stride::ad::DualT<N>, double, BinaryOp> {
  using ReturnType = stride::ad::DualT<N>;
};
template <int N, typename BinaryOp>
struct ScalarBinaryOpTraits<double, stride::ad::DualT<N>, BinaryOp> {
  using ReturnType = stride::ad::DualT<N>;
};

}  // namespace Eigen
