#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace stride {

inline constexpr int kNumCoords = 7;  // [base x, base z, pitch, lh, lk, rh, rk]
inline constexpr int kNumActuators = 4;
inline constexpr int kContactDim = 2;  // planar point contact: (x, z)

template <typename T>
using Vec2 = Eigen::Matrix<T, 2, 1>;
template <typename T>
using Vec4 = Eigen::Matrix<T, 4, 1>;
template <typename T>
using Vec7 = Eigen::Matrix<T, kNumCoords, 1>;
template <typename T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using Mat27 = Eigen::Matrix<T, 2, kNumCoords>;
template <typename T>
using Mat77 = Eigen::Matrix<T, kNumCoords, kNumCoords>;
template <typename T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using Vec2d = Vec2<double>;
using Vec4d = Vec4<double>;
using Vec7d = Vec7<double>;
using VecXd = VecX<double>;
using Mat27d = Mat27<double>;
using Mat77d = Mat77<double>;
using MatXd = MatX<double>;

/// Hybrid-system domains of the running/standing system.
enum class Domain { SspLeft, SspRight, Dsp, Flight };

inline const char* to_string(Domain d) {
  switch (d) {
    case Domain::SspLeft: return "SSP_L";
    case Domain::SspRight: return "SSP_R";
    case Domain::Dsp: return "DSP";
    case Domain::Flight: return "FLT";
  }
  return "?";
}

/// Thrown when a contact configuration makes the KKT system singular.
class SingularKkt : public std::runtime_error {
 public:
  explicit SingularKkt(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a simulation state stops being finite.
class SimDiverged : public std::runtime_error {
 public:
  explicit SimDiverged(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stride
