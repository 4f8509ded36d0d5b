#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace cubix {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// CubiX carries eight wire modules; wire ids are 0..7.
inline constexpr int kMaxWires = 8;

/// Fixed-size per-wire storage indexed by wire id.
template <class T>
using PerWire = std::array<T, kMaxWires>;

inline PerWire<double> zero_per_wire() {
  PerWire<double> v;
  v.fill(0.0);
  return v;
}

/// Base of every error thrown by the library. `code()` is machine readable.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& message) : Error("GeometryDegenerate", message) {}
};

class JointLimitError : public Error {
 public:
  explicit JointLimitError(const std::string& message) : Error("JointOutOfLimits", message) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& message) : Error("Infeasible", message) {}
};

class NonFiniteStateError : public Error {
 public:
  explicit NonFiniteStateError(const std::string& message) : Error("NonFiniteState", message) {}
};

/// 6-vector wrench: force (N) followed by moment (N·m).
struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();

  Vec6 stacked() const {
    Vec6 w;
    w << force, moment;
    return w;
  }
};

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

}  // namespace cubix
