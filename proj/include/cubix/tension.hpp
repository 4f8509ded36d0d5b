#pragma once

// Box-constrained minimum-norm tension distribution:
//
//   minimize |f|^2  subject to  A f = b,  0 <= f <= u.
//
// Solved through the concave dual  g(y) = y.b - sum psi_i(a_i.y)  whose
// maximizer gives f = clamp(A^T y, 0, u). The dual is piecewise quadratic, so
// a damped semismooth Newton iteration identifies the active bounds in a few
// steps; the free set is then re-solved exactly on the primal side.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cubix/dynamics.hpp"

namespace cubix {

namespace tension_detail {

inline double psi(double s, double u) {
  if (s <= 0.0) return 0.0;
  if (s < u) return 0.5 * s * s;
  return u * s - 0.5 * u * u;
}

inline Eigen::VectorXd clamp_box(const Eigen::VectorXd& s, const Eigen::VectorXd& u) {
  return s.cwiseMax(0.0).cwiseMin(u);
}

}  // namespace tension_detail

/// Returns the minimizer, or nullopt when no bounded nonnegative f satisfies
/// A f = b.
inline std::optional<Eigen::VectorXd> min_norm_bounded(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                                       const Eigen::VectorXd& upper) {
  using tension_detail::clamp_box;
  using tension_detail::psi;
  const Eigen::Index k = A.cols();
  const double scale = 1.0 + b.norm();
  const double tol = 1e-10 * scale;

  auto dual = [&](const Eigen::VectorXd& y) {
    const Eigen::VectorXd s = A.transpose() * y;
    double g = y.dot(b);
    for (Eigen::Index i = 0; i < k; ++i) g -= psi(s(i), upper(i));
    return g;
  };

  const Eigen::MatrixXd AAt = A * A.transpose();
  const double mu = 1e-10 * (1.0 + AAt.trace());
  Eigen::VectorXd y = AAt.completeOrthogonalDecomposition().solve(b);
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd s = A.transpose() * y;
    const Eigen::VectorXd r = b - A * clamp_box(s, upper);
    if (r.norm() <= tol) break;
    Eigen::MatrixXd H = mu * Eigen::MatrixXd::Identity(A.rows(), A.rows());
    for (Eigen::Index i = 0; i < k; ++i)
      if (s(i) >= 0.0 && s(i) < upper(i)) H += A.col(i) * A.col(i).transpose();
    const Eigen::VectorXd d = H.ldlt().solve(r);
    const double g0 = dual(y);
    const double slope = r.dot(d);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      if (dual(y + t * d) >= g0 + 1e-4 * t * slope) {
        y += t * d;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }

  // Exact re-solve on the identified free set.
  const Eigen::VectorXd s = A.transpose() * y;
  Eigen::VectorXd f = clamp_box(s, upper);
  std::vector<Eigen::Index> free;
  Eigen::VectorXd rhs = b;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (s(i) > 0.0 && s(i) < upper(i)) {
      free.push_back(i);
    } else {
      rhs -= A.col(i) * f(i);
    }
  }
  if (!free.empty()) {
    Eigen::MatrixXd Af(A.rows(), static_cast<Eigen::Index>(free.size()));
    for (std::size_t j = 0; j < free.size(); ++j) Af.col(static_cast<Eigen::Index>(j)) = A.col(free[j]);
    const Eigen::VectorXd ff = Af.completeOrthogonalDecomposition().solve(rhs);
    Eigen::VectorXd polished = f;
    bool inside = true;
    for (std::size_t j = 0; j < free.size(); ++j) {
      const double v = ff(static_cast<Eigen::Index>(j));
      inside = inside && v >= -1e-9 && v <= upper(free[j]) + 1e-9;
      polished(free[j]) = std::clamp(v, 0.0, upper(free[j]));
    }
    if (inside && (A * polished - b).norm() <= (A * f - b).norm() + tol) f = polished;
  }
  if ((A * f - b).norm() > 1e-9 * scale) return std::nullopt;
  return f;
}

/// Force-only weight compensation: tensions on `active` wires whose summed
/// net force directions equal (0, 0, weight), minimum sum of squares, each in
/// [0, f_max]. Wires outside `active` get 0.
inline PerWire<double> gravity_feedforward(const SystemModel& m, const std::vector<int>& active,
                                           const StateGeometry& g, double weight) {
  if (active.empty()) throw InfeasibleError("no wires in the compensation set");
  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd A(3, k);
  Eigen::VectorXd upper(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const int id = active[static_cast<std::size_t>(i)];
    const auto& w = m.wire(id);
    if (w.internal) throw ScenarioError("InternalWireActive", "wire " + std::to_string(id) + " is body-anchored");
    A.col(i) = g.wires[id]->net_force_direction();
    upper(i) = w.f_max;
  }
  const auto f = min_norm_bounded(A, Eigen::Vector3d(0, 0, weight), upper);
  if (!f) {
    std::string ids;
    for (int id : active) ids += (ids.empty() ? "" : ",") + std::to_string(id);
    throw InfeasibleError("weight " + std::to_string(weight) + " N cannot be carried by wires {" + ids + "} within their limits");
  }
  PerWire<double> out = zero_per_wire();
  for (Eigen::Index i = 0; i < k; ++i) out[active[static_cast<std::size_t>(i)]] = (*f)(i);
  return out;
}

}  // namespace cubix
