#pragma once

// Resting pose of the suspended body for fixed wire references and joint
// angles: the base pose where the controller's steady tensions (PD on length
// error plus weight feedforward, no rate term) balance gravity.

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cubix/control.hpp"
#include "cubix/dynamics.hpp"
#include "cubix/tension.hpp"

namespace cubix {

struct StaticPose {
  Pose pose;
  PerWire<double> tensions = zero_per_wire();
  double residual = 0.0;  // scaled wrench norm
  bool converged = false;
};

struct StaticLoad {
  std::vector<double> joints;
  PerWire<double> l_ref = zero_per_wire();
  std::vector<int> compensation;
  PerWire<bool> tracking{};  // feedforward share only
};

namespace statics_detail {

inline Pose perturb(const Pose& p, const Eigen::Matrix<double, 6, 1>& x) {
  Pose out;
  out.position = p.position + x.head<3>();
  const Vec3 r = x.tail<3>();
  const double a = r.norm();
  out.orientation = a > 0.0 ? Quat(Eigen::AngleAxisd(a, r / a)) * p.orientation : p.orientation;
  out.orientation.normalize();
  return out;
}

}  // namespace statics_detail

/// Net wrench (scaled by weight and a 0.5 m lever) with the steady tensions at
/// `pose`. Ground contact is ignored.
inline Eigen::Matrix<double, 6, 1> static_residual(const SystemModel& m, const StaticLoad& load, const Pose& pose,
                                                   PerWire<double>* tensions_out = nullptr) {
  const StateGeometry g = evaluate_geometry(m, pose, load.joints);
  const double weight = g.composite.total_mass * m.scenario().constants.gravity;
  const PerWire<double> ff =
      load.compensation.empty() ? zero_per_wire() : gravity_feedforward(m, load.compensation, g, weight);
  PerWire<double> t = zero_per_wire();
  for (const auto& w : m.wires()) {
    const double l = g.wires[w.id]->total_length;
    const double pd = load.tracking[w.id] ? 0.0 : m.scenario().gains.kp * (l - load.l_ref[w.id]);
    t[w.id] = std::clamp(pd + ff[w.id], 0.0, w.f_max);
  }
  Wrench wr;
  wr.force = Vec3(0, 0, -weight);
  for (const auto& w : m.wires())
    for (const auto& a : g.wires[w.id]->force_application) {
      wr.force += t[w.id] * a.direction;
      wr.moment += (a.point - g.composite.com_world).cross(t[w.id] * a.direction);
    }
  if (tensions_out) *tensions_out = t;
  Eigen::Matrix<double, 6, 1> r;
  r << wr.force / weight, wr.moment / (0.5 * weight);
  return r;
}

/// Levenberg-Marquardt on the six base coordinates with a central-difference
/// Jacobian, starting from `guess`.
inline StaticPose static_equilibrium(const SystemModel& m, const StaticLoad& load, const Pose& guess, int max_iter = 200) {
  using V6 = Eigen::Matrix<double, 6, 1>;
  using M6 = Eigen::Matrix<double, 6, 6>;
  StaticPose out;
  out.pose = guess;
  auto resid = [&](const Pose& p) -> std::optional<V6> {
    try {
      return static_residual(m, load, p);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  auto r = resid(out.pose);
  if (!r) return out;
  double lambda = 1e-3;
  const double h = 1e-6;
  for (int it = 0; it < max_iter && r->norm() > 1e-12; ++it) {
    M6 J;
    bool ok = true;
    for (int k = 0; k < 6 && ok; ++k) {
      V6 e = V6::Zero();
      e(k) = h;
      const auto rp = resid(statics_detail::perturb(out.pose, e));
      const auto rm = resid(statics_detail::perturb(out.pose, -e));
      ok = rp && rm;
      if (ok) J.col(k) = (*rp - *rm) / (2 * h);
    }
    if (!ok) break;
    const M6 JtJ = J.transpose() * J;
    const V6 g = J.transpose() * *r;
    bool improved = false;
    for (int tries = 0; tries < 20; ++tries) {
      M6 A = JtJ;
      A.diagonal() += lambda * (JtJ.diagonal().array() + 1e-9).matrix();
      V6 step = -A.ldlt().solve(g);
      // Keep steps modest: 5 cm and 0.1 rad.
      const double scale = std::max({1.0, step.head<3>().norm() / 0.05, step.tail<3>().norm() / 0.1});
      step /= scale;
      const Pose trial = statics_detail::perturb(out.pose, step);
      const auto rt = resid(trial);
      if (rt && rt->norm() < r->norm()) {
        out.pose = trial;
        r = rt;
        lambda = std::max(1e-9, lambda * 0.3);
        improved = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  out.residual = r->norm();
  out.converged = out.residual < 1e-8;
  static_residual(m, load, out.pose, &out.tensions);
  return out;
}

}  // namespace cubix
