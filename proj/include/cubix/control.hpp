#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "cubix/dynamics.hpp"

namespace cubix {

struct TensionCommand {
  std::vector<double> f_ref;    // N
  std::vector<double> i_ref;    // A
  std::vector<bool> saturated;  // the unclamped value left [0, f_max]
};

/// Motor current for a tension: i = f r / (k_t G).
inline double tension_to_current(double f, const PhysicalConstants& c) {
  return f * c.pulley_radius / (c.torque_constant * c.gear_ratio);
}

/// Per-wire PD on length error plus weight feedforward,
/// f = clamp(kp (l - l_ref) + kd l_dot + f_ff, 0, f_max).
/// A wire longer than its reference is pulled in; a lengthening wire is
/// pulled harder, which damps the suspension.
inline TensionCommand pd_tension(const std::vector<double>& l_ref, const std::vector<double>& l,
                                 const std::vector<double>& l_dot, const ControllerGains& gains,
                                 const std::vector<double>& f_ff, const std::vector<double>& f_max,
                                 const PhysicalConstants& constants) {
  const std::size_t n = l_ref.size();
  if (l.size() != n || l_dot.size() != n || f_ff.size() != n || f_max.size() != n)
    throw ScenarioError("ArityMismatch", "pd_tension inputs must have one entry per wire");
  TensionCommand cmd;
  cmd.f_ref.resize(n);
  cmd.i_ref.resize(n);
  cmd.saturated.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = gains.kp * (l[i] - l_ref[i]) + gains.kd * l_dot[i] + f_ff[i];
    const double f = std::clamp(raw, 0.0, f_max[i]);
    cmd.saturated[i] = raw < 0.0 || raw > f_max[i];
    cmd.f_ref[i] = f;
    cmd.i_ref[i] = tension_to_current(f, constants);
  }
  return cmd;
}

/// Torque about one joint axis from the gravity and wire loads on everything
/// distal to it. `required` is what the joint actuator must supply to hold the
/// configuration.
struct JointTorqueBudget {
  double required = 0.0;
  double wire = 0.0;
  double gravity = 0.0;
};

inline JointTorqueBudget joint_torque_budget(const SystemModel& m, const std::string& joint, const StateGeometry& g,
                                             const PerWire<double>& tensions) {
  const BodyModel& body = m.body();
  const int j = body.joint_index(joint);
  const int child = body.joint_child(j);
  const auto& parent_frame = g.frames.segment[body.joint_parent(j)];
  const Vec3 origin = parent_frame * body.joints()[j].origin_in_parent;
  const Vec3 axis = (parent_frame.linear() * body.joints()[j].axis_in_parent).normalized();
  const Vec3 gvec(0, 0, -m.scenario().constants.gravity);

  JointTorqueBudget b;
  const auto& segs = body.segments();
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (!body.in_subtree(child, static_cast<int>(s))) continue;
    const Vec3 com = g.frames.segment[s] * segs[s].com_local;
    b.gravity += (com - origin).cross(segs[s].mass * gvec).dot(axis);
  }
  for (const auto& w : m.wires()) {
    const double t = tensions[w.id];
    if (t == 0.0) continue;
    for (const auto& a : g.wires[w.id]->force_application) {
      if (a.segment == ResolvedPoint::kWorld || !body.in_subtree(child, a.segment)) continue;
      b.wire += (a.point - origin).cross(t * a.direction).dot(axis);
    }
  }
  b.required = -(b.gravity + b.wire);
  return b;
}

}  // namespace cubix
