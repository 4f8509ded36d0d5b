#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cubix/kinematics.hpp"

namespace cubix {

struct ContactPoint {
  std::string segment;
  std::string name;
  ResolvedPoint point;
};

/// A validated scenario with every name resolved. Immutable once built.
class SystemModel {
 public:
  explicit SystemModel(Scenario s) : scenario_(std::move(s)), body_(scenario_) {
    wire_slot_.fill(-1);
    for (const auto& w : scenario_.wires) {
      wire_slot_[w.id] = static_cast<int>(wires_.size());
      wires_.push_back(body_.resolve(w));
    }
    for (std::size_t s = 0; s < scenario_.segments.size(); ++s)
      for (const auto& p : scenario_.segments[s].contact_points)
        contacts_.push_back({scenario_.segments[s].name, p.name, {static_cast<int>(s), p.local}});
  }

  const Scenario& scenario() const { return scenario_; }
  const BodyModel& body() const { return body_; }
  const std::vector<ResolvedWire>& wires() const { return wires_; }
  const std::vector<ContactPoint>& contacts() const { return contacts_; }
  double dt() const { return scenario_.sim.dt; }

  bool has_wire(int id) const { return id >= 0 && id < kMaxWires && wire_slot_[id] >= 0; }
  const ResolvedWire& wire(int id) const {
    if (!has_wire(id)) throw ScenarioError("UnknownWire", "no wire with id " + std::to_string(id));
    return wires_[wire_slot_[id]];
  }

 private:
  Scenario scenario_;
  BodyModel body_;
  std::vector<ResolvedWire> wires_;
  PerWire<int> wire_slot_{};
  std::vector<ContactPoint> contacts_;
};

/// Full simulator state. Rotation is integrated through the angular momentum
/// about the composite COM; `base_twist.angular_velocity` is derived from it.
struct SimState {
  long tick = 0;
  double time = 0.0;
  Pose base_pose;
  Twist base_twist;  // linear = composite COM velocity
  Vec3 angular_momentum = Vec3::Zero();
  std::vector<double> joint_angles;
  PerWire<double> wire_lengths = zero_per_wire();
  PerWire<double> wire_rates = zero_per_wire();
  PerWire<double> wire_tensions = zero_per_wire();
};

/// Everything derived from pose and joint angles.
struct StateGeometry {
  BodyFrames frames;
  CompositeProperties composite;
  PerWire<std::optional<WireGeometry>> wires;
};

inline StateGeometry evaluate_geometry(const SystemModel& m, const Pose& pose, const std::vector<double>& angles) {
  StateGeometry g;
  g.frames = segment_frames(m.body(), pose, angles);
  g.composite = composite_properties(m.body(), g.frames);
  for (const auto& w : m.wires()) g.wires[w.id] = wire_geometry(w, g.frames);
  return g;
}

inline StateGeometry evaluate_geometry(const SystemModel& m, const SimState& s) {
  return evaluate_geometry(m, s.base_pose, s.joint_angles);
}

inline Mat3 inverse_inertia(const Mat3& I) {
  Eigen::LDLT<Mat3> ldlt(I);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.vectorD().minCoeff() > 1e-12 * std::max(1.0, I.trace()))
    return ldlt.solve(Mat3::Identity());
  return I.completeOrthogonalDecomposition().pseudoInverse();
}

inline SimState initial_state(const SystemModel& m) {
  const auto& sc = m.scenario();
  SimState s;
  s.base_pose = sc.sim.initial_pose;
  s.base_pose.orientation.normalize();
  s.joint_angles = m.body().joint_vector(sc.sim.initial_joints);
  const StateGeometry g = evaluate_geometry(m, s);
  for (const auto& w : m.wires()) s.wire_lengths[w.id] = g.wires[w.id]->total_length;
  return s;
}

struct ContactForce {
  const ContactPoint* contact = nullptr;
  Vec3 point = Vec3::Zero();
  Vec3 force = Vec3::Zero();
};

inline Vec3 point_velocity(const SimState& s, const StateGeometry& g, const Vec3& p) {
  return s.base_twist.linear_velocity + s.base_twist.angular_velocity.cross(p - g.composite.com_world);
}

/// Penalty forces on every contact point below the ground plane z = 0.
inline std::vector<ContactForce> contact_forces(const SystemModel& m, const SimState& s, const StateGeometry& g) {
  std::vector<ContactForce> out;
  const auto& c = m.scenario().contact;
  if (!c.enabled) return out;
  for (const auto& cp : m.contacts()) {
    const Vec3 p = g.frames.point(cp.point);
    if (!(p.z() < 0.0)) continue;
    const Vec3 v = point_velocity(s, g, p);
    const double normal = std::max(0.0, c.stiffness * (-p.z()) - c.damping * v.z());
    out.push_back({&cp, p, Vec3(-c.viscous * v.x(), -c.viscous * v.y(), normal)});
  }
  return out;
}

inline void check_tensions(const SystemModel& m, const PerWire<double>& tensions) {
  for (const auto& w : m.wires()) {
    const double t = tensions[w.id];
    if (!(t >= 0.0)) throw ScenarioError("NegativeTension", "wire " + std::to_string(w.id) + " tension must be >= 0");
    if (t > w.f_max * (1.0 + 1e-12))
      throw ScenarioError("TensionAboveLimit", "wire " + std::to_string(w.id) + " tension exceeds f_max");
  }
}

/// Net external wrench on the composite body, moment about its COM.
inline Wrench assemble_wrench(const SystemModel& m, const SimState& s, const PerWire<double>& tensions,
                              const StateGeometry& g) {
  check_tensions(m, tensions);
  const Vec3 com = g.composite.com_world;
  Wrench w;
  w.force = Vec3(0, 0, -g.composite.total_mass * m.scenario().constants.gravity);
  for (const auto& wire : m.wires()) {
    const double t = tensions[wire.id];
    if (t == 0.0) continue;
    for (const auto& a : g.wires[wire.id]->force_application) {
      w.force += t * a.direction;
      w.moment += (a.point - com).cross(t * a.direction);
    }
  }
  for (const auto& cf : contact_forces(m, s, g)) {
    w.force += cf.force;
    w.moment += (cf.point - com).cross(cf.force);
  }
  return w;
}

inline Wrench assemble_wrench(const SystemModel& m, const SimState& s, const PerWire<double>& tensions) {
  return assemble_wrench(m, s, tensions, evaluate_geometry(m, s));
}

inline bool finite_state(const SimState& s) {
  bool ok = s.base_pose.position.allFinite() && s.base_pose.orientation.coeffs().allFinite() &&
            s.base_twist.linear_velocity.allFinite() && s.base_twist.angular_velocity.allFinite() &&
            s.angular_momentum.allFinite();
  for (double l : s.wire_lengths) ok = ok && std::isfinite(l);
  return ok;
}

/// One semi-implicit Euler step of length dt. Joint angles jump to
/// `next_joint_angles` (prescribed); the composite inertia is re-evaluated
/// with them and its rate terms are ignored. Commanded tensions are applied
/// directly.
inline SimState step(const SystemModel& m, const SimState& s, const PerWire<double>& tensions,
                     const std::vector<double>& next_joint_angles) {
  const double dt = m.dt();
  const StateGeometry g = evaluate_geometry(m, s);
  const Wrench w = assemble_wrench(m, s, tensions, g);
  const double mass = g.composite.total_mass;

  SimState n = s;
  n.tick = s.tick + 1;
  n.time = static_cast<double>(n.tick) * dt;
  n.joint_angles = next_joint_angles;
  n.base_twist.linear_velocity = s.base_twist.linear_velocity + dt * w.force / mass;
  n.angular_momentum = s.angular_momentum + dt * w.moment;

  // Inertia at the current orientation with the new joint configuration.
  const Vec3 com_base_next = com_in_base(m.body(), next_joint_angles);
  Pose rotated_only{Vec3::Zero(), s.base_pose.orientation};
  const Mat3 I = composite_properties(rotated_only, next_joint_angles, m.body()).inertia_about_com_world;
  const Vec3 omega = inverse_inertia(I) * n.angular_momentum;
  n.base_twist.angular_velocity = omega;

  const double angle = omega.norm() * dt;
  Quat q = s.base_pose.orientation;
  if (angle > 0.0) q = Quat(Eigen::AngleAxisd(angle, omega.normalized())) * q;
  q.normalize();
  n.base_pose.orientation = q;

  const Vec3 com_next = g.composite.com_world + dt * n.base_twist.linear_velocity;
  n.base_pose.position = com_next - q.toRotationMatrix() * com_base_next;

  const StateGeometry gn = evaluate_geometry(m, n);
  for (const auto& wire : m.wires()) {
    n.wire_lengths[wire.id] = gn.wires[wire.id]->total_length;
    n.wire_rates[wire.id] = (n.wire_lengths[wire.id] - s.wire_lengths[wire.id]) / dt;
  }
  n.wire_tensions = tensions;
  if (!finite_state(n))
    throw NonFiniteStateError("state became non-finite at t=" + std::to_string(n.time) + " s");
  return n;
}

struct Energy {
  double kinetic = 0.0;
  double potential = 0.0;
  double total() const { return kinetic + potential; }
};

inline Energy mechanical_energy(const SystemModel& m, const SimState& s) {
  const StateGeometry g = evaluate_geometry(m, s);
  const Vec3 omega = inverse_inertia(g.composite.inertia_about_com_world) * s.angular_momentum;
  Energy e;
  e.kinetic = 0.5 * g.composite.total_mass * s.base_twist.linear_velocity.squaredNorm() + 0.5 * s.angular_momentum.dot(omega);
  e.potential = g.composite.total_mass * m.scenario().constants.gravity * g.composite.com_world.z();
  return e;
}

}  // namespace cubix
