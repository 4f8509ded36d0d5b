#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cubix/core.hpp"

namespace cubix {

struct PhysicalConstants {
  double gravity = 9.81;          // m/s^2
  double total_mass = 44.6;       // kg, whole CubiX+Musashi composite
  double f_max_per_wire = 180.0;  // N, continuous tension limit of one wire module
  double wind_rate_max = 0.242;   // m/s
  double pulley_radius = 0.025;   // m
  double torque_constant = 0.1;   // N·m/A
  double gear_ratio = 5.0;
};

struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
};

/// Linear velocity of the composite centre of mass and world-frame angular velocity.
struct Twist {
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
};

struct NamedPoint {
  std::string name;
  Vec3 local = Vec3::Zero();
};

struct BodySegment {
  std::string name;
  double mass = 0.0;
  Vec3 com_local = Vec3::Zero();
  Mat3 inertia_local = Mat3::Zero();
  std::vector<NamedPoint> attachment_points;
  std::vector<NamedPoint> contact_points;
};

/// Revolute joint whose angle is prescribed by the motion script. The child
/// frame coincides with the joint frame: child-local points are measured from
/// the joint origin.
struct RevoluteJoint {
  std::string name;
  std::string parent_segment;
  std::string child_segment;
  Vec3 origin_in_parent = Vec3::Zero();
  Vec3 axis_in_parent = Vec3::UnitY();
  double lower_limit = -M_PI;
  double upper_limit = M_PI;
  double torque_limit = 100.0;
};

struct PointRef {
  std::string segment;
  std::string point;

  friend bool operator==(const PointRef&, const PointRef&) = default;
};

struct WireAnchor {
  enum class Kind { Environment, Body };
  Kind kind = Kind::Environment;
  Vec3 world = Vec3::Zero();  // Environment
  PointRef body;              // Body

  static WireAnchor environment(const Vec3& p) { return {Kind::Environment, p, {}}; }
  static WireAnchor on_body(PointRef ref) { return {Kind::Body, Vec3::Zero(), std::move(ref)}; }
  bool is_environment() const { return kind == Kind::Environment; }
};

struct Wire {
  int id = 0;
  PointRef exit;
  std::vector<PointRef> via_points;
  WireAnchor anchor;
  double f_max = 180.0;
};

struct ControllerGains {
  double kp = 500.0;  // N/m
  double kd = 50.0;   // N·s/m
};

struct WireTarget {
  enum class Kind { Hold, Delta, Track };
  Kind kind = Kind::Hold;
  double delta = 0.0;  // m over the phase, negative winds (shortens)

  static WireTarget hold() { return {}; }
  static WireTarget wind(double d) { return {Kind::Delta, d}; }
  static WireTarget track() { return {Kind::Track, 0.0}; }
};

struct Phase {
  std::string name;
  double duration = 1.0;                        // s
  std::map<int, WireTarget> wire_targets;       // absent wires hold
  std::vector<int> compensation_set;            // environment wires carrying the weight
  std::map<std::string, double> joint_targets;  // rad at phase end
  bool sync_barrier = false;
};

struct ContactParams {
  bool enabled = true;
  double stiffness = 5.0e4;  // N/m
  double damping = 5.0e3;    // N·s/m
  double viscous = 200.0;    // N·s/m, tangential
};

/// Plane the designated foot point must cross. The normal points toward the
/// side the foot starts on.
struct KickTarget {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();
  PointRef foot;
};

struct SimSettings {
  double dt = 0.001;
  double duration = 1.0;
  int log_every = 10;               // CSV decimation, 1 keeps every tick
  double compensation_blend = 2.0;  // s, cross-fade when the compensation set changes
  Pose initial_pose;
  std::map<std::string, double> initial_joints;
  std::vector<std::string> notes;   // assumptions recorded with the scenario
};

struct Scenario {
  PhysicalConstants constants;
  std::vector<BodySegment> segments;
  std::vector<RevoluteJoint> joints;
  std::vector<Wire> wires;
  ControllerGains gains;
  std::vector<Phase> phases;
  SimSettings sim;
  ContactParams contact;
  std::optional<KickTarget> kick_target;

  const Wire* find_wire(int id) const {
    for (const auto& w : wires)
      if (w.id == id) return &w;
    return nullptr;
  }
  const BodySegment* find_segment(const std::string& name) const {
    for (const auto& s : segments)
      if (s.name == name) return &s;
    return nullptr;
  }
  const RevoluteJoint* find_joint(const std::string& name) const {
    for (const auto& j : joints)
      if (j.name == name) return &j;
    return nullptr;
  }
  double segment_mass_sum() const {
    double m = 0.0;
    for (const auto& s : segments) m += s.mass;
    return m;
  }
};

/// One failed invariant. `code` is stable and machine readable; `label()`
/// renders e.g. `DuplicateWireId(3)`.
struct Violation {
  std::string code;
  std::string field;
  std::string message;
  std::optional<int> wire_id;

  std::string label() const {
    return wire_id ? code + "(" + std::to_string(*wire_id) + ")" : code;
  }
};

namespace detail {

inline const NamedPoint* find_point(const BodySegment& s, const std::string& name) {
  for (const auto& p : s.attachment_points)
    if (p.name == name) return &p;
  for (const auto& p : s.contact_points)
    if (p.name == name) return &p;
  return nullptr;
}

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace detail

inline std::vector<Violation> validate_scenario(const Scenario& s) {
  std::vector<Violation> out;
  auto add = [&](std::string code, std::string field, std::string msg,
                 std::optional<int> wire = std::nullopt) {
    out.push_back({std::move(code), std::move(field), std::move(msg), wire});
  };

  const auto& c = s.constants;
  const std::pair<const char*, double> positives[] = {
      {"gravity", c.gravity},           {"total_mass", c.total_mass},
      {"f_max_per_wire", c.f_max_per_wire}, {"wind_rate_max", c.wind_rate_max},
      {"pulley_radius", c.pulley_radius}, {"torque_constant", c.torque_constant},
      {"gear_ratio", c.gear_ratio}};
  for (const auto& [name, value] : positives)
    if (!(value > 0.0) || !std::isfinite(value))
      add("NonPositiveConstant", std::string("constants.") + name,
          std::string("constant ") + name + " must be strictly positive");

  // Segments.
  std::set<std::string> seg_names;
  if (s.segments.empty()) add("NoSegments", "segments", "at least one segment is required");
  for (std::size_t i = 0; i < s.segments.size(); ++i) {
    const auto& seg = s.segments[i];
    const std::string f = "segments." + std::to_string(i);
    if (!seg_names.insert(seg.name).second)
      add("DuplicateSegment", f + ".name", "duplicate segment name '" + seg.name + "'");
    if (!(seg.mass >= 0.0)) add("NegativeMass", f + ".mass", "segment mass must be >= 0");
    const Mat3& I = seg.inertia_local;
    if (!I.allFinite() || (I - I.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      add("InertiaNotSymmetric", f + ".inertia", "segment inertia must be symmetric");
    } else {
      Eigen::SelfAdjointEigenSolver<Mat3> eig(I);
      if (eig.eigenvalues().minCoeff() < -1e-12)
        add("InertiaNotPSD", f + ".inertia", "segment inertia must be positive semidefinite");
    }
  }
  if (std::abs(s.segment_mass_sum() - c.total_mass) > 1e-9 * std::max(1.0, c.total_mass))
    add("MassMismatch", "constants.total_mass", "segment masses do not sum to total_mass");

  // Joints form a tree hanging off the first segment.
  std::set<std::string> children;
  for (std::size_t i = 0; i < s.joints.size(); ++i) {
    const auto& j = s.joints[i];
    const std::string f = "joints." + std::to_string(i);
    if (!seg_names.count(j.parent_segment))
      add("UnknownSegment", f + ".parent", "unknown segment '" + j.parent_segment + "'");
    if (!seg_names.count(j.child_segment))
      add("UnknownSegment", f + ".child", "unknown segment '" + j.child_segment + "'");
    if (!s.segments.empty() && j.child_segment == s.segments.front().name)
      add("BaseIsChild", f + ".child", "the base segment cannot be a joint child");
    if (!children.insert(j.child_segment).second)
      add("SegmentHasTwoParents", f + ".child", "segment '" + j.child_segment + "' has two parents");
    if (std::abs(j.axis_in_parent.norm() - 1.0) > 1e-9)
      add("AxisNotUnit", f + ".axis", "joint axis must be unit norm");
    if (!(j.lower_limit <= j.upper_limit))
      add("LimitsUnordered", f + ".limits", "joint limits must be ordered");
    if (!(j.torque_limit > 0.0)) add("NonPositiveTorqueLimit", f + ".torque_limit", "torque limit must be positive");
  }
  for (std::size_t i = 1; i < s.segments.size(); ++i)
    if (!children.count(s.segments[i].name))
      add("DetachedSegment", "segments." + std::to_string(i), "segment '" + s.segments[i].name + "' is not attached by a joint");

  auto check_ref = [&](const PointRef& r, const std::string& field) {
    const auto* seg = s.find_segment(r.segment);
    if (!seg) {
      add("UnknownSegment", field, "unknown segment '" + r.segment + "'");
      return;
    }
    if (!detail::find_point(*seg, r.point))
      add("UnknownPoint", field, "unknown point '" + r.point + "' on segment '" + r.segment + "'");
  };

  // Wires.
  if (s.wires.empty()) add("NoWires", "wires", "at least one wire is required");
  std::set<int> ids;
  for (std::size_t i = 0; i < s.wires.size(); ++i) {
    const auto& w = s.wires[i];
    const std::string f = "wires." + std::to_string(i);
    if (w.id < 0 || w.id >= kMaxWires) {
      add("WireIdOutOfRange", f + ".id", "wire id out of range 0–7", w.id);
      continue;
    }
    if (!ids.insert(w.id).second) add("DuplicateWireId", f + ".id", "duplicate wire id", w.id);
    check_ref(w.exit, f + ".exit");
    for (std::size_t k = 0; k < w.via_points.size(); ++k)
      check_ref(w.via_points[k], f + ".via." + std::to_string(k));
    if (w.anchor.is_environment()) {
      if (!detail::all_finite(w.anchor.world)) add("NonFinite", f + ".anchor", "anchor must be finite", w.id);
    } else {
      check_ref(w.anchor.body, f + ".anchor");
      if (w.anchor.body.segment == w.exit.segment)
        add("InternalWireSameSegment", f + ".anchor",
            "body-anchored wire must end on a different segment than its exit", w.id);
    }
    if (!(w.f_max > 0.0)) add("NonPositiveFMax", f + ".f_max", "f_max must be positive", w.id);
  }

  if (!(s.gains.kp > 0.0)) add("NonPositiveGain", "gains.kp", "kp must be > 0");
  if (!(s.gains.kd >= 0.0)) add("NegativeGain", "gains.kd", "kd must be >= 0");

  if (!(s.sim.dt > 0.0 && s.sim.dt <= 0.01))
    add("TimestepOutOfRange", "sim.dt", "dt must lie in (0, 0.01]");
  if (!(s.sim.duration > 0.0)) add("NonPositiveDuration", "sim.duration", "duration must be positive");
  if (s.sim.log_every < 1) add("BadDecimation", "sim.log_every", "log_every must be >= 1");
  if (!(s.sim.compensation_blend >= 0.0))
    add("NegativeBlend", "sim.compensation_blend", "compensation_blend must be >= 0");
  if (std::abs(s.sim.initial_pose.orientation.norm() - 1.0) > 1e-9)
    add("QuaternionNotUnit", "sim.initial_pose.orientation", "orientation must be a unit quaternion");

  auto check_angle = [&](const std::string& joint, double angle, const std::string& field) {
    const auto* j = s.find_joint(joint);
    if (!j) {
      add("UnknownJoint", field, "unknown joint '" + joint + "'");
      return;
    }
    if (angle < j->lower_limit || angle > j->upper_limit)
      add("JointTargetOutOfLimits", field, "angle for joint '" + joint + "' outside its limits");
  };
  for (const auto& [name, angle] : s.sim.initial_joints)
    check_angle(name, angle, "sim.initial_joints." + name);

  if (s.contact.enabled && !(s.contact.stiffness > 0.0 && s.contact.damping >= 0.0 && s.contact.viscous >= 0.0))
    add("BadContact", "contact", "contact stiffness must be > 0 and damping >= 0");

  // Phases.
  if (s.phases.empty()) add("NoPhases", "phases", "at least one phase is required");
  for (std::size_t i = 0; i < s.phases.size(); ++i) {
    const auto& p = s.phases[i];
    const std::string f = "phases." + std::to_string(i);
    if (!(p.duration > 0.0))
      add("NonPositivePhaseDuration", f + ".duration", "phase duration must be positive");
    if (p.name.empty() || p.name.find_first_of(",;\"\r\n") != std::string::npos)
      add("BadPhaseName", f + ".name", "phase name must be non-empty without commas, semicolons, quotes or newlines");
    for (const auto& [id, target] : p.wire_targets) {
      if (!s.find_wire(id)) add("UnknownWire", f + ".wires", "phase references unknown wire", id);
      if (target.kind == WireTarget::Kind::Delta && !std::isfinite(target.delta))
        add("NonFinite", f + ".wires", "wire delta must be finite", id);
    }
    std::set<int> comp;
    for (int id : p.compensation_set) {
      if (!comp.insert(id).second) add("DuplicateCompensationWire", f + ".compensation", "duplicate wire", id);
      const auto* w = s.find_wire(id);
      if (!w) {
        add("UnknownWire", f + ".compensation", "compensation set references unknown wire", id);
      } else if (!w->anchor.is_environment()) {
        add("CompensationNotEnvironment", f + ".compensation",
            "compensation wires must be environment-anchored", id);
      }
      auto it = p.wire_targets.find(id);
      if (it != p.wire_targets.end() && it->second.kind == WireTarget::Kind::Track)
        add("TrackInCompensation", f + ".compensation", "a tracking wire cannot carry weight", id);
    }
    for (const auto& [name, angle] : p.joint_targets)
      check_angle(name, angle, f + ".joints." + name);
  }

  if (s.kick_target) {
    const auto& k = *s.kick_target;
    check_ref(k.foot, "kick_target.foot");
    if (!(k.normal.norm() > 0.0)) add("ZeroNormal", "kick_target.normal", "kick target normal must be non-zero");
  }
  return out;
}

inline bool has_violation(const std::vector<Violation>& v, const std::string& code) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == code; });
}

}  // namespace cubix
