#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cubix/model.hpp"

namespace cubix {

/// A point fixed on a segment, or in the world when `segment == kWorld`.
struct ResolvedPoint {
  static constexpr int kWorld = -1;
  int segment = kWorld;
  Vec3 local = Vec3::Zero();
};

struct ResolvedWire {
  int id = 0;
  std::vector<ResolvedPoint> route;  // exit, via points..., anchor
  bool internal = false;             // anchor on the body
  double f_max = 180.0;
};

/// Floating base plus prescribed revolute joints, with every name resolved to
/// an index. The first segment is the base; its frame origin is the CubiX
/// cube centre.
class BodyModel {
 public:
  BodyModel() = default;

  explicit BodyModel(const Scenario& s) : segments_(s.segments), joints_(s.joints) {
    for (std::size_t i = 0; i < segments_.size(); ++i) segment_index_[segments_[i].name] = static_cast<int>(i);
    for (std::size_t i = 0; i < joints_.size(); ++i) {
      joint_index_[joints_[i].name] = static_cast<int>(i);
      parent_.push_back(segment_index(joints_[i].parent_segment));
      child_.push_back(segment_index(joints_[i].child_segment));
    }
    // Parents before children.
    std::vector<bool> placed(segments_.size(), false);
    if (!segments_.empty()) placed[0] = true;
    while (order_.size() < joints_.size()) {
      const std::size_t before = order_.size();
      for (std::size_t j = 0; j < joints_.size(); ++j) {
        if (placed[child_[j]] || !placed[parent_[j]]) continue;
        placed[child_[j]] = true;
        order_.push_back(static_cast<int>(j));
      }
      if (order_.size() == before) throw ScenarioError("JointCycle", "joints do not form a tree rooted at the base");
    }
    for (const auto& seg : segments_) total_mass_ += seg.mass;
  }

  const std::vector<BodySegment>& segments() const { return segments_; }
  const std::vector<RevoluteJoint>& joints() const { return joints_; }
  const std::vector<int>& joint_order() const { return order_; }
  int joint_parent(int j) const { return parent_[j]; }
  int joint_child(int j) const { return child_[j]; }
  double total_mass() const { return total_mass_; }

  int segment_index(const std::string& name) const {
    auto it = segment_index_.find(name);
    if (it == segment_index_.end()) throw ScenarioError("UnknownSegment", "unknown segment '" + name + "'");
    return it->second;
  }
  int joint_index(const std::string& name) const {
    auto it = joint_index_.find(name);
    if (it == joint_index_.end()) throw ScenarioError("UnknownJoint", "unknown joint '" + name + "'");
    return it->second;
  }

  ResolvedPoint resolve(const PointRef& ref) const {
    const int s = segment_index(ref.segment);
    const auto* p = detail::find_point(segments_[s], ref.point);
    if (!p) throw ScenarioError("UnknownPoint", "unknown point '" + ref.point + "' on segment '" + ref.segment + "'");
    return {s, p->local};
  }

  ResolvedWire resolve(const Wire& w) const {
    ResolvedWire r;
    r.id = w.id;
    r.f_max = w.f_max;
    r.route.push_back(resolve(w.exit));
    for (const auto& v : w.via_points) r.route.push_back(resolve(v));
    if (w.anchor.is_environment()) {
      r.route.push_back({ResolvedPoint::kWorld, w.anchor.world});
    } else {
      r.internal = true;
      r.route.push_back(resolve(w.anchor.body));
    }
    return r;
  }

  /// Joint angle vector in joint declaration order; absent joints are 0.
  std::vector<double> joint_vector(const std::map<std::string, double>& angles) const {
    std::vector<double> q(joints_.size(), 0.0);
    for (const auto& [name, a] : angles) q[joint_index(name)] = a;
    return q;
  }

  /// True when `descendant` is `ancestor` or lies in its subtree.
  bool in_subtree(int ancestor, int descendant) const {
    int s = descendant;
    while (true) {
      if (s == ancestor) return true;
      int parent = -1;
      for (std::size_t j = 0; j < joints_.size(); ++j)
        if (child_[j] == s) parent = parent_[j];
      if (parent < 0) return false;
      s = parent;
    }
  }

 private:
  std::vector<BodySegment> segments_;
  std::vector<RevoluteJoint> joints_;
  std::map<std::string, int> segment_index_;
  std::map<std::string, int> joint_index_;
  std::vector<int> parent_, child_, order_;
  double total_mass_ = 0.0;
};

/// World transform of every segment for one configuration.
struct BodyFrames {
  std::vector<Eigen::Isometry3d> segment;

  Vec3 point(const ResolvedPoint& p) const {
    return p.segment == ResolvedPoint::kWorld ? p.local : Vec3(segment[p.segment] * p.local);
  }
};

inline BodyFrames segment_frames(const BodyModel& model, const Pose& base, const std::vector<double>& angles) {
  const auto& joints = model.joints();
  if (angles.size() != joints.size()) throw ScenarioError("ArityMismatch", "joint angle vector has wrong size");
  BodyFrames f;
  f.segment.assign(model.segments().size(), Eigen::Isometry3d::Identity());
  if (f.segment.empty()) return f;
  f.segment[0].linear() = base.orientation.toRotationMatrix();
  f.segment[0].translation() = base.position;
  for (int j : model.joint_order()) {
    const auto& jt = joints[j];
    const double a = angles[j];
    if (!(a >= jt.lower_limit - 1e-12 && a <= jt.upper_limit + 1e-12))
      throw JointLimitError("joint '" + jt.name + "' angle " + std::to_string(a) + " outside limits");
    const auto& parent = f.segment[model.joint_parent(j)];
    auto& child = f.segment[model.joint_child(j)];
    child.linear() = parent.linear() * Eigen::AngleAxisd(a, jt.axis_in_parent).toRotationMatrix();
    child.translation() = parent * jt.origin_in_parent;
  }
  return f;
}

/// World coordinates of every attachment and contact point keyed by
/// (segment, point).
inline std::map<std::pair<std::string, std::string>, Vec3> forward_kinematics(
    const Pose& base, const std::map<std::string, double>& angles, const BodyModel& model) {
  const BodyFrames f = segment_frames(model, base, model.joint_vector(angles));
  std::map<std::pair<std::string, std::string>, Vec3> out;
  const auto& segs = model.segments();
  for (std::size_t s = 0; s < segs.size(); ++s) {
    for (const auto& p : segs[s].attachment_points) out[{segs[s].name, p.name}] = f.segment[s] * p.local;
    for (const auto& p : segs[s].contact_points) out[{segs[s].name, p.name}] = f.segment[s] * p.local;
  }
  return out;
}

struct CompositeProperties {
  double total_mass = 0.0;
  Vec3 com_world = Vec3::Zero();
  Mat3 inertia_about_com_world = Mat3::Zero();
};

inline CompositeProperties composite_properties(const BodyModel& model, const BodyFrames& frames) {
  CompositeProperties c;
  const auto& segs = model.segments();
  for (std::size_t s = 0; s < segs.size(); ++s) {
    c.total_mass += segs[s].mass;
    c.com_world += segs[s].mass * (frames.segment[s] * segs[s].com_local);
  }
  if (c.total_mass > 0.0) c.com_world /= c.total_mass;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const Mat3 R = frames.segment[s].linear();
    const Vec3 d = frames.segment[s] * segs[s].com_local - c.com_world;
    c.inertia_about_com_world +=
        R * segs[s].inertia_local * R.transpose() + segs[s].mass * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
  }
  return c;
}

inline CompositeProperties composite_properties(const Pose& base, const std::vector<double>& angles, const BodyModel& model) {
  return composite_properties(model, segment_frames(model, base, angles));
}

/// Composite centre of mass expressed in the base frame; depends on joint angles only.
inline Vec3 com_in_base(const BodyModel& model, const std::vector<double>& angles) {
  return composite_properties(Pose{}, angles, model).com_world;
}

struct WireSpan {
  Vec3 from = Vec3::Zero();
  Vec3 to = Vec3::Zero();
  Vec3 direction = Vec3::Zero();  // unit, from -> to
  double length = 0.0;
};

/// Tension t applies force t * direction at point (direction is generally not unit at via points).
struct ForceApplication {
  Vec3 point = Vec3::Zero();
  int segment = ResolvedPoint::kWorld;
  Vec3 direction = Vec3::Zero();
};

struct WireGeometry {
  double total_length = 0.0;
  std::vector<WireSpan> segments;
  std::vector<ForceApplication> force_application;

  /// Net force on the composite body per newton of tension.
  Vec3 net_force_direction() const {
    Vec3 f = Vec3::Zero();
    for (const auto& a : force_application) f += a.direction;
    return f;
  }
  Vec3 net_moment_direction(const Vec3& about) const {
    Vec3 m = Vec3::Zero();
    for (const auto& a : force_application) m += (a.point - about).cross(a.direction);
    return m;
  }
};

inline constexpr double kMinSpan = 1e-9;

/// Polyline through world route points with frictionless zero-radius via
/// points. `segment_of[i]` is the segment point i rides on (kWorld for a fixed
/// environment anchor, which receives no force).
inline WireGeometry wire_geometry(const std::vector<Vec3>& route, const std::vector<int>& segment_of) {
  if (route.size() < 2) throw GeometryError("a wire needs at least two routing points");
  WireGeometry g;
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    const Vec3 d = route[i + 1] - route[i];
    const double len = d.norm();
    if (!(len > kMinSpan)) throw GeometryError("coincident consecutive wire routing points");
    g.segments.push_back({route[i], route[i + 1], d / len, len});
    g.total_length += len;
  }
  const std::size_t n = route.size() - 1;
  for (std::size_t i = 0; i <= n; ++i) {
    if (segment_of[i] == ResolvedPoint::kWorld) continue;
    Vec3 dir = Vec3::Zero();
    if (i > 0) dir -= g.segments[i - 1].direction;  // back toward the previous point
    if (i < n) dir += g.segments[i].direction;      // on toward the next point
    g.force_application.push_back({route[i], segment_of[i], dir});
  }
  return g;
}

inline WireGeometry wire_geometry(const ResolvedWire& wire, const BodyFrames& frames) {
  std::vector<Vec3> pts;
  std::vector<int> segs;
  for (const auto& p : wire.route) {
    pts.push_back(frames.point(p));
    segs.push_back(p.segment);
  }
  return wire_geometry(pts, segs);
}

/// Column i: net wrench (force; moment about `com_world`) of unit tension on
/// active wire i.
inline Eigen::Matrix<double, 6, Eigen::Dynamic> wrench_matrix(const std::vector<const ResolvedWire*>& active,
                                                              const std::vector<const WireGeometry*>& geometries,
                                                              const Vec3& com_world) {
  if (active.empty() || active.size() != geometries.size())
    throw ScenarioError("ArityMismatch", "wrench_matrix needs one geometry per active wire");
  Eigen::Matrix<double, 6, Eigen::Dynamic> W(6, static_cast<Eigen::Index>(active.size()));
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i]->internal)
      throw ScenarioError("InternalWireActive", "wire " + std::to_string(active[i]->id) + " is body-anchored");
    W.col(static_cast<Eigen::Index>(i)) << geometries[i]->net_force_direction(), geometries[i]->net_moment_direction(com_world);
  }
  return W;
}

struct EulerZYX {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  bool gimbal_proximity = false;
};

/// Intrinsic Z-Y-X angles: R = Rz(yaw) Ry(pitch) Rx(roll).
inline EulerZYX euler_zyx(const Quat& q) {
  const Mat3 R = q.normalized().toRotationMatrix();
  EulerZYX e;
  e.pitch = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
  e.roll = std::atan2(R(2, 1), R(2, 2));
  e.yaw = std::atan2(R(1, 0), R(0, 0));
  e.gimbal_proximity = std::abs(e.pitch) > M_PI / 2 - 1e-6;
  return e;
}

inline Quat quat_from_euler_zyx(double roll, double pitch, double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
              Eigen::AngleAxisd(roll, Vec3::UnitX()));
}

}  // namespace cubix
