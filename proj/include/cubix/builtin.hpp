#pragma once

// Built-in scenarios. All share one five-segment body: the CubiX cube bolted to
// the pelvis forms the floating base; torso, head and two straight legs hang
// off it on prescribed revolute joints. Wire exits are laid out around the
// composite centre of mass of each start pose so the start is at rest.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cubix/dynamics.hpp"
#include "cubix/statics.hpp"

namespace cubix {

inline constexpr double kCeiling = 3.0;  // m, height of the environment anchors
inline constexpr double kSplay = 0.25;   // m, outward anchor offset of the splayed rigs

namespace builtin_detail {

inline Mat3 diag(double a, double b, double c) { return Vec3(a, b, c).asDiagonal(); }

inline BodySegment& segment(Scenario& s, const std::string& name) {
  for (auto& seg : s.segments)
    if (seg.name == name) return seg;
  throw ScenarioError("UnknownSegment", name);
}

inline void attach(Scenario& s, const std::string& seg, const std::string& name, const Vec3& local) {
  segment(s, seg).attachment_points.push_back({name, local});
}

/// Base frame: origin at the cube centre, x forward, y left, z up when standing.
/// The cube sits on the lower back, the pelvis in front of it.
inline Scenario musashi_body() {
  Scenario s;
  s.segments = {
      {"base", 13.0, Vec3(0.08, 0.0, -0.05), diag(0.22, 0.20, 0.18), {}, {}},
      {"torso", 17.0, Vec3(0.0, 0.0, 0.28), diag(0.60, 0.50, 0.15), {},
       {{"chest", Vec3(0.13, 0.0, 0.35)}}},
      {"head", 3.6, Vec3(0.02, 0.0, 0.12), diag(0.02, 0.02, 0.015), {}, {{"face", Vec3(0.11, 0.0, 0.12)}}},
      {"leg_l", 5.5, Vec3(0.0, 0.0, -0.40), diag(0.30, 0.30, 0.02), {},
       {{"knee_l", Vec3(0.07, 0.0, -0.45)}, {"sole_l", Vec3(0.05, 0.0, -0.85)}}},
      {"leg_r", 5.5, Vec3(0.0, 0.0, -0.40), diag(0.30, 0.30, 0.02), {},
       {{"knee_r", Vec3(0.07, 0.0, -0.45)}, {"sole_r", Vec3(0.05, 0.0, -0.85)}}},
  };
  // Positive waist and neck angles bend forward; negative hip angles swing the leg forward.
  s.joints = {
      {"waist", "base", "torso", Vec3(0.12, 0.0, 0.05), Vec3::UnitY(), -0.4, 1.6, 150.0},
      {"neck", "torso", "head", Vec3(0.0, 0.0, 0.52), Vec3::UnitY(), -0.7, 1.0, 30.0},
      {"hip_l", "base", "leg_l", Vec3(0.12, 0.10, -0.12), Vec3::UnitY(), -1.9, 0.6, 120.0},
      {"hip_r", "base", "leg_r", Vec3(0.12, -0.10, -0.12), Vec3::UnitY(), -1.9, 0.6, 120.0},
  };
  s.constants.total_mass = s.segment_mass_sum();
  return s;
}

inline Vec3 com_base(const Scenario& s) {
  const BodyModel body(s);
  return com_in_base(body, body.joint_vector(s.sim.initial_joints));
}

/// Lowest contact point height for the start pose.
inline double lowest_contact(const Scenario& s) {
  const BodyModel body(s);
  const auto pts = forward_kinematics(s.sim.initial_pose, s.sim.initial_joints, body);
  double z = INFINITY;
  for (const auto& seg : s.segments)
    for (const auto& p : seg.contact_points) z = std::min(z, pts.at({seg.name, p.name}).z());
  return z;
}

/// Raises or lowers the start pose so the lowest contact point sits at `clearance`.
inline void set_clearance(Scenario& s, double clearance) {
  s.sim.initial_pose.position.z() += clearance - lowest_contact(s);
}

/// Environment wire from a base attachment up to the ceiling, its anchor
/// shifted horizontally by `splay` from directly above the exit. Splayed rigs
/// keep wires on both sides of the body so the weight can be balanced without
/// sideways force.
inline void ceiling_wire(Scenario& s, int id, const Vec3& exit_local, const Vec3& splay = Vec3::Zero()) {
  const std::string name = "exit" + std::to_string(id);
  attach(s, "base", name, exit_local);
  const Vec3 w = s.sim.initial_pose.position + s.sim.initial_pose.orientation * exit_local;
  s.wires.push_back({id, {"base", name}, {}, WireAnchor::environment(Vec3(w.x() + splay.x(), w.y() + splay.y(), kCeiling)), 180.0});
}

/// Horizontal outward offset of length `r` from `centre` through `exit` (world).
inline Vec3 radial(const Scenario& s, const Vec3& exit_local, const Vec3& centre_local, double r) {
  const Quat& q = s.sim.initial_pose.orientation;
  Vec3 d = q * (exit_local - centre_local);
  d.z() = 0.0;
  return r * d.normalized();
}

inline void finish(Scenario& s) {
  s.constants.total_mass = s.segment_mass_sum();
  for (auto& w : s.wires) w.f_max = s.constants.f_max_per_wire;
  s.sim.duration = 0.0;
  for (const auto& p : s.phases) s.sim.duration += p.duration;
}

inline std::map<std::string, double> joint_map(const BodyModel& body, const std::vector<double>& q) {
  std::map<std::string, double> out;
  for (std::size_t j = 0; j < q.size(); ++j) out[body.joints()[j].name] = q[j];
  return out;
}

/// Quasi-static walk through one phase: references and joints ramp from
/// `from` to `to` in `steps` increments, each solve seeded by the previous.
inline StaticPose walk(const SystemModel& m, const StaticLoad& from, const StaticLoad& to, const Pose& guess, int steps) {
  StaticPose sol;
  sol.pose = guess;
  for (int k = 1; k <= steps; ++k) {
    const double a = static_cast<double>(k) / steps;
    StaticLoad load = to;
    for (std::size_t j = 0; j < load.joints.size(); ++j) load.joints[j] = from.joints[j] + a * (to.joints[j] - from.joints[j]);
    for (int id = 0; id < kMaxWires; ++id) load.l_ref[id] = from.l_ref[id] + a * (to.l_ref[id] - from.l_ref[id]);
    sol = static_equilibrium(m, load, sol.pose);
  }
  return sol;
}

inline PerWire<double> lengths_at(const SystemModel& m, const Pose& pose, const std::vector<double>& q) {
  const StateGeometry g = evaluate_geometry(m, pose, q);
  PerWire<double> l = zero_per_wire();
  for (const auto& w : m.wires()) l[w.id] = g.wires[w.id]->total_length;
  return l;
}

/// Bisection for f(x) = 0 on [lo, hi] where f changes sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 40) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace builtin_detail

/// Upright body hanging from `n` vertical wires placed on a circle around the
/// centre of mass, holding still for `duration` seconds.
inline Scenario hover_scenario(int n, double duration = 5.0) {
  using namespace builtin_detail;
  Scenario s = musashi_body();
  s.sim.initial_pose.position = Vec3(0.0, 0.0, 1.0);
  const Vec3 c = com_base(s);
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n + (n == 4 ? M_PI / 4 : 0.0);
    const double r = n == 1 ? 0.0 : 0.12;
    ceiling_wire(s, i, Vec3(c.x() + r * std::cos(a), c.y() + r * std::sin(a), 0.12));
  }
  Phase hold{"Hover", duration, {}, {}, {}, false};
  for (int i = 0; i < n; ++i) hold.compensation_set.push_back(i);
  s.phases = {hold};
  s.sim.notes = {"symmetric vertical wires around the centre of mass"};
  finish(s);
  return s;
}

/// Four ceiling wires on the cube top, anchors splayed outward, wind 0.53 m
/// while the body hangs upright with its feet just off the ground.
inline Scenario pull_up_scenario() {
  using namespace builtin_detail;
  Scenario s = musashi_body();
  s.sim.initial_pose.position = Vec3(0.0, 0.0, 1.0);
  set_clearance(s, 0.05);
  const Vec3 c = com_base(s);
  const double a = 0.1;
  const Vec3 exits[] = {{c.x() + a, c.y() + a, 0.12}, {c.x() + a, c.y() - a, 0.12}, {c.x() - a, c.y() - a, 0.12},
                        {c.x() - a, c.y() + a, 0.12}};
  for (int i = 0; i < 4; ++i) ceiling_wire(s, i, exits[i], radial(s, exits[i], c, kSplay));
  Phase up{"Pull-up", 40.0, {}, {0, 1, 2, 3}, {}, false};
  for (int i = 0; i < 4; ++i) up.wire_targets[i] = WireTarget::wind(-0.53);
  Phase settle{"Hold", 5.0, {}, {0, 1, 2, 3}, {}, false};
  s.phases = {up, settle};
  s.sim.notes = {"anchors on a 3 m ceiling directly above the wire exits",
                 "wire exits centred on the composite centre of mass"};
  finish(s);
  return s;
}

/// Wire strokes of the rising motion. Defaults were tuned by simulation so the
/// body ends upright and both feet reach the ground during Landing.
struct RisingStrokes {
  double lift = -1.0;             // lifting wires 2-5
  double offload = -0.1;          // internal wires 0-1, about 50 N of preload
  double rotate_cube = -0.2;      // wires 3-4 during Rotation
  double rotate_shoulder = -0.8;  // wires 6-7 during Rotation
  double land = 0.7;              // payout of 3-4 during Landing
  double land_shoulder = 0.6;     // payout of 6-7 during Landing
  double lean_lift = 0.9;         // m, fore-aft anchor offset of the lifting wires
  double lean_shoulder = 0.7;     // m, backward anchor offset of the shoulder wires
  double blend = 5.0;             // s, compensation cross-fade
  double splay_lift = kSplay;     // m, sideways anchor offset of the lifting wires
  double splay_shoulder = 0.4;    // m, sideways anchor offset of the shoulder wires
};

/// Prone start, lift, rotate upright in the air, land on both feet.
inline Scenario rising_scenario(const RisingStrokes& k = {}) {
  using namespace builtin_detail;
  Scenario s = musashi_body();
  const double pitch0 = 1.47;
  s.sim.initial_pose.orientation = quat_from_euler_zyx(0.0, pitch0, 0.0);
  s.sim.initial_pose.position = Vec3(0.0, 0.0, 0.5);
  set_clearance(s, 0.02);
  const Vec3 c = com_base(s);
  const Quat& q0 = s.sim.initial_pose.orientation;

  // Four lifting wires on the back face of the cube, centred on the COM.
  // Foot-side anchors lean toward the feet, head-side ones toward the head.
  const double a = 0.10, back = -0.12;
  const std::pair<int, Vec3> lifters[] = {
      {2, {back, -a, c.z() - a}},  // foot side, right
      {3, {back, -a, c.z() + a}},  // head side, right
      {4, {back, a, c.z() + a}},   // head side, left
      {5, {back, a, c.z() - a}},   // foot side, left
  };
  for (const auto& [id, e] : lifters) {
    const Vec3 d = q0 * (e - c);
    ceiling_wire(s, id, e, Vec3(d.x() > 0 ? k.lean_lift : -k.lean_lift, d.y() > 0 ? k.splay_lift : -k.splay_lift, 0.0));
  }

  // Waist-offload wires: cube to the back of the shoulders.
  attach(s, "torso", "shoulder_back_l", Vec3(-0.12, 0.15, 0.42));
  attach(s, "torso", "shoulder_back_r", Vec3(-0.12, -0.15, 0.42));
  attach(s, "base", "exit0", Vec3(back, -0.08, 0.10));
  attach(s, "base", "exit1", Vec3(back, 0.08, 0.10));
  s.wires.push_back({0, {"base", "exit0"}, {}, WireAnchor::on_body({"torso", "shoulder_back_r"}), 180.0});
  s.wires.push_back({1, {"base", "exit1"}, {}, WireAnchor::on_body({"torso", "shoulder_back_l"}), 180.0});

  // Rotation wires: cube, over the shoulders, up to anchors leaning back
  // toward the cube.
  attach(s, "torso", "shoulder_l", Vec3(-0.06, 0.18, 0.46));
  attach(s, "torso", "shoulder_r", Vec3(-0.06, -0.18, 0.46));
  attach(s, "base", "exit6", Vec3(back, -0.12, 0.12));
  attach(s, "base", "exit7", Vec3(back, 0.12, 0.12));
  {
    const BodyModel body(s);
    const auto pts = forward_kinematics(s.sim.initial_pose, s.sim.initial_joints, body);
    for (const auto& [id, side] : {std::pair{6, "r"}, std::pair{7, "l"}}) {
      const Vec3 sh = pts.at({"torso", std::string("shoulder_") + side});
      const Vec3 anchor(sh.x() - k.lean_shoulder, sh.y() + (sh.y() > 0 ? k.splay_shoulder : -k.splay_shoulder), kCeiling);
      s.wires.push_back({id, {"base", "exit" + std::to_string(id)}, {{"torso", std::string("shoulder_") + side}},
                         WireAnchor::environment(anchor), 180.0});
    }
  }

  Phase lifting{"Lifting", 30.0, {}, {2, 3, 4, 5}, {{"neck", 0.4}, {"hip_l", -0.6}, {"hip_r", -0.6}}, false};
  for (int id : {2, 3, 4, 5}) lifting.wire_targets[id] = WireTarget::wind(k.lift);
  lifting.wire_targets[0] = WireTarget::wind(k.offload);
  lifting.wire_targets[1] = WireTarget::wind(k.offload);
  lifting.wire_targets[6] = WireTarget::track();
  lifting.wire_targets[7] = WireTarget::track();

  Phase rotation{"Rotation", 20.0, {}, {3, 4, 6, 7}, {{"neck", 0.0}, {"hip_l", 0.0}, {"hip_r", 0.0}}, true};
  rotation.wire_targets[2] = WireTarget::track();
  rotation.wire_targets[5] = WireTarget::track();
  for (int id : {3, 4}) rotation.wire_targets[id] = WireTarget::wind(k.rotate_cube);
  for (int id : {6, 7}) rotation.wire_targets[id] = WireTarget::wind(k.rotate_shoulder);

  Phase landing{"Landing", 15.0, {}, {3, 4, 6, 7}, {}, true};
  landing.wire_targets[2] = WireTarget::track();
  landing.wire_targets[5] = WireTarget::track();
  for (int id : {3, 4}) landing.wire_targets[id] = WireTarget::wind(k.land);
  for (int id : {6, 7}) landing.wire_targets[id] = WireTarget::wind(k.land_shoulder);

  s.phases = {lifting, rotation, landing};
  s.sim.compensation_blend = k.blend;
  s.sim.notes = {"start pitch 1.47 rad instead of pi/2 keeps the Z-Y-X angles away from gimbal lock",
                 "rotation strokes tuned by simulation so the body ends upright",
                 "landing pays out a fixed length; there is no ground sensing"};
  finish(s);
  return s;
}

/// Upright hang, roll onto the left side with the right leg raised, then a
/// forward-pulling wire on the right of the cube swings the body so the right
/// foot crosses the target plane.
struct KickStrokes {
  double hip_lean = -0.8;   // right hip during Phase 1
  double hip_swing = -1.1;  // right hip during Phase 2
  double roll = 0.04;       // m, right wires wound and left wires paid out in Phase 1
  double swing = -0.3;      // m, forward wire 1 during Phase 2
  double fore_aft = 0.09;   // m, half spacing of the hangers along x
  double lateral = 0.11;    // m, half spacing of the hangers along y
  double via_height = 0.46; // m, height of the torso via-points above the waist
  double splay = 0.7;       // m, outward anchor offset of the hangers
};

inline Scenario kick_scenario(const KickStrokes& k = {}) {
  using namespace builtin_detail;
  Scenario s = musashi_body();
  s.sim.initial_pose.position = Vec3(0.0, 0.0, 1.0);
  set_clearance(s, 0.05);
  const Vec3 c = com_base(s);
  const double a = k.fore_aft, b = k.lateral;
  // Hangers leave the top of the cube and pass over the upper torso, so the
  // body hangs well below its suspension points.
  const Vec3 h(c.x(), c.y(), 0.12);
  const Vec3 waist = s.joints[0].origin_in_parent;
  const Vec3 v(h.x() - waist.x(), h.y(), k.via_height);
  const std::pair<int, Vec3> hangers[] = {
      {3, Vec3(a, -b, 0)},   // front right
      {6, Vec3(-a, -b, 0)},  // back right
      {4, Vec3(a, b, 0)},    // front left
      {7, Vec3(-a, b, 0)},   // back left
  };
  {
    const BodyModel body(s);
    const auto frames = segment_frames(body, s.sim.initial_pose, body.joint_vector(s.sim.initial_joints));
    const auto& torso = frames.segment[body.segment_index("torso")];
    for (const auto& [id, off] : hangers) {
      const std::string exit = "exit" + std::to_string(id), via = "hanger" + std::to_string(id);
      attach(s, "base", exit, h + off);
      attach(s, "torso", via, v + off);
      const Vec3 w = torso * (v + off);
      const Vec3 d = k.splay * Vec3(off.x(), off.y(), 0.0).normalized();
      s.wires.push_back({id, {"base", exit}, {{"torso", via}}, WireAnchor::environment(Vec3(w.x() + d.x(), w.y() + d.y(), kCeiling)), 180.0});
    }
  }

  attach(s, "base", "exit1", Vec3(c.x(), -0.12, 0.0));
  {
    const Vec3 e = s.sim.initial_pose.position + Vec3(c.x(), -0.12, 0.0);
    s.wires.push_back({1, {"base", "exit1"}, {}, WireAnchor::environment(Vec3(e.x() + 2.0, e.y(), e.z())), 180.0});
  }

  Phase lean{"Phase 1", 20.0, {}, {3, 4, 6, 7}, {{"hip_r", k.hip_lean}}, false};
  lean.wire_targets[3] = WireTarget::wind(-k.roll);
  lean.wire_targets[6] = WireTarget::wind(-k.roll);
  lean.wire_targets[4] = WireTarget::wind(k.roll);
  lean.wire_targets[7] = WireTarget::wind(k.roll);
  Phase swing{"Phase 2", 10.0, {}, {3, 4, 6, 7}, {{"hip_r", k.hip_swing}}, true};
  swing.wire_targets[1] = WireTarget::wind(k.swing);
  s.phases = {lean, swing};
  s.sim.notes = {"kick target plane placed 60% of the way between the quasi-static right-foot positions "
                 "at the ends of the two phases"};
  finish(s);

  const SystemModel m(s);
  const BodyModel& body = m.body();
  const std::vector<double> q0 = body.joint_vector(s.sim.initial_joints);
  const PerWire<double> l0 = lengths_at(m, s.sim.initial_pose, q0);
  StaticLoad start{q0, l0, lean.compensation_set, {}};
  StaticLoad leaned = start;
  leaned.joints = body.joint_vector(lean.joint_targets);
  for (const auto& [id, t] : lean.wire_targets) leaned.l_ref[id] += t.delta;
  const StaticPose p1 = walk(m, start, leaned, s.sim.initial_pose, 20);
  StaticLoad swung = leaned;
  swung.joints = body.joint_vector(swing.joint_targets);
  swung.l_ref[1] += swing.wire_targets[1].delta;
  const StaticPose p2 = walk(m, leaned, swung, p1.pose, 20);

  const ResolvedPoint foot = body.resolve(PointRef{"leg_r", "sole_r"});
  const Vec3 f1 = segment_frames(body, p1.pose, leaned.joints).point(foot);
  const Vec3 f2 = segment_frames(body, p2.pose, swung.joints).point(foot);
  s.kick_target = KickTarget{f1 + 0.6 * (f2 - f1), (f1 - f2).normalized(), {"leg_r", "sole_r"}};
  return s;
}

inline std::vector<std::string> builtin_names() { return {"pull_up", "rising", "kick"}; }

inline Scenario builtin_scenario(const std::string& name) {
  if (name == "pull_up") return pull_up_scenario();
  if (name == "rising") return rising_scenario();
  if (name == "kick") return kick_scenario();
  throw ScenarioError("UnknownBuiltin", "no built-in scenario named '" + name + "'");
}

}  // namespace cubix
