#pragma once

// JSON scenario documents: strict parsing (unknown keys are errors), defaults,
// canonical serialization and dotted-path overrides.

#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cubix/model.hpp"

namespace cubix {

using Json = nlohmann::ordered_json;

namespace io_detail {

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& what) {
  throw ScenarioError("SchemaError", (path.empty() ? std::string("<root>") : path) + ": " + what);
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline void require_object(const Json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  if (!j.is_object()) schema_fail(path, "expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) schema_fail(join(path, item.key()), "unknown key");
  }
}

inline const Json& member(const Json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) schema_fail(join(path, key), "missing required key");
  return j.at(key);
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) schema_fail(path, "expected a number");
  return j.get<double>();
}

inline double number_or(const Json& j, const std::string& path, const char* key, double fallback) {
  return j.contains(key) ? number(j.at(key), join(path, key)) : fallback;
}

inline std::string string(const Json& j, const std::string& path) {
  if (!j.is_string()) schema_fail(path, "expected a string");
  return j.get<std::string>();
}

inline Vec3 vec3(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) schema_fail(path, "expected an array of 3 numbers");
  return {number(j[0], path + ".0"), number(j[1], path + ".1"), number(j[2], path + ".2")};
}

inline Mat3 mat3(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) schema_fail(path, "expected a 3x3 nested array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = vec3(j[r], path + "." + std::to_string(r)).transpose();
  return m;
}

inline PointRef point_ref(const Json& j, const std::string& path) {
  require_object(j, path, {"segment", "point"});
  return {string(member(j, path, "segment"), path + ".segment"), string(member(j, path, "point"), path + ".point")};
}

inline std::vector<NamedPoint> named_points(const Json& j, const std::string& path) {
  if (!j.is_object()) schema_fail(path, "expected an object of name -> [x, y, z]");
  std::vector<NamedPoint> out;
  for (const auto& item : j.items()) out.push_back({item.key(), vec3(item.value(), join(path, item.key()))});
  return out;
}

inline Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
inline Json to_json(const Mat3& m) {
  return Json::array({to_json(Vec3(m.row(0))), to_json(Vec3(m.row(1))), to_json(Vec3(m.row(2)))});
}
inline Json to_json(const PointRef& r) { return Json{{"segment", r.segment}, {"point", r.point}}; }

inline int wire_id_key(const std::string& key, const std::string& path) {
  try {
    std::size_t used = 0;
    int id = std::stoi(key, &used);
    if (used == key.size()) return id;
  } catch (const std::exception&) {
  }
  schema_fail(path, "wire keys must be integer ids");
}

}  // namespace io_detail

/// Builds a Scenario from a parsed tree without checking invariants.
/// Segment masses and inertias are rescaled so they sum to
/// `constants.total_mass` when that key is given; otherwise total_mass is the
/// segment sum.
inline Scenario scenario_from_json(const Json& root) {
  using namespace io_detail;
  require_object(root, "", {"constants", "segments", "joints", "wires", "gains", "phases", "sim", "contact", "kick_target"});
  Scenario s;

  bool mass_given = false;
  if (root.contains("constants")) {
    const auto& c = root.at("constants");
    require_object(c, "constants", {"gravity", "total_mass", "f_max_per_wire", "wind_rate_max", "pulley_radius", "torque_constant", "gear_ratio"});
    auto& k = s.constants;
    k.gravity = number_or(c, "constants", "gravity", k.gravity);
    mass_given = c.contains("total_mass");
    k.total_mass = number_or(c, "constants", "total_mass", k.total_mass);
    k.f_max_per_wire = number_or(c, "constants", "f_max_per_wire", k.f_max_per_wire);
    k.wind_rate_max = number_or(c, "constants", "wind_rate_max", k.wind_rate_max);
    k.pulley_radius = number_or(c, "constants", "pulley_radius", k.pulley_radius);
    k.torque_constant = number_or(c, "constants", "torque_constant", k.torque_constant);
    k.gear_ratio = number_or(c, "constants", "gear_ratio", k.gear_ratio);
  }

  const auto& segs = member(root, "", "segments");
  if (!segs.is_array()) schema_fail("segments", "expected an array");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string p = "segments." + std::to_string(i);
    const auto& j = segs[i];
    require_object(j, p, {"name", "mass", "com", "inertia", "points", "contacts"});
    BodySegment seg;
    seg.name = string(member(j, p, "name"), p + ".name");
    seg.mass = number(member(j, p, "mass"), p + ".mass");
    if (j.contains("com")) seg.com_local = vec3(j.at("com"), p + ".com");
    if (j.contains("inertia")) seg.inertia_local = mat3(j.at("inertia"), p + ".inertia");
    if (j.contains("points")) seg.attachment_points = named_points(j.at("points"), p + ".points");
    if (j.contains("contacts")) seg.contact_points = named_points(j.at("contacts"), p + ".contacts");
    s.segments.push_back(std::move(seg));
  }
  const double sum = s.segment_mass_sum();
  if (!mass_given) {
    s.constants.total_mass = sum;
  } else if (sum > 0.0 && std::abs(sum - s.constants.total_mass) > 1e-9 * s.constants.total_mass) {
    const double scale = s.constants.total_mass / sum;
    for (auto& seg : s.segments) {
      seg.mass *= scale;
      seg.inertia_local *= scale;
    }
  }

  if (root.contains("joints")) {
    const auto& js = root.at("joints");
    if (!js.is_array()) schema_fail("joints", "expected an array");
    for (std::size_t i = 0; i < js.size(); ++i) {
      const std::string p = "joints." + std::to_string(i);
      const auto& j = js[i];
      require_object(j, p, {"name", "parent", "child", "origin", "axis", "limits", "torque_limit"});
      RevoluteJoint jt;
      jt.name = string(member(j, p, "name"), p + ".name");
      jt.parent_segment = string(member(j, p, "parent"), p + ".parent");
      jt.child_segment = string(member(j, p, "child"), p + ".child");
      if (j.contains("origin")) jt.origin_in_parent = vec3(j.at("origin"), p + ".origin");
      jt.axis_in_parent = vec3(member(j, p, "axis"), p + ".axis");
      if (j.contains("limits")) {
        const auto& l = j.at("limits");
        if (!l.is_array() || l.size() != 2) schema_fail(p + ".limits", "expected [lower, upper]");
        jt.lower_limit = number(l[0], p + ".limits.0");
        jt.upper_limit = number(l[1], p + ".limits.1");
      }
      jt.torque_limit = number_or(j, p, "torque_limit", jt.torque_limit);
      s.joints.push_back(std::move(jt));
    }
  }

  const auto& ws = member(root, "", "wires");
  if (!ws.is_array()) schema_fail("wires", "expected an array");
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const std::string p = "wires." + std::to_string(i);
    const auto& j = ws[i];
    require_object(j, p, {"id", "exit", "via", "anchor", "f_max"});
    Wire w;
    const auto& id = member(j, p, "id");
    if (!id.is_number_integer()) schema_fail(p + ".id", "expected an integer");
    w.id = id.get<int>();
    w.exit = point_ref(member(j, p, "exit"), p + ".exit");
    if (j.contains("via")) {
      const auto& v = j.at("via");
      if (!v.is_array()) schema_fail(p + ".via", "expected an array");
      for (std::size_t k = 0; k < v.size(); ++k) w.via_points.push_back(point_ref(v[k], p + ".via." + std::to_string(k)));
    }
    const auto& a = member(j, p, "anchor");
    if (a.is_object() && a.contains("world")) {
      require_object(a, p + ".anchor", {"world"});
      w.anchor = WireAnchor::environment(vec3(a.at("world"), p + ".anchor.world"));
    } else {
      w.anchor = WireAnchor::on_body(point_ref(a, p + ".anchor"));
    }
    w.f_max = number_or(j, p, "f_max", s.constants.f_max_per_wire);
    s.wires.push_back(std::move(w));
  }

  if (root.contains("gains")) {
    const auto& g = root.at("gains");
    require_object(g, "gains", {"kp", "kd"});
    s.gains.kp = number_or(g, "gains", "kp", s.gains.kp);
    s.gains.kd = number_or(g, "gains", "kd", s.gains.kd);
  }

  const auto& ps = member(root, "", "phases");
  if (!ps.is_array()) schema_fail("phases", "expected an array");
  double phase_total = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::string p = "phases." + std::to_string(i);
    const auto& j = ps[i];
    require_object(j, p, {"name", "duration", "wires", "compensation", "joints", "sync_barrier"});
    Phase ph;
    ph.name = string(member(j, p, "name"), p + ".name");
    ph.duration = number(member(j, p, "duration"), p + ".duration");
    phase_total += ph.duration;
    if (j.contains("wires")) {
      const auto& wt = j.at("wires");
      if (!wt.is_object()) schema_fail(p + ".wires", "expected an object of id -> delta | \"track\" | \"hold\"");
      for (const auto& item : wt.items()) {
        const std::string wp = p + ".wires." + item.key();
        const int wid = wire_id_key(item.key(), wp);
        const auto& v = item.value();
        if (v.is_number()) {
          ph.wire_targets[wid] = WireTarget::wind(v.get<double>());
        } else if (v == "track") {
          ph.wire_targets[wid] = WireTarget::track();
        } else if (v == "hold") {
          ph.wire_targets[wid] = WireTarget::hold();
        } else {
          schema_fail(wp, "expected a number, \"track\" or \"hold\"");
        }
      }
    }
    if (j.contains("compensation")) {
      const auto& cs = j.at("compensation");
      if (!cs.is_array()) schema_fail(p + ".compensation", "expected an array of wire ids");
      for (const auto& id : cs) {
        if (!id.is_number_integer()) schema_fail(p + ".compensation", "expected integer wire ids");
        ph.compensation_set.push_back(id.get<int>());
      }
    }
    if (j.contains("joints")) {
      const auto& jt = j.at("joints");
      if (!jt.is_object()) schema_fail(p + ".joints", "expected an object of joint -> rad");
      for (const auto& item : jt.items()) ph.joint_targets[item.key()] = number(item.value(), p + ".joints." + item.key());
    }
    if (j.contains("sync_barrier")) {
      if (!j.at("sync_barrier").is_boolean()) schema_fail(p + ".sync_barrier", "expected a boolean");
      ph.sync_barrier = j.at("sync_barrier").get<bool>();
    }
    s.phases.push_back(std::move(ph));
  }

  s.sim.duration = phase_total;
  if (root.contains("sim")) {
    const auto& m = root.at("sim");
    require_object(m, "sim", {"dt", "duration", "log_every", "compensation_blend", "initial_pose", "initial_joints", "notes"});
    s.sim.dt = number_or(m, "sim", "dt", s.sim.dt);
    s.sim.duration = number_or(m, "sim", "duration", s.sim.duration);
    if (m.contains("log_every")) {
      if (!m.at("log_every").is_number_integer()) schema_fail("sim.log_every", "expected an integer");
      s.sim.log_every = m.at("log_every").get<int>();
    }
    s.sim.compensation_blend = number_or(m, "sim", "compensation_blend", s.sim.compensation_blend);
    if (m.contains("initial_pose")) {
      const auto& ip = m.at("initial_pose");
      require_object(ip, "sim.initial_pose", {"position", "orientation"});
      if (ip.contains("position")) s.sim.initial_pose.position = vec3(ip.at("position"), "sim.initial_pose.position");
      if (ip.contains("orientation")) {
        const auto& q = ip.at("orientation");
        if (!q.is_array() || q.size() != 4) schema_fail("sim.initial_pose.orientation", "expected [w, x, y, z]");
        s.sim.initial_pose.orientation = Quat(number(q[0], "sim.initial_pose.orientation.0"), number(q[1], "sim.initial_pose.orientation.1"),
                                              number(q[2], "sim.initial_pose.orientation.2"), number(q[3], "sim.initial_pose.orientation.3"));
      }
    }
    if (m.contains("initial_joints")) {
      const auto& ij = m.at("initial_joints");
      if (!ij.is_object()) schema_fail("sim.initial_joints", "expected an object of joint -> rad");
      for (const auto& item : ij.items()) s.sim.initial_joints[item.key()] = number(item.value(), "sim.initial_joints." + item.key());
    }
    if (m.contains("notes")) {
      const auto& n = m.at("notes");
      if (!n.is_array()) schema_fail("sim.notes", "expected an array of strings");
      for (std::size_t i = 0; i < n.size(); ++i) s.sim.notes.push_back(string(n[i], "sim.notes." + std::to_string(i)));
    }
  }

  if (root.contains("contact")) {
    const auto& c = root.at("contact");
    require_object(c, "contact", {"enabled", "stiffness", "damping", "viscous"});
    if (c.contains("enabled")) {
      if (!c.at("enabled").is_boolean()) schema_fail("contact.enabled", "expected a boolean");
      s.contact.enabled = c.at("enabled").get<bool>();
    }
    s.contact.stiffness = number_or(c, "contact", "stiffness", s.contact.stiffness);
    s.contact.damping = number_or(c, "contact", "damping", s.contact.damping);
    s.contact.viscous = number_or(c, "contact", "viscous", s.contact.viscous);
  }

  if (root.contains("kick_target") && !root.at("kick_target").is_null()) {
    const auto& k = root.at("kick_target");
    require_object(k, "kick_target", {"point", "normal", "foot"});
    KickTarget kt;
    kt.point = vec3(member(k, "kick_target", "point"), "kick_target.point");
    kt.normal = vec3(member(k, "kick_target", "normal"), "kick_target.normal");
    kt.foot = point_ref(member(k, "kick_target", "foot"), "kick_target.foot");
    s.kick_target = kt;
  }
  return s;
}

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ScenarioError("ParseError", "parse error at line " + std::to_string(line) + ": " + e.what());
  }
}

inline std::string describe(const std::vector<Violation>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "; " : "") << v[i].label() << " at " << v[i].field << ": " << v[i].message;
  return os.str();
}

/// Parses, applies defaults, resolves references and validates. Throws
/// ScenarioError whose code() is the first violation's code.
inline Scenario load_scenario(const Json& root) {
  Scenario s = scenario_from_json(root);
  if (auto v = validate_scenario(s); !v.empty()) throw ScenarioError(v.front().code, "invalid scenario: " + describe(v));
  return s;
}

inline Scenario load_scenario(const std::string& text) { return load_scenario(parse_json_text(text)); }

inline Json scenario_to_json(const Scenario& s) {
  using io_detail::to_json;
  Json root;
  const auto& k = s.constants;
  root["constants"] = {{"gravity", k.gravity},           {"total_mass", k.total_mass},
                       {"f_max_per_wire", k.f_max_per_wire}, {"wind_rate_max", k.wind_rate_max},
                       {"pulley_radius", k.pulley_radius}, {"torque_constant", k.torque_constant},
                       {"gear_ratio", k.gear_ratio}};
  Json segs = Json::array();
  for (const auto& seg : s.segments) {
    Json pts = Json::object(), cts = Json::object();
    for (const auto& p : seg.attachment_points) pts[p.name] = to_json(p.local);
    for (const auto& p : seg.contact_points) cts[p.name] = to_json(p.local);
    segs.push_back({{"name", seg.name}, {"mass", seg.mass}, {"com", to_json(seg.com_local)},
                    {"inertia", to_json(seg.inertia_local)}, {"points", pts}, {"contacts", cts}});
  }
  root["segments"] = segs;
  Json joints = Json::array();
  for (const auto& j : s.joints)
    joints.push_back({{"name", j.name}, {"parent", j.parent_segment}, {"child", j.child_segment},
                      {"origin", to_json(j.origin_in_parent)}, {"axis", to_json(j.axis_in_parent)},
                      {"limits", Json::array({j.lower_limit, j.upper_limit})}, {"torque_limit", j.torque_limit}});
  root["joints"] = joints;
  Json wires = Json::array();
  for (const auto& w : s.wires) {
    Json via = Json::array();
    for (const auto& v : w.via_points) via.push_back(to_json(v));
    Json anchor = w.anchor.is_environment() ? Json{{"world", to_json(w.anchor.world)}} : to_json(w.anchor.body);
    wires.push_back({{"id", w.id}, {"exit", to_json(w.exit)}, {"via", via}, {"anchor", anchor}, {"f_max", w.f_max}});
  }
  root["wires"] = wires;
  root["gains"] = {{"kp", s.gains.kp}, {"kd", s.gains.kd}};
  Json phases = Json::array();
  for (const auto& p : s.phases) {
    Json targets = Json::object();
    for (const auto& [id, t] : p.wire_targets) {
      const std::string key = std::to_string(id);
      switch (t.kind) {
        case WireTarget::Kind::Delta: targets[key] = t.delta; break;
        case WireTarget::Kind::Track: targets[key] = "track"; break;
        case WireTarget::Kind::Hold: targets[key] = "hold"; break;
      }
    }
    Json joints_t = Json::object();
    for (const auto& [name, a] : p.joint_targets) joints_t[name] = a;
    phases.push_back({{"name", p.name}, {"duration", p.duration}, {"wires", targets},
                      {"compensation", p.compensation_set}, {"joints", joints_t}, {"sync_barrier", p.sync_barrier}});
  }
  root["phases"] = phases;
  const auto& q = s.sim.initial_pose.orientation;
  Json ij = Json::object();
  for (const auto& [name, a] : s.sim.initial_joints) ij[name] = a;
  root["sim"] = {{"dt", s.sim.dt},
                 {"duration", s.sim.duration},
                 {"log_every", s.sim.log_every},
                 {"compensation_blend", s.sim.compensation_blend},
                 {"initial_pose", {{"position", to_json(s.sim.initial_pose.position)}, {"orientation", Json::array({q.w(), q.x(), q.y(), q.z()})}}},
                 {"initial_joints", ij},
                 {"notes", s.sim.notes}};
  root["contact"] = {{"enabled", s.contact.enabled}, {"stiffness", s.contact.stiffness},
                     {"damping", s.contact.damping}, {"viscous", s.contact.viscous}};
  if (s.kick_target) {
    root["kick_target"] = {{"point", to_json(s.kick_target->point)}, {"normal", to_json(s.kick_target->normal)},
                           {"foot", to_json(s.kick_target->foot)}};
  } else {
    root["kick_target"] = nullptr;
  }
  return root;
}

inline std::string serialize_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

/// Applies `a.b.c=value` overrides. Array elements are addressed by index.
/// The value is parsed as JSON when possible and taken as a string otherwise.
inline void apply_override(Json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ScenarioError("BadOverride", "override must look like key.path=value: '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &root;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& key = parts[i];
    const bool last = i + 1 == parts.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (const std::exception&) {
        throw ScenarioError("BadOverride", "'" + path + "': '" + key + "' is not an array index");
      }
      if (idx >= node->size()) throw ScenarioError("BadOverride", "'" + path + "': index out of range");
      node = &(*node)[idx];
    } else if (node->is_object() || node->is_null()) {
      if (!last && !node->contains(key)) throw ScenarioError("BadOverride", "'" + path + "': no key '" + key + "'");
      node = &(*node)[key];
    } else {
      throw ScenarioError("BadOverride", "'" + path + "': cannot descend into a scalar");
    }
  }
  *node = value;
}

/// FNV-1a of the canonical serialization.
inline std::uint64_t scenario_hash(const Scenario& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : scenario_to_json(s).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cubix
