#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cubix/control.hpp"
#include "cubix/dynamics.hpp"
#include "cubix/planner.hpp"
#include "cubix/tension.hpp"

namespace cubix {

struct Event {
  enum class Kind { TouchDown, KickContact };
  Kind kind = Kind::TouchDown;
  long tick = 0;
  double t = 0.0;
  std::string point;            // "segment.point"
  double approach_speed = 0.0;  // KickContact only, m/s along -normal
  std::string phase;

  std::string label() const {
    return std::string(kind == Kind::TouchDown ? "TouchDown" : "KickContact") + "(" + point + ")";
  }
};

/// First ground contact of each contact point, and the first crossing of the
/// kick plane by the kicking foot.
class EventDetector {
 public:
  explicit EventDetector(const SystemModel& m) : model_(m) {
    if (const auto& k = m.scenario().kick_target) {
      foot_ = m.body().resolve(k->foot);
      normal_ = k->normal.normalized();
      plane_ = k->point;
      foot_name_ = k->foot.segment + "." + k->foot.point;
      kick_ = true;
    }
  }

  std::vector<Event> detect(const SimState& s, const StateGeometry& g, const std::string& phase) {
    std::vector<Event> out;
    if (model_.scenario().contact.enabled) {
      for (const auto& c : model_.contacts()) {
        const std::string name = c.segment + "." + c.name;
        if (touched_.count(name)) continue;
        if (g.frames.point(c.point).z() < 0.0) {
          touched_.insert(name);
          out.push_back({Event::Kind::TouchDown, s.tick, s.time, name, 0.0, phase});
        }
      }
    }
    if (kick_ && !kicked_) {
      const Vec3 p = g.frames.point(foot_);
      const double d = (p - plane_).dot(normal_);
      if (have_prev_ && prev_distance_ > 0.0 && d <= 0.0) {
        kicked_ = true;
        const double speed = -point_velocity(s, g, p).dot(normal_);
        out.push_back({Event::Kind::KickContact, s.tick, s.time, foot_name_, speed, phase});
      }
      prev_distance_ = d;
      have_prev_ = true;
    }
    return out;
  }

 private:
  const SystemModel& model_;
  std::set<std::string> touched_;
  bool kick_ = false;
  bool kicked_ = false;
  bool have_prev_ = false;
  double prev_distance_ = 0.0;
  ResolvedPoint foot_;
  Vec3 normal_ = Vec3::UnitX();
  Vec3 plane_ = Vec3::Zero();
  std::string foot_name_;
};

struct LogRow {
  long tick = 0;
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  EulerZYX attitude;
  PerWire<double> l = zero_per_wire();
  PerWire<double> l_dot = zero_per_wire();
  PerWire<double> f_ff = zero_per_wire();
  PerWire<double> f_ref = zero_per_wire();
  PerWire<double> i_ref = zero_per_wire();
  int phase_index = 0;
  std::string phase;
  std::vector<std::string> events;
};

struct TrajectoryLog {
  double dt = 0.001;
  int log_every = 1;
  PerWire<bool> wire_present{};
  std::vector<std::string> phase_names;
  std::vector<long> phase_start;  // tick each wire phase was entered
  std::vector<LogRow> rows;       // one per tick, t = tick * dt
  std::vector<Event> events;
};

/// Everything the controller saw and produced on one tick.
struct TickContext {
  const SystemModel& model;
  const SimState& state;
  const StateGeometry& geometry;
  const PlannerOutput& plan;
  const TensionCommand& command;
  const PerWire<double>& f_ff;
  const PerWire<double>& f_ref;
};

using TickObserver = std::function<void(const TickContext&)>;

/// Weight feedforward for the planner's compensation sets, cross-faded while
/// the set changes.
inline PerWire<double> blended_feedforward(const SystemModel& m, const StateGeometry& g, const PlannerOutput& p) {
  const double weight = g.composite.total_mass * m.scenario().constants.gravity;
  auto solve = [&](const std::vector<int>& set) { return set.empty() ? zero_per_wire() : gravity_feedforward(m, set, g, weight); };
  PerWire<double> now = solve(p.compensation);
  if (p.blend >= 1.0) return now;
  const PerWire<double> before = solve(p.previous_compensation);
  for (int id = 0; id < kMaxWires; ++id) now[id] = (1.0 - p.blend) * before[id] + p.blend * now[id];
  return now;
}

inline std::string format_time(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", t);
  return buf;
}

/// Runs the scenario from t = 0 to its duration. Rows hold the state at the
/// start of each tick together with the command applied during that tick.
inline TrajectoryLog run(const SystemModel& m, const TickObserver& observer = {}) {
  const Scenario& sc = m.scenario();
  const double dt = sc.sim.dt;
  SimState s = initial_state(m);

  PerWire<std::optional<double>> lengths;
  for (const auto& w : m.wires()) lengths[w.id] = s.wire_lengths[w.id];
  Planner planner(compile(sc.phases, dt, lengths, m.body(), s.joint_angles), sc.sim.compensation_blend);
  const CompiledPlan& plan = planner.plan();
  EventDetector detector(m);

  TrajectoryLog log;
  log.dt = dt;
  log.log_every = sc.sim.log_every;
  log.phase_names = plan.phase_names;
  for (const auto& w : m.wires()) log.wire_present[w.id] = true;

  const long last = std::lround(sc.sim.duration / dt);
  log.rows.reserve(static_cast<std::size_t>(last + 1));
  std::vector<SyncMessage> inbox;
  int entered = -1;
  for (long k = 0; k <= last; ++k) {
    const StateGeometry g = evaluate_geometry(m, s);
    const PlannerOutput p = planner.tick(k, inbox, s.wire_lengths);
    inbox = p.sent;
    while (entered < p.wire_phase) {
      log.phase_start.push_back(k);
      ++entered;
    }
    const std::string& phase = plan.phase_names[p.wire_phase];

    PerWire<double> f_ff;
    try {
      f_ff = blended_feedforward(m, g, p);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("t=" + format_time(s.time) + " s, phase '" + phase + "': " + e.what());
    }

    std::vector<double> l_ref, l, l_dot, ff, fmax;
    for (const auto& w : m.wires()) {
      const bool track = p.tracking[w.id];
      l_ref.push_back(track ? s.wire_lengths[w.id] : p.l_ref[w.id]);
      l.push_back(s.wire_lengths[w.id]);
      l_dot.push_back(track ? 0.0 : s.wire_rates[w.id]);
      ff.push_back(f_ff[w.id]);
      fmax.push_back(w.f_max);
    }
    const TensionCommand cmd = pd_tension(l_ref, l, l_dot, sc.gains, ff, fmax, sc.constants);
    PerWire<double> f_ref = zero_per_wire();
    LogRow row;
    for (std::size_t i = 0; i < m.wires().size(); ++i) {
      const int id = m.wires()[i].id;
      f_ref[id] = cmd.f_ref[i];
      row.f_ref[id] = cmd.f_ref[i];
      row.i_ref[id] = cmd.i_ref[i];
      row.l[id] = s.wire_lengths[id];
      row.l_dot[id] = s.wire_rates[id];
      row.f_ff[id] = f_ff[id];
    }
    row.tick = k;
    row.t = s.time;
    row.position = s.base_pose.position;
    row.attitude = euler_zyx(s.base_pose.orientation);
    row.phase_index = p.wire_phase;
    row.phase = phase;
    for (auto& e : detector.detect(s, g, phase)) {
      row.events.push_back(e.label());
      log.events.push_back(std::move(e));
    }
    log.rows.push_back(std::move(row));
    if (observer) observer(TickContext{m, s, g, p, cmd, f_ff, f_ref});

    if (k < last) s = step(m, s, f_ref, plan.joint_reference(k + 1));
  }
  return log;
}

}  // namespace cubix
