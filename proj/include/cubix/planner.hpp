#pragma once

// Phased motion scripts. Each phase becomes an integer number of ticks; wire
// references and joint angles move linearly in tick count so the compiled
// schedule and the runtime planner produce bit-identical values.
//
// Two planners share one script. The body planner follows the nominal phase
// clock, drives the joints and announces each phase start. The suspension
// planner drives the wires and, at phases marked as barriers, waits until the
// body planner has announced that phase.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cubix/kinematics.hpp"

namespace cubix {

struct SyncMessage {
  std::string sender;
  int phase_index = 0;
  double timestamp = 0.0;
};

inline long phase_ticks(double duration, double dt) {
  return std::max(1L, std::lround(duration / dt));
}

/// Linear ramp by tick count, shared by compile() and the runtime planner.
inline double ramp(double start, double delta, long elapsed, long ticks) {
  if (elapsed >= ticks) return start + delta;
  return start + delta * (static_cast<double>(elapsed) / static_cast<double>(ticks));
}

struct WireSegment {
  WireTarget::Kind kind = WireTarget::Kind::Hold;
  double start = 0.0;   // NaN when it follows a Track segment (known only at runtime)
  double delta = 0.0;
};

struct JointSegment {
  double from = 0.0;
  double to = 0.0;
};

struct CompiledPlan {
  double dt = 0.001;
  std::vector<std::string> phase_names;
  std::vector<long> phase_start;  // nominal tick each phase begins
  std::vector<long> phase_length;
  std::vector<bool> barrier;
  std::vector<std::vector<int>> compensation;
  PerWire<bool> has_wire{};
  PerWire<double> initial_length = zero_per_wire();
  PerWire<std::vector<WireSegment>> wires;
  std::vector<std::vector<JointSegment>> joints;  // [joint][phase]
  std::vector<double> initial_joints;

  std::size_t phase_count() const { return phase_start.size(); }
  long total_ticks() const { return phase_start.back() + phase_length.back(); }

  /// Phase index on the nominal clock; the last phase persists past the end.
  int nominal_phase(long tick) const {
    int k = 0;
    for (std::size_t i = 1; i < phase_start.size(); ++i)
      if (tick >= phase_start[i]) k = static_cast<int>(i);
    return k;
  }

  /// Nominal wire reference. Track phases return `measured`; segments after a
  /// Track phase are undefined here and yield NaN.
  double wire_reference(int id, long tick, double measured = std::numeric_limits<double>::quiet_NaN()) const {
    const int k = nominal_phase(tick);
    const auto& seg = wires[id][k];
    if (seg.kind == WireTarget::Kind::Track) return measured;
    return ramp(seg.start, seg.delta, tick - phase_start[k], phase_length[k]);
  }

  std::vector<double> joint_reference(long tick) const {
    const int k = nominal_phase(tick);
    std::vector<double> q(joints.size());
    for (std::size_t j = 0; j < joints.size(); ++j) {
      const auto& s = joints[j][k];
      q[j] = ramp(s.from, s.to - s.from, tick - phase_start[k], phase_length[k]);
    }
    return q;
  }
};

/// Converts phases to tick schedules starting from the initial wire lengths
/// and joint angles. Throws ScenarioError("NonPositiveTargetLength") if any
/// reference would reach zero or below.
inline CompiledPlan compile(const std::vector<Phase>& phases, double dt, const PerWire<std::optional<double>>& initial_lengths,
                            const BodyModel& body, const std::vector<double>& initial_joints) {
  if (phases.empty()) throw ScenarioError("NoPhases", "at least one phase is required");
  CompiledPlan p;
  p.dt = dt;
  p.initial_joints = initial_joints;
  long t = 0;
  for (const auto& ph : phases) {
    p.phase_names.push_back(ph.name);
    p.phase_start.push_back(t);
    p.phase_length.push_back(phase_ticks(ph.duration, dt));
    p.barrier.push_back(ph.sync_barrier);
    p.compensation.push_back(ph.compensation_set);
    t += p.phase_length.back();
  }

  for (int id = 0; id < kMaxWires; ++id) {
    if (!initial_lengths[id]) continue;
    p.has_wire[id] = true;
    p.initial_length[id] = *initial_lengths[id];
    double start = *initial_lengths[id];
    for (std::size_t k = 0; k < phases.size(); ++k) {
      WireTarget target;
      if (auto it = phases[k].wire_targets.find(id); it != phases[k].wire_targets.end()) target = it->second;
      WireSegment seg{target.kind, start, target.kind == WireTarget::Kind::Delta ? target.delta : 0.0};
      if (target.kind == WireTarget::Kind::Track) {
        seg.start = std::numeric_limits<double>::quiet_NaN();
        start = seg.start;
      } else {
        start = seg.start + seg.delta;
        if (!std::isnan(start) && !(start > 0.0))
          throw ScenarioError("NonPositiveTargetLength", "wire " + std::to_string(id) + " reference reaches " +
                                                             std::to_string(start) + " m in phase '" + phases[k].name + "'");
      }
      p.wires[id].push_back(seg);
    }
  }

  const auto& joints = body.joints();
  if (initial_joints.size() != joints.size()) throw ScenarioError("ArityMismatch", "initial joint vector has wrong size");
  p.joints.resize(joints.size());
  for (std::size_t j = 0; j < joints.size(); ++j) {
    double from = initial_joints[j];
    for (const auto& ph : phases) {
      double to = from;
      if (auto it = ph.joint_targets.find(joints[j].name); it != ph.joint_targets.end()) to = it->second;
      p.joints[j].push_back({from, to});
      from = to;
    }
  }
  return p;
}

struct PlannerOutput {
  PerWire<double> l_ref = zero_per_wire();
  PerWire<bool> tracking{};
  std::vector<double> joint_ref;
  int body_phase = 0;     // nominal clock
  int wire_phase = 0;     // suspension planner, lags at barriers
  bool waiting = false;   // suspension planner is holding at a barrier
  std::vector<int> compensation;           // set now in effect
  std::vector<int> previous_compensation;  // set being faded out
  double blend = 1.0;                      // weight of `compensation`
  std::vector<SyncMessage> sent;
};

class Planner {
 public:
  Planner(CompiledPlan plan, double compensation_blend)
      : plan_(std::move(plan)), blend_time_(compensation_blend), start_(plan_.initial_length) {}

  const CompiledPlan& plan() const { return plan_; }

  /// Advances both planners to `tick`. `inbox` holds messages delivered this
  /// tick; `measured` the current wire lengths.
  PlannerOutput tick(long tick, const std::vector<SyncMessage>& inbox, const PerWire<double>& measured) {
    for (const auto& msg : inbox)
      if (msg.sender == "musashi") announced_ = std::max(announced_, msg.phase_index);

    PlannerOutput out;
    out.body_phase = plan_.nominal_phase(tick);
    out.joint_ref = plan_.joint_reference(tick);
    if (out.body_phase != last_sent_) {
      for (int k = last_sent_ + 1; k <= out.body_phase; ++k)
        out.sent.push_back({"musashi", k, static_cast<double>(tick) * plan_.dt});
      last_sent_ = out.body_phase;
    }

    // Suspension planner: enter the next phase when the current one is done
    // and its barrier, if any, has been announced.
    const int n = static_cast<int>(plan_.phase_count());
    for (;;) {
      const int next = phase_ + 1;
      if (next >= n) break;
      if (phase_ >= 0 && tick - entered_ < plan_.phase_length[phase_]) break;
      if (plan_.barrier[next] && announced_ < next) break;
      enter(next, tick, measured);
    }

    out.wire_phase = std::max(phase_, 0);
    out.waiting = phase_ < 0 || (tick - entered_ >= plan_.phase_length[phase_] && phase_ + 1 < n);
    for (int id = 0; id < kMaxWires; ++id) {
      if (!plan_.has_wire[id]) continue;
      if (phase_ < 0) {
        out.l_ref[id] = start_[id];
        continue;
      }
      const auto& seg = plan_.wires[id][phase_];
      if (seg.kind == WireTarget::Kind::Track) {
        out.tracking[id] = true;
        out.l_ref[id] = measured[id];
      } else {
        out.l_ref[id] = ramp(start_[id], seg.delta, tick - entered_, plan_.phase_length[phase_]);
      }
    }

    if (phase_ >= 0) {
      out.compensation = plan_.compensation[phase_];
      out.previous_compensation = phase_ > 0 ? plan_.compensation[phase_ - 1] : plan_.compensation[phase_];
      const bool changed = out.previous_compensation != out.compensation;
      if (changed && blend_time_ > 0.0) {
        out.blend = std::min(1.0, static_cast<double>(tick - entered_) * plan_.dt / blend_time_);
      }
      if (!changed) out.previous_compensation = out.compensation;
    } else {
      out.compensation = plan_.compensation.front();
      out.previous_compensation = out.compensation;
    }
    return out;
  }

 private:
  void enter(int k, long tick, const PerWire<double>& measured) {
    for (int id = 0; id < kMaxWires; ++id) {
      if (!plan_.has_wire[id]) continue;
      if (phase_ < 0) continue;
      const auto& prev = plan_.wires[id][phase_];
      start_[id] = prev.kind == WireTarget::Kind::Track ? measured[id] : start_[id] + prev.delta;
    }
    phase_ = k;
    entered_ = tick;
  }

  CompiledPlan plan_;
  double blend_time_;
  int announced_ = -1;
  int last_sent_ = -1;
  int phase_ = -1;
  long entered_ = 0;
  PerWire<double> start_ = zero_per_wire();
};

}  // namespace cubix
