#include <gtest/gtest.h>

#include "support.hpp"

using namespace cubix;

namespace {

const Scenario& body_only() {
  static const Scenario s = fixtures::single_body(10.0);
  return s;
}

PerWire<std::optional<double>> one_wire(double l0) {
  PerWire<std::optional<double>> l;
  l[0] = l0;
  return l;
}

Phase phase(const std::string& name, double duration, std::map<int, WireTarget> targets, bool barrier = false) {
  return Phase{name, duration, std::move(targets), {}, {}, barrier};
}

PerWire<double> measured(double l0) {
  PerWire<double> m = zero_per_wire();
  m[0] = l0;
  return m;
}

}  // namespace

TEST(Compile, LinearWindOverPhase) {
  const BodyModel b(body_only());
  const auto plan = compile({phase("Up", 40.0, {{0, WireTarget::wind(-0.53)}})}, 0.001, one_wire(2.0), b, {});
  for (long k : {0L, 1L, 10000L, 25000L, 39999L, 40000L}) {
    const double t = static_cast<double>(k) * 0.001;
    EXPECT_NEAR(plan.wire_reference(0, k), 2.0 - 0.01325 * t, 1e-12) << k;
  }
}

TEST(Compile, HoldIsConstant) {
  const BodyModel b(body_only());
  const auto plan = compile({phase("Hold", 2.0, {})}, 0.001, one_wire(1.7), b, {});
  for (long k = 0; k <= 2000; k += 100) EXPECT_EQ(plan.wire_reference(0, k), 1.7);
}

TEST(Compile, OppositeDeltasReturnExactly) {
  const BodyModel b(body_only());
  const auto plan = compile({phase("In", 1.0, {{0, WireTarget::wind(-0.2)}}), phase("Out", 1.0, {{0, WireTarget::wind(0.2)}})},
                            0.001, one_wire(2.0), b, {});
  EXPECT_EQ(plan.wire_reference(0, plan.total_ticks()), 2.0);
}

TEST(Compile, NonPositiveTargetLength) {
  const BodyModel b(body_only());
  try {
    compile({phase("Gone", 1.0, {{0, WireTarget::wind(-2.5)}})}, 0.001, one_wire(2.0), b, {});
    FAIL() << "expected an error";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.code(), "NonPositiveTargetLength");
  }
}

TEST(Compile, TrackFollowsMeasurement) {
  const BodyModel b(body_only());
  const auto plan = compile({phase("Follow", 1.0, {{0, WireTarget::track()}})}, 0.001, one_wire(2.0), b, {});
  EXPECT_EQ(plan.wire_reference(0, 500, 2.3), 2.3);
}

TEST(Compile, JointTargetsInterpolate) {
  Scenario s = builtin_scenario("kick");
  const BodyModel b(s);
  std::vector<double> q0(b.joints().size(), 0.0);
  Phase p = phase("Bend", 1.0, {});
  p.joint_targets = {{"hip_r", -0.8}};
  const auto plan = compile({p}, 0.001, {}, b, q0);
  const int hip = b.joint_index("hip_r");
  EXPECT_NEAR(plan.joint_reference(250)[hip], -0.2, 1e-15);
  EXPECT_EQ(plan.joint_reference(1000)[hip], -0.8);
}

TEST(Planner, NoBarriersMatchesCompile) {
  const BodyModel b(body_only());
  const std::vector<Phase> phases = {phase("A", 0.3, {{0, WireTarget::wind(-0.1)}}), phase("B", 0.2, {}),
                                     phase("C", 0.5, {{0, WireTarget::wind(0.05)}})};
  const auto plan = compile(phases, 0.001, one_wire(2.0), b, {});
  Planner planner(plan, 0.0);
  std::vector<SyncMessage> inbox;
  for (long k = 0; k <= plan.total_ticks() + 10; ++k) {
    const auto out = planner.tick(k, inbox, measured(2.0));
    inbox = out.sent;
    ASSERT_EQ(out.l_ref[0], plan.wire_reference(0, k)) << k;
    ASSERT_EQ(out.wire_phase, plan.nominal_phase(k)) << k;
  }
}

TEST(Planner, BarrierWaitsForMessage) {
  const BodyModel b(body_only());
  const std::vector<Phase> phases = {phase("A", 0.1, {{0, WireTarget::wind(-0.1)}}),
                                     phase("B", 0.1, {{0, WireTarget::wind(-0.1)}}, true)};
  const auto plan = compile(phases, 0.001, one_wire(2.0), b, {});
  const long boundary = plan.phase_start[1];

  Planner silent(plan, 0.0);
  for (long k = 0; k <= boundary + 50; ++k) {
    const auto out = silent.tick(k, {}, measured(2.0));
    if (k >= boundary) {
      EXPECT_EQ(out.wire_phase, 0) << k;
      EXPECT_TRUE(out.waiting) << k;
      EXPECT_NEAR(out.l_ref[0], 1.9, 1e-15) << k;
    }
  }

  // The body planner announces phase B at the boundary tick; delivery is on
  // the following tick, when the suspension planner enters B.
  Planner paired(plan, 0.0);
  std::vector<SyncMessage> inbox;
  for (long k = 0; k <= boundary + 1; ++k) {
    const auto out = paired.tick(k, inbox, measured(2.0));
    inbox = out.sent;
    if (k == boundary) {
      EXPECT_EQ(out.wire_phase, 0);
      ASSERT_EQ(out.sent.size(), 1u);
      EXPECT_EQ(out.sent[0].phase_index, 1);
      EXPECT_NEAR(out.sent[0].timestamp, static_cast<double>(boundary) * 0.001, 1e-15);
    }
    if (k == boundary + 1) EXPECT_EQ(out.wire_phase, 1);
  }
}

TEST(Planner, CompensationBlendRamps) {
  const BodyModel b(body_only());
  std::vector<Phase> phases = {phase("A", 0.1, {}), phase("B", 1.0, {})};
  phases[0].compensation_set = {0};
  phases[1].compensation_set = {0, 1};
  PerWire<std::optional<double>> l;
  l[0] = 2.0;
  l[1] = 2.0;
  Planner planner(compile(phases, 0.001, l, b, {}), 0.5);
  std::vector<SyncMessage> inbox;
  PlannerOutput out;
  for (long k = 0; k <= 350; ++k) {
    out = planner.tick(k, inbox, zero_per_wire());
    inbox = out.sent;
  }
  EXPECT_EQ(out.compensation, (std::vector<int>{0, 1}));
  EXPECT_EQ(out.previous_compensation, (std::vector<int>{0}));
  EXPECT_NEAR(out.blend, 0.5, 1e-12);
}
