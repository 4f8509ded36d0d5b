#include <gtest/gtest.h>

#include "support.hpp"

using namespace cubix;

namespace {

const char* kMinimal = R"({
  "segments": [{"name": "base", "mass": 10.0, "points": {"top": [0, 0, 0.1]}}],
  "wires": [{"id": 0, "exit": {"segment": "base", "point": "top"}, "anchor": {"world": [0, 0, 3]}}],
  "phases": [{"name": "Hold", "duration": 1.0, "compensation": [0]}]
})";

Json minimal() { return parse_json_text(kMinimal); }

}  // namespace

TEST(LoadScenario, MinimalDocumentGetsDefaults) {
  const Scenario s = load_scenario(std::string(kMinimal));
  ASSERT_EQ(s.wires.size(), 1u);
  EXPECT_EQ(s.wires[0].f_max, 180.0);
  EXPECT_EQ(s.constants.gravity, 9.81);
  EXPECT_EQ(s.constants.total_mass, 10.0);
  EXPECT_EQ(s.gains.kp, 500.0);
  EXPECT_EQ(s.gains.kd, 50.0);
  EXPECT_EQ(s.sim.dt, 0.001);
  EXPECT_DOUBLE_EQ(s.sim.duration, 1.0);
}

TEST(LoadScenario, WireIdOutOfRange) {
  Json j = minimal();
  j["wires"][0]["id"] = 9;
  j["phases"][0]["compensation"] = Json::array({9});
  try {
    load_scenario(j);
    FAIL() << "expected an error";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.code(), "WireIdOutOfRange");
    EXPECT_NE(std::string(e.what()).find("wire id out of range 0–7"), std::string::npos);
  }
}

TEST(LoadScenario, UnknownKeyIsAnError) {
  Json j = minimal();
  j["sim"] = {{"dt", 0.001}, {"frobnicate", 1}};
  try {
    load_scenario(j);
    FAIL() << "expected an error";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.code(), "SchemaError");
    EXPECT_NE(std::string(e.what()).find("sim.frobnicate"), std::string::npos);
  }
}

TEST(LoadScenario, ParseErrorReportsLine) {
  try {
    load_scenario(std::string("{\n  \"segments\": [\n  oops\n]}"));
    FAIL() << "expected an error";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.code(), "ParseError");
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(LoadScenario, UnresolvedPointNamesTheField) {
  Json j = minimal();
  j["wires"][0]["exit"]["point"] = "nowhere";
  const auto v = validate_scenario(scenario_from_json(j));
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].code, "UnknownPoint");
  EXPECT_EQ(v[0].field, "wires.0.exit");
}

TEST(LoadScenario, TotalMassRescalesSegments) {
  Json j = minimal();
  j["constants"] = {{"total_mass", 25.0}};
  const Scenario s = load_scenario(j);
  EXPECT_DOUBLE_EQ(s.segments[0].mass, 25.0);
}

TEST(ValidateScenario, BuiltinsAreValid) {
  for (const auto& name : builtin_names()) EXPECT_TRUE(validate_scenario(builtin_scenario(name)).empty()) << name;
}

TEST(ValidateScenario, DuplicateWireId) {
  Scenario s = builtin_scenario("pull_up");
  s.wires[2].id = 3;
  const auto v = validate_scenario(s);
  ASSERT_TRUE(has_violation(v, "DuplicateWireId"));
  bool labelled = false;
  for (const auto& x : v) labelled = labelled || x.label() == "DuplicateWireId(3)";
  EXPECT_TRUE(labelled);
}

TEST(ValidateScenario, TimestepOutOfRange) {
  Scenario s = builtin_scenario("pull_up");
  s.sim.dt = 0.05;
  EXPECT_TRUE(has_violation(validate_scenario(s), "TimestepOutOfRange"));
}

TEST(ValidateScenario, InternalWireNeedsTwoSegments) {
  Scenario s = builtin_scenario("rising");
  for (auto& w : s.wires)
    if (w.id == 0) w.anchor = WireAnchor::on_body({"base", "exit1"});
  EXPECT_TRUE(has_violation(validate_scenario(s), "InternalWireSameSegment"));
}

TEST(ValidateScenario, NonUnitAxisAndUnorderedLimits) {
  Scenario s = builtin_scenario("kick");
  s.joints[0].axis_in_parent = Vec3(0, 2, 0);
  s.joints[1].lower_limit = 1.0;
  s.joints[1].upper_limit = -1.0;
  const auto v = validate_scenario(s);
  EXPECT_TRUE(has_violation(v, "AxisNotUnit"));
  EXPECT_TRUE(has_violation(v, "LimitsUnordered"));
}

TEST(Serialization, RoundTripIsIdentity) {
  for (const auto& name : builtin_names()) {
    const Scenario s = builtin_scenario(name);
    const std::string once = serialize_scenario(s);
    const Scenario back = load_scenario(once);
    EXPECT_EQ(serialize_scenario(back), once) << name;
    EXPECT_EQ(scenario_hash(back), scenario_hash(s)) << name;
  }
}

TEST(Overrides, DottedPathsAndArrayIndices) {
  Json j = scenario_to_json(builtin_scenario("pull_up"));
  apply_override(j, "gains.kp=800");
  apply_override(j, "wires.1.f_max=150");
  apply_override(j, "phases.0.name=Up");
  const Scenario s = load_scenario(j);
  EXPECT_EQ(s.gains.kp, 800.0);
  EXPECT_EQ(s.wires[1].f_max, 150.0);
  EXPECT_EQ(s.phases[0].name, "Up");
}

TEST(Overrides, UnknownKeysAreRejected) {
  Json j = scenario_to_json(builtin_scenario("pull_up"));
  EXPECT_THROW(apply_override(j, "nope.kp=1"), ScenarioError);
  EXPECT_THROW(apply_override(j, "gains"), ScenarioError);
  apply_override(j, "gains.kq=1");
  EXPECT_THROW(load_scenario(j), ScenarioError);
}
