// Acceptance checks for the simulator. Prints one PASS/FAIL line per
// criterion and exits non-zero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "cubix/cli.hpp"
#include "../support.hpp"

using namespace cubix;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "NOT ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/// Index of the first row in `phase`, or rows.size() if never entered.
std::size_t first_row(const TrajectoryLog& log, const std::string& phase) {
  for (std::size_t i = 0; i < log.rows.size(); ++i)
    if (log.rows[i].phase == phase) return i;
  return log.rows.size();
}

std::size_t last_row(const TrajectoryLog& log, const std::string& phase) {
  std::size_t out = log.rows.size();
  for (std::size_t i = 0; i < log.rows.size(); ++i)
    if (log.rows[i].phase == phase) out = i;
  return out;
}

Outcome pull_up() {
  Outcome o;
  fixtures::TempDir dir("acceptance");
  const std::string out = dir.path().string();
  const char* argv[] = {"cubix", "run", "--builtin", "pull_up", "--no-decimate", "-o", out.c_str()};
  std::ostringstream so, se;
  const auto start = std::chrono::steady_clock::now();
  const int code = cli::main(7, argv, so, se);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.check(code == 0, "cli exit 0");
  if (code != 0) return o;

  const CsvTable t = read_csv(dir / "trajectory.csv");
  const std::size_t n = t.rows.size();
  const double dz = t.number(n - 1, "z") - t.number(0, "z");
  double fmin = INFINITY, fmax = -INFINITY, rate = 0.0;
  for (int w = 0; w < 4; ++w) {
    const std::string f = "fref" + std::to_string(w), l = "l" + std::to_string(w);
    for (std::size_t r = 0; r < n; ++r) {
      fmin = std::min(fmin, t.number(r, f));
      fmax = std::max(fmax, t.number(r, f));
      if (r > 0) rate = std::max(rate, std::abs(t.number(r, l) - t.number(r - 1, l)) / (t.number(r, "t") - t.number(r - 1, "t")));
    }
  }
  o.check(std::abs(dz - 0.53) <= 0.05, "lift " + fmt("%.4f", dz) + " m within 0.53 +/- 0.05");
  o.check(fmin >= 0.0 && fmax <= 180.0, "tensions in [" + fmt("%.2f", fmin) + ", " + fmt("%.2f", fmax) + "] N");
  o.check(rate <= 0.242, "max wire rate " + fmt("%.4f", rate) + " m/s <= 0.242");
  o.check(wall < 10.0, "runtime " + fmt("%.2f", wall) + " s < 10");
  return o;
}

Outcome weight_share() {
  Outcome o;
  for (const auto& [n, expect] : {std::pair{4, 109.37}, std::pair{3, 145.8}}) {
    const TrajectoryLog log = run(SystemModel(hover_scenario(n, 1.0)));
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(log.rows.back().f_ff[i] - expect));
    o.check(worst <= 0.1, std::to_string(n) + " wires " + fmt("%.3f", log.rows.back().f_ff[0]) + " N each");
  }
  bool infeasible = false;
  try {
    run(SystemModel(hover_scenario(1, 1.0)));
  } catch (const InfeasibleError&) {
    infeasible = true;
  }
  o.check(infeasible, "1 wire Infeasible");
  return o;
}

Outcome rising() {
  Outcome o;
  const auto& log = fixtures::builtin_log("rising");
  o.check(log.phase_names == std::vector<std::string>{"Lifting", "Rotation", "Landing"} && log.phase_start.size() == 3 &&
              log.phase_start[0] < log.phase_start[1] && log.phase_start[1] < log.phase_start[2],
          "phases Lifting, Rotation, Landing in order");

  const std::size_t l0 = first_row(log, "Lifting"), l1 = last_row(log, "Lifting");
  const double zl = log.rows[l1].position.z() - log.rows[l0].position.z();
  o.check(zl > 0.0, "z rises " + fmt("%.3f", zl) + " m in Lifting");

  const std::size_t r0 = first_row(log, "Rotation"), r1 = last_row(log, "Rotation");
  const double p0 = log.rows[r0].attitude.pitch, p1 = log.rows[r1].attitude.pitch;
  o.check(std::abs(p0 - M_PI / 2) < 0.2 && std::abs(p1) < std::abs(p0),
          "pitch " + fmt("%.3f", p0) + " -> " + fmt("%.3f", p1) + " rad in Rotation");
  const double pf = log.rows.back().attitude.pitch;
  o.check(std::abs(pf) < 0.1, "final |pitch| " + fmt("%.4f", std::abs(pf)) + " < 0.1");

  int touchdowns = 0;
  for (const auto& e : log.events) touchdowns += e.kind == Event::Kind::TouchDown && e.phase == "Landing";
  o.check(touchdowns >= 2, std::to_string(touchdowns) + " TouchDowns in Landing");

  const auto w = fixtures::rotation_start_waist();
  o.check(std::abs(w.with_internal.required) < std::abs(w.without_internal.required),
          "waist torque " + fmt("%.2f", std::abs(w.with_internal.required)) + " < " +
              fmt("%.2f", std::abs(w.without_internal.required)) + " N m without wires 0-1");
  return o;
}

Outcome kick() {
  Outcome o;
  const Scenario sc = builtin_scenario("kick");
  const SystemModel m(sc);
  const ResolvedPoint foot = m.body().resolve(sc.kick_target->foot);
  double drift_sign = 0.0;
  bool captured = false;
  const TrajectoryLog log = run(m, [&](const TickContext& c) {
    if (captured || sc.phases[static_cast<std::size_t>(c.plan.wire_phase)].name != "Phase 2") return;
    captured = true;
    // d|p_f - target|^2 / d yaw about the COM, up to a factor of 2.
    const Vec3 pf = c.geometry.frames.point(foot);
    const Vec3 com = c.geometry.composite.com_world;
    drift_sign = (pf - sc.kick_target->point).dot(Vec3::UnitZ().cross(pf - com));
  });

  const std::size_t a0 = first_row(log, "Phase 1"), a1 = last_row(log, "Phase 1");
  const double roll0 = std::abs(log.rows[a0].attitude.roll), roll1 = std::abs(log.rows[a1].attitude.roll);
  o.check(roll1 > roll0, "|roll| " + fmt("%.4f", roll0) + " -> " + fmt("%.4f", roll1) + " in Phase 1");

  const std::size_t b0 = first_row(log, "Phase 2"), b1 = last_row(log, "Phase 2");
  const double dyaw = log.rows[b1].attitude.yaw - log.rows[b0].attitude.yaw;
  o.check(captured && dyaw * drift_sign < 0.0, "yaw " + fmt("%+.4f", dyaw) + " rad in Phase 2 turns the foot toward the target");

  int kicks = 0;
  bool in_phase2 = true;
  for (const auto& e : log.events)
    if (e.kind == Event::Kind::KickContact) {
      ++kicks;
      in_phase2 = in_phase2 && e.phase == "Phase 2";
    }
  o.check(kicks == 1 && in_phase2, std::to_string(kicks) + " KickContact in Phase 2");
  return o;
}

Outcome distribution_oracle() {
  Outcome o;
  std::mt19937 rng(500);
  double worst = 0.0, residual = 0.0;
  int feasible = 0, mismatched = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = fixtures::random_problem(rng);
    const SystemModel m(p.scenario);
    const StateGeometry g = evaluate_geometry(m, initial_state(m));
    const auto k = static_cast<Eigen::Index>(p.active.size());
    Eigen::MatrixXd A(3, k);
    Eigen::VectorXd upper(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      A.col(i) = g.wires[p.active[i]]->net_force_direction();
      upper(i) = m.wire(p.active[i]).f_max;
    }
    const auto oracle = fixtures::enumerate_min_norm(A, Eigen::Vector3d(0, 0, p.weight), upper);
    std::optional<PerWire<double>> got;
    try {
      got = gravity_feedforward(m, p.active, g, p.weight);
    } catch (const InfeasibleError&) {
    }
    if (oracle.has_value() != got.has_value()) {
      ++mismatched;
      continue;
    }
    if (!oracle) continue;
    ++feasible;
    Vec3 net = Vec3::Zero();
    for (Eigen::Index i = 0; i < k; ++i) {
      worst = std::max(worst, std::abs((*got)[p.active[i]] - (*oracle)(i)));
      net += (*got)[p.active[i]] * A.col(i);
    }
    residual = std::max(residual, std::abs(net.z() - p.weight));
  }
  o.check(mismatched == 0, std::to_string(mismatched) + " feasibility disagreements");
  o.check(worst <= 1e-6, "max deviation " + fmt("%.2e", worst) + " N over " + std::to_string(feasible) + " feasible problems");
  o.check(residual < 1e-6, "vertical residual " + fmt("%.2e", residual) + " N");
  return o;
}

Outcome dynamics_sanity() {
  Outcome o;
  const double g = 9.81, t = 0.1, exact = 0.5 * g * t * t;
  const double e1 = fixtures::free_fall_drop(0.001, t) - exact;
  const double e2 = fixtures::free_fall_drop(0.0005, t) - exact;
  // First-order integrator: the relative error is dt / t, exactly 1% here,
  // so the bound is compared with a rounding allowance.
  o.check(std::abs(e1) / exact <= 0.01 + 1e-9, "free-fall error " + fmt("%.4f", 100 * std::abs(e1) / exact) + "%");
  o.check(std::abs(e2) <= 0.5 * std::abs(e1) * (1 + 1e-6), "halving dt scales error by " + fmt("%.4f", e2 / e1));

  Scenario sc = builtin_scenario("kick");
  sc.contact.enabled = false;
  const SystemModel m(sc);
  SimState s = initial_state(m);
  s.angular_momentum = Vec3(0.3, -0.2, 0.5);
  const Vec3 l0 = s.angular_momentum;
  const int hip = m.body().joint_index("hip_r");
  const long n = std::lround(1.0 / sc.sim.dt);
  for (long k = 0; k < n; ++k) {
    std::vector<double> q = s.joint_angles;
    q[hip] = -0.8 * static_cast<double>(k + 1) / static_cast<double>(n);
    s = step(m, s, zero_per_wire(), q);
  }
  const double drift = (s.angular_momentum - l0).norm() / l0.norm() / 1.0;
  o.check(drift < 0.005, "angular momentum drift " + fmt("%.2e", drift * 100) + " %/s");

  const auto pb = fixtures::power_balance(1.2 * 44.6 * 9.81 / 4.0, 1.0);
  const double imbalance = std::abs(pb.energy_change - pb.work) / std::abs(pb.work) / pb.duration;
  o.check(imbalance < 0.01, "power balance " + fmt("%.3f", imbalance * 100) + " %/s over " + fmt("%.1f", pb.work) + " J");
  return o;
}

Outcome internal_neutrality() {
  Outcome o;
  const Scenario sc = builtin_scenario("rising");
  const SystemModel m(sc);
  const auto w = fixtures::rotation_start_waist(sc);
  const StateGeometry g = evaluate_geometry(m, w.state);
  PerWire<double> base = w.tensions;
  base[0] = base[1] = 0.0;
  const Wrench ref = assemble_wrench(m, w.state, base, g);
  const double waist_ref = joint_torque_budget(m, "waist", g, base).required;
  double worst = 0.0, smallest_change = INFINITY;
  for (int id : {0, 1})
    for (double t : {1.0, 45.0, 90.0, 180.0}) {
      PerWire<double> f = base;
      f[id] = t;
      const Wrench x = assemble_wrench(m, w.state, f, g);
      worst = std::max({worst, (x.force - ref.force).norm(), (x.moment - ref.moment).norm()});
      smallest_change = std::min(smallest_change, std::abs(joint_torque_budget(m, "waist", g, f).required - waist_ref));
    }
  o.check(worst < 1e-9, "wrench change " + fmt("%.2e", worst));
  o.check(smallest_change > 0.0, "waist torque change at least " + fmt("%.3f", smallest_change) + " N m");
  return o;
}

Outcome determinism() {
  Outcome o;
  for (const auto& name : builtin_names()) {
    const std::string a = fixtures::csv_text(fixtures::builtin_log(name));
    const std::string b = fixtures::csv_text(run(SystemModel(builtin_scenario(name))));
    o.check(a == b, name + " byte-identical (" + std::to_string(a.size()) + " bytes)");
  }
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"pull-up reproduction", pull_up},
      {"weight share", weight_share},
      {"rising reproduction", rising},
      {"kick reproduction", kick},
      {"tension distribution oracle", distribution_oracle},
      {"dynamics sanity", dynamics_sanity},
      {"internal-wire neutrality", internal_neutrality},
      {"determinism", determinism},
  };
  int failed = 0, n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s criterion %d: %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
