#pragma once

// Oracles and small fixtures shared by the unit and acceptance tests. Nothing
// here calls the solver or integrator under test.

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unistd.h>

#include "cubix/cubix.hpp"

namespace cubix::fixtures {

/// Minimum-norm f with A f = b and 0 <= f <= upper, by enumerating every
/// assignment of each variable to {at 0, at upper, free} and solving the
/// equality-constrained least-norm problem on the free ones.
inline std::optional<Eigen::VectorXd> enumerate_min_norm(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                                         const Eigen::VectorXd& upper, double tol = 1e-9) {
  const int k = static_cast<int>(A.cols());
  int combos = 1;
  for (int i = 0; i < k; ++i) combos *= 3;
  std::optional<Eigen::VectorXd> best;
  double best_norm = INFINITY;
  const double scale = 1.0 + b.norm();
  for (int c = 0; c < combos; ++c) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(k);
    std::vector<int> free;
    int code = c;
    for (int i = 0; i < k; ++i, code /= 3) {
      if (code % 3 == 1) f(i) = upper(i);
      if (code % 3 == 2) free.push_back(i);
    }
    const Eigen::VectorXd r = b - A * f;
    if (!free.empty()) {
      Eigen::MatrixXd Af(A.rows(), static_cast<Eigen::Index>(free.size()));
      for (std::size_t j = 0; j < free.size(); ++j) Af.col(static_cast<Eigen::Index>(j)) = A.col(free[j]);
      const Eigen::VectorXd x = Af.completeOrthogonalDecomposition().pseudoInverse() * r;
      for (std::size_t j = 0; j < free.size(); ++j) f(free[j]) = x(static_cast<Eigen::Index>(j));
    }
    if ((A * f - b).norm() > tol * scale) continue;
    bool inside = true;
    for (int i = 0; i < k; ++i) inside = inside && f(i) >= -tol * scale && f(i) <= upper(i) + tol * scale;
    if (!inside) continue;
    if (f.squaredNorm() < best_norm) {
      best_norm = f.squaredNorm();
      best = f;
    }
  }
  return best;
}

/// One rigid box, no joints, no contact, with the given wires.
inline Scenario single_body(double mass, const Vec3& half_extent = Vec3(0.15, 0.15, 0.15)) {
  Scenario s;
  BodySegment b;
  b.name = "base";
  b.mass = mass;
  const Vec3 e = 2.0 * half_extent;
  b.inertia_local = (mass / 12.0 * Vec3(e.y() * e.y() + e.z() * e.z(), e.x() * e.x() + e.z() * e.z(),
                                        e.x() * e.x() + e.y() * e.y()))
                        .asDiagonal();
  s.segments = {b};
  s.constants.total_mass = mass;
  s.contact.enabled = false;
  s.sim.initial_pose.position = Vec3(0, 0, 1);
  s.phases = {Phase{"Hold", 1.0, {}, {}, {}, false}};
  s.sim.duration = 1.0;
  return s;
}

/// Adds a wire from a new base point at `exit_local` to a world anchor.
inline void add_env_wire(Scenario& s, int id, const Vec3& exit_local, const Vec3& anchor, double f_max = 180.0) {
  const std::string name = "p" + std::to_string(id);
  s.segments[0].attachment_points.push_back({name, exit_local});
  s.wires.push_back({id, {s.segments[0].name, name}, {}, WireAnchor::environment(anchor), f_max});
}

/// Rotation of `v` by angle `a` about unit axis `k` (Rodrigues formula).
inline Vec3 rodrigues(const Vec3& v, const Vec3& k, double a) {
  return v * std::cos(a) + k.cross(v) * std::sin(a) + k * k.dot(v) * (1.0 - std::cos(a));
}

/// COM drop after `duration` of free fall from rest with every wire slack.
inline double free_fall_drop(double dt, double duration) {
  Scenario sc = builtin_scenario("pull_up");
  sc.contact.enabled = false;
  sc.sim.dt = dt;
  const SystemModel m(sc);
  SimState s = initial_state(m);
  const double z0 = evaluate_geometry(m, s).composite.com_world.z();
  const long n = std::lround(duration / dt);
  for (long k = 0; k < n; ++k) s = step(m, s, zero_per_wire(), s.joint_angles);
  return z0 - evaluate_geometry(m, s).composite.com_world.z();
}

struct PowerBalance {
  double work = 0.0;          // J done by the wires
  double energy_change = 0.0; // J of kinetic plus potential energy
  double duration = 0.0;      // s
};

/// Constant tensions on the pull-up rig with frozen joints and no ground.
/// Work is tension times wire shortening.
inline PowerBalance power_balance(double tension, double duration) {
  Scenario sc = builtin_scenario("pull_up");
  sc.contact.enabled = false;
  const SystemModel m(sc);
  SimState s = initial_state(m);
  PerWire<double> f = zero_per_wire();
  for (const auto& w : m.wires()) f[w.id] = tension;
  PowerBalance out;
  const double e0 = mechanical_energy(m, s).total();
  const long n = std::lround(duration / sc.sim.dt);
  for (long k = 0; k < n; ++k) {
    const SimState next = step(m, s, f, s.joint_angles);
    for (const auto& w : m.wires()) out.work += f[w.id] * (s.wire_lengths[w.id] - next.wire_lengths[w.id]);
    s = next;
  }
  out.energy_change = mechanical_energy(m, s).total() - e0;
  out.duration = duration;
  return out;
}

struct WaistBudgets {
  JointTorqueBudget with_internal;     // commanded tensions as run
  JointTorqueBudget without_internal;  // same tick with wires 0 and 1 slack
  PerWire<double> tensions = zero_per_wire();
  SimState state;
};

/// Waist torque budget on the first tick of the rising Rotation phase.
inline WaistBudgets rotation_start_waist(const Scenario& sc = builtin_scenario("rising")) {
  const SystemModel m(sc);
  WaistBudgets out;
  bool seen = false;
  run(m, [&](const TickContext& c) {
    if (seen || m.scenario().phases[static_cast<std::size_t>(c.plan.wire_phase)].name != "Rotation") return;
    seen = true;
    out.tensions = c.f_ref;
    out.state = c.state;
    out.with_internal = joint_torque_budget(m, "waist", c.geometry, c.f_ref);
    PerWire<double> slack = c.f_ref;
    slack[0] = slack[1] = 0.0;
    out.without_internal = joint_torque_budget(m, "waist", c.geometry, slack);
  });
  if (!seen) throw std::runtime_error("rising scenario never reached Rotation");
  return out;
}

/// A random force-only distribution problem on one rigid body with 1 to 4
/// wires and random limits. Most anchors are spread around the body so that
/// lateral balance is possible; the rest are placed anywhere overhead.
struct RandomProblem {
  Scenario scenario;
  std::vector<int> active;
  double weight = 0.0;
};

inline RandomProblem random_problem(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> count(1, 4);
  RandomProblem p;
  const double mass = 11.0 + 9.0 * u(rng);
  p.scenario = single_body(mass);
  const int k = count(rng);
  const bool spread = u(rng) > -0.5;
  const double phase = M_PI * u(rng);
  for (int i = 0; i < k; ++i) {
    const Vec3 exit(0.15 * u(rng), 0.15 * u(rng), 0.15 * u(rng));
    Vec3 anchor(1.5 * u(rng), 1.5 * u(rng), 2.5 + u(rng));
    if (spread) {
      const double a = phase + 2.0 * M_PI * i / k + 0.3 * u(rng);
      const double r = k == 1 ? 0.0 : 0.5 * (1.0 + u(rng));
      anchor = Vec3(exit.x() + r * std::cos(a), exit.y() + r * std::sin(a), 2.5 + u(rng));
    }
    add_env_wire(p.scenario, i, exit, anchor, 60.0 + 60.0 * (u(rng) + 1.0));
    p.active.push_back(i);
  }
  p.weight = mass * p.scenario.constants.gravity;
  return p;
}

/// Trajectory of a built-in scenario, run once per process.
inline const TrajectoryLog& builtin_log(const std::string& name) {
  static std::map<std::string, TrajectoryLog> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, run(SystemModel(builtin_scenario(name)))).first;
  return it->second;
}

inline std::string csv_text(const TrajectoryLog& log, int every = 1) {
  std::ostringstream os;
  write_csv(log, os, every);
  return os.str();
}

/// Fresh empty directory under the system temp directory, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cubix-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace cubix::fixtures
