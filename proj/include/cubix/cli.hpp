#pragma once

// Command-line front end: run, validate, emit-scenario, list.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cubix/builtin.hpp"
#include "cubix/csv.hpp"
#include "cubix/engine.hpp"
#include "cubix/plot.hpp"
#include "cubix/scenario_io.hpp"

#ifndef CUBIX_VERSION
#define CUBIX_VERSION "0.0.0"
#endif

namespace cubix::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default output directory for `run`.
inline constexpr const char* kOutDirEnv = "CUBIX_OUT_DIR";

inline std::string builtin_summary(const std::string& name) {
  if (name == "pull_up") return "four ceiling wires wind the body up about half a metre";
  if (name == "rising") return "prone start, lift, rotate upright in the air, land on both feet";
  if (name == "kick") return "hang, lean onto the left side, swing the right foot through a target plane";
  return "";
}

/// One scenario to run: a built-in name or a file path.
struct Source {
  std::string builtin;
  std::string file;

  std::string label() const { return builtin.empty() ? std::filesystem::path(file).stem().string() : builtin; }
};

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("IoError", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("IoError", "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error("IoError", "failed writing '" + path + "'");
}

/// Scenario tree of a source with the overrides applied, before validation.
inline Json source_tree(const Source& src, const std::vector<std::string>& overrides) {
  Json root = src.builtin.empty() ? parse_json_text(read_text(src.file)) : scenario_to_json(builtin_scenario(src.builtin));
  for (const auto& o : overrides) apply_override(root, o);
  return root;
}

inline Scenario resolve(const Source& src, const std::vector<std::string>& overrides) {
  return load_scenario(source_tree(src, overrides));
}

inline std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string error_json(const std::string& code, const std::string& message, const std::string& source = "") {
  Json j;
  j["error"] = code;
  j["message"] = message;
  if (!source.empty()) j["source"] = source;
  return j.dump();
}

struct RunOptions {
  std::vector<std::string> overrides;
  bool decimate = true;
};

/// Runs one scenario and writes trajectory.csv, the resolved scenario, plots
/// and run-manifest.json into `dir`. Returns the trajectory.
inline TrajectoryLog run_to_directory(const Source& src, const RunOptions& opt, const std::filesystem::path& dir) {
  const Scenario sc = resolve(src, opt.overrides);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("IoError", "cannot create '" + dir.string() + "': " + ec.message());

  const auto start = std::chrono::steady_clock::now();
  const SystemModel model(sc);
  const TrajectoryLog log = run(model);
  const int every = opt.decimate ? std::max(1, sc.sim.log_every) : 1;
  emit_csv(log, (dir / "trajectory.csv").string(), every);
  write_text((dir / "scenario.json").string(), serialize_scenario(sc));
  const auto plots = emit_plots(log, dir.string());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json m;
  m["scenario"] = src.label();
  m["source"] = src.builtin.empty() ? src.file : "builtin:" + src.builtin;
  m["scenario_hash"] = "fnv1a64:" + hex64(scenario_hash(sc));
  m["version"] = CUBIX_VERSION;
  m["overrides"] = opt.overrides;
  m["dt"] = sc.sim.dt;
  m["ticks"] = log.rows.empty() ? 0 : log.rows.back().tick;
  m["csv_every"] = every;
  Json events = Json::array();
  for (const auto& e : log.events) events.push_back({{"event", e.label()}, {"t", e.t}, {"phase", e.phase}});
  m["events"] = events;
  Json files = Json::array({"trajectory.csv", "scenario.json"});
  for (const auto& p : plots) files.push_back(std::filesystem::path(p).filename().string());
  m["files"] = files;
  m["wall_time_s"] = wall;
  write_text((dir / "run-manifest.json").string(), m.dump(2) + "\n");
  return log;
}

inline int cmd_run(const std::vector<Source>& sources, const RunOptions& opt, const std::string& out_dir, int jobs,
                   std::ostream& out, std::ostream& err) {
  const std::filesystem::path base(out_dir);
  std::vector<std::string> messages(sources.size());
  std::vector<int> status(sources.size(), kExitOk);
  auto job = [&](std::size_t i) {
    const std::filesystem::path dir = sources.size() == 1 ? base : base / sources[i].label();
    std::ostringstream msg;
    try {
      const TrajectoryLog log = run_to_directory(sources[i], opt, dir);
      const auto& first = log.rows.front();
      const auto& last = log.rows.back();
      char line[256];
      std::snprintf(line, sizeof line, "%s: %ld ticks, z %.4f -> %.4f m, %zu events -> %s", sources[i].label().c_str(), last.tick,
                    first.position.z(), last.position.z(), log.events.size(), dir.string().c_str());
      msg << line;
    } catch (const Error& e) {
      status[i] = kExitFailure;
      msg << error_json(e.code(), e.what(), sources[i].label());
    } catch (const std::exception& e) {
      status[i] = kExitFailure;
      msg << error_json("InternalError", e.what(), sources[i].label());
    }
    messages[i] = msg.str();
  };

  const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), sources.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < sources.size(); ++i) job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < sources.size(); i = next++) job(i);
      });
    for (auto& t : pool) t.join();
  }

  int code = kExitOk;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    (status[i] == kExitOk ? out : err) << messages[i] << '\n';
    if (status[i] != kExitOk) code = kExitFailure;
  }
  return code;
}

inline int cmd_validate(const std::vector<std::string>& files, std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  for (const auto& path : files) {
    try {
      const Scenario s = scenario_from_json(parse_json_text(read_text(path)));
      const auto v = validate_scenario(s);
      if (v.empty()) {
        out << path << ": ok\n";
        continue;
      }
      code = kExitFailure;
      for (const auto& x : v) out << path << ": " << x.label() << " at " << x.field << ": " << x.message << '\n';
    } catch (const Error& e) {
      code = kExitFailure;
      err << error_json(e.code(), e.what(), path) << '\n';
    }
  }
  return code;
}

inline int cmd_emit(const std::string& name, const std::vector<std::string>& overrides, const std::string& path, std::ostream& out,
                    std::ostream& err) {
  try {
    const Scenario s = resolve(Source{name, ""}, overrides);
    const std::string text = serialize_scenario(s);
    if (path.empty() || path == "-")
      out << text;
    else
      write_text(path, text);
    return kExitOk;
  } catch (const Error& e) {
    err << error_json(e.code(), e.what(), name) << '\n';
    return kExitFailure;
  }
}

inline int cmd_list(std::ostream& out) {
  for (const auto& n : builtin_names()) out << n << "  " << builtin_summary(n) << '\n';
  return kExitOk;
}

/// Entry point with injectable streams and environment lookup so tests can
/// drive it in-process.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Wire-driven humanoid suspension simulator", "cubix"};
  app.set_version_flag("--version", std::string(CUBIX_VERSION));
  app.require_subcommand(1);

  std::vector<std::string> run_files, run_builtins, overrides;
  const char* env_out = std::getenv(kOutDirEnv);
  std::string out_dir = env_out && *env_out ? env_out : "out";
  bool no_decimate = false;
  int jobs = 1;
  auto* run_cmd = app.add_subcommand("run", "run scenarios and write trajectory.csv, plots and run-manifest.json");
  run_cmd->add_option("scenario", run_files, "scenario files")->check(CLI::ExistingFile);
  run_cmd->add_option("--builtin,-b", run_builtins, "built-in scenario name (repeatable)");
  run_cmd->add_option("-o,--out", out_dir, std::string("output directory (default $") + kOutDirEnv + " or ./out)");
  run_cmd->add_option("--set", overrides, "override a scenario value, key.path=value (repeatable)");
  run_cmd->add_flag("--no-decimate", no_decimate, "write every tick instead of every sim.log_every ticks");
  run_cmd->add_option("--jobs,-j", jobs, "scenarios run in parallel")->check(CLI::PositiveNumber);

  std::vector<std::string> validate_files;
  auto* validate_cmd = app.add_subcommand("validate", "check scenario files and print every violation");
  validate_cmd->add_option("scenario", validate_files, "scenario files")->required();

  std::string emit_name, emit_path;
  std::vector<std::string> emit_overrides;
  auto* emit_cmd = app.add_subcommand("emit-scenario", "write a built-in scenario as a JSON document");
  emit_cmd->add_option("name", emit_name, "built-in name")->required();
  emit_cmd->add_option("-o,--out", emit_path, "output file (default stdout)");
  emit_cmd->add_option("--set", emit_overrides, "override a scenario value, key.path=value (repeatable)");

  auto* list_cmd = app.add_subcommand("list", "list the built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << CUBIX_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  if (*run_cmd) {
    std::vector<Source> sources;
    for (const auto& b : run_builtins) sources.push_back({b, ""});
    for (const auto& f : run_files) sources.push_back({"", f});
    if (sources.empty()) {
      err << "error: run needs a scenario file or --builtin NAME\n\n" << run_cmd->help();
      return kExitUsage;
    }
    return cmd_run(sources, RunOptions{overrides, !no_decimate}, out_dir, jobs, out, err);
  }
  if (*validate_cmd) return cmd_validate(validate_files, out, err);
  if (*emit_cmd) return cmd_emit(emit_name, emit_overrides, emit_path, out, err);
  if (*list_cmd) return cmd_list(out);
  return kExitUsage;
}

}  // namespace cubix::cli
