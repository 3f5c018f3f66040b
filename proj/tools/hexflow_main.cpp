// Command-line front end: validate configs, run single scenarios, run
// replicated multi-case studies, and replay event logs back into metrics.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "hexflow/replay.hpp"
#include "hexflow/scenario.hpp"
#include "hexflow/simulation.hpp"
#include "hexflow/study.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int cmd_validate(const std::string& config_path) {
  const hexflow::ScenarioConfig cfg = hexflow::load_config(read_file(config_path));
  const std::vector<std::string> violations = hexflow::validate(cfg);
  if (violations.empty()) {
    std::cout << "ok: " << config_path << "\n";
    return 0;
  }
  for (const std::string& v : violations) std::cout << "violation: " << v << "\n";
  return 1;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int replication,
            std::uint64_t seed, bool seed_set) {
  hexflow::ScenarioConfig cfg = hexflow::load_config(read_file(config_path));
  if (seed_set) cfg.master_seed = seed;
  const std::vector<std::string> violations = hexflow::validate(cfg);
  if (!violations.empty()) {
    for (const std::string& v : violations) std::cerr << "violation: " << v << "\n";
    return 1;
  }

  const hexflow::RunResult run = hexflow::run_simulation(cfg, replication);
  hexflow::write_run_files(out_dir, "run", replication, run, cfg);

  std::string aircraft =
      "aircraft_id,intro_time_s,travel_time_s,path_miles,cum_heading_deg,hold_count\n";
  for (const hexflow::AircraftMetrics& m : run.aircraft) {
    aircraft += std::to_string(m.id) + ',' + hexflow::format_double(m.intro_time_s) + ',' +
                (m.travel_time_s ? hexflow::format_double(*m.travel_time_s) : "") + ',' +
                hexflow::format_double(m.path_miles) + ',' +
                hexflow::format_double(m.cum_heading_deg) + ',' + std::to_string(m.hold_count) +
                '\n';
  }
  hexflow::detail::atomic_write(fs::path(out_dir) / "aircraft.csv", aircraft);

  std::string series = "time_s,active_count,total_entropy,mean_kt,support_size\n";
  for (const hexflow::SeriesRow& r : run.series) {
    series += hexflow::format_double(r.time_s) + ',' + std::to_string(r.active_count) + ',' +
              hexflow::format_double(r.total_entropy) + ',' + hexflow::format_double(r.mean_kt) +
              ',' + std::to_string(r.support_size) + '\n';
  }
  hexflow::detail::atomic_write(fs::path(out_dir) / "series.csv", series);

  std::cout << "run complete: " << run.aircraft.size() << " aircraft, end " << run.end_time_s
            << " s, final entropy " << run.final_entropy << "\n";
  if (run.timed_out) {
    std::cerr << "error: run timed out before all aircraft arrived\n";
    return 2;
  }
  return 0;
}

int cmd_study(const std::string& config_path, const std::string& out_dir, int jobs,
              std::uint64_t seed, bool seed_set) {
  hexflow::StudySpec spec = hexflow::load_study(read_file(config_path));
  if (seed_set) {
    spec.base_json["master_seed"] = seed;
    spec.base = hexflow::scenario_from_json(spec.base_json);
  }
  const hexflow::StudyResult result = hexflow::run_study(spec, out_dir, jobs);
  hexflow::emit_outputs(result, out_dir);

  std::cout << "case,mean_travel_time_s,sd_travel_time_s\n";
  for (std::size_t i = 0; i < result.case_names.size(); ++i)
    std::cout << result.case_names[i] << ',' << result.case_mean_tt[i] << ','
              << result.case_sd_tt[i] << "\n";
  return 0;
}

int cmd_replay(const std::string& events_path, const std::string& out_dir) {
  std::ifstream is(events_path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + events_path);
  const hexflow::ReplayedRun rep = hexflow::replay_event_log(is);

  std::string aircraft =
      "aircraft_id,intro_time_s,travel_time_s,path_miles,hold_count\n";
  for (const hexflow::ReplayedAircraft& a : rep.aircraft) {
    aircraft += std::to_string(a.id) + ',' + hexflow::format_double(a.intro_time_s) + ',' +
                (a.arrived_s ? hexflow::format_double(*a.arrived_s - a.intro_time_s) : "") + ',' +
                hexflow::format_double(a.path_miles) + ',' + std::to_string(a.hold_count) + '\n';
  }
  hexflow::detail::atomic_write(fs::path(out_dir) / "replay_aircraft.csv", aircraft);

  std::string series = "time_s,active_count,total_entropy,support_size\n";
  for (const hexflow::SeriesRow& r : rep.series) {
    series += hexflow::format_double(r.time_s) + ',' + std::to_string(r.active_count) + ',' +
              hexflow::format_double(r.total_entropy) + ',' + std::to_string(r.support_size) + '\n';
  }
  hexflow::detail::atomic_write(fs::path(out_dir) / "replay_series.csv", series);

  std::cout << "replayed " << rep.aircraft.size() << " aircraft, " << rep.traversals.size()
            << " traversals; final entropy " << rep.recomputed_entropy << "\n";
  if (!rep.mismatches.empty()) {
    for (const std::string& m : rep.mismatches) std::cerr << "mismatch: " << m << "\n";
    return 1;
  }
  std::cout << "log is self-consistent\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hexflow: self-organizing airspace traffic simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", events_path;
  int replication = 0;
  int jobs = 1;
  std::uint64_t seed = 0;

  CLI::App* validate = app.add_subcommand("validate", "check a scenario config");
  validate->add_option("--config", config_path, "scenario config (JSON)")->required();

  CLI::App* run = app.add_subcommand("run", "run a single scenario replication");
  run->add_option("--config", config_path, "scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--replication", replication, "replication index (default 0)");
  CLI::Option* run_seed = run->add_option("--seed", seed, "override master seed");

  CLI::App* study = app.add_subcommand("study", "run a replicated multi-case study");
  study->add_option("--config", config_path, "study config or manifest (JSON)")->required();
  study->add_option("--out", out_dir, "output directory");
  study->add_option("--jobs", jobs, "parallel runs (default 1)");
  CLI::Option* study_seed = study->add_option("--seed", seed, "override master seed");

  CLI::App* replay = app.add_subcommand("replay", "re-derive metrics from an event log");
  replay->add_option("--events", events_path, "event log (JSONL)")->required();
  replay->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) return cmd_validate(config_path);
    if (app.got_subcommand(run)) return cmd_run(config_path, out_dir, replication, seed, run_seed->count() > 0);
    if (app.got_subcommand(study)) return cmd_study(config_path, out_dir, jobs, seed, study_seed->count() > 0);
    if (app.got_subcommand(replay)) return cmd_replay(events_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
