#pragma once

// Replicated multi-case experiment harness. Cases share the base schedule
// and per-replication seeds so comparisons are matched; runs execute as
// isolated parallel units and every output file is written atomically in a
// fixed order, which keeps the whole file set byte-reproducible at any
// parallelism degree.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hexflow/scenario.hpp"
#include "hexflow/simulation.hpp"
#include "hexflow/stats.hpp"
#include "hexflow/util.hpp"

namespace hexflow {

struct StudyCase {
  std::string name;
  json overrides;  // JSON merge patch applied to the base scenario
};

struct StudySpec {
  json base_json;
  ScenarioConfig base;
  std::vector<StudyCase> cases;

  ScenarioConfig case_config(std::size_t i) const {
    json merged = base_json;
    merged.merge_patch(cases[i].overrides);
    return scenario_from_json(merged);
  }

  json to_json() const {
    json j;
    j["schema_version"] = 1;
    j["base"] = base_json;
    json cs = json::array();
    for (const StudyCase& c : cases) cs.push_back({{"name", c.name}, {"overrides", c.overrides}});
    j["cases"] = cs;
    return j;
  }
};

inline StudySpec study_from_json(const json& j) {
  if (!j.is_object() || !j.contains("base") || !j.contains("cases"))
    throw ConfigError("study config must contain \"base\" and \"cases\"");
  StudySpec s;
  s.base_json = scenario_to_json(scenario_from_json(j.at("base")));  // normalized, defaults applied
  s.base = scenario_from_json(s.base_json);
  for (const json& c : j.at("cases")) {
    StudyCase sc;
    sc.name = c.contains("name") ? c.at("name").get<std::string>() : "";
    sc.overrides = c.contains("overrides") ? c.at("overrides") : json::object();
    if (sc.name.empty()) throw ConfigError("every study case needs a name");
    s.cases.push_back(sc);
  }
  if (s.cases.size() < 2) throw ConfigError("a study needs at least two cases");
  for (std::size_t i = 0; i < s.cases.size(); ++i)
    for (std::size_t k = i + 1; k < s.cases.size(); ++k)
      if (s.cases[i].name == s.cases[k].name)
        throw ConfigError("duplicate case name: " + s.cases[i].name);
  return s;
}

inline StudySpec load_study(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
  if (j.is_object() && j.contains("study")) return study_from_json(j.at("study"));  // manifest re-run
  return study_from_json(j);
}

struct StudyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PerAircraftRow {
  std::size_t case_idx = 0;
  int replication = 0;
  AircraftMetrics metrics;
};

struct SeriesTableRow {
  std::size_t case_idx = 0;
  int replication = 0;
  SeriesRow row;
};

struct StudyResult {
  StudySpec spec;
  std::vector<std::string> case_names;
  std::vector<std::uint64_t> replication_seeds;
  std::vector<std::vector<double>> rep_mean_tt;  // [case][replication]
  std::vector<double> case_mean_tt;
  std::vector<double> case_sd_tt;
  std::vector<std::vector<double>> pairwise_p;   // symmetric, diagonal = 1
  std::vector<std::vector<SeriesRow>> mean_series;  // [case], averaged over replications
  std::vector<PerAircraftRow> aircraft_rows;
  std::vector<SeriesTableRow> series_rows;
  std::vector<std::vector<double>> final_entropy;  // [case][replication]
  std::vector<std::vector<int>> final_support;     // [case][replication]
};

namespace detail {

inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for writing: " + tmp.string());
    os << content;
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string render_run_log(const RunResult& run, const json& header_meta) {
  std::string out;
  out.reserve(run.events.size() * 96 + 1024);
  json header = header_meta;
  header["k"] = "run_header";
  header["seq"] = 0;
  out += header.dump();
  out += '\n';
  for (const SimEvent& e : run.events) {
    out += e.to_line();
    out += '\n';
  }
  json footer;
  footer["k"] = "run_footer";
  footer["seq"] = static_cast<std::int64_t>(run.events.size()) + 1;
  footer["end_s"] = run.end_time_s;
  footer["timed_out"] = run.timed_out;
  footer["total_entropy"] = run.final_entropy;
  footer["support"] = run.final_support;
  out += footer.dump();
  out += '\n';
  return out;
}

inline std::string render_traversals(const RunResult& run) {
  std::string out = "time_s,q,r,entry,exit\n";
  for (const TraversalRecord& r : run.traversals) {
    out += format_double(r.time);
    out += ',';
    out += std::to_string(r.cell.q);
    out += ',';
    out += std::to_string(r.cell.r);
    out += ',';
    out += std::to_string(r.entry);
    out += ',';
    out += std::to_string(r.exit);
    out += '\n';
  }
  return out;
}

}  // namespace detail

// Writes one run's event log and traversal log under `dir`.
inline void write_run_files(const std::filesystem::path& dir, const std::string& case_name,
                            int replication, const RunResult& run, const ScenarioConfig& cfg) {
  json meta;
  meta["case"] = case_name;
  meta["replication"] = replication;
  meta["seed"] = run.seed;
  meta["config"] = scenario_to_json(cfg);
  meta["schema_version"] = 1;
  char rep_name[32];
  std::snprintf(rep_name, sizeof(rep_name), "rep_%03d", replication);
  detail::atomic_write(dir / "events" / case_name / (std::string(rep_name) + ".jsonl"),
                       detail::render_run_log(run, meta));
  detail::atomic_write(dir / "traversals" / case_name / (std::string(rep_name) + ".csv"),
                       detail::render_traversals(run));
}

// Executes every (case, replication) pair, streaming per-run logs to
// `out_dir` as they complete. Jobs run `parallelism` at a time; results are
// folded in a fixed order so outputs do not depend on the degree.
inline StudyResult run_study(const StudySpec& spec, const std::filesystem::path& out_dir,
                             int parallelism = 1) {
  if (parallelism < 1) parallelism = 1;
  const std::size_t n_cases = spec.cases.size();
  const int reps = spec.base.replications;

  StudyResult result;
  result.spec = spec;
  for (const StudyCase& c : spec.cases) result.case_names.push_back(c.name);
  for (int r = 0; r < reps; ++r)
    result.replication_seeds.push_back(child_seed(spec.base.master_seed, static_cast<std::uint64_t>(r)));

  std::vector<ScenarioConfig> case_cfgs;
  for (std::size_t ci = 0; ci < n_cases; ++ci) {
    ScenarioConfig cfg = spec.case_config(ci);
    const std::vector<std::string> violations = validate(cfg);
    if (!violations.empty())
      throw StudyError("case " + spec.cases[ci].name + " invalid: " + violations.front());
    if (cfg.replications != reps)
      throw StudyError("case " + spec.cases[ci].name + " must not override replications");
    if (!cfg.pair_cases_by_replication)
      cfg.master_seed = splitmix64_mix(cfg.master_seed ^ (0x100001b3ull * (ci + 1)));
    case_cfgs.push_back(cfg);
  }

  result.rep_mean_tt.assign(n_cases, {});
  result.final_entropy.assign(n_cases, {});
  result.final_support.assign(n_cases, {});

  struct Job {
    std::size_t case_idx;
    int rep;
  };
  std::vector<Job> jobs;
  for (std::size_t ci = 0; ci < n_cases; ++ci)
    for (int r = 0; r < reps; ++r) jobs.push_back({ci, r});

  for (std::size_t chunk = 0; chunk < jobs.size(); chunk += static_cast<std::size_t>(parallelism)) {
    const std::size_t end = std::min(jobs.size(), chunk + static_cast<std::size_t>(parallelism));
    std::vector<std::future<RunResult>> futures;
    for (std::size_t i = chunk; i < end; ++i) {
      const Job job = jobs[i];
      futures.push_back(std::async(std::launch::async, [&case_cfgs, job] {
        return run_simulation(case_cfgs[job.case_idx], job.rep);
      }));
    }
    for (std::size_t i = chunk; i < end; ++i) {
      const Job job = jobs[i];
      RunResult run = futures[i - chunk].get();
      if (run.timed_out)
        throw StudyError("case " + spec.cases[job.case_idx].name + " replication " +
                         std::to_string(job.rep) + " timed out at " + format_double(run.end_time_s) + " s");
      write_run_files(out_dir, spec.cases[job.case_idx].name, job.rep, run, case_cfgs[job.case_idx]);

      double tt_sum = 0.0;
      std::size_t tt_n = 0;
      for (const AircraftMetrics& m : run.aircraft) {
        result.aircraft_rows.push_back({job.case_idx, job.rep, m});
        if (m.travel_time_s) {
          tt_sum += *m.travel_time_s;
          ++tt_n;
        }
      }
      result.rep_mean_tt[job.case_idx].push_back(tt_n > 0 ? tt_sum / static_cast<double>(tt_n) : 0.0);
      result.final_entropy[job.case_idx].push_back(run.final_entropy);
      result.final_support[job.case_idx].push_back(run.final_support);
      for (const SeriesRow& row : run.series)
        result.series_rows.push_back({job.case_idx, job.rep, row});
    }
  }

  // Pooled statistics over replication means.
  for (std::size_t ci = 0; ci < n_cases; ++ci) {
    const MeanVar mv = mean_and_variance(result.rep_mean_tt[ci]);
    result.case_mean_tt.push_back(mv.mean);
    result.case_sd_tt.push_back(std::sqrt(mv.var));
  }
  result.pairwise_p.assign(n_cases, std::vector<double>(n_cases, 1.0));
  for (std::size_t i = 0; i < n_cases; ++i) {
    for (std::size_t k = i + 1; k < n_cases; ++k) {
      double p = std::numeric_limits<double>::quiet_NaN();
      if (reps >= 2) {
        try {
          p = welch_t_test(result.rep_mean_tt[i], result.rep_mean_tt[k]).p;
        } catch (const std::invalid_argument&) {
          // degenerate samples: leave NaN
        }
      }
      result.pairwise_p[i][k] = p;
      result.pairwise_p[k][i] = p;
    }
  }

  // Per-case mean series over the periodic sample grid. A replication that
  // has already ended contributes zero active aircraft and its final
  // entropy/support, matching how the airspace actually looks after its
  // last arrival.
  const double period = spec.base.series_period_s;
  for (std::size_t ci = 0; ci < n_cases; ++ci) {
    std::vector<std::vector<SeriesRow>> per_rep(static_cast<std::size_t>(reps));
    for (const SeriesTableRow& row : result.series_rows) {
      if (row.case_idx != ci) continue;
      const double k = std::round(row.row.time_s / period);
      if (std::fabs(row.row.time_s - k * period) > 1e-6) continue;  // skip the off-grid final row
      per_rep[static_cast<std::size_t>(row.replication)].push_back(row.row);
    }
    std::size_t longest = 0;
    for (const auto& rows : per_rep) longest = std::max(longest, rows.size());
    std::vector<SeriesRow> mean(longest);
    for (std::size_t t = 0; t < longest; ++t) {
      SeriesRow& m = mean[t];
      m.time_s = static_cast<double>(t) * period;
      double active = 0.0, entropy = 0.0, kt = 0.0, support = 0.0;
      for (int r = 0; r < reps; ++r) {
        const auto& rows = per_rep[static_cast<std::size_t>(r)];
        if (t < rows.size()) {
          active += rows[t].active_count;
          entropy += rows[t].total_entropy;
          kt += rows[t].mean_kt;
          support += rows[t].support_size;
        } else {
          entropy += result.final_entropy[ci][static_cast<std::size_t>(r)];
          support += result.final_support[ci][static_cast<std::size_t>(r)];
        }
      }
      m.total_entropy = entropy / reps;
      m.mean_kt = kt / reps;
      m.active_count = static_cast<int>(std::lround(active / reps));
      m.support_size = static_cast<int>(std::lround(support / reps));
    }
    result.mean_series.push_back(std::move(mean));
  }

  return result;
}

// Writes the analysis tables and the manifest. Event and traversal logs are
// written by run_study as runs complete.
inline void emit_outputs(const StudyResult& result, const std::filesystem::path& out_dir) {
  const std::size_t n_cases = result.case_names.size();

  std::string per_aircraft =
      "case,replication,aircraft_id,intro_time_s,travel_time_s,path_miles,cum_heading_deg,hold_count\n";
  for (const PerAircraftRow& row : result.aircraft_rows) {
    per_aircraft += result.case_names[row.case_idx] + ',' + std::to_string(row.replication) + ',' +
                    std::to_string(row.metrics.id) + ',' + format_double(row.metrics.intro_time_s) +
                    ',' + (row.metrics.travel_time_s ? format_double(*row.metrics.travel_time_s) : "") +
                    ',' + format_double(row.metrics.path_miles) + ',' +
                    format_double(row.metrics.cum_heading_deg) + ',' +
                    std::to_string(row.metrics.hold_count) + '\n';
  }
  detail::atomic_write(out_dir / "per_aircraft.csv", per_aircraft);

  std::string series =
      "case,replication,time_s,active_count,total_entropy,mean_kt,support_size\n";
  for (const SeriesTableRow& row : result.series_rows) {
    series += result.case_names[row.case_idx] + ',' + std::to_string(row.replication) + ',' +
              format_double(row.row.time_s) + ',' + std::to_string(row.row.active_count) + ',' +
              format_double(row.row.total_entropy) + ',' + format_double(row.row.mean_kt) + ',' +
              std::to_string(row.row.support_size) + '\n';
  }
  detail::atomic_write(out_dir / "time_series.csv", series);

  std::string mean_series = "case,time_s,active_count,total_entropy,mean_kt,support_size\n";
  for (std::size_t ci = 0; ci < n_cases; ++ci) {
    for (const SeriesRow& row : result.mean_series[ci]) {
      mean_series += result.case_names[ci] + ',' + format_double(row.time_s) + ',' +
                     std::to_string(row.active_count) + ',' + format_double(row.total_entropy) +
                     ',' + format_double(row.mean_kt) + ',' + std::to_string(row.support_size) + '\n';
    }
  }
  detail::atomic_write(out_dir / "mean_series.csv", mean_series);

  std::string summary = "case,n_replications,mean_travel_time_s,sd_travel_time_s,mean_final_entropy\n";
  for (std::size_t ci = 0; ci < n_cases; ++ci) {
    const MeanVar ent = mean_and_variance(result.final_entropy[ci]);
    summary += result.case_names[ci] + ',' +
               std::to_string(result.rep_mean_tt[ci].size()) + ',' +
               format_double(result.case_mean_tt[ci]) + ',' + format_double(result.case_sd_tt[ci]) +
               ',' + format_double(ent.mean) + '\n';
  }
  detail::atomic_write(out_dir / "summary.csv", summary);

  std::string pvals = "case_a,case_b,p_value\n";
  for (std::size_t i = 0; i < n_cases; ++i)
    for (std::size_t k = i + 1; k < n_cases; ++k)
      pvals += result.case_names[i] + ',' + result.case_names[k] + ',' +
               format_double(result.pairwise_p[i][k]) + '\n';
  detail::atomic_write(out_dir / "pairwise_pvalues.csv", pvals);

  json manifest;
  manifest["schema_version"] = 1;
  manifest["study"] = result.spec.to_json();
  manifest["config_hash"] = hex64(fnv1a64(result.spec.to_json().dump()));
  manifest["master_seed"] = result.spec.base.master_seed;
  manifest["replication_seeds"] = result.replication_seeds;
  manifest["cases"] = result.case_names;
  detail::atomic_write(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace hexflow
