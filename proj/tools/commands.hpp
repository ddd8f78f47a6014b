#pragma once

// Subcommand implementations. Each writes manifest.json first, then its data
// files, all starting with a schema line. Output depends only on the resolved
// scenario, so repeated runs are byte-identical.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "covrage/harness.hpp"
#include "scenario_config.hpp"

namespace covrage::cli {

inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

inline std::string num(double x, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, x);
  std::string s = buf;
  // No "-0.000000" in outputs.
  if (s[0] == '-' && s.find_first_not_of("0.", 1) == std::string::npos) s.erase(0, 1);
  return s;
}

inline Json to_json(const Quaternion& q) { return Json::array({q.w, q.x, q.y, q.z}); }
inline Json to_json(const UvPoint& p) { return Json::array({p.u, p.v}); }

inline Json scenario_json(const LoadedConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  Json j;
  j["array"] = {{"nx", sc.array.nx},
                {"ny", sc.array.ny},
                {"spacing_wavelengths", sc.array.spacing_wavelengths},
                {"frequency_hz", sc.array.frequency_hz},
                {"interleave", sc.interleave},
                {"phase_bits", sc.phase_bits}};
  Json link = {{"eirp_dbm", sc.link.eirp_dbm},
               {"eirp_limit_dbm", sc.link.eirp_limit_dbm},
               {"distance_m", sc.link.distance_m},
               {"path_loss_exponent", sc.link.path_loss_exponent},
               {"reference_distance_m", sc.link.reference_distance_m}};
  if (sc.link.reference_loss_db) link["reference_loss_db"] = *sc.link.reference_loss_db;
  else link["reference_loss_db"] = "friis";
  link["headroom_db"] = sc.link.headroom_db;
  link["mcs_table_source"] = cfg.table_source;
  Json table = Json::array();
  for (const McsEntry& e : cfg.table.entries()) table.push_back({e.index, e.sensitivity_dbm, e.datarate_mbps});
  link["mcs_table"] = table;
  j["link"] = link;
  j["rotation"] = {{"source", cfg.rotation_source},
                   {"q1", to_json(sc.q1)},
                   {"q2", to_json(sc.q2)},
                   {"ap_uv", to_json(sc.ap_dir)}};
  j["samples"] = sc.samples;
  j["strategy"] = std::string(to_string(sc.strategy));
  j["ablation"] = ablation_name(sc.ablation);
  j["seed"] = sc.seed;
  j["penalty_grid"] = sc.penalty_grid;
  return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

inline void write_manifest(const LoadedConfig& cfg, const std::filesystem::path& out_dir, const std::string& command,
                           const std::vector<std::string>& outputs) {
  std::filesystem::create_directories(out_dir);
  Json m;
  m["schema"] = "covrage-manifest/1";
  m["command"] = command;
  m["tool_version"] = kToolVersion;
  m["config_path"] = cfg.path;
  m["out_dir"] = out_dir.generic_string();
  m["seed"] = cfg.scenario.seed;
  m["scenario"] = scenario_json(cfg);
  m["outputs"] = outputs;
  write_json(out_dir / "manifest.json", m);
}

// ---------------------------------------------------------------------------

inline void cmd_plan(const LoadedConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  write_manifest(cfg, out_dir, "plan", {"plan.json", "awv.csv"});
  const Scenario& sc = cfg.scenario;
  Scenario covrage_sc = sc;
  covrage_sc.strategy = Strategy::covrage;
  const Trajectory t = build_trajectory(covrage_sc);
  const BeamResult beam = build_beam(covrage_sc, t);
  const BeamPlan& plan = *beam.plan;

  Json j;
  j["schema"] = "covrage-plan/1";
  j["ablation"] = ablation_name(sc.ablation);
  j["samples"] = t.size();
  j["trajectory_length_uv"] = plan.trajectory_length;
  j["subbeam_width_uv"] = plan.coverage.subbeam_width;
  j["subdivisions"] = plan.coverage.subdivision;
  j["subarray_count"] = plan.layout.count();
  j["extrapolated_points"] = plan.extrapolated_points;
  j["beam_count"] = plan.beam_count();
  Json beams = Json::array();
  for (std::size_t b = 0; b < plan.beam_count(); ++b)
    beams.push_back({{"center_uv", to_json(plan.beam_centers[b])},
                     {"sync_phase_rad", std::arg(plan.sync_shifts[b])},
                     {"subarrays", plan.members[b]}});
  j["beams"] = beams;
  Json overlaps = Json::array();
  for (const UvPoint& p : plan.overlap_points) overlaps.push_back(to_json(p));
  j["overlap_points"] = overlaps;
  j["diagnostics"] = plan.diagnostics;
  write_json(out_dir / "plan.json", j);

  std::string csv = "# schema: covrage-awv/1\nx,y,phase_rad\n";
  for (int y = 0; y < beam.awv.ny(); ++y)
    for (int x = 0; x < beam.awv.nx(); ++x)
      csv += std::to_string(x) + "," + std::to_string(y) + "," + num(std::arg(beam.awv.at(x, y)), 9) + "\n";
  write_text(out_dir / "awv.csv", csv);

  log << "beams: " << plan.beam_count() << " (sub-arrays " << plan.layout.count() << ", subdivisions "
      << plan.coverage.subdivision << ", extrapolated points " << plan.extrapolated_points << ")\n";
  for (std::size_t b = 0; b < plan.beam_count(); ++b) {
    log << "  beam " << b << ": center (" << num(plan.beam_centers[b].u) << ", " << num(plan.beam_centers[b].v)
        << ") sync " << num(std::arg(plan.sync_shifts[b])) << " rad, sub-arrays";
    for (int k : plan.members[b]) log << ' ' << k;
    log << '\n';
  }
  for (std::size_t m = 0; m < plan.overlap_points.size(); ++m)
    log << "  overlap " << m << ": (" << num(plan.overlap_points[m].u) << ", " << num(plan.overlap_points[m].v) << ")\n";
  for (const std::string& d : plan.diagnostics) log << "  note: " << d << '\n';
}

inline Json summary_json(const SweepSummary& s) {
  return {{"min_gain_dbi", s.min_gain_dbi},
          {"max_gain_dbi", s.max_gain_dbi},
          {"range_db", s.range_db},
          {"max_noise_penalty_db", s.max_noise_penalty_db},
          {"peak_gain_dbi", s.peak_gain_dbi},
          {"peak_uv", to_json(s.peak_location)},
          {"min_mcs", s.min_mcs.index},
          {"min_datarate_mbps", s.min_mcs.datarate_mbps}};
}

inline SweepResult run_sweep(const LoadedConfig& cfg, const Trajectory& t) {
  const BeamResult beam = build_beam(cfg.scenario, t);
  return sweep_trajectory(beam.awv, cfg.scenario.array, t, cfg.scenario.link, cfg.table, cfg.scenario.penalty_grid);
}

inline void cmd_sweep(const LoadedConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  write_manifest(cfg, out_dir, "sweep", {"sweep.csv", "summary.json"});
  const Trajectory t = build_trajectory(cfg.scenario);
  const SweepResult r = run_sweep(cfg, t);

  std::string csv =
      "# schema: covrage-sweep/1\n"
      "index,u,v,azimuth_deg,elevation_deg,gain_dbi,noise_penalty_db,rx_power_dbm,mcs,datarate_mbps\n";
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const SweepSample& s = r.samples[i];
    const EulerAngles e = uv_to_euler(s.point);
    csv += std::to_string(i) + "," + num(s.point.u, 9) + "," + num(s.point.v, 9) + "," + num(rad_to_deg(e.phi)) + "," +
           num(rad_to_deg(e.theta)) + "," + num(s.gain_dbi) + "," + num(s.noise_penalty_db) + "," +
           num(s.rx_power_dbm) + "," + std::to_string(s.mcs.index) + "," + num(s.mcs.datarate_mbps, 2) + "\n";
  }
  write_text(out_dir / "sweep.csv", csv);

  Json j;
  j["schema"] = "covrage-sweep-summary/1";
  j["strategy"] = std::string(to_string(cfg.scenario.strategy));
  j["ablation"] = ablation_name(cfg.scenario.ablation);
  j["samples"] = r.samples.size();
  j["trajectory_length_uv"] = trajectory_length(t);
  j["summary"] = summary_json(r.summary);
  j["absolute_levels"] = "model-relative: rx_power_dbm depends on the configured EIRP and path loss";
  write_json(out_dir / "summary.json", j);

  log << to_string(cfg.scenario.strategy) << " (" << ablation_name(cfg.scenario.ablation) << "): gain "
      << num(r.summary.min_gain_dbi, 2) << " .. " << num(r.summary.max_gain_dbi, 2) << " dBi, range "
      << num(r.summary.range_db, 2) << " dB, min MCS " << r.summary.min_mcs.index << " ("
      << num(r.summary.min_mcs.datarate_mbps, 2) << " Mbps)\n";
}

inline constexpr double kDisplayClampDbi = 30.0;

inline void cmd_gainmap(const LoadedConfig& cfg, const std::filesystem::path& out_dir, int resolution,
                        std::ostream& log) {
  if (resolution < 16) throw ConfigError("--resolution must be >= 16, got " + std::to_string(resolution));
  write_manifest(cfg, out_dir, "gainmap", {"gainmap.csv"});
  const BeamResult beam = build_beam(cfg.scenario);
  const GainGrid g = gain_map(beam.awv, cfg.scenario.array, resolution);

  std::string csv = "# schema: covrage-gainmap/1\n";
  csv += "# resolution=" + std::to_string(resolution) + " clamp_dbi=" + num(kDisplayClampDbi, 1) +
         " extent=full-disc out_of_hemisphere=out\n";
  csv += "row,col,u,v,gain_dbi\n";
  for (int row = 0; row < resolution; ++row) {
    for (int col = 0; col < resolution; ++col) {
      const UvPoint p = g.grid.point(row, col);
      csv += std::to_string(row) + "," + std::to_string(col) + "," + num(p.u, 9) + "," + num(p.v, 9) + ",";
      csv += g.valid(row, col) ? num(g.at(row, col)) : std::string("out");
      csv += "\n";
    }
  }
  write_text(out_dir / "gainmap.csv", csv);
  log << "gain map " << resolution << "x" << resolution << " written\n";
}

struct CompareRow {
  Strategy strategy;
  Ablation ablation;
  SweepSummary summary;
};

inline std::vector<CompareRow> compare_strategies(const LoadedConfig& cfg) {
  std::vector<std::pair<Strategy, Ablation>> runs = {
      {Strategy::covrage, {}},
      {Strategy::baseline_start, {}},
      {Strategy::baseline_edge, {}},
      {Strategy::baseline_mid, {}},
      {Strategy::covrage, {true, false}},
      {Strategy::covrage, {false, true}},
  };
  LoadedConfig run = cfg;
  run.scenario.strategy = Strategy::covrage;
  run.scenario.ablation = {};
  const Trajectory t = build_trajectory(run.scenario);
  std::vector<CompareRow> rows;
  for (const auto& [strategy, ablation] : runs) {
    run.scenario.strategy = strategy;
    run.scenario.ablation = ablation;
    rows.push_back({strategy, ablation, run_sweep(run, t).summary});
  }
  return rows;
}

inline void cmd_compare(const LoadedConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  write_manifest(cfg, out_dir, "compare", {"compare.csv"});
  const std::vector<CompareRow> rows = compare_strategies(cfg);
  std::string csv =
      "# schema: covrage-compare/1\n"
      "strategy,ablation,min_gain_dbi,max_gain_dbi,range_db,max_noise_penalty_db,min_mcs,min_datarate_mbps\n";
  for (const CompareRow& r : rows) {
    csv += std::string(to_string(r.strategy)) + "," + ablation_name(r.ablation) + "," + num(r.summary.min_gain_dbi) +
           "," + num(r.summary.max_gain_dbi) + "," + num(r.summary.range_db) + "," +
           num(r.summary.max_noise_penalty_db) + "," + std::to_string(r.summary.min_mcs.index) + "," +
           num(r.summary.min_mcs.datarate_mbps, 2) + "\n";
    log << to_string(r.strategy) << '/' << ablation_name(r.ablation) << ": min " << num(r.summary.min_gain_dbi, 2)
        << " dBi, range " << num(r.summary.range_db, 2) << " dB, min rate " << num(r.summary.min_mcs.datarate_mbps, 2)
        << " Mbps\n";
  }
  write_text(out_dir / "compare.csv", csv);
}

}  // namespace covrage::cli
