// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "covrage/harness.hpp"

using namespace covrage;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Scenario scenario_for(const HeadRotation& h, Strategy s = Strategy::covrage) {
  Scenario sc;
  sc.q1 = h.q1;
  sc.q2 = h.q2;
  sc.ap_dir = h.ap_dir;
  sc.strategy = s;
  return sc;
}

SweepResult sweep(const Scenario& sc, const Trajectory& t) {
  const BeamResult b = build_beam(sc, t);
  return sweep_trajectory(b.awv, sc.array, t, sc.link, default_mcs_table(), sc.penalty_grid);
}

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

// Half-power distance from the steered point along a unit UV direction.
double half_power_reach(const Awv& w, const ArrayConfig& cfg, UvPoint p, UvPoint dir, double peak) {
  double lo = 0.0, hi = 0.2;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    const UvPoint q{p.u + mid * dir.u, p.v + mid * dir.v};
    if (directional_gain(w, cfg, q) > peak - 10.0 * std::log10(2.0)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

Outcome beamwidth_anchors() {
  const double w16 = beamwidth_uv(16, 0.5);
  const double w40_deg = rad_to_deg(beamwidth_angular(40, 0.5, 0.0));
  const bool ok = std::abs(w16 - 0.1108) <= 0.0005 && std::abs(w40_deg - 2.54) <= 0.01;
  return {ok, "16x16 width " + fmt("%.5f", w16) + " uv, 40x40 broadside " + fmt("%.4f", w40_deg) + " deg"};
}

Outcome uv_invariance() {
  const ArrayConfig cfg{16, 16, 0.5, 60e9};
  const double expected = beamwidth_uv(16, 0.5);
  const double peak = 20.0 * std::log10(256.0);
  double worst = 0.0;
  for (int k = 1; k <= 20; ++k) {
    // Off-broadside angle 3..60 deg, rotating the azimuth of the offset.
    const double alpha = deg_to_rad(3.0 * k);
    const double beta = 2.0 * kPi * k / 20.0;
    const Vec3 d{std::sin(alpha) * std::cos(beta), std::sin(alpha) * std::sin(beta), std::cos(alpha)};
    const UvPoint p = vector_to_uv(d);
    const Awv w = steering_weights(cfg, SteeringDirection::from_uv(p));
    const double r = std::hypot(p.u, p.v);
    const UvPoint radial{p.u / r, p.v / r};
    const double width = half_power_reach(w, cfg, p, radial, peak) +
                         half_power_reach(w, cfg, p, UvPoint{-radial.u, -radial.v}, peak);
    worst = std::max(worst, std::abs(width - expected) / expected);
  }
  return {worst < 0.02, "worst deviation " + fmt("%.4f", 100.0 * worst) + " % over 20 directions"};
}

Outcome coherent_gain() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> radius(0.0, 0.95), angle(-kPi, kPi);
  double worst = 0.0;
  const ArrayConfig full{32, 32, 0.25, 60e9};
  const SubArrayLayout layout = partition_interleaved(full, 4);
  for (int i = 0; i < 100; ++i) {
    const double r = radius(rng), a = angle(rng);
    const UvPoint p{r * std::cos(a), r * std::sin(a)};
    const SteeringDirection d = SteeringDirection::from_uv(p);
    for (const ArrayConfig& cfg : {full, ArrayConfig{16, 16, 0.5, 60e9}, ArrayConfig{12, 7, 0.5, 60e9}}) {
      const double g = directional_gain(steering_weights(cfg, d), cfg, d);
      worst = std::max(worst, std::abs(g - 20.0 * std::log10(static_cast<double>(cfg.size()))));
    }
    const Awv sub = steering_weights(layout, p);
    for (int k = 0; k < layout.count(); ++k) {
      const double g = gain_from_coefficient(placed_subarray_coefficient(sub, layout, k, p));
      worst = std::max(worst, std::abs(g - 20.0 * std::log10(256.0)));
    }
  }
  return {worst <= 1e-6, "worst error " + fmt("%.2e", worst) + " dB over 100 directions"};
}

Outcome coverage_guarantee() {
  const ArrayConfig cfg;
  int violations = 0, extrapolated = 0, cases = 0;
  double worst = 0.0;
  auto check = [&](const HeadRotation& h) {
    const Trajectory t = build_trajectory(scenario_for(h));
    const PlanResult r = plan_for_trajectory(t, cfg);
    const double half = r.plan.layout.subbeam_width_uv() / 2.0;
    if (r.plan.extrapolated_points > 0) ++extrapolated;
    ++cases;
    for (const UvPoint& p : t.points) {
      double best = 1e9;
      for (const UvPoint& c : r.plan.beam_centers) best = std::min(best, uv_distance(p, c));
      worst = std::max(worst, best / half);
      if (best > half * (1.0 + 1e-12)) ++violations;
    }
  };
  for (int i = 0; i < 50; ++i) check(random_head_rotation(1000 + i, 0.05 + 0.33 * i / 49.0));
  check(reference_rotation('A'));
  check(reference_rotation('B'));
  return {violations == 0 && extrapolated > 0,
          std::to_string(cases) + " trajectories, " + std::to_string(extrapolated) + " with extrapolation, " +
              std::to_string(violations) + " uncovered samples, worst distance " + fmt("%.3f", worst) +
              " half-widths"};
}

Outcome gain_stability() {
  std::string detail;
  bool ok = true;
  for (char which : {'A', 'B'}) {
    const Scenario sc = scenario_for(reference_rotation(which));
    const Trajectory t = build_trajectory(sc);
    const double range = sweep(sc, t).summary.range_db;
    ok = ok && range <= 6.0;
    detail += std::string(detail.empty() ? "" : ", ") + which + " range " + fmt("%.2f", range) + " dB (length " +
              fmt("%.3f", trajectory_length(t)) + ")";
  }
  return {ok, detail};
}

Outcome single_beam_collapse() {
  Scenario sc = scenario_for(reference_rotation('B'), Strategy::baseline_start);
  const Trajectory t = build_trajectory(sc);
  const SweepResult r = sweep(sc, t);
  const double drop = r.summary.max_gain_dbi - r.samples.back().gain_dbi;
  bool ok = drop >= 15.0;
  std::string levels;
  for (double h : {0.0, 1.5, 5.0, 10.0, 14.0}) {
    sc.link.headroom_db = h;
    const McsEntry m = sweep(sc, t).samples.back().mcs;
    // The far end must fall out of every data MCS.
    ok = ok && (m.is_control() || m.is_link_lost());
    levels += " h=" + fmt("%g", h) + ":" + (m.is_link_lost() ? std::string("lost") : std::to_string(m.index));
  }
  return {ok, "far-end drop " + fmt("%.2f", drop) + " dB; far-end MCS" + levels};
}

Outcome sync_ablation() {
  std::string detail;
  bool ok = true;
  for (char which : {'A', 'B'}) {
    Scenario sc = scenario_for(reference_rotation(which));
    const Trajectory t = build_trajectory(sc);
    const double synced = sweep(sc, t).summary.min_gain_dbi;
    sc.ablation.no_sync = true;
    std::vector<double> mins;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      sc.seed = seed;
      mins.push_back(sweep(sc, t).summary.min_gain_dbi);
    }
    std::sort(mins.begin(), mins.end());
    const double median = 0.5 * (mins[9] + mins[10]);
    ok = ok && synced >= median;
    detail += std::string(detail.empty() ? "" : ", ") + which + " synced " + fmt("%.2f", synced) + " vs median " +
              fmt("%.2f", median) + " dBi";
  }
  return {ok, detail};
}

Outcome delayed_first() {
  std::string detail;
  bool ok = true;
  for (char which : {'A', 'B'}) {
    Scenario sc = scenario_for(reference_rotation(which));
    const Trajectory t = build_trajectory(sc);
    const double standard = directional_gain(build_beam(sc, t).awv, sc.array, SteeringDirection::from_uv(t[0]));
    sc.ablation.delayed_first = true;
    const double delayed = directional_gain(build_beam(sc, t).awv, sc.array, SteeringDirection::from_uv(t[0]));
    ok = ok && standard - delayed >= 5.0;
    detail += std::string(detail.empty() ? "" : ", ") + which + " drop " + fmt("%.2f", standard - delayed) + " dB";
  }
  return {ok, detail};
}

Outcome conversions() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> yaw(-kPi, kPi), pitch(-deg_to_rad(85.0), deg_to_rad(85.0));
  std::uniform_real_distribution<double> front(-deg_to_rad(89.0), deg_to_rad(89.0));
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const EulerAngles e{yaw(rng), pitch(rng), yaw(rng)};
    const EulerAngles back = quat_to_euler(euler_to_quat(e));
    worst = std::max({worst, std::abs(wrap(back.phi - e.phi)), std::abs(back.theta - e.theta),
                      std::abs(wrap(back.psi - e.psi))});
    const EulerAngles d{front(rng), pitch(rng), 0.0};
    const EulerAngles via_uv = uv_to_euler(euler_to_uv(d));
    worst = std::max({worst, std::abs(via_uv.phi - d.phi), std::abs(via_uv.theta - d.theta)});
  }
  int rejected = 0;
  const std::vector<UvPoint> bad{{0.9, 0.9}, {1.0001, 0.0}, {std::nan(""), 0.0}, {0.0, -1.5}};
  for (const UvPoint& p : bad) {
    try {
      uv_to_euler(p);
    } catch (const InvalidUvError&) {
      ++rejected;
    }
  }
  const bool ok = worst <= 1e-6 && rejected == static_cast<int>(bad.size());
  return {ok, "worst round-trip error " + fmt("%.2e", worst) + " rad, " + std::to_string(rejected) + "/" +
                  std::to_string(bad.size()) + " invalid UV rejected"};
}

Outcome link_anchors() {
  const LinkParams p;
  const double pl1 = path_loss(1.0, p);
  const double delta = path_loss(2.0, p) - pl1;
  return {pl1 == 68.0 && std::abs(delta - 6.02) <= 0.01,
          "PL(1 m) " + fmt("%.4f", pl1) + " dB, doubling delta " + fmt("%.4f", delta) + " dB"};
}

Outcome performance() {
  const HeadRotation h = reference_rotation('B');
  const ArrayConfig cfg;
  std::vector<double> ms;
  for (int i = 0; i < 11; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const PlanResult r = covrage_plan(h.q1, h.q2, h.ap_dir, cfg, {}, 256);
    const auto t1 = std::chrono::steady_clock::now();
    if (r.plan.beam_count() == 0) return {false, "empty plan"};
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  return {ms[5] < 10.0, "median " + fmt("%.3f", ms[5]) + " ms, worst " + fmt("%.3f", ms.back()) + " ms"};
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    out[e.path().filename().string()] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "covrage_acceptance_determinism";
  cli::LoadedConfig cfg;
  cfg.path = "acceptance";
  cfg.rotation_source = "reference:B";
  cfg.scenario = scenario_for(reference_rotation('B'));
  cfg.scenario.seed = 11;
  cfg.scenario.ablation.no_sync = true;
  std::ostringstream log;
  int files = 0;
  bool ok = true;
  for (const std::string cmd : {"sweep", "compare"}) {
    const fs::path dir = root / cmd;
    fs::remove_all(dir);
    std::map<std::string, std::string> first;
    for (int run = 0; run < 2; ++run) {
      if (cmd == "sweep") cli::cmd_sweep(cfg, dir, log);
      else {
        cli::LoadedConfig plain = cfg;
        plain.scenario.ablation = {};
        cli::cmd_compare(plain, dir, log);
      }
      if (run == 0) first = read_dir(dir);
      else ok = ok && read_dir(dir) == first;
    }
    files += static_cast<int>(first.size());
  }
  fs::remove_all(root);
  return {ok, std::to_string(files) + " files compared across repeated runs"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"beamwidth anchors", beamwidth_anchors},
      {"UV beamwidth invariance", uv_invariance},
      {"coherent gain oracle", coherent_gain},
      {"coverage guarantee", coverage_guarantee},
      {"gain stability", gain_stability},
      {"single-beam collapse", single_beam_collapse},
      {"sync ablation", sync_ablation},
      {"delayed-first ablation", delayed_first},
      {"conversion suite", conversions},
      {"link-budget anchors", link_anchors},
      {"planner performance", performance},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
