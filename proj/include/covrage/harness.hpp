#pragma once

// Evaluation harness: scenarios, single-beam baselines, ablations, trajectory
// sweeps and hemisphere gain maps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "covrage/array_model.hpp"
#include "covrage/covrage.hpp"
#include "covrage/errors.hpp"
#include "covrage/geometry.hpp"
#include "covrage/link_budget.hpp"
#include "covrage/pattern.hpp"

namespace covrage {

enum class Strategy { covrage, baseline_start, baseline_edge, baseline_mid };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::covrage: return "covrage";
    case Strategy::baseline_start: return "baseline-start";
    case Strategy::baseline_edge: return "baseline-edge";
    case Strategy::baseline_mid: return "baseline-mid";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::covrage, Strategy::baseline_start, Strategy::baseline_edge, Strategy::baseline_mid})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

struct Ablation {
  bool no_sync = false;        // random sub-array shifts instead of phase sync
  bool delayed_first = false;  // first beam at the farthest sample still covering the start

  bool any() const { return no_sync || delayed_first; }
  friend bool operator==(const Ablation&, const Ablation&) = default;
};

inline std::string ablation_name(const Ablation& a) {
  if (a.no_sync && a.delayed_first) return "no-sync+delayed-first";
  if (a.no_sync) return "no-sync";
  if (a.delayed_first) return "delayed-first";
  return "none";
}

inline Ablation parse_ablation(std::string_view name) {
  if (name == "none" || name.empty()) return {};
  if (name == "no-sync" || name == "no_sync") return {true, false};
  if (name == "delayed-first" || name == "delayed_first") return {false, true};
  throw ConfigError("unknown ablation '" + std::string(name) + "'");
}

struct Scenario {
  ArrayConfig array;
  int interleave = 4;
  int phase_bits = 0;
  LinkParams link;
  Quaternion q1;
  Quaternion q2;
  UvPoint ap_dir;
  std::size_t samples = 0;  // 0: density rule
  Strategy strategy = Strategy::covrage;
  Ablation ablation;
  std::uint64_t seed = 1;
  int penalty_grid = 512;

  void validate() const {
    array.validate();
    link.validate();
    if (ablation.any() && strategy != Strategy::covrage)
      throw ConfigError("ablations only apply to the covrage strategy");
    if (!ap_dir.valid()) throw InvalidUvError("AP direction is not a valid UV coordinate");
    if (samples != 0 && samples < 2) throw ConfigError("samples must be 0 (auto) or >= 2");
    if (penalty_grid < 16) throw ConfigError("penalty grid resolution must be >= 16");
  }
};

inline Trajectory build_trajectory(const Scenario& sc) {
  const double w_i = partition_interleaved(sc.array, sc.interleave).subbeam_width_uv();
  const std::size_t n = sc.samples == 0 ? default_sample_count(sc.q1, sc.q2, sc.ap_dir, w_i) : sc.samples;
  return sample_trajectory(sc.q1, sc.q2, sc.ap_dir, n);
}

// Uniform phases in [0, 2 pi) from a seeded 64-bit Mersenne Twister. The
// double is built from the top 53 bits so the sequence is identical across
// standard library implementations.
inline std::vector<Complex> random_unit_phases(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Complex> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    out.push_back(unit_phasor(2.0 * kPi * unit));
  }
  return out;
}

struct BeamResult {
  Awv awv;
  std::optional<BeamPlan> plan;  // covrage only
  std::optional<UvPoint> steering;  // baselines only
};

// Index of the sample closest to half the trajectory's arc length.
inline std::size_t midpoint_index(const Trajectory& t) {
  const double half = trajectory_length(t) / 2.0;
  double acc = 0.0;
  std::size_t best = 0;
  double best_err = std::abs(half);
  for (std::size_t i = 1; i < t.size(); ++i) {
    acc += uv_distance(t[i - 1], t[i]);
    if (std::abs(acc - half) < best_err) {
      best_err = std::abs(acc - half);
      best = i;
    }
  }
  return best;
}

// Largest sample index within half a full-array beamwidth of the start.
inline std::size_t edge_index(const Trajectory& t, const ArrayConfig& cfg) {
  const double half = beamwidth_uv(std::min(cfg.nx, cfg.ny), cfg.spacing_wavelengths) / 2.0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (uv_distance(t[i], t[0]) <= half) best = i;
  return best;
}

inline BeamResult build_beam(const Scenario& sc, const Trajectory& t) {
  sc.validate();
  BeamResult out;
  if (sc.strategy != Strategy::covrage) {
    std::size_t idx = 0;
    if (sc.strategy == Strategy::baseline_edge) idx = edge_index(t, sc.array);
    if (sc.strategy == Strategy::baseline_mid) idx = midpoint_index(t);
    out.steering = t[idx];
    out.awv = quantize_phases(steering_weights(sc.array, SteeringDirection::from_uv(t[idx])), sc.phase_bits);
    return out;
  }

  PlanOptions opts;
  opts.interleave = sc.interleave;
  opts.phase_bits = sc.phase_bits;
  opts.delayed_first = sc.ablation.delayed_first;
  PlanResult plan = plan_for_trajectory(t, sc.array, opts);
  if (sc.ablation.no_sync) {
    const auto shifts = random_unit_phases(static_cast<std::size_t>(plan.plan.layout.count()), sc.seed);
    plan.awv = recompose_with_shifts(plan.plan, shifts, sc.phase_bits);
    plan.plan.subarray_shifts = shifts;
    for (std::size_t b = 0; b < plan.plan.members.size(); ++b)
      plan.plan.sync_shifts[b] = shifts[static_cast<std::size_t>(plan.plan.members[b].front())];
  }
  out.awv = std::move(plan.awv);
  out.plan = std::move(plan.plan);
  return out;
}

inline BeamResult build_beam(const Scenario& sc) { return build_beam(sc, build_trajectory(sc)); }

struct SweepSample {
  UvPoint point;
  double gain_dbi = 0.0;
  double noise_penalty_db = 0.0;
  double rx_power_dbm = 0.0;  // absolute level from the link budget (model-relative)
  McsEntry mcs;
};

struct SweepSummary {
  double min_gain_dbi = 0.0;
  double max_gain_dbi = 0.0;
  double range_db = 0.0;
  double max_noise_penalty_db = 0.0;
  double peak_gain_dbi = 0.0;  // hemisphere-wide maximum
  UvPoint peak_location;
  McsEntry min_mcs;  // slowest entry selected along the trajectory
};

struct SweepResult {
  std::vector<SweepSample> samples;
  SweepSummary summary;
};

// Gain, noise penalty and MCS at every trajectory sample.
inline SweepResult sweep_trajectory(const Awv& awv, const ArrayConfig& cfg, const Trajectory& t,
                                    const LinkParams& link, const McsTable& table, int penalty_grid = 512) {
  if (t.size() == 0) throw ConfigError("cannot sweep an empty trajectory");
  const GainPeak peak = find_gain_peak(awv, cfg, penalty_grid);

  SweepResult out;
  out.samples.reserve(t.size());
  double global_peak = peak.gain_dbi;
  std::vector<double> gains;
  gains.reserve(t.size());
  for (const UvPoint& p : t.points) gains.push_back(directional_gain(awv, cfg, SteeringDirection::from_uv(p)));
  for (double g : gains) global_peak = std::max(global_peak, g);

  SweepSummary& s = out.summary;
  s.min_gain_dbi = std::numeric_limits<double>::infinity();
  s.max_gain_dbi = -std::numeric_limits<double>::infinity();
  s.peak_gain_dbi = global_peak;
  s.peak_location = peak.location;
  bool first = true;
  for (std::size_t i = 0; i < t.size(); ++i) {
    SweepSample smp;
    smp.point = t[i];
    smp.gain_dbi = gains[i];
    smp.noise_penalty_db = global_peak - gains[i];
    smp.rx_power_dbm = received_power(link, gains[i]);
    smp.mcs = select_mcs(effective_level_dbm(link, table, smp.noise_penalty_db), table);
    s.min_gain_dbi = std::min(s.min_gain_dbi, smp.gain_dbi);
    s.max_gain_dbi = std::max(s.max_gain_dbi, smp.gain_dbi);
    s.max_noise_penalty_db = std::max(s.max_noise_penalty_db, smp.noise_penalty_db);
    if (first || smp.mcs.datarate_mbps < s.min_mcs.datarate_mbps) s.min_mcs = smp.mcs;
    first = false;
    out.samples.push_back(smp);
  }
  s.range_db = s.max_gain_dbi - s.min_gain_dbi;
  return out;
}

// Hemisphere gain map, laid out as heat-map data.
inline GainGrid gain_map(const Awv& awv, const ArrayConfig& cfg, int resolution) {
  if (resolution < 16) throw ConfigError("gain map resolution must be >= 16, got " + std::to_string(resolution));
  return evaluate_gain_grid(awv, cfg, UvGrid{resolution});
}

// ---------------------------------------------------------------------------
// Head rotation synthesis

struct HeadRotation {
  Quaternion q1;
  Quaternion q2;
  UvPoint ap_dir;
};

struct RotationShape {
  UvPoint ap_dir;           // AP direction at the start of the rotation
  Quaternion q1;            // starting head orientation
  double heading = 0.0;     // initial direction of AP motion in the UV plane, rad from +u
  double curvature = 0.0;   // 0: great-circle path; larger values bend it
  double target_length = 0.0;
};

// Builds (q1, q2) whose apparent AP path starts at shape.ap_dir, leaves it
// towards shape.heading, and has the requested UV length (measured on 256
// samples). The AP turns about a fixed axis; `curvature` tilts that axis
// towards the AP direction, turning the geodesic into a small circle.
inline HeadRotation synthesize_head_rotation(const RotationShape& shape) {
  HeadRotation out{shape.q1, shape.q1, shape.ap_dir};
  if (shape.target_length < 0.0) throw ConfigError("target length must be non-negative");
  if (shape.target_length == 0.0) return out;

  const Vec3 d = uv_to_vector(shape.ap_dir);
  // Tangent at d pointing towards the requested UV heading.
  const UvPoint ahead{shape.ap_dir.u + 1e-4 * std::cos(shape.heading), shape.ap_dir.v + 1e-4 * std::sin(shape.heading)};
  if (!ahead.valid()) throw DomainError("AP direction is on the hemisphere edge");
  const Vec3 a = uv_to_vector(ahead);
  Vec3 t{a[0] - d[0], a[1] - d[1], a[2] - d[2]};
  const double along = dot(t, d);
  t = normalized(Vec3{t[0] - along * d[0], t[1] - along * d[1], t[2] - along * d[2]});
  const Vec3 c = cross(d, t);
  const Vec3 axis = normalized(Vec3{c[0] + shape.curvature * d[0], c[1] + shape.curvature * d[1], c[2] + shape.curvature * d[2]});

  // The AP appears to turn by r = q1 q2*, hence q2 = r* q1.
  auto make = [&](double angle) {
    const Quaternion r = Quaternion::from_axis_angle(axis, angle);
    return HeadRotation{shape.q1, r.conjugate() * shape.q1, shape.ap_dir};
  };
  auto length = [&](double angle) -> std::optional<double> {
    const HeadRotation h = make(angle);
    try {
      return trajectory_length(sample_trajectory(h.q1, h.q2, h.ap_dir, 256));
    } catch (const HemisphereError&) {
      return std::nullopt;
    }
  };

  double hi = kPi / 2.0;
  std::optional<double> len_hi = length(hi);
  while (!len_hi && hi > 1e-3) {
    hi *= 0.8;
    len_hi = length(hi);
  }
  if (!len_hi || *len_hi < shape.target_length)
    throw DomainError("target trajectory length " + std::to_string(shape.target_length) + " is unreachable");
  double lo = 0.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    const std::optional<double> len = length(mid);
    if (len && *len < shape.target_length) lo = mid;
    else hi = mid;
  }
  return make(0.5 * (lo + hi));
}

// Seeded random head rotation whose apparent AP path has the given UV length.
inline HeadRotation random_head_rotation(std::uint64_t seed, double target_length) {
  if (target_length < 0.0) throw ConfigError("target length must be non-negative");
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53); };

  for (int attempt = 0; attempt < 64; ++attempt) {
    RotationShape shape;
    const double radius = 0.35 * std::sqrt(uniform(0.0, 1.0));
    const double angle = uniform(0.0, 2.0 * kPi);
    shape.ap_dir = {radius * std::cos(angle), radius * std::sin(angle)};
    shape.q1 = euler_to_quat({deg_to_rad(uniform(-30.0, 30.0)), deg_to_rad(uniform(-20.0, 20.0)),
                              deg_to_rad(uniform(-10.0, 10.0))});
    shape.heading = uniform(0.0, 2.0 * kPi);
    shape.curvature = uniform(-0.6, 0.6);
    shape.target_length = target_length;
    if (target_length == 0.0) return {shape.q1, shape.q1, shape.ap_dir};
    try {
      return synthesize_head_rotation(shape);
    } catch (const DomainError&) {
      continue;
    }
  }
  throw DomainError("no head rotation found for trajectory length " + std::to_string(target_length));
}

// The two fixed evaluation trajectories: a gently curved path of UV length
// 0.30 and a more strongly curved one of length 0.35.
inline HeadRotation reference_rotation(char which) {
  RotationShape shape;
  if (which == 'A') {
    shape.ap_dir = {-0.15, -0.10};
    shape.q1 = Quaternion::identity();
    shape.heading = deg_to_rad(30.0);
    shape.curvature = 0.1;
    shape.target_length = 0.30;
  } else if (which == 'B') {
    shape.ap_dir = {0.05, 0.15};
    shape.q1 = euler_to_quat({deg_to_rad(10.0), deg_to_rad(-5.0), 0.0});
    shape.heading = deg_to_rad(-60.0);
    shape.curvature = 0.5;
    shape.target_length = 0.35;
  } else {
    throw ConfigError(std::string("unknown reference trajectory '") + which + "'");
  }
  return synthesize_head_rotation(shape);
}

}  // namespace covrage
