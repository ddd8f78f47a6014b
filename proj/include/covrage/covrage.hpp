#pragma once

// Trajectory-covering receive beam synthesis.
//
// Given the apparent AP path in UV space, the planner
//   1. picks a sub-beam width (interleaved sub-arrays, localized further if
//      the path is too long for them),
//   2. drops sub-beam centres along the path so every sample is within half
//      a sub-beam width of a centre, with adjacent beams sharing a sample,
//   3. assigns sub-arrays to sub-beams (spare sub-arrays reinforce beams),
//   4. phase-aligns adjacent sub-beams at their shared samples,
// and composes the resulting full-array AWV.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "covrage/array_model.hpp"
#include "covrage/errors.hpp"
#include "covrage/geometry.hpp"

namespace covrage {

struct CoverageParams {
  double subbeam_width = 0.0;  // w_i, UV units
  int interleaved = 4;         // M_i
  int subdivision = 0;         // s

  double half_width() const { return subbeam_width / 2.0; }
};

// Sub-beams needed for a path of UV length l_t with beams of width w_i; the
// first beam sits on the path start, so only half of it counts.
inline int required_subbeams(double l_t, double w_i) {
  if (l_t < 0.0 || !(w_i > 0.0)) throw ConfigError("required_subbeams: need l_t >= 0 and w_i > 0");
  return static_cast<int>(std::ceil((l_t + 0.5 * w_i) / w_i));
}

// Smallest s with l_t + 2^(s-1) w_i <= 4^s * m_i * 2^s * w_i: each level
// doubles the beam width and quadruples the beam count.
inline int subdivision_level(double l_t, double w_i, int m_i) {
  if (l_t < 0.0 || !(w_i > 0.0) || m_i < 1) throw ConfigError("subdivision_level: invalid arguments");
  for (int s = 0; s < 30; ++s) {
    const double width = std::ldexp(w_i, s);
    const double needed = l_t + 0.5 * width;
    const double capacity = std::ldexp(1.0, 2 * s) * m_i * width;
    if (needed <= capacity) return s;
  }
  throw ConfigError("subdivision_level: trajectory length out of range");
}

// Groups of sub-array indices, one group per sub-beam, in trajectory order.
// Sub-arrays are handed out as evenly as possible with the earlier beams
// taking the extras. With the 2x2 interleaved layout, groups are formed from
// diagonal pairs ({0, 3} then {1, 2}); when every beam gets exactly one
// sub-array they are assigned in ascending order.
inline std::vector<std::vector<int>> allocate_sub_arrays(int m_s, int m_i, int subdivisions = 0) {
  const int quadrants = 1 << (2 * subdivisions);
  const int total = m_i * quadrants;
  if (m_s < 1 || m_s > total)
    throw std::logic_error("allocate_sub_arrays: " + std::to_string(m_s) + " beams for " + std::to_string(total) +
                           " sub-arrays");

  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(total));
  if (m_s == total) {
    for (int k = 0; k < total; ++k) order.push_back(k);
  } else {
    std::vector<int> interleaved_order;
    if (m_i == 4) {
      interleaved_order = {0, 3, 1, 2};
    } else {
      for (int k = 0; k < m_i; ++k) interleaved_order.push_back(k);
    }
    for (int q = 0; q < quadrants; ++q)
      for (int k : interleaved_order) order.push_back(k * quadrants + q);
  }

  std::vector<std::vector<int>> groups(static_cast<std::size_t>(m_s));
  const int base = total / m_s;
  const int extra = total % m_s;
  std::size_t next = 0;
  for (int b = 0; b < m_s; ++b) {
    const int size = base + (b < extra ? 1 : 0);
    for (int i = 0; i < size; ++i) groups[static_cast<std::size_t>(b)].push_back(order[next++]);
  }
  return groups;
}

struct CoverResult {
  std::vector<std::size_t> beam_indices;     // into `points`
  std::vector<std::size_t> overlap_indices;  // into `points`
  std::vector<UvPoint> points;               // original samples, then extrapolated ones
  std::size_t original_count = 0;

  std::size_t extrapolated() const { return points.size() - original_count; }
  std::vector<UvPoint> beam_centers() const {
    std::vector<UvPoint> out;
    for (std::size_t i : beam_indices) out.push_back(points[i]);
    return out;
  }
  std::vector<UvPoint> overlap_points() const {
    std::vector<UvPoint> out;
    for (std::size_t i : overlap_indices) out.push_back(points[i]);
    return out;
  }
};

struct CoverOptions {
  // Index of the sample the first beam is aimed at; 0 is the normal case.
  std::size_t first_beam = 0;
  // Extrapolated samples allowed, as a multiple of the original count.
  std::size_t extrapolation_cap_factor = 4;
};

// Greedy covering of a sampled path with discs of radius half_width.
//
// Walks the samples keeping the oldest sample not yet covered by the current
// beam (`pending`, which is itself the last sample the current beam does
// cover). When a beam aimed at the current sample can no longer cover every
// sample from `pending` onward, the beam is locked in at the previous sample
// and `pending` is recorded as the overlap of the two beams. If the path
// ends with samples still pending, it is extended linearly from its last two
// samples until a final beam can be placed.
inline CoverResult cover_points(const Trajectory& path, double half_width, const CoverOptions& opts = {}) {
  if (path.size() == 0) throw ConfigError("cover_points: empty trajectory");
  if (!(half_width > 0.0)) throw ConfigError("cover_points: half width must be positive");
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (uv_distance(path[i - 1], path[i]) >= half_width)
      throw ConfigError("cover_points: sample spacing at index " + std::to_string(i) +
                        " is not below the sub-beam half width; sample the trajectory more densely");
  }
  if (opts.first_beam >= path.size()) throw ConfigError("cover_points: first beam index out of range");

  CoverResult r;
  r.points = path.points;
  r.original_count = path.size();
  const std::size_t cap = opts.extrapolation_cap_factor * r.original_count;
  auto& pts = r.points;

  auto covers = [&](std::size_t sample, std::size_t center) { return uv_distance(pts[sample], pts[center]) <= half_width; };
  auto span_covered = [&](std::size_t from, std::size_t to, std::size_t center) {
    for (std::size_t j = from; j <= to; ++j)
      if (!covers(j, center)) return false;
    return true;
  };

  std::size_t beam = opts.first_beam;
  r.beam_indices.push_back(beam);
  std::optional<std::size_t> pending;

  for (std::size_t i = opts.first_beam; i < pts.size(); ++i) {
    if (pending && !span_covered(*pending, i, i)) {
      beam = i - 1;
      r.beam_indices.push_back(beam);
      r.overlap_indices.push_back(*pending);
      pending.reset();
    }
    if (!pending && !covers(i, beam)) pending = i - 1;

    const bool original_uncovered = pending && *pending + 1 < r.original_count;
    if (i + 1 == pts.size() && original_uncovered && r.extrapolated() < cap) {
      const UvPoint& a = pts[i - 1];
      const UvPoint& b = pts[i];
      const UvPoint next{2.0 * b.u - a.u, 2.0 * b.v - a.v};
      if (!next.valid()) throw HemisphereError("trajectory extrapolation leaves the front hemisphere", pts.size());
      pts.push_back(next);
    }
  }
  if (pending && *pending + 1 < r.original_count) {
    // Extrapolation budget exhausted: aim a last beam at the final sample.
    r.beam_indices.push_back(pts.size() - 1);
    r.overlap_indices.push_back(*pending);
  }
  return r;
}

// Largest index whose sample is within half_width of the first sample, with
// every earlier sample still inside that beam.
inline std::size_t farthest_covering_index(const Trajectory& path, double half_width) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    if (uv_distance(path[k], path[0]) > half_width) break;
    bool all = true;
    for (std::size_t j = 0; j < k && all; ++j) all = uv_distance(path[j], path[k]) <= half_width;
    if (all) best = k;
  }
  return best;
}

struct SyncResult {
  std::vector<Complex> beam_shifts;      // one per beam, first is 1
  std::vector<Complex> subarray_shifts;  // one per sub-array, includes in-beam alignment
  std::vector<std::string> diagnostics;
};

// Sub-array level phase shifts.
//
// Sub-arrays reinforcing the same beam are first aligned with the beam's
// first member at the beam centre. Then, walking the beams in order, beam
// b+1 is rotated so that its coefficient at the overlap sample it shares
// with beam b has the same phase as beam b's (already shifted) coefficient.
inline SyncResult phase_sync(const std::vector<std::vector<int>>& groups, const std::vector<UvPoint>& centers,
                             const std::vector<UvPoint>& overlaps, const std::vector<Awv>& sub_awvs,
                             const SubArrayLayout& layout) {
  if (groups.size() != centers.size()) throw ConfigError("phase_sync: one group per beam centre required");
  if (!groups.empty() && overlaps.size() + 1 != groups.size())
    throw ConfigError("phase_sync: need exactly one overlap point between adjacent beams");
  if (sub_awvs.size() != static_cast<std::size_t>(layout.count()))
    throw ConfigError("phase_sync: one sub-AWV per sub-array required");

  constexpr double kTiny = 1e-12;
  SyncResult out;
  out.subarray_shifts.assign(static_cast<std::size_t>(layout.count()), Complex{1.0, 0.0});
  std::vector<Complex> align(static_cast<std::size_t>(layout.count()), Complex{1.0, 0.0});

  auto coefficient = [&](int k, const UvPoint& p) {
    return placed_subarray_coefficient(sub_awvs[static_cast<std::size_t>(k)], layout, k, p);
  };
  auto group_coefficient = [&](std::size_t b, const UvPoint& p) {
    Complex c{0.0, 0.0};
    for (int k : groups[b]) c += align[static_cast<std::size_t>(k)] * coefficient(k, p);
    return c;
  };

  for (std::size_t b = 0; b < groups.size(); ++b) {
    const int ref = groups[b].front();
    const Complex c_ref = coefficient(ref, centers[b]);
    for (int k : groups[b]) {
      if (k == ref) continue;
      const Complex c_k = coefficient(k, centers[b]);
      if (std::abs(c_ref) < kTiny || std::abs(c_k) < kTiny) {
        out.diagnostics.push_back("beam " + std::to_string(b) + ": sub-array " + std::to_string(k) +
                                  " not aligned, coefficient vanishes at beam centre");
        continue;
      }
      align[static_cast<std::size_t>(k)] = unit_phasor(std::arg(c_ref) - std::arg(c_k));
    }
  }

  out.beam_shifts.assign(groups.size(), Complex{1.0, 0.0});
  for (std::size_t b = 0; b + 1 < groups.size(); ++b) {
    const UvPoint& m = overlaps[b];
    const Complex prev = out.beam_shifts[b] * group_coefficient(b, m);
    const Complex next = group_coefficient(b + 1, m);
    if (std::abs(prev) < kTiny || std::abs(next) < kTiny) {
      out.diagnostics.push_back("beams " + std::to_string(b) + "/" + std::to_string(b + 1) +
                                ": phase undefined at overlap point, sync skipped");
      continue;
    }
    out.beam_shifts[b + 1] = unit_phasor(std::arg(prev) - std::arg(next));
  }

  for (std::size_t b = 0; b < groups.size(); ++b)
    for (int k : groups[b])
      out.subarray_shifts[static_cast<std::size_t>(k)] = out.beam_shifts[b] * align[static_cast<std::size_t>(k)];
  return out;
}

struct BeamPlan {
  std::vector<UvPoint> beam_centers;             // B
  std::vector<UvPoint> overlap_points;           // M
  std::vector<Complex> sync_shifts;              // a, per beam
  std::vector<std::vector<int>> members;         // sub-arrays steering each beam
  std::vector<Complex> subarray_shifts;          // per sub-array shift used in the AWV
  SubArrayLayout layout{ArrayConfig{}, 1, 0};
  CoverageParams coverage;
  double trajectory_length = 0.0;
  std::size_t extrapolated_points = 0;
  std::vector<std::string> diagnostics;

  std::size_t beam_count() const { return beam_centers.size(); }
  std::size_t multiplicity(std::size_t beam) const { return members[beam].size(); }
};

struct PlanOptions {
  int interleave = 4;
  int phase_bits = 0;
  bool delayed_first = false;
};

struct PlanResult {
  Awv awv;
  BeamPlan plan;
};

// The full planner on an already-sampled trajectory.
inline PlanResult plan_for_trajectory(const Trajectory& path, const ArrayConfig& cfg, const PlanOptions& opts = {}) {
  cfg.validate();
  const SubArrayLayout base = partition_interleaved(cfg, opts.interleave);
  const double w_i = base.subbeam_width_uv();
  const double l_t = trajectory_length(path);

  int s = subdivision_level(l_t, w_i, opts.interleave);
  SubArrayLayout layout = base;
  for (int i = 0; i < s; ++i) layout = partition_localized(layout);

  // The greedy cover can need one beam more than the closed-form estimate on
  // curved paths; it is authoritative, so subdivide further when it does.
  CoverResult cover;
  for (;;) {
    const double half = layout.subbeam_width_uv() / 2.0;
    CoverOptions co;
    if (opts.delayed_first) co.first_beam = farthest_covering_index(path, half);
    cover = cover_points(path, half, co);
    if (cover.beam_indices.size() <= static_cast<std::size_t>(layout.count())) break;
    if (layout.side_x() < 4 || layout.side_y() < 4)
      throw ConfigError("trajectory of UV length " + std::to_string(l_t) + " cannot be covered by this array");
    layout = partition_localized(layout);
    ++s;
  }

  PlanResult out;
  BeamPlan& plan = out.plan;
  plan.layout = layout;
  plan.coverage = {layout.subbeam_width_uv(), opts.interleave, s};
  plan.trajectory_length = l_t;
  plan.extrapolated_points = cover.extrapolated();
  plan.beam_centers = cover.beam_centers();
  plan.overlap_points = cover.overlap_points();
  plan.members = allocate_sub_arrays(static_cast<int>(plan.beam_centers.size()), opts.interleave, s);

  std::vector<Awv> sub_awvs(static_cast<std::size_t>(layout.count()));
  for (std::size_t b = 0; b < plan.members.size(); ++b)
    for (int k : plan.members[b]) sub_awvs[static_cast<std::size_t>(k)] = steering_weights(layout, plan.beam_centers[b]);

  SyncResult sync = phase_sync(plan.members, plan.beam_centers, plan.overlap_points, sub_awvs, layout);
  plan.sync_shifts = std::move(sync.beam_shifts);
  plan.subarray_shifts = std::move(sync.subarray_shifts);
  plan.diagnostics = std::move(sync.diagnostics);

  out.awv = quantize_phases(compose_full_awv(sub_awvs, plan.subarray_shifts, layout), opts.phase_bits);
  return out;
}

// Rebuilds the AWV of `plan` with different sub-array shifts (used by the
// no-sync ablation).
inline Awv recompose_with_shifts(const BeamPlan& plan, const std::vector<Complex>& shifts, int phase_bits = 0) {
  std::vector<Awv> sub_awvs(static_cast<std::size_t>(plan.layout.count()));
  for (std::size_t b = 0; b < plan.members.size(); ++b)
    for (int k : plan.members[b])
      sub_awvs[static_cast<std::size_t>(k)] = steering_weights(plan.layout, plan.beam_centers[b]);
  return quantize_phases(compose_full_awv(sub_awvs, shifts, plan.layout), phase_bits);
}

// Orientations in, AWV out: sample the apparent AP path between q1 and q2
// and plan a covering beam for it. `samples == 0` selects the default density.
inline PlanResult covrage_plan(const Quaternion& q1, const Quaternion& q2, const UvPoint& ap_dir,
                               const ArrayConfig& cfg, const PlanOptions& opts = {}, std::size_t samples = 0) {
  const double w_i = partition_interleaved(cfg, opts.interleave).subbeam_width_uv();
  const std::size_t n = samples == 0 ? default_sample_count(q1, q2, ap_dir, w_i) : samples;
  return plan_for_trajectory(sample_trajectory(q1, q2, ap_dir, n), cfg, opts);
}

}  // namespace covrage
