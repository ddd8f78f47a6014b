#pragma once

// Uniform rectangular array (URA) model: per-element phase deltas, steering
// weights, array coefficient and gain, beamwidth estimates, and the
// interleaved / localized sub-array partitions.
//
// Element (x, y) sits at (x d, y d) in the array plane; (0, 0) is the phase
// reference. For an arrival direction (phi, theta) the element sees the phase
// delta exp(j 2 pi d/lambda (-x sin(phi) cos(theta) - y sin(theta))), which
// is exp(-j 2 pi d/lambda (x u + y v)) in UV terms. Everything below is
// evaluated through (u, v).

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "covrage/errors.hpp"
#include "covrage/geometry.hpp"

namespace covrage {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;

// Gain reported for directions where the array coefficient vanishes.
inline constexpr double kGainFloorDbi = -40.0;

struct ArrayConfig {
  int nx = 32;
  int ny = 32;
  double spacing_wavelengths = 0.25;  // d / lambda
  double frequency_hz = 60e9;

  double wavelength_m() const { return kSpeedOfLight / frequency_hz; }
  double aperture_x_m() const { return nx * spacing_wavelengths * wavelength_m(); }
  double aperture_y_m() const { return ny * spacing_wavelengths * wavelength_m(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }

  void validate() const {
    if (nx < 1 || ny < 1) throw ConfigError("array needs at least one element per side");
    if (!(spacing_wavelengths > 0.0)) throw ConfigError("element spacing must be positive");
    if (!(frequency_hz > 0.0)) throw ConfigError("carrier frequency must be positive");
  }
};

struct SteeringDirection {
  double phi = 0.0;    // azimuth, rad
  double theta = 0.0;  // elevation, rad

  UvPoint uv() const { return euler_to_uv({phi, theta, 0.0}); }
  static SteeringDirection from_uv(const UvPoint& p) {
    const EulerAngles e = uv_to_euler(p);
    return {e.phi, e.theta};
  }
};

// Antenna weight vector: one unit-magnitude complex weight per element.
class Awv {
 public:
  Awv() = default;
  Awv(int nx, int ny, Complex fill = {1.0, 0.0})
      : nx_(nx), ny_(ny), weights_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), fill) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return weights_.size(); }

  Complex& at(int x, int y) { return weights_[index(x, y)]; }
  const Complex& at(int x, int y) const { return weights_[index(x, y)]; }

  const std::vector<Complex>& weights() const { return weights_; }

  // Largest deviation of |w| from one over all elements.
  double max_magnitude_error() const {
    double err = 0.0;
    for (const Complex& w : weights_) err = std::max(err, std::abs(std::abs(w) - 1.0));
    return err;
  }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(x);
  }

  int nx_ = 0;
  int ny_ = 0;
  std::vector<Complex> weights_;
};

inline Complex unit_phasor(double phase) { return {std::cos(phase), std::sin(phase)}; }

// Phase delta seen by element (x, y) for an arrival from (phi, theta).
inline Complex element_phase_delta(int x, int y, double phi, double theta, const ArrayConfig& cfg) {
  const double k = 2.0 * kPi * cfg.spacing_wavelengths;
  return unit_phasor(k * (-x * std::sin(phi) * std::cos(theta) - y * std::sin(theta)));
}

namespace detail {

// Separable evaluation: sum_y e^{-jk y v} sum_x w(x, y) e^{-jk x u}.
inline Complex coefficient_uv(const Awv& awv, double spacing_wavelengths, double u, double v) {
  const double k = 2.0 * kPi * spacing_wavelengths;
  std::vector<Complex> phase_x(static_cast<std::size_t>(awv.nx()));
  for (int x = 0; x < awv.nx(); ++x) phase_x[static_cast<std::size_t>(x)] = unit_phasor(-k * u * x);
  Complex total{0.0, 0.0};
  for (int y = 0; y < awv.ny(); ++y) {
    Complex row{0.0, 0.0};
    for (int x = 0; x < awv.nx(); ++x) row += awv.at(x, y) * phase_x[static_cast<std::size_t>(x)];
    total += row * unit_phasor(-k * v * y);
  }
  return total;
}

}  // namespace detail

// Array coefficient C_R = sum over elements of w(x, y) * delta(x, y).
inline Complex array_coefficient(const Awv& awv, const ArrayConfig& cfg, const SteeringDirection& dir) {
  if (awv.nx() != cfg.nx || awv.ny() != cfg.ny) throw ConfigError("AWV shape does not match the array");
  const double u = std::sin(dir.phi) * std::cos(dir.theta);
  const double v = std::sin(dir.theta);
  return detail::coefficient_uv(awv, cfg.spacing_wavelengths, u, v);
}

inline Complex array_coefficient(const Awv& awv, const ArrayConfig& cfg, const UvPoint& p) {
  if (awv.nx() != cfg.nx || awv.ny() != cfg.ny) throw ConfigError("AWV shape does not match the array");
  return detail::coefficient_uv(awv, cfg.spacing_wavelengths, p.u, p.v);
}

inline double gain_from_coefficient(const Complex& c) {
  const double p = std::norm(c);
  const double floor_power = std::pow(10.0, kGainFloorDbi / 10.0);
  return 10.0 * std::log10(std::max(p, floor_power));
}

// Directional receive gain in dBi, floored at kGainFloorDbi.
inline double directional_gain(const Awv& awv, const ArrayConfig& cfg, const SteeringDirection& dir) {
  return gain_from_coefficient(array_coefficient(awv, cfg, dir));
}

inline double directional_gain(const Awv& awv, const ArrayConfig& cfg, const UvPoint& p) {
  return gain_from_coefficient(array_coefficient(awv, cfg, p));
}

// Steering weights of a (virtual) URA: w(x, y) = 1 / delta(x, y).
inline Awv steering_weights(const ArrayConfig& cfg, const SteeringDirection& dir) {
  Awv w(cfg.nx, cfg.ny);
  const double k = 2.0 * kPi * cfg.spacing_wavelengths;
  const double u = std::sin(dir.phi) * std::cos(dir.theta);
  const double v = std::sin(dir.theta);
  for (int y = 0; y < cfg.ny; ++y)
    for (int x = 0; x < cfg.nx; ++x) w.at(x, y) = unit_phasor(k * (x * u + y * v));
  return w;
}

// Half-power beamwidth in UV units of an n-element side; direction invariant.
inline double beamwidth_uv(int n_side, double spacing_wavelengths) {
  if (n_side < 2) throw ConfigError("beamwidth needs at least 2 elements per side");
  if (!(spacing_wavelengths > 0.0)) throw ConfigError("element spacing must be positive");
  return 0.886 / (n_side * spacing_wavelengths);
}

// Half-power beamwidth in radians at steering angle alpha from broadside.
inline double beamwidth_angular(int n_side, double spacing_wavelengths, double alpha) {
  const double c = std::cos(alpha);
  if (std::abs(alpha) >= kPi / 2.0 || c < 1e-12)
    throw DomainError("beam degenerates at " + std::to_string(rad_to_deg(alpha)) + " deg from broadside");
  return beamwidth_uv(n_side, spacing_wavelengths) / c;
}

// ---------------------------------------------------------------------------
// Sub-array layouts

struct ElementCoord {
  int x = 0;
  int y = 0;
  friend bool operator==(const ElementCoord&, const ElementCoord&) = default;
};

// Partition of the array into Mi interleaved sub-arrays (a sqrt(Mi) x sqrt(Mi)
// stride pattern), each optionally split `subdivisions` times into four
// contiguous quadrants. Sub-array index = interleaved index * 4^s + quadrant
// path, with the quadrant path written coarsest level first and quadrants
// numbered 0..3 as (left/right) + 2 * (bottom/top).
class SubArrayLayout {
 public:
  SubArrayLayout(const ArrayConfig& parent, int interleave_factor, int subdivisions = 0)
      : parent_(parent), interleave_(interleave_factor), subdivisions_(subdivisions) {
    parent_.validate();
    if (interleave_factor < 1) throw ConfigError("interleave factor must be >= 1");
    stride_ = static_cast<int>(std::lround(std::sqrt(static_cast<double>(interleave_factor))));
    if (stride_ * stride_ != interleave_factor)
      throw ConfigError("interleave factor " + std::to_string(interleave_factor) + " is not a perfect square");
    if (parent_.nx % stride_ != 0 || parent_.ny % stride_ != 0)
      throw ConfigError("array sides must be divisible by sqrt(interleave factor)");
    if (subdivisions < 0) throw ConfigError("subdivision level must be >= 0");
    const int blocks = 1 << subdivisions;
    const int ix = parent_.nx / stride_;
    const int iy = parent_.ny / stride_;
    if (ix % blocks != 0 || iy % blocks != 0)
      throw ConfigError("sub-array side is not divisible by 2 at subdivision level " + std::to_string(subdivisions));
    side_x_ = ix / blocks;
    side_y_ = iy / blocks;
    quadrants_ = blocks * blocks;
    build_maps();
  }

  const ArrayConfig& parent() const { return parent_; }
  int interleave_factor() const { return interleave_; }
  int stride() const { return stride_; }
  int subdivisions() const { return subdivisions_; }
  int count() const { return interleave_ * quadrants_; }
  int side_x() const { return side_x_; }
  int side_y() const { return side_y_; }
  // Effective element spacing inside a sub-array, in wavelengths.
  double spacing_wavelengths() const { return stride_ * parent_.spacing_wavelengths; }

  // The sub-array viewed as a stand-alone URA in local coordinates.
  ArrayConfig subarray_config() const {
    return {side_x_, side_y_, spacing_wavelengths(), parent_.frequency_hz};
  }

  // UV beamwidth of one sub-array (narrower side governs when non-square).
  double subbeam_width_uv() const {
    return std::max(beamwidth_uv(side_x_, spacing_wavelengths()), beamwidth_uv(side_y_, spacing_wavelengths()));
  }

  // f_i: sub-array index owning array element (x, y).
  int index_of(int x, int y) const { return owner_[flat(x, y)]; }
  // f_c: local coordinates of (x, y) inside its sub-array.
  ElementCoord local_of(int x, int y) const { return local_[flat(x, y)]; }

  // Inverse of (f_i, f_c).
  ElementCoord global_of(int k, int lx, int ly) const {
    return members_[static_cast<std::size_t>(k)][static_cast<std::size_t>(ly * side_x_ + lx)];
  }

  // Global coordinates of the elements of sub-array k, ordered by local
  // index (ly * side_x + lx).
  const std::vector<ElementCoord>& elements(int k) const { return members_.at(static_cast<std::size_t>(k)); }

 private:
  std::size_t flat(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(parent_.nx) + static_cast<std::size_t>(x);
  }

  void build_maps() {
    owner_.assign(parent_.size(), -1);
    local_.assign(parent_.size(), {});
    members_.assign(static_cast<std::size_t>(count()),
                    std::vector<ElementCoord>(static_cast<std::size_t>(side_x_ * side_y_)));
    for (int y = 0; y < parent_.ny; ++y) {
      for (int x = 0; x < parent_.nx; ++x) {
        const int interleaved = (x % stride_) + stride_ * (y % stride_);
        int lx = x / stride_;
        int ly = y / stride_;
        int half_x = parent_.nx / stride_;
        int half_y = parent_.ny / stride_;
        int quadrant = 0;
        for (int level = 0; level < subdivisions_; ++level) {
          half_x /= 2;
          half_y /= 2;
          const int q = (lx >= half_x ? 1 : 0) + 2 * (ly >= half_y ? 1 : 0);
          quadrant = quadrant * 4 + q;
          lx %= half_x;
          ly %= half_y;
        }
        const int k = interleaved * quadrants_ + quadrant;
        owner_[flat(x, y)] = k;
        local_[flat(x, y)] = {lx, ly};
        members_[static_cast<std::size_t>(k)][static_cast<std::size_t>(ly * side_x_ + lx)] = {x, y};
      }
    }
  }

  ArrayConfig parent_;
  int interleave_ = 1;
  int stride_ = 1;
  int subdivisions_ = 0;
  int side_x_ = 0;
  int side_y_ = 0;
  int quadrants_ = 1;
  std::vector<int> owner_;
  std::vector<ElementCoord> local_;
  std::vector<std::vector<ElementCoord>> members_;
};

inline SubArrayLayout partition_interleaved(const ArrayConfig& cfg, int mi) { return SubArrayLayout(cfg, mi, 0); }

// Splits every sub-array of `layout` into four contiguous quadrant blocks.
inline SubArrayLayout partition_localized(const SubArrayLayout& layout, int factor = 4) {
  if (factor != 4) throw ConfigError("localized partitioning only supports a factor of 4");
  if (layout.side_x() % 2 != 0 || layout.side_y() % 2 != 0)
    throw ConfigError("cannot split a " + std::to_string(layout.side_x()) + "x" + std::to_string(layout.side_y()) +
                      " sub-array into quadrants");
  return SubArrayLayout(layout.parent(), layout.interleave_factor(), layout.subdivisions() + 1);
}

// Weights for one sub-array of `layout`, in its local coordinates and at its
// effective spacing.
inline Awv steering_weights(const SubArrayLayout& layout, const SteeringDirection& dir) {
  return steering_weights(layout.subarray_config(), dir);
}

inline Awv steering_weights(const SubArrayLayout& layout, const UvPoint& p) {
  return steering_weights(layout, SteeringDirection::from_uv(p));
}

// Coefficient of sub-array k of a full-array AWV: only k's elements contribute.
inline Complex subarray_coefficient(const Awv& full, const SubArrayLayout& layout, int k, const UvPoint& p) {
  const double kk = 2.0 * kPi * layout.parent().spacing_wavelengths;
  Complex total{0.0, 0.0};
  for (const ElementCoord& e : layout.elements(k))
    total += full.at(e.x, e.y) * unit_phasor(-kk * (e.x * p.u + e.y * p.v));
  return total;
}

// Coefficient contributed by sub-array k when it is driven with the local
// weights `sub` (before any sub-array level shift).
inline Complex placed_subarray_coefficient(const Awv& sub, const SubArrayLayout& layout, int k, const UvPoint& p) {
  const double kk = 2.0 * kPi * layout.parent().spacing_wavelengths;
  Complex total{0.0, 0.0};
  const auto& elems = layout.elements(k);
  for (int ly = 0; ly < layout.side_y(); ++ly) {
    for (int lx = 0; lx < layout.side_x(); ++lx) {
      const ElementCoord& e = elems[static_cast<std::size_t>(ly * layout.side_x() + lx)];
      total += sub.at(lx, ly) * unit_phasor(-kk * (e.x * p.u + e.y * p.v));
    }
  }
  return total;
}

// Full AWV from per-sub-array weights and sub-array level phase shifts:
// w(x, y) = a[f_i(x, y)] * w_{f_i(x, y)}[f_c(x, y)].
inline Awv compose_full_awv(const std::vector<Awv>& sub_awvs, const std::vector<Complex>& shifts,
                            const SubArrayLayout& layout) {
  const auto n = static_cast<std::size_t>(layout.count());
  if (sub_awvs.size() != n || shifts.size() != n)
    throw ConfigError("expected " + std::to_string(n) + " sub-AWVs and shifts, got " +
                      std::to_string(sub_awvs.size()) + " and " + std::to_string(shifts.size()));
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(std::abs(shifts[k]) - 1.0) > 1e-9)
      throw ConfigError("sub-array shift " + std::to_string(k) + " is not unit magnitude");
    if (sub_awvs[k].nx() != layout.side_x() || sub_awvs[k].ny() != layout.side_y())
      throw ConfigError("sub-AWV " + std::to_string(k) + " does not match the sub-array shape");
  }
  const ArrayConfig& cfg = layout.parent();
  Awv full(cfg.nx, cfg.ny);
  for (int y = 0; y < cfg.ny; ++y) {
    for (int x = 0; x < cfg.nx; ++x) {
      const int k = layout.index_of(x, y);
      const ElementCoord l = layout.local_of(x, y);
      full.at(x, y) = shifts[static_cast<std::size_t>(k)] * sub_awvs[static_cast<std::size_t>(k)].at(l.x, l.y);
    }
  }
  return full;
}

// Rounds every weight's phase to the nearest of 2^bits levels; bits == 0
// leaves the AWV untouched (ideal phase shifters).
inline Awv quantize_phases(const Awv& awv, int bits) {
  if (bits < 0 || bits > 24) throw ConfigError("phase resolution must be 0..24 bits");
  if (bits == 0) return awv;
  const double step = 2.0 * kPi / static_cast<double>(1 << bits);
  Awv out(awv.nx(), awv.ny());
  for (int y = 0; y < awv.ny(); ++y)
    for (int x = 0; x < awv.nx(); ++x) out.at(x, y) = unit_phasor(std::round(std::arg(awv.at(x, y)) / step) * step);
  return out;
}

}  // namespace covrage
