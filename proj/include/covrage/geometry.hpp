#pragma once

// Orientation and direction representations used throughout the beamformer:
// unit quaternions, yaw/pitch/roll Euler angles and sine-space (UV) points.
//
// Frame convention. The array lies in the HMD's x/y plane and looks along +z
// (broadside). +x is "up" (the elevation axis of UV space) and -y is the
// azimuth axis. Euler angles are intrinsic x-y-z Tait-Bryan angles:
//
//     R(phi, theta, psi) = Rx(phi) * Ry(theta) * Rz(psi)
//
// so yaw turns about the up axis, pitch about the resulting y axis and roll
// about the viewing axis. Dropping roll therefore leaves the viewing
// direction R * z = (sin theta, -sin phi cos theta, cos phi cos theta)
// untouched, which is what makes u = cos(theta) sin(phi), v = sin(theta)
// a valid direction parameterisation.
//
// Quaternions follow the Hamilton convention, act on vectors as q v q*, and
// compose right to left: (a * b) applies b first, then a.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "covrage/errors.hpp"

namespace covrage {

using Vec3 = std::array<double, 3>;

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

// ---------------------------------------------------------------------------
// Quaternion

struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static constexpr Quaternion identity() { return {}; }

  // Rotation of `angle` radians about `axis` (need not be normalised).
  static Quaternion from_axis_angle(const Vec3& axis, double angle) {
    const Vec3 n = covrage::normalized(axis);
    const double s = std::sin(angle / 2.0);
    return {std::cos(angle / 2.0), n[0] * s, n[1] * s, n[2] * s};
  }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quaternion conjugate() const { return {w, -x, -y, -z}; }

  Quaternion normalized() const {
    const double n = norm();
    return {w / n, x / n, y / n, z / n};
  }

  // Rotation angle in [0, 2*pi].
  double angle() const {
    const double v = std::sqrt(x * x + y * y + z * z);
    return 2.0 * std::atan2(v, w);
  }

  Vec3 rotate(const Vec3& v) const;
};

// Hamilton product a*b. The result is renormalised if rounding has pushed
// its norm more than 1e-9 away from one.
inline Quaternion hamilton_product(const Quaternion& a, const Quaternion& b) {
  Quaternion r{a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
               a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
               a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
               a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
  if (std::abs(r.norm() - 1.0) > 1e-9) r = r.normalized();
  return r;
}

inline Quaternion operator*(const Quaternion& a, const Quaternion& b) { return hamilton_product(a, b); }

inline Vec3 Quaternion::rotate(const Vec3& v) const {
  // q v q*, expanded (v' = v + 2w (u x v) + 2 u x (u x v) with u = (x, y, z)).
  const Vec3 u{x, y, z};
  const Vec3 t = cross(u, v);
  const Vec3 t2{2.0 * t[0], 2.0 * t[1], 2.0 * t[2]};
  const Vec3 c = cross(u, t2);
  return {v[0] + w * t2[0] + c[0], v[1] + w * t2[1] + c[1], v[2] + w * t2[2] + c[2]};
}

// Representative with w >= 0. q and -q encode the same rotation; only use this
// where quaternions are compared or where the short way round is required.
inline Quaternion canonical(const Quaternion& q) { return q.w < 0.0 ? Quaternion{-q.w, -q.x, -q.y, -q.z} : q; }

// True when a and b encode the same rotation (up to double cover).
inline bool same_rotation(const Quaternion& a, const Quaternion& b, double tol = 1e-9) {
  const double d = std::abs(a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z);
  return d >= 1.0 - tol;
}

// q^a: same axis, angle scaled by a. Exponents in [0, 2] are accepted, so a
// rotation can be extrapolated up to twice its length.
inline Quaternion slerp_power(const Quaternion& q, double a) {
  if (a < 0.0 || a > 2.0) throw DomainError("slerp exponent " + std::to_string(a) + " outside [0, 2]");
  const double v = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
  const double half = std::atan2(v, q.w);
  if (2.0 * half < 1e-9 || v == 0.0) return Quaternion::identity();
  const double s = std::sin(a * half) / v;
  return {std::cos(a * half), q.x * s, q.y * s, q.z * s};
}

// ---------------------------------------------------------------------------
// Euler angles

struct EulerAngles {
  double phi = 0.0;    // yaw / azimuth, rad
  double theta = 0.0;  // pitch / elevation, rad
  double psi = 0.0;    // roll, rad
  // Set by quat_to_euler when pitch hit +-90 deg; roll is then reported as 0
  // and the whole yaw/roll sum is folded into phi.
  bool gimbal_locked = false;
};

inline Quaternion euler_to_quat(const EulerAngles& e) {
  const Quaternion qx{std::cos(e.phi / 2.0), std::sin(e.phi / 2.0), 0.0, 0.0};
  const Quaternion qy{std::cos(e.theta / 2.0), 0.0, std::sin(e.theta / 2.0), 0.0};
  const Quaternion qz{std::cos(e.psi / 2.0), 0.0, 0.0, std::sin(e.psi / 2.0)};
  return qx * qy * qz;
}

inline EulerAngles quat_to_euler(const Quaternion& q) {
  const auto [w, x, y, z] = q;
  EulerAngles e;
  const double sin_pitch = 2.0 * (w * y + x * z);
  if (std::abs(sin_pitch) >= 1.0 - 1e-9) {
    e.gimbal_locked = true;
    e.theta = std::copysign(kPi / 2.0, sin_pitch);
    const double r10 = 2.0 * (x * y + w * z);
    const double r11 = 1.0 - 2.0 * (x * x + z * z);
    e.phi = std::atan2(std::copysign(1.0, sin_pitch) * r10, r11);
    e.psi = 0.0;
    return e;
  }
  e.phi = std::atan2(2.0 * (w * x - y * z), 1.0 - 2.0 * (x * x + y * y));
  e.theta = std::asin(sin_pitch);
  e.psi = std::atan2(2.0 * (w * z - x * y), 1.0 - 2.0 * (y * y + z * z));
  return e;
}

// ---------------------------------------------------------------------------
// UV (sine-space) points

struct UvPoint {
  double u = 0.0;
  double v = 0.0;

  bool valid() const { return u * u + v * v <= 1.0; }
  friend bool operator==(const UvPoint&, const UvPoint&) = default;
};

inline double uv_distance(const UvPoint& a, const UvPoint& b) { return std::hypot(a.u - b.u, a.v - b.v); }

// Roll is discarded. Directions behind the array plane have no UV image.
inline UvPoint euler_to_uv(const EulerAngles& e) {
  if (std::abs(e.phi) > kPi / 2.0 + 1e-12)
    throw HemisphereError("azimuth " + std::to_string(rad_to_deg(e.phi)) + " deg is behind the array plane");
  return {std::cos(e.theta) * std::sin(e.phi), std::sin(e.theta)};
}

inline EulerAngles uv_to_euler(const UvPoint& p) {
  const double r2 = p.u * p.u + p.v * p.v;
  if (!(r2 <= 1.0))
    throw InvalidUvError("(" + std::to_string(p.u) + ", " + std::to_string(p.v) + ") is not a valid UV coordinate");
  EulerAngles e;
  e.phi = std::atan2(p.u, std::sqrt(std::max(0.0, 1.0 - r2)));
  e.theta = std::asin(std::clamp(p.v, -1.0, 1.0));
  return e;
}

// Unit direction vector in the HMD frame.
inline Vec3 uv_to_vector(const UvPoint& p) {
  if (!p.valid()) throw InvalidUvError("(" + std::to_string(p.u) + ", " + std::to_string(p.v) + ") is not a valid UV coordinate");
  return {p.v, -p.u, std::sqrt(std::max(0.0, 1.0 - p.u * p.u - p.v * p.v))};
}

inline UvPoint vector_to_uv(const Vec3& d) {
  const Vec3 n = normalized(d);
  if (n[2] < 0.0) throw HemisphereError("direction is behind the array plane");
  return {-n[1], n[0]};
}

// ---------------------------------------------------------------------------
// Apparent AP motion

// The HMD turns from q1 to q2, i.e. its frame is rotated by q2 q1*. Seen from
// the HMD, the (static) AP undergoes the inverse rotation (q2 q1*)* = q1 q2*.
inline Quaternion apparent_ap_rotation(const Quaternion& q1, const Quaternion& q2) {
  return q1 * q2.conjugate();
}

struct Trajectory {
  std::vector<UvPoint> points;

  std::size_t size() const { return points.size(); }
  const UvPoint& operator[](std::size_t i) const { return points[i]; }
};

// Sum of UV distances between consecutive points.
inline double trajectory_length(const Trajectory& t) {
  double len = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) len += uv_distance(t[i - 1], t[i]);
  return len;
}

// Samples the apparent AP path between the orientations q1 and q2. Point k
// is the AP orientation rotated by (q1 q2*)^(k/(n-1)) and converted to UV
// via Euler angles. The shortest-arc representative of the rotation is used.
inline Trajectory sample_trajectory(const Quaternion& q1, const Quaternion& q2, const UvPoint& ap_dir,
                                    std::size_t n) {
  if (n < 2) throw ConfigError("trajectory needs at least 2 samples, got " + std::to_string(n));
  const EulerAngles ap_euler = uv_to_euler(ap_dir);
  const Quaternion ap_orientation = euler_to_quat({ap_euler.phi, ap_euler.theta, 0.0});
  const Quaternion rotation = canonical(apparent_ap_rotation(q1, q2));

  Trajectory t;
  t.points.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = static_cast<double>(k) / static_cast<double>(n - 1);
    const Quaternion qk = slerp_power(rotation, a) * ap_orientation;
    try {
      t.points.push_back(euler_to_uv(quat_to_euler(qk)));
    } catch (const HemisphereError&) {
      throw HemisphereError("trajectory leaves the front hemisphere", k);
    }
  }
  return t;
}

// Sample count giving consecutive UV spacing of at most beam_uv/10, never
// fewer than 64 samples.
inline std::size_t default_sample_count(const Quaternion& q1, const Quaternion& q2, const UvPoint& ap_dir,
                                         double beam_uv) {
  constexpr std::size_t kMinSamples = 64;
  const double probe = trajectory_length(sample_trajectory(q1, q2, ap_dir, kMinSamples));
  const double max_spacing = beam_uv / 10.0;
  // The probe underestimates the arc length by a vanishing amount; one extra
  // interval of slack keeps the spacing bound.
  const auto needed = static_cast<std::size_t>(std::ceil(probe / max_spacing)) + 2;
  return std::max(kMinSamples, needed);
}

}  // namespace covrage
