#ifndef ANTCAL_GEOMETRY_HPP
#define ANTCAL_GEOMETRY_HPP

// Pointing directions, the homogeneous correction transform and its affine
// decomposition. All angles are degrees; azimuth plays the x role and
// elevation the y role in the azimuth-elevation plane.

#include <Eigen/Core>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "antcal/error.hpp"

namespace antcal {

inline constexpr double kMinElevationDeg = -10.0;
inline constexpr double kMaxElevationDeg = 90.0;

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Maps any finite azimuth onto [0, 360).
inline double normalize_azimuth(double az) {
  double a = std::fmod(az, 360.0);
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a = 0.0;
  return a;
}

/// Maps an angle difference onto (-180, 180].
inline double wrap_to_180(double d) {
  double a = std::fmod(d, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

class Pointing {
 public:
  Pointing() = default;

  /// Throws out-of-range-angle for non-finite input or an elevation outside
  /// [-10, 90]. The azimuth is normalized, never rejected.
  Pointing(double azimuth_deg, double elevation_deg) {
    if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg)) {
      throw Error(Errc::out_of_range_angle, "non-finite pointing angle");
    }
    if (elevation_deg < kMinElevationDeg || elevation_deg > kMaxElevationDeg) {
      throw Error(Errc::out_of_range_angle,
                  "elevation " + std::to_string(elevation_deg) + " outside [-10, 90]");
    }
    azimuth_deg_ = normalize_azimuth(azimuth_deg);
    elevation_deg_ = elevation_deg;
  }

  double azimuth_deg() const noexcept { return azimuth_deg_; }
  double elevation_deg() const noexcept { return elevation_deg_; }

  friend bool operator==(const Pointing&, const Pointing&) = default;

 private:
  double azimuth_deg_ = 0.0;
  double elevation_deg_ = 0.0;
};

/// s * (x1, x2, 1). Two values are equivalent iff proportional.
struct HomogeneousPointing {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 1.0;

  static HomogeneousPointing lift(const Pointing& p) {
    return {p.azimuth_deg(), p.elevation_deg(), 1.0};
  }

  Eigen::Vector3d vector() const { return {x1, x2, x3}; }

  Pointing dehomogenize() const {
    if (x3 == 0.0) throw Error(Errc::invalid_argument, "homogeneous scale is zero");
    return Pointing(x1 / x3, x2 / x3);
  }

  bool equivalent(const HomogeneousPointing& o, double tol = 1e-12) const {
    return std::fabs(x1 * o.x3 - o.x1 * x3) <= tol && std::fabs(x2 * o.x3 - o.x2 * x3) <= tol;
  }
};

/// 3x3 homogeneous transform with the last row fixed to (0, 0, 1).
class Transform {
 public:
  Transform() : m_(Eigen::Matrix3d::Identity()) {}

  explicit Transform(const Eigen::Matrix3d& m) : m_(m) {
    if (m(2, 0) != 0.0 || m(2, 1) != 0.0 || m(2, 2) != 1.0) {
      throw Error(Errc::invalid_argument, "third transform row must be (0, 0, 1)");
    }
    if (!m.allFinite()) throw Error(Errc::invalid_argument, "non-finite transform entry");
  }

  /// Builds from the two fitted rows (t11 t12 t13 / t21 t22 t23).
  static Transform from_rows(double t11, double t12, double t13, double t21, double t22,
                             double t23) {
    Eigen::Matrix3d m;
    m << t11, t12, t13, t21, t22, t23, 0.0, 0.0, 1.0;
    return Transform(m);
  }

  static Transform from_affine(const Eigen::Matrix2d& a, const Eigen::Vector2d& t) {
    return from_rows(a(0, 0), a(0, 1), t(0), a(1, 0), a(1, 1), t(1));
  }

  /// Counter-clockwise rotation about the plane origin followed by a shift.
  static Transform rotation(double angle_deg, double shift_az = 0.0, double shift_el = 0.0) {
    const double c = std::cos(deg2rad(angle_deg));
    const double s = std::sin(deg2rad(angle_deg));
    return from_rows(c, -s, shift_az, s, c, shift_el);
  }

  const Eigen::Matrix3d& matrix() const noexcept { return m_; }
  double operator()(int row, int col) const { return m_(row, col); }
  Eigen::Matrix2d linear() const { return m_.topLeftCorner<2, 2>(); }
  Eigen::Vector2d translation() const { return m_.topRightCorner<2, 1>(); }

  /// Transform of raw (unwrapped) plane coordinates; no normalization.
  Eigen::Vector2d map(double az, double el) const {
    return linear() * Eigen::Vector2d(az, el) + translation();
  }

  friend bool operator==(const Transform& a, const Transform& b) { return a.m_ == b.m_; }

 private:
  Eigen::Matrix3d m_;
};

/// y = T x on the canonical homogeneous lift; the constrained third row keeps
/// dehomogenization exact. Throws out-of-range-angle if the result leaves the
/// elevation envelope.
inline Pointing apply(const Transform& t, const Pointing& p) {
  const Eigen::Vector3d y = t.matrix() * HomogeneousPointing::lift(p).vector();
  return Pointing(y(0), y(1));
}

/// A = R * S2 * S1 with S1 = diag(scaling), S2 = [[1, shear], [0, 1]] and R a
/// counter-clockwise rotation; `translation` is the copied third column.
struct AffineDecomposition {
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();
  Eigen::Vector2d scaling = Eigen::Vector2d::Ones();
  double shear = 0.0;
  double rotation_deg = 0.0;

  Eigen::Matrix2d scaling_matrix() const { return scaling.asDiagonal(); }

  Eigen::Matrix2d shear_matrix() const {
    Eigen::Matrix2d s;
    s << 1.0, shear, 0.0, 1.0;
    return s;
  }

  Eigen::Matrix2d rotation_matrix() const {
    const double c = std::cos(deg2rad(rotation_deg));
    const double s = std::sin(deg2rad(rotation_deg));
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
  }
};

/// Factors the linear block as A = R U (U upper triangular, positive
/// diagonal). Throws singular-block when |det A| < 1e-12 and invalid-argument
/// for reflections, which have no factorization with positive scaling.
inline AffineDecomposition decompose(const Transform& t) {
  const Eigen::Matrix2d a = t.linear();
  const double det = a.determinant();
  if (std::fabs(det) < 1e-12) throw Error(Errc::singular_block, "linear block is singular");
  if (det < 0.0) throw Error(Errc::invalid_argument, "linear block contains a reflection");

  const double angle = std::atan2(a(1, 0), a(0, 0));
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  // U = R^T A
  const double u11 = std::hypot(a(0, 0), a(1, 0));
  const double u12 = c * a(0, 1) + s * a(1, 1);
  const double u22 = det / u11;

  AffineDecomposition d;
  d.translation = t.translation();
  d.scaling = {u11, u22};
  d.shear = u12 / u22;
  d.rotation_deg = rad2deg(angle);
  if (d.rotation_deg <= -180.0) d.rotation_deg += 360.0;
  return d;
}

inline Transform compose(const AffineDecomposition& d) {
  if (!(d.scaling(0) > 0.0) || !(d.scaling(1) > 0.0)) {
    throw Error(Errc::invalid_argument, "scaling entries must be positive");
  }
  const Eigen::Matrix2d a = d.rotation_matrix() * d.shear_matrix() * d.scaling_matrix();
  return Transform::from_affine(a, d.translation);
}

/// Great-circle angle between two directions, treating azimuth as longitude
/// and elevation as latitude. Result in [0, 180].
inline double angular_distance(const Pointing& a, const Pointing& b) {
  const double lat1 = deg2rad(a.elevation_deg());
  const double lat2 = deg2rad(b.elevation_deg());
  const double dlat = lat2 - lat1;
  const double dlon = deg2rad(wrap_to_180(b.azimuth_deg() - a.azimuth_deg()));
  const double sdlat = std::sin(dlat / 2.0);
  const double sdlon = std::sin(dlon / 2.0);
  const double h = sdlat * sdlat + std::cos(lat1) * std::cos(lat2) * sdlon * sdlon;
  return rad2deg(2.0 * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0))));
}

}  // namespace antcal

#endif  // ANTCAL_GEOMETRY_HPP
