#pragma once

// Spherical geometry of the Earth / platform / satellite shells.
//
// The gateway sits at the north pole U = (0, 0, r_e) and its platform at
// A = (0, 0, r_a). Satellites live on the sphere of radius r_s. A spherical cap
// on that sphere is described by its half angle measured from the z-axis.
// All angles are radians.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace coxsat {

inline constexpr double default_earth_radius_km = 6371.0;

class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline constexpr double domain_slack = 1e-12;

// Clamps roundoff just outside [lo, hi]; anything further out is a caller bug.
inline double clamp_to_domain(double v, double lo, double hi, const char* what) {
  const double slack = domain_slack * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (v < lo - slack || v > hi + slack || std::isnan(v)) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": argument " << v << " outside [" << lo << ", " << hi << "]";
    throw GeometryError(os.str());
  }
  return std::clamp(v, lo, hi);
}

}  // namespace detail

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  [[nodiscard]] double norm() const { return std::sqrt(x * x + y * y + z * z); }
  [[nodiscard]] double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  friend Vec3 operator-(const Vec3& l, const Vec3& r) { return {l.x - r.x, l.y - r.y, l.z - r.z}; }
};

/// Radii (km, measured from the Earth's center) and satellite angular speed.
class NetworkGeometry {
 public:
  NetworkGeometry(double earth_radius_km, double satellite_orbit_radius_km,
                  double platform_orbit_radius_km, double satellite_angular_speed_rad_s)
      : re_(earth_radius_km),
        rs_(satellite_orbit_radius_km),
        ra_(platform_orbit_radius_km),
        nu_(satellite_angular_speed_rad_s) {
    if (!(re_ > 0.0) || !std::isfinite(rs_)) {
      throw GeometryError("earth radius must be positive and radii finite");
    }
    // r_a == r_e is admitted: a platform on the ground is the no-platform limit.
    if (!(re_ <= ra_ && ra_ < rs_)) {
      std::ostringstream os;
      os << "radii must satisfy r_e <= r_a < r_s (got r_e=" << re_ << ", r_a=" << ra_
         << ", r_s=" << rs_ << ")";
      throw GeometryError(os.str());
    }
    if (!(nu_ > 0.0) || !std::isfinite(nu_)) {
      throw GeometryError("satellite angular speed must be positive");
    }
    if (horizon_angle(ra_) > std::numbers::pi / 2.0) {
      throw GeometryError("extended cap angle exceeds pi/2; configuration not supported");
    }
  }

  /// Builds the geometry from altitudes above the Earth's surface.
  static NetworkGeometry from_altitudes(double satellite_altitude_km, double platform_altitude_km,
                                        double satellite_angular_speed_rad_s,
                                        double earth_radius_km = default_earth_radius_km) {
    return NetworkGeometry(earth_radius_km, earth_radius_km + satellite_altitude_km,
                           earth_radius_km + platform_altitude_km, satellite_angular_speed_rad_s);
  }

  [[nodiscard]] double earth_radius_km() const { return re_; }
  [[nodiscard]] double satellite_orbit_radius_km() const { return rs_; }
  [[nodiscard]] double platform_orbit_radius_km() const { return ra_; }
  [[nodiscard]] double satellite_angular_speed_rad_s() const { return nu_; }
  [[nodiscard]] double platform_altitude_km() const { return ra_ - re_; }
  [[nodiscard]] double satellite_altitude_km() const { return rs_ - re_; }

  [[nodiscard]] NetworkGeometry with_platform_altitude(double platform_altitude_km) const {
    return NetworkGeometry(re_, rs_, re_ + platform_altitude_km, nu_);
  }

  /// Half angle of the satellite-sphere cap visible from a point at `radius_km`
  /// on the z-axis: arccos(r_e/radius) + arccos(r_e/r_s).
  [[nodiscard]] double horizon_angle(double radius_km) const {
    if (!(radius_km >= re_)) {
      throw GeometryError("observer below the Earth's surface");
    }
    return std::acos(re_ / radius_km) + std::acos(re_ / rs_);
  }

 private:
  double re_;
  double rs_;
  double ra_;
  double nu_;
};

/// Half angle of the cap visible from the platform.
inline double extended_cap_angle(const NetworkGeometry& geom) {
  return geom.horizon_angle(geom.platform_orbit_radius_km());
}

/// Half angle of the cap visible from the gateway itself.
inline double visible_cap_angle(const NetworkGeometry& geom) {
  return std::acos(geom.earth_radius_km() / geom.satellite_orbit_radius_km());
}

/// Chord from the axis point at `apex_radius_km` to the rim of a cap.
inline double cap_rim_distance(const NetworkGeometry& geom, double apex_radius_km,
                               double cap_half_angle) {
  const double rs = geom.satellite_orbit_radius_km();
  const double s = std::sin(0.5 * cap_half_angle);
  const double gap = rs - apex_radius_km;
  return std::sqrt(gap * gap + 4.0 * rs * apex_radius_km * s * s);
}

/// Central half angle of the cap {X on the satellite sphere : |X - apex| <= d}.
///
/// Evaluated as 2 asin(sqrt((d^2 - (r_s - apex)^2) / (4 r_s apex))), which equals
/// arccos((apex^2 + r_s^2 - d^2) / (2 r_s apex)) but keeps full precision near d = r_s - apex.
inline double critical_inclination(const NetworkGeometry& geom, double apex_radius_km, double d_km) {
  const double rs = geom.satellite_orbit_radius_km();
  if (!(apex_radius_km > 0.0)) throw GeometryError("apex radius must be positive");
  const double lo = std::abs(rs - apex_radius_km);
  const double hi = rs + apex_radius_km;
  const double d = detail::clamp_to_domain(d_km, lo, hi, "critical_inclination");
  const double ratio = (d - lo) * (d + lo) / (4.0 * rs * apex_radius_km);
  return 2.0 * std::asin(std::sqrt(std::clamp(ratio, 0.0, 1.0)));
}

/// Half of the central angle subtended by the part of an orbit of the given
/// inclination lying inside a cap of half angle `zeta`:
/// arcsin(sqrt(1 - cos^2(zeta) csc^2(inclination))).
///
/// Returns 0 for a tangent orbit; throws for an orbit that misses the cap.
inline double cap_arc_half_angle(double zeta, double inclination) {
  const double sin_i = std::sin(inclination);
  // 1 - cos^2 z / sin^2 i = sin(i - (pi/2 - z)) sin(i + (pi/2 - z)) / sin^2 i
  const double co = std::numbers::pi / 2.0 - zeta;
  const double num = std::sin(inclination - co) * std::sin(inclination + co);
  const double arg = sin_i == 0.0 ? -1.0 : num / (sin_i * sin_i);
  if (arg < -detail::domain_slack) {
    throw GeometryError("cap_arc_half_angle: orbit does not cross the cap");
  }
  return std::asin(std::sqrt(std::clamp(arg, 0.0, 1.0)));
}

/// Same as cap_arc_half_angle with the complement inclination w = pi/2 - inclination,
/// the variable the analytical integrals run over. Requires |w| <= zeta for a
/// nonzero result; the radicand is sin(zeta - w) sin(zeta + w) / cos^2(w).
inline double cap_arc_half_angle_complement(double zeta, double w) {
  const double cw = std::cos(w);
  const double num = std::sin(zeta - std::abs(w)) * std::sin(zeta + std::abs(w));
  if (num <= 0.0) return 0.0;
  return std::asin(std::sqrt(std::min(num / (cw * cw), 1.0)));
}

/// Distance from (0, 0, axis_height) to the satellite with argument omega on an
/// orbit of the given inclination.
inline double distance_from_axis_point(const NetworkGeometry& geom, double axis_height_km,
                                       double omega, double inclination) {
  if (!(axis_height_km >= 0.0)) throw GeometryError("axis height must be nonnegative");
  const double rs = geom.satellite_orbit_radius_km();
  const double sq = rs * rs - 2.0 * rs * axis_height_km * std::sin(omega) * std::sin(inclination) +
                    axis_height_km * axis_height_km;
  return std::sqrt(std::max(sq, 0.0));
}

/// Cartesian position of a satellite. The in-plane phase offset uses the
/// two-argument arctangent so the point moves continuously for all omega.
inline Vec3 satellite_cartesian(const NetworkGeometry& geom, double theta, double inclination,
                                double omega) {
  const double rs = geom.satellite_orbit_radius_km();
  const double cw = std::cos(omega);
  const double sw = std::sin(omega);
  const double ci = std::cos(inclination);
  const double rho = rs * std::sqrt(cw * cw + sw * sw * ci * ci);
  const double phase = theta + std::atan2(sw * ci, cw);
  return Vec3{rho * std::cos(phase), rho * std::sin(phase), rs * sw * std::sin(inclination)};
}

/// True iff the satellite lies within the cap of the given half angle about the z-axis.
inline bool in_extended_cap(double omega, double inclination, double cap_half_angle) {
  return std::sin(omega) * std::sin(inclination) >= std::cos(cap_half_angle);
}

/// Elevation angle of a satellite above the gateway's local horizon.
inline double elevation_from_ground(const NetworkGeometry& geom, double omega, double inclination) {
  const double re = geom.earth_radius_km();
  const double rs = geom.satellite_orbit_radius_km();
  const double z = rs * std::sin(omega) * std::sin(inclination);
  const double range = std::sqrt(std::max(rs * rs - 2.0 * re * z + re * re, 0.0));
  if (range == 0.0) return std::numbers::pi / 2.0;
  return std::asin(std::clamp((z - re) / range, -1.0, 1.0));
}

/// Cap half angle containing exactly the satellites seen from the gateway at an
/// elevation of at least kappa. Uses the slant range y to a satellite at
/// elevation kappa, the positive root of y^2 + 2 r_e sin(kappa) y + r_e^2 - r_s^2 = 0.
inline double min_elevation_cap_angle(const NetworkGeometry& geom, double kappa) {
  if (!(kappa >= 0.0 && kappa < std::numbers::pi / 2.0)) {
    throw GeometryError("minimum elevation must lie in [0, pi/2)");
  }
  const double re = geom.earth_radius_km();
  const double rs = geom.satellite_orbit_radius_km();
  const double ck = std::cos(kappa);
  const double y = -re * std::sin(kappa) + std::sqrt(rs * rs - re * re * ck * ck);
  const double c = (re * re + rs * rs - y * y) / (2.0 * rs * re);
  return std::acos(detail::clamp_to_domain(c, -1.0, 1.0, "min_elevation_cap_angle"));
}

}  // namespace coxsat
