#pragma once

// Isotropic orbit/satellite Cox process: sampling, motion, and the exact
// realization-level queries (who is in the cap, who is nearest, how long until
// someone arrives) that the Monte Carlo estimators are built from.

#include "coxsat/geometry.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace coxsat {

/// Mean number of orbits and mean number of satellites per orbit.
struct Densities {
  double mean_orbits = 0.0;
  double mean_sats_per_orbit = 0.0;

  void validate() const {
    if (!(mean_orbits >= 0.0) || !(mean_sats_per_orbit >= 0.0) || !std::isfinite(mean_orbits) ||
        !std::isfinite(mean_sats_per_orbit)) {
      throw std::invalid_argument("densities must be finite and nonnegative");
    }
  }
};

struct OrbitAngles {
  double longitude_rad = 0.0;    // theta in [0, pi)
  double inclination_rad = 0.0;  // phi in [0, pi)
  friend bool operator==(const OrbitAngles&, const OrbitAngles&) = default;
};

struct SatelliteRef {
  std::size_t orbit = 0;
  double omega = 0.0;
};

/// One realization: orbits plus the argument angles of the satellites on each.
/// Arguments are stored contiguously; arguments(i) views orbit i's satellites.
class ConstellationSample {
 public:
  [[nodiscard]] std::span<const OrbitAngles> orbits() const { return orbits_; }
  [[nodiscard]] std::size_t orbit_count() const { return orbits_.size(); }
  [[nodiscard]] std::size_t satellite_count() const { return arguments_.size(); }
  [[nodiscard]] double epoch_s() const { return epoch_s_; }

  [[nodiscard]] std::span<const double> arguments(std::size_t orbit) const {
    return std::span<const double>(arguments_).subspan(offsets_[orbit],
                                                        offsets_[orbit + 1] - offsets_[orbit]);
  }

  void clear() {
    orbits_.clear();
    arguments_.clear();
    offsets_.assign(1, 0);
    epoch_s_ = 0.0;
  }

  void add_orbit(OrbitAngles orbit, std::span<const double> omegas = {}) {
    for (double w : omegas) {
      if (!(w >= 0.0 && w < 2.0 * std::numbers::pi)) {
        throw std::invalid_argument("argument angles must lie in [0, 2 pi)");
      }
    }
    orbits_.push_back(orbit);
    arguments_.insert(arguments_.end(), omegas.begin(), omegas.end());
    offsets_.push_back(arguments_.size());
  }

  // Appends to the most recently added orbit.
  void push_argument(double omega) {
    arguments_.push_back(omega);
    offsets_.back() = arguments_.size();
  }

  void set_epoch(double epoch_s) { epoch_s_ = epoch_s; }

  std::span<double> mutable_arguments() { return arguments_; }

  friend bool operator==(const ConstellationSample&, const ConstellationSample&) = default;

 private:
  std::vector<OrbitAngles> orbits_;
  std::vector<double> arguments_;
  std::vector<std::size_t> offsets_{0};
  double epoch_s_ = 0.0;
};

/// Draws a realization into `out`, reusing its storage.
///
/// Orbit count ~ Poisson(lambda); theta ~ U[0, pi); phi has density sin(phi)/2
/// on [0, pi), drawn as arccos(1 - 2U); each orbit carries Poisson(mu)
/// satellites with arguments ~ U[0, 2 pi).
template <class Rng>
void sample_constellation(const Densities& densities, Rng& rng, ConstellationSample& out) {
  densities.validate();
  out.clear();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto poisson = [&rng](double mean) -> long {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<long> dist(mean);
    return dist(rng);
  };
  const long orbit_count = poisson(densities.mean_orbits);
  std::poisson_distribution<long> per_orbit(
      densities.mean_sats_per_orbit > 0.0 ? densities.mean_sats_per_orbit : 1.0);
  for (long i = 0; i < orbit_count; ++i) {
    const double theta = std::numbers::pi * unit(rng);
    const double phi = std::acos(1.0 - 2.0 * unit(rng));
    out.add_orbit(OrbitAngles{theta, phi});
    const long count = densities.mean_sats_per_orbit > 0.0 ? per_orbit(rng) : 0;
    for (long j = 0; j < count; ++j) {
      double omega = 2.0 * std::numbers::pi * unit(rng);
      if (omega >= 2.0 * std::numbers::pi) omega = 0.0;
      out.push_argument(omega);
    }
  }
}

template <class Rng>
ConstellationSample sample_constellation(const Densities& densities, Rng& rng) {
  ConstellationSample out;
  sample_constellation(densities, rng, out);
  return out;
}

/// Advances every satellite by nu * dt along its orbit (direction of increasing omega).
inline ConstellationSample propagate(const ConstellationSample& sample, double dt_s,
                                     const NetworkGeometry& geom) {
  if (!(dt_s >= 0.0)) throw std::invalid_argument("propagate requires dt >= 0");
  ConstellationSample out = sample;
  const double two_pi = 2.0 * std::numbers::pi;
  const double shift = std::fmod(geom.satellite_angular_speed_rad_s() * dt_s, two_pi);
  for (double& w : out.mutable_arguments()) {
    w = std::fmod(w + shift, two_pi);
    if (w >= two_pi) w -= two_pi;
  }
  out.set_epoch(sample.epoch_s() + dt_s);
  return out;
}

/// Orbits that intersect the cap, i.e. |pi/2 - phi| < cap_half_angle.
inline std::size_t count_cap_crossing_orbits(const ConstellationSample& sample,
                                             double cap_half_angle) {
  const double c = std::cos(cap_half_angle);
  std::size_t n = 0;
  for (const auto& o : sample.orbits()) {
    if (std::sin(o.inclination_rad) > c) ++n;
  }
  return n;
}

inline std::vector<SatelliteRef> satellites_in_cap(const ConstellationSample& sample,
                                                   double cap_half_angle) {
  if (!(cap_half_angle >= 0.0 && cap_half_angle <= std::numbers::pi / 2.0)) {
    throw GeometryError("cap half angle must lie in [0, pi/2]");
  }
  std::vector<SatelliteRef> found;
  for (std::size_t i = 0; i < sample.orbit_count(); ++i) {
    const double phi = sample.orbits()[i].inclination_rad;
    for (double w : sample.arguments(i)) {
      if (in_extended_cap(w, phi, cap_half_angle)) found.push_back({i, w});
    }
  }
  return found;
}

inline std::size_t count_satellites_in_cap(const ConstellationSample& sample,
                                           double cap_half_angle) {
  const double c = std::cos(cap_half_angle);
  std::size_t n = 0;
  for (std::size_t i = 0; i < sample.orbit_count(); ++i) {
    const double s = std::sin(sample.orbits()[i].inclination_rad);
    if (s < c) continue;
    for (double w : sample.arguments(i)) {
      if (std::sin(w) * s >= c) ++n;
    }
  }
  return n;
}

/// Distance from (0, 0, apex_radius) to its nearest satellite inside the cap
/// visible from that point; nullopt when that cap is empty.
inline std::optional<double> nearest_satellite_distance(const ConstellationSample& sample,
                                                        const NetworkGeometry& geom,
                                                        double apex_radius_km,
                                                        double cap_half_angle) {
  const double c = std::cos(cap_half_angle);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sample.orbit_count(); ++i) {
    const double phi = sample.orbits()[i].inclination_rad;
    if (std::sin(phi) < c) continue;
    for (double w : sample.arguments(i)) {
      if (!in_extended_cap(w, phi, cap_half_angle)) continue;
      best = std::min(best, distance_from_axis_point(geom, apex_radius_km, w, phi));
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

inline std::optional<double> nearest_satellite_distance(const ConstellationSample& sample,
                                                        const NetworkGeometry& geom,
                                                        double apex_radius_km) {
  if (!(apex_radius_km >= geom.earth_radius_km() &&
        apex_radius_km < geom.satellite_orbit_radius_km())) {
    throw GeometryError("apex radius must lie in [r_e, r_s)");
  }
  return nearest_satellite_distance(sample, geom, apex_radius_km, geom.horizon_angle(apex_radius_km));
}

/// Argument at which a satellite on an orbit of inclination phi enters the cap.
/// The in-cap arc is [entry, pi - entry]; nullopt when the orbit never enters.
inline std::optional<double> cap_entry_argument(double inclination, double cap_half_angle) {
  const double s = std::sin(inclination);
  const double c = std::cos(cap_half_angle);
  if (!(s > c)) return std::nullopt;
  return std::asin(c / s);
}

/// Time until the first satellite is inside the cap: 0 if one already is,
/// +inf if no orbit crosses the cap.
inline double time_to_first_contact(const ConstellationSample& sample, const NetworkGeometry& geom,
                                    double cap_half_angle) {
  const double two_pi = 2.0 * std::numbers::pi;
  double best_angle = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sample.orbit_count(); ++i) {
    const double phi = sample.orbits()[i].inclination_rad;
    const auto entry = cap_entry_argument(phi, cap_half_angle);
    if (!entry) continue;
    for (double w : sample.arguments(i)) {
      if (in_extended_cap(w, phi, cap_half_angle)) return 0.0;
      double gap = *entry - w;
      if (gap < 0.0) gap += two_pi;
      best_angle = std::min(best_angle, gap);
    }
  }
  return best_angle / geom.satellite_angular_speed_rad_s();
}

/// Snapshot rows: orbit_id,theta_rad,phi_rad,omega_rad,x_km,y_km,z_km.
inline void write_snapshot_csv(std::ostream& os, const ConstellationSample& sample,
                               const NetworkGeometry& geom) {
  const auto old_precision = os.precision(17);
  os << "orbit_id,theta_rad,phi_rad,omega_rad,x_km,y_km,z_km\n";
  for (std::size_t i = 0; i < sample.orbit_count(); ++i) {
    const auto& o = sample.orbits()[i];
    for (double w : sample.arguments(i)) {
      const Vec3 p = satellite_cartesian(geom, o.longitude_rad, o.inclination_rad, w);
      os << i << ',' << o.longitude_rad << ',' << o.inclination_rad << ',' << w << ',' << p.x << ','
         << p.y << ',' << p.z << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace coxsat
