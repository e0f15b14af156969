#pragma once

// Closed-form and quadrature evaluators for the network metrics: effective
// orbits and satellites, connectivity, the nearest-satellite range law, SNR
// coverage, throughput, association delay and the elevation/zenith variants.
//
// Most metrics reduce to the void exponent of a cap of half angle zeta,
//   L(zeta) = lambda int_0^zeta cos w (1 - exp(-(mu/pi) a(zeta, w))) dw,
// where w is the complement of the orbit inclination and a(zeta, w) the half
// arc an orbit keeps inside the cap. P(cap empty) = exp(-L(zeta)).

#include "coxsat/coxnet.hpp"
#include "coxsat/fading.hpp"
#include "coxsat/geometry.hpp"
#include "coxsat/quadrature.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace coxsat {

inline constexpr double speed_of_light_km_s = 300000.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// One radio hop. Powers in dBm, gains in dB; eta is formed once, in linear units.
struct LinkBudget {
  double rx_power_at_1m_dbm = 30.0;
  double aggregate_gain_db = 26.0;
  double bandwidth_hz = 10e6;
  double noise_density_dbm_hz = -174.0;
  double path_loss_exponent = 2.0;
  // Total noise power; when set it replaces N_o + 10 log10(B).
  std::optional<double> noise_power_dbm;

  void validate() const {
    if (!(path_loss_exponent >= 2.0) || !std::isfinite(path_loss_exponent)) {
      throw std::invalid_argument("path loss exponent must be >= 2");
    }
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
      throw std::invalid_argument("bandwidth must be positive");
    }
    if (!std::isfinite(rx_power_at_1m_dbm) || !std::isfinite(aggregate_gain_db) ||
        !std::isfinite(noise_density_dbm_hz) ||
        (noise_power_dbm && !std::isfinite(*noise_power_dbm))) {
      throw std::invalid_argument("link budget values must be finite");
    }
  }

  [[nodiscard]] double total_noise_dbm() const {
    return noise_power_dbm ? *noise_power_dbm
                           : noise_density_dbm_hz + 10.0 * std::log10(bandwidth_hz);
  }

  /// eta = p g / (N_o B), linear. The SNR at distance r meters is eta H r^-alpha.
  [[nodiscard]] double snr_scale() const {
    return db_to_linear(rx_power_at_1m_dbm + aggregate_gain_db - total_noise_dbm());
  }

  /// Mean-fading SNR at `distance_km`.
  [[nodiscard]] double mean_snr(double distance_km) const {
    return snr_scale() * std::pow(1000.0 * distance_km, -path_loss_exponent);
  }
};

struct ScenarioConfig {
  NetworkGeometry geom = NetworkGeometry::from_altitudes(550.0, 20.0, 0.0011);
  Densities densities{25.0, 25.0};
  bool platform_enabled = true;
  LinkBudget sat_link;       // satellite to platform, or satellite to gateway without platform
  LinkBudget platform_link;  // platform to gateway
  FadingModel fading = FadingModel::nakagami(1.0, 1.0);

  static ScenarioConfig table1() { return ScenarioConfig{}; }

  void validate() const {
    densities.validate();
    sat_link.validate();
    platform_link.validate();
  }

  [[nodiscard]] ScenarioConfig with_densities(double lambda, double mu) const {
    ScenarioConfig c = *this;
    c.densities = Densities{lambda, mu};
    return c;
  }
  [[nodiscard]] ScenarioConfig with_platform(bool enabled) const {
    ScenarioConfig c = *this;
    c.platform_enabled = enabled;
    return c;
  }
  [[nodiscard]] ScenarioConfig with_platform_altitude(double h_km) const {
    ScenarioConfig c = *this;
    c.geom = geom.with_platform_altitude(h_km);
    return c;
  }
};

struct AnalyticValue {
  double value = 0.0;
  double error = 0.0;
};

/// Apex of the serving cap and its half angle: the platform and its extended cap,
/// or the gateway and its own visible cap.
struct ServingCap {
  double apex_radius_km = 0.0;
  double half_angle = 0.0;
};

inline ServingCap serving_cap(const ScenarioConfig& cfg) {
  if (cfg.platform_enabled) {
    return {cfg.geom.platform_orbit_radius_km(), extended_cap_angle(cfg.geom)};
  }
  return {cfg.geom.earth_radius_km(), visible_cap_angle(cfg.geom)};
}

/// Height of the serving apex above the gateway (0 without platform).
inline double serving_height_km(const ScenarioConfig& cfg) {
  return cfg.platform_enabled ? cfg.geom.platform_altitude_km() : 0.0;
}

inline const LinkBudget& serving_link(const ScenarioConfig& cfg) { return cfg.sat_link; }

namespace detail {

inline quadrature::Settings inner_settings() {
  quadrature::Settings s;
  s.rel_tol = 1e-12;
  s.abs_tol = 1e-14;
  s.singular_endpoint_scheme = quadrature::EndpointScheme::double_exponential;
  return s;
}

// sin^2 of the half arc, sin(zeta - w) sin(zeta + w) / cos^2 w, with zeta - w passed
// separately so it keeps full precision next to the rim.
inline double arc_sine_sq(double zeta, double w, double zeta_minus_w) {
  const double cw = std::cos(w);
  const double s = std::sin(zeta_minus_w) * std::sin(zeta + w) / (cw * cw);
  return std::clamp(s, 0.0, 1.0);
}

inline double arc_half_angle(double zeta, double w, double zeta_minus_w) {
  return std::asin(std::sqrt(arc_sine_sq(zeta, w, zeta_minus_w)));
}

// int_0^zeta cos w g(a(zeta, w)) dw for a function of the half arc.
template <class G>
quadrature::Result cap_integral(double zeta, G&& g) {
  if (zeta <= 0.0) return {};
  auto f = [zeta, &g](double w, quadrature::EndpointDistance d) {
    return std::cos(w) * g(arc_half_angle(zeta, w, d.to_upper));
  };
  return quadrature::integrate(f, 0.0, zeta, inner_settings());
}

// Void exponent of a cap with the given satellite rate per radian of arc.
inline quadrature::Result void_exponent(double lambda, double mu, double zeta) {
  if (lambda == 0.0 || mu == 0.0) return {};
  const double k = mu / std::numbers::pi;
  auto r = cap_integral(zeta, [k](double a) { return -std::expm1(-k * a); });
  r.value *= lambda;
  r.error *= lambda;
  return r;
}

// int_0^zeta exp(-(mu/pi) a) / sin a dw, the density factor of the nearest-satellite
// law. The integrand has an inverse square-root singularity at w = zeta.
inline quadrature::Result density_integral(double mu, double zeta) {
  if (zeta <= 0.0) return {};
  const double k = mu / std::numbers::pi;
  auto f = [zeta, k](double w, quadrature::EndpointDistance d) {
    const double s2 = arc_sine_sq(zeta, w, d.to_upper);
    if (s2 == 0.0) return 0.0;  // only reachable with a zero-width node
    return std::exp(-k * std::asin(std::sqrt(s2))) / std::sqrt(s2);
  };
  return quadrature::integrate(f, 0.0, zeta, inner_settings());
}

inline std::uint64_t zeta_key(double zeta) { return std::bit_cast<std::uint64_t>(zeta); }

}  // namespace detail

/// Cached void exponent L(zeta) and density factor V(zeta) for one (lambda, mu).
///
/// Entries are keyed by the exact bit pattern of zeta, so a cached value is the
/// value the uncached evaluation would produce. Safe for concurrent use.
class RangeKernel {
 public:
  RangeKernel(double lambda, double mu, bool memoize = true)
      : lambda_(lambda), mu_(mu), memoize_(memoize) {
    Densities{lambda, mu}.validate();
  }

  struct Entry {
    quadrature::Result exponent;
    quadrature::Result density;
  };

  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] double mu() const { return mu_; }

  Entry at(double zeta) const {
    if (!memoize_) return compute(zeta);
    const auto key = detail::zeta_key(zeta);
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) {
        ++hits_;
        return it->second;
      }
    }
    Entry e = compute(zeta);
    std::lock_guard lock(mutex_);
    ++misses_;
    cache_.emplace(key, e);
    return e;
  }

  [[nodiscard]] double void_exponent(double zeta) const { return at(zeta).exponent.value; }

  // -d/dzeta of P(cap empty) = exp(-L) L'(zeta), L' = (lambda mu / pi) sin(zeta) V(zeta).
  [[nodiscard]] double range_density_in_zeta(double zeta) const {
    if (lambda_ == 0.0 || mu_ == 0.0 || zeta <= 0.0) return 0.0;
    const Entry e = at(zeta);
    return std::exp(-e.exponent.value) * lambda_ * mu_ / std::numbers::pi * std::sin(zeta) *
           e.density.value;
  }

  [[nodiscard]] std::size_t cache_hits() const {
    std::lock_guard lock(mutex_);
    return hits_;
  }
  [[nodiscard]] std::size_t cache_misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
  }

 private:
  Entry compute(double zeta) const {
    Entry e;
    e.exponent = detail::void_exponent(lambda_, mu_, zeta);
    e.density = detail::density_integral(mu_, zeta);
    return e;
  }

  double lambda_;
  double mu_;
  bool memoize_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::uint64_t, Entry> cache_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

// ---------------------------------------------------------------------------
// Effective orbits and satellites

inline double avg_effective_orbits(const ScenarioConfig& cfg) {
  cfg.validate();
  return cfg.densities.mean_orbits * std::sin(serving_cap(cfg).half_angle);
}

/// (lambda mu / pi) int_0^zeta cos w a(zeta, w) dw.
inline AnalyticValue avg_effective_satellites_in_cap(double lambda, double mu, double zeta) {
  const double scale = lambda * mu / std::numbers::pi;
  if (scale == 0.0) return {};
  const auto r = detail::cap_integral(zeta, [](double a) { return a; });
  return {scale * r.value, scale * r.error};
}

inline AnalyticValue avg_effective_satellites(const ScenarioConfig& cfg) {
  cfg.validate();
  return avg_effective_satellites_in_cap(cfg.densities.mean_orbits,
                                         cfg.densities.mean_sats_per_orbit,
                                         serving_cap(cfg).half_angle);
}

struct GainFactors {
  double orbit_factor = 1.0;
  double satellite_factor = 1.0;
  double orbit_factor_linearized = 1.0;  // 1 + eps cot(xi), eps = phi - xi
};

/// Gains of the platform's extended cap over the gateway's own cap. Depends only on geometry.
inline GainFactors gain_factors(const ScenarioConfig& cfg) {
  const double phi = extended_cap_angle(cfg.geom);
  const double xi = visible_cap_angle(cfg.geom);
  GainFactors g;
  g.orbit_factor = std::sin(phi) / std::sin(xi);
  g.orbit_factor_linearized = 1.0 + (phi - xi) / std::tan(xi);
  const auto ext = detail::cap_integral(phi, [](double a) { return a; });
  const auto own = detail::cap_integral(xi, [](double a) { return a; });
  g.satellite_factor = ext.value / own.value;
  return g;
}

// ---------------------------------------------------------------------------
// Connectivity and the range law

inline AnalyticValue connectivity_in_cap(double lambda, double mu, double zeta) {
  const auto l = detail::void_exponent(lambda, mu, zeta);
  // d(1 - e^-L)/dL = e^-L
  return {-std::expm1(-l.value), std::exp(-l.value) * l.error};
}

inline AnalyticValue connectivity(const ScenarioConfig& cfg) {
  cfg.validate();
  return connectivity_in_cap(cfg.densities.mean_orbits, cfg.densities.mean_sats_per_orbit,
                             serving_cap(cfg).half_angle);
}

/// Connectivity with the platform divided by connectivity without it.
inline double connectivity_ratio(const ScenarioConfig& cfg) {
  return connectivity(cfg.with_platform(true)).value / connectivity(cfg.with_platform(false)).value;
}

/// P(D > d) for the distance D from the serving apex to its nearest satellite in
/// the serving cap; D = +inf when the cap is empty.
inline AnalyticValue nearest_distance_ccdf(const ScenarioConfig& cfg, double d_km,
                                           const RangeKernel* kernel = nullptr) {
  cfg.validate();
  if (!(d_km >= 0.0)) throw std::invalid_argument("distance must be nonnegative");
  const auto cap = serving_cap(cfg);
  const double rs = cfg.geom.satellite_orbit_radius_km();
  const double lambda = cfg.densities.mean_orbits;
  const double mu = cfg.densities.mean_sats_per_orbit;
  if (d_km <= rs - cap.apex_radius_km) return {1.0, 0.0};
  const double rim = cap_rim_distance(cfg.geom, cap.apex_radius_km, cap.half_angle);
  const double zeta =
      d_km >= rim ? cap.half_angle : critical_inclination(cfg.geom, cap.apex_radius_km, d_km);
  if (kernel) {
    const auto e = kernel->at(zeta);
    return {std::exp(-e.exponent.value), std::exp(-e.exponent.value) * e.exponent.error};
  }
  const auto l = detail::void_exponent(lambda, mu, zeta);
  return {std::exp(-l.value), std::exp(-l.value) * l.error};
}

/// Smallest d with P(D <= d) >= p; +inf when the cap is empty too often.
inline double nearest_distance_quantile(const ScenarioConfig& cfg, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  const auto cap = serving_cap(cfg);
  const double lo = cfg.geom.satellite_orbit_radius_km() - cap.apex_radius_km;
  const double hi = cap_rim_distance(cfg.geom, cap.apex_radius_km, cap.half_angle);
  RangeKernel kernel(cfg.densities.mean_orbits, cfg.densities.mean_sats_per_orbit);
  auto g = [&](double d) { return nearest_distance_ccdf(cfg, d, &kernel).value - (1.0 - p); };
  if (g(hi) > 0.0) return std::numeric_limits<double>::infinity();
  if (g(std::nextafter(lo, hi)) <= 0.0) return lo;
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      g, std::nextafter(lo, hi), hi, boost::math::tools::eps_tolerance<double>(48), iters);
  return 0.5 * (r.first + r.second);
}

// ---------------------------------------------------------------------------
// SNR coverage

inline double distance_at_zeta(const NetworkGeometry& geom, double apex_radius_km, double zeta) {
  return cap_rim_distance(geom, apex_radius_km, zeta);
}

/// P(nearest satellite in the serving cap exists and its SNR is at least tau).
///
/// The range density is integrated over the cap angle zeta(z) rather than over z;
/// the two forms are related by sin(zeta) dzeta = z dz / (r_s r). Without fading
/// dependence on tau, the value collapses to the connectivity probability.
inline AnalyticValue snr_coverage_platform(const ScenarioConfig& cfg, double tau,
                                           const RangeKernel* kernel = nullptr) {
  cfg.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("SNR threshold must be positive");
  const double lambda = cfg.densities.mean_orbits;
  const double mu = cfg.densities.mean_sats_per_orbit;
  if (lambda == 0.0 || mu == 0.0) return {};
  std::optional<RangeKernel> own;
  if (!kernel) kernel = &own.emplace(lambda, mu);
  const auto cap = serving_cap(cfg);
  const LinkBudget& link = serving_link(cfg);
  const double eta = link.snr_scale();
  const double alpha = link.path_loss_exponent;
  auto f = [&](double zeta) {
    const double z_m = 1000.0 * distance_at_zeta(cfg.geom, cap.apex_radius_km, zeta);
    const double x = tau * std::pow(z_m, alpha) / eta;
    const double survive = cfg.fading.ccdf(x);
    if (survive == 0.0) return 0.0;
    return kernel->range_density_in_zeta(zeta) * survive;
  };
  quadrature::Settings s;
  s.rel_tol = 1e-9;
  s.abs_tol = 1e-13;
  const auto r = quadrature::integrate(f, 0.0, cap.half_angle, s);
  return {std::clamp(r.value, 0.0, 1.0), r.error};
}

/// Coverage given that the serving cap holds at least one satellite.
inline AnalyticValue snr_coverage_platform_conditional(const ScenarioConfig& cfg, double tau) {
  const auto conn = connectivity(cfg);
  if (conn.value == 0.0) throw std::domain_error("conditional coverage undefined: connectivity is 0");
  const auto cov = snr_coverage_platform(cfg, tau);
  return {std::min(1.0, cov.value / conn.value), cov.error / conn.value};
}

/// Platform-to-gateway coverage at the fixed distance h_a.
inline double snr_coverage_ground(const ScenarioConfig& cfg, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("SNR threshold must be positive");
  const LinkBudget& link = cfg.platform_link;
  link.validate();
  const double h_m = 1000.0 * cfg.geom.platform_altitude_km();
  if (h_m == 0.0) return 1.0;
  return cfg.fading.ccdf(tau * std::pow(h_m, link.path_loss_exponent) / link.snr_scale());
}

// ---------------------------------------------------------------------------
// Throughput

struct Throughput {
  double rate_platform_bps_hz = 0.0;  // satellite hop (direct to gateway without platform)
  double rate_ground_bps_hz = 0.0;    // platform hop; +inf without platform
  double end_to_end_bps_hz = 0.0;
  double error = 0.0;
};

/// Ergodic rates: R = int_0^inf P(SNR >= 2^u - 1) du for each hop, and the
/// network rate min(R_A, R_G). Without a platform the satellite serves the
/// gateway directly and only that hop counts.
inline Throughput throughput(const ScenarioConfig& cfg) {
  cfg.validate();
  Throughput t;
  quadrature::Settings s;
  s.rel_tol = 1e-7;
  s.abs_tol = 1e-11;
  const double lambda = cfg.densities.mean_orbits;
  const double mu = cfg.densities.mean_sats_per_orbit;
  if (lambda > 0.0 && mu > 0.0) {
    RangeKernel kernel(lambda, mu);
    const auto ra = quadrature::integrate_semi_infinite(
        [&](double u) {
          const double tau = std::expm1(u * std::numbers::ln2);
          if (tau == 0.0) return connectivity(cfg).value;
          return snr_coverage_platform(cfg, tau, &kernel).value;
        },
        s);
    t.rate_platform_bps_hz = ra.value;
    t.error += ra.error;
  }
  if (cfg.platform_enabled) {
    const auto rg = quadrature::integrate_semi_infinite(
        [&](double u) {
          const double tau = std::expm1(u * std::numbers::ln2);
          if (tau == 0.0) return 1.0;
          return snr_coverage_ground(cfg, tau);
        },
        s);
    t.rate_ground_bps_hz = rg.value;
    t.error += rg.error;
  } else {
    t.rate_ground_bps_hz = std::numeric_limits<double>::infinity();
  }
  t.end_to_end_bps_hz = std::min(t.rate_platform_bps_hz, t.rate_ground_bps_hz);
  return t;
}

// ---------------------------------------------------------------------------
// Association delay

/// P(T > t): no satellite reaches the serving cap within t seconds.
///
/// A crossing orbit with in-cap half arc a is missed iff its satellites avoid an
/// arc of length min(nu t + 2a, 2 pi). The clamp only matters once nu t + 2a
/// exceeds a full turn; there the integrand is split at the kink.
inline AnalyticValue delay_ccdf(const ScenarioConfig& cfg, double t_s) {
  cfg.validate();
  if (!(t_s >= 0.0)) throw std::invalid_argument("delay horizon must be nonnegative");
  const double lambda = cfg.densities.mean_orbits;
  const double mu = cfg.densities.mean_sats_per_orbit;
  const double zeta = serving_cap(cfg).half_angle;
  if (lambda == 0.0 || zeta == 0.0) return {1.0, 0.0};
  const double sweep = cfg.geom.satellite_angular_speed_rad_s() * t_s;
  const double two_pi = 2.0 * std::numbers::pi;
  const double k = mu / two_pi;
  const double full = -std::expm1(-mu);  // 1 - e^{-mu}, a fully swept orbit

  // Orbits with w < w_star have a > pi - sweep/2 and are fully swept.
  double w_star = 0.0;
  const double target = std::numbers::pi - 0.5 * sweep;
  if (target <= 0.0) {
    w_star = zeta;
  } else if (target < zeta) {
    w_star = std::acos(std::min(1.0, std::cos(zeta) / std::cos(target)));
  }
  double exponent = std::sin(w_star) * full;
  double error = 0.0;
  if (w_star < zeta) {
    auto f = [&](double w, quadrature::EndpointDistance d) {
      const double a = detail::arc_half_angle(zeta, w, d.to_upper);
      const double arc = std::min(sweep + 2.0 * a, two_pi);
      return std::cos(w) * -std::expm1(-k * arc);
    };
    const auto r = quadrature::integrate(f, w_star, zeta, detail::inner_settings());
    exponent += r.value;
    error = r.error;
  }
  const double v = std::exp(-lambda * exponent);
  return {v, v * lambda * error};
}

/// Limit of P(T > t) as mu grows: only orbits missing the cap leave it empty.
inline double delay_ccdf_asymptotic(const ScenarioConfig& cfg) {
  return std::exp(-avg_effective_orbits(cfg));
}

/// Smallest t with P(T <= t) >= p; +inf if never reached.
inline double delay_quantile(const ScenarioConfig& cfg, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  auto g = [&](double t) { return delay_ccdf(cfg, t).value - (1.0 - p); };
  if (g(0.0) <= 0.0) return 0.0;
  // After one revolution every crossing orbit is fully swept and the CCDF is flat.
  const double t_full = 2.0 * std::numbers::pi / cfg.geom.satellite_angular_speed_rad_s();
  if (g(t_full) > 0.0) return std::numeric_limits<double>::infinity();
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      g, 0.0, t_full, boost::math::tools::eps_tolerance<double>(48), iters);
  return 0.5 * (r.first + r.second);
}

// ---------------------------------------------------------------------------
// Propagation delay

/// Law of T = (D + h)/c given that the serving cap is nonempty, where D is the
/// nearest-satellite distance and h the platform-to-gateway hop (0 without platform).
class PropagationDelay {
 public:
  explicit PropagationDelay(const ScenarioConfig& cfg)
      : cfg_(cfg),
        kernel_(cfg.densities.mean_orbits, cfg.densities.mean_sats_per_orbit),
        conn_(connectivity(cfg).value) {
    if (conn_ <= 0.0) throw std::domain_error("propagation delay undefined: connectivity is 0");
    const auto cap = serving_cap(cfg);
    d_min_ = cfg.geom.satellite_orbit_radius_km() - cap.apex_radius_km;
    d_max_ = cap_rim_distance(cfg.geom, cap.apex_radius_km, cap.half_angle);
    h_ = serving_height_km(cfg);
  }

  [[nodiscard]] double min_delay_s() const { return (d_min_ + h_) / speed_of_light_km_s; }
  [[nodiscard]] double max_delay_s() const { return (d_max_ + h_) / speed_of_light_km_s; }

  /// P(T > t | cap nonempty).
  [[nodiscard]] double ccdf(double t_s) const {
    const double d = speed_of_light_km_s * t_s - h_;
    if (d < d_min_) return 1.0;
    const double p = nearest_distance_ccdf(cfg_, d, &kernel_).value;
    return std::clamp((p - (1.0 - conn_)) / conn_, 0.0, 1.0);
  }

  [[nodiscard]] double mean_s() const {
    quadrature::Settings s;
    s.rel_tol = 1e-10;
    s.abs_tol = 1e-12;
    auto f = [this](double d) {
      return (nearest_distance_ccdf(cfg_, d, &kernel_).value - (1.0 - conn_)) / conn_;
    };
    const double excess = quadrature::integrate(f, d_min_, d_max_, s).value;
    return (d_min_ + excess + h_) / speed_of_light_km_s;
  }

  [[nodiscard]] double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
    auto g = [&](double t) { return ccdf(t) - (1.0 - p); };
    const double lo = std::nextafter(min_delay_s(), 1.0);
    const double hi = max_delay_s();
    if (g(lo) <= 0.0) return min_delay_s();
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(
        g, lo, hi, boost::math::tools::eps_tolerance<double>(48), iters);
    return 0.5 * (r.first + r.second);
  }

 private:
  ScenarioConfig cfg_;
  RangeKernel kernel_;
  double conn_;
  double d_min_ = 0.0;
  double d_max_ = 0.0;
  double h_ = 0.0;
};

// ---------------------------------------------------------------------------
// Random platform zenith angle

/// Law of the platform's zenith angle Z as seen from the gateway.
class ZenithDistribution {
 public:
  struct Degenerate {
    double z = 0.0;
  };
  struct Uniform {
    double lo = 0.0;
    double hi = 0.0;
  };
  struct Samples {
    std::vector<double> z;
  };
  struct Density {
    std::function<double(double)> pdf;
    double upper = 0.0;  // pdf vanishes above this angle
  };

  static ZenithDistribution degenerate(double z) { return ZenithDistribution(Degenerate{check(z)}); }
  static ZenithDistribution uniform(double lo, double hi) {
    if (!(check(lo) <= check(hi))) throw std::invalid_argument("zenith range must satisfy lo <= hi");
    return ZenithDistribution(Uniform{lo, hi});
  }
  static ZenithDistribution samples(std::vector<double> z) {
    if (z.empty()) throw std::invalid_argument("zenith sample list is empty");
    for (double v : z) check(v);
    return ZenithDistribution(Samples{std::move(z)});
  }
  static ZenithDistribution density(std::function<double(double)> pdf, double upper) {
    return ZenithDistribution(Density{std::move(pdf), check(upper)});
  }

  /// E[g(Z)].
  template <class G>
  double expectation(G&& g) const {
    quadrature::Settings s;
    s.rel_tol = 1e-10;
    s.abs_tol = 1e-13;
    if (const auto* d = std::get_if<Degenerate>(&law_)) return g(d->z);
    if (const auto* u = std::get_if<Uniform>(&law_)) {
      if (u->lo == u->hi) return g(u->lo);
      return quadrature::integrate([&](double z) { return g(z); }, u->lo, u->hi, s).value /
             (u->hi - u->lo);
    }
    if (const auto* smp = std::get_if<Samples>(&law_)) {
      double sum = 0.0;
      for (double z : smp->z) sum += g(z);
      return sum / static_cast<double>(smp->z.size());
    }
    const auto& den = std::get<Density>(law_);
    const double mass = quadrature::integrate([&](double z) { return den.pdf(z); }, 0.0, den.upper, s).value;
    return quadrature::integrate([&](double z) { return den.pdf(z) * g(z); }, 0.0, den.upper, s).value /
           mass;
  }

  /// Largest angle in the support.
  [[nodiscard]] double support_max() const {
    return std::visit(
        [](const auto& l) -> double {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, Degenerate>) return l.z;
          else if constexpr (std::is_same_v<T, Uniform>) return l.hi;
          else if constexpr (std::is_same_v<T, Samples>) return *std::max_element(l.z.begin(), l.z.end());
          else return l.upper;
        },
        law_);
  }

  template <class Rng>
  double sample(Rng& rng) const {
    if (const auto* d = std::get_if<Degenerate>(&law_)) return d->z;
    if (const auto* u = std::get_if<Uniform>(&law_)) {
      return std::uniform_real_distribution<double>(u->lo, u->hi)(rng);
    }
    if (const auto* smp = std::get_if<Samples>(&law_)) {
      return smp->z[std::uniform_int_distribution<std::size_t>(0, smp->z.size() - 1)(rng)];
    }
    throw std::logic_error("sampling from a zenith density is not supported");
  }

 private:
  using Law = std::variant<Degenerate, Uniform, Samples, Density>;
  explicit ZenithDistribution(Law law) : law_(std::move(law)) {}

  static double check(double z) {
    if (!(z >= 0.0 && z < std::numbers::pi / 2.0)) {
      throw std::invalid_argument("zenith angle must lie in [0, pi/2)");
    }
    return z;
  }

  Law law_;
};

/// Distance of a platform at zenith angle z from the Earth's center, r_l = sqrt(r_a^2 + h^2 tan^2 z).
inline double platform_radius_at_zenith(const ScenarioConfig& cfg, double zenith) {
  const double ra = serving_cap(cfg).apex_radius_km;
  const double h = serving_height_km(cfg);
  const double off = h * std::tan(zenith);
  return std::sqrt(ra * ra + off * off);
}

inline double connectivity_random_zenith(const ScenarioConfig& cfg, const ZenithDistribution& zenith) {
  cfg.validate();
  const double worst = cfg.geom.horizon_angle(platform_radius_at_zenith(cfg, zenith.support_max()));
  if (worst > std::numbers::pi / 2.0) {
    throw GeometryError("platform zenith support reaches a cap wider than pi/2");
  }
  const double lambda = cfg.densities.mean_orbits;
  const double mu = cfg.densities.mean_sats_per_orbit;
  return zenith.expectation([&](double z) {
    const double cap = cfg.geom.horizon_angle(platform_radius_at_zenith(cfg, z));
    return connectivity_in_cap(lambda, mu, cap).value;
  });
}

/// Ground-gateway connectivity when only satellites at elevation >= kappa count.
/// The platform flag is ignored: the constraint concerns the gateway's own view.
inline AnalyticValue connectivity_min_elevation(const ScenarioConfig& cfg, double kappa) {
  cfg.validate();
  return connectivity_in_cap(cfg.densities.mean_orbits, cfg.densities.mean_sats_per_orbit,
                             min_elevation_cap_angle(cfg.geom, kappa));
}

}  // namespace coxsat
