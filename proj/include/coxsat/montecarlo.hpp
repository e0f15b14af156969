#pragma once

// Monte Carlo estimators for every metric, the metric registry shared with the
// command line, and the analytical-vs-simulation validation report.
//
// Trial i draws its constellation from substream(seed, i) and its auxiliary
// variates (fading, platform zenith) from substreams keyed by a per-variate tag,
// so every trial is reproducible on its own and all metrics evaluated at one
// parameter point share the same realizations.

#include "coxsat/analysis.hpp"
#include "coxsat/coxnet.hpp"
#include "coxsat/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace coxsat {

enum class MetricKind {
  effective_orbits,
  effective_satellites,
  connectivity,
  connectivity_ratio,
  orbit_gain,
  satellite_gain,
  range_ccdf,            // param: d [km]
  range_quantile,        // param: p
  snr_coverage,          // param: tau [linear]
  snr_coverage_conditional,
  snr_coverage_ground,   // param: tau [linear]
  rate_platform,
  rate_ground,
  throughput,            // min(R_A, R_G)
  delay_ccdf,            // param: t [s]
  delay_floor,
  delay_quantile,        // param: p
  propagation_delay_mean,
  propagation_delay_quantile,  // param: p
  connectivity_zenith,         // param: upper end of a uniform zenith law [rad]
  connectivity_min_elevation,  // param: kappa [rad]
};

enum class ParamKind { none, distance_km, tau, time_s, probability, angle };

struct MetricInfo {
  MetricKind kind;
  std::string_view id;
  ParamKind param;
  bool simulated;  // has a Monte Carlo estimator
  bool indicator;  // estimator averages a 0/1 outcome
  std::string_view help;
};

inline constexpr MetricInfo metric_table[] = {
    {MetricKind::effective_orbits, "effective-orbits", ParamKind::none, true, false,
     "mean number of orbits crossing the serving cap"},
    {MetricKind::effective_satellites, "effective-satellites", ParamKind::none, true, false,
     "mean number of satellites inside the serving cap"},
    {MetricKind::connectivity, "connectivity", ParamKind::none, true, true,
     "probability the serving cap holds a satellite"},
    {MetricKind::connectivity_ratio, "connectivity-ratio", ParamKind::none, false, false,
     "connectivity with platform over connectivity without"},
    {MetricKind::orbit_gain, "orbit-gain", ParamKind::none, false, false,
     "effective orbits with platform over without"},
    {MetricKind::satellite_gain, "satellite-gain", ParamKind::none, false, false,
     "effective satellites with platform over without"},
    {MetricKind::range_ccdf, "range-ccdf", ParamKind::distance_km, true, true,
     "P(nearest serving distance > d), d in km (--d)"},
    {MetricKind::range_quantile, "range-quantile", ParamKind::probability, false, false,
     "quantile of the nearest serving distance in km (--p)"},
    {MetricKind::snr_coverage, "snr-coverage", ParamKind::tau, true, true,
     "P(cap nonempty and satellite-hop SNR >= tau) (--tau-db)"},
    {MetricKind::snr_coverage_conditional, "snr-coverage-conditional", ParamKind::tau, false, false,
     "satellite-hop coverage given a nonempty cap (--tau-db)"},
    {MetricKind::snr_coverage_ground, "snr-coverage-ground", ParamKind::tau, true, true,
     "P(platform-hop SNR >= tau) (--tau-db)"},
    {MetricKind::rate_platform, "rate-platform", ParamKind::none, true, false,
     "ergodic rate of the satellite hop, bit/s/Hz"},
    {MetricKind::rate_ground, "rate-ground", ParamKind::none, true, false,
     "ergodic rate of the platform-to-gateway hop, bit/s/Hz"},
    {MetricKind::throughput, "throughput", ParamKind::none, true, false,
     "end-to-end rate min(R_A, R_G), bit/s/Hz"},
    {MetricKind::delay_ccdf, "delay-ccdf", ParamKind::time_s, true, true,
     "P(association delay > t), t in s (--t)"},
    {MetricKind::delay_floor, "delay-floor", ParamKind::none, false, false,
     "large-mu limit of the delay CCDF"},
    {MetricKind::delay_quantile, "delay-quantile", ParamKind::probability, false, false,
     "quantile of the association delay in s (--p)"},
    {MetricKind::propagation_delay_mean, "propagation-delay-mean", ParamKind::none, true, false,
     "mean one-way propagation delay in s given a nonempty cap"},
    {MetricKind::propagation_delay_quantile, "propagation-delay-quantile", ParamKind::probability,
     false, false, "propagation delay quantile in s given a nonempty cap (--p)"},
    {MetricKind::connectivity_zenith, "connectivity-zenith", ParamKind::angle, true, true,
     "connectivity with platform zenith uniform on [0, z] (--zenith-deg)"},
    {MetricKind::connectivity_min_elevation, "connectivity-min-elevation", ParamKind::angle, true,
     true, "gateway connectivity counting elevations >= kappa (--kappa-deg)"},
};

inline const MetricInfo& metric_info(MetricKind kind) {
  for (const auto& m : metric_table) {
    if (m.kind == kind) return m;
  }
  throw std::logic_error("unregistered metric kind");
}

inline const MetricInfo& metric_info(std::string_view id) {
  for (const auto& m : metric_table) {
    if (m.id == id) return m;
  }
  throw std::invalid_argument("unknown metric '" + std::string(id) + "'");
}

/// A metric plus its scalar parameter in internal units (km, linear SNR, s, rad).
struct MetricSpec {
  MetricKind kind = MetricKind::connectivity;
  double param = std::numeric_limits<double>::quiet_NaN();

  [[nodiscard]] const MetricInfo& info() const { return metric_info(kind); }
  [[nodiscard]] std::string id() const { return std::string(info().id); }

  void validate() const {
    const auto p = info().param;
    if (p == ParamKind::none) return;
    if (std::isnan(param)) throw std::invalid_argument("metric " + id() + " requires a parameter");
    switch (p) {
      case ParamKind::distance_km:
      case ParamKind::time_s:
        if (!(param >= 0.0)) throw std::invalid_argument(id() + ": parameter must be nonnegative");
        break;
      case ParamKind::tau:
        if (!(param > 0.0)) throw std::invalid_argument(id() + ": SNR threshold must be positive");
        break;
      case ParamKind::probability:
        if (!(param > 0.0 && param < 1.0)) throw std::invalid_argument(id() + ": p must lie in (0, 1)");
        break;
      case ParamKind::angle:
        if (!(param >= 0.0 && param < std::numbers::pi / 2.0)) {
          throw std::invalid_argument(id() + ": angle must lie in [0, 90) degrees");
        }
        break;
      case ParamKind::none:
        break;
    }
  }

  /// "name=value" in user-facing units, empty without a parameter.
  [[nodiscard]] std::string param_label() const {
    std::ostringstream os;
    os << std::setprecision(10);
    switch (info().param) {
      case ParamKind::none: return {};
      case ParamKind::distance_km: os << "d_km=" << param; break;
      case ParamKind::tau: os << "tau_db=" << linear_to_db(param); break;
      case ParamKind::time_s: os << "t_s=" << param; break;
      case ParamKind::probability: os << "p=" << param; break;
      case ParamKind::angle:
        os << (kind == MetricKind::connectivity_zenith ? "zenith_deg=" : "kappa_deg=")
           << param * 180.0 / std::numbers::pi;
        break;
    }
    return os.str();
  }
};

/// Analytical value of a metric.
inline AnalyticValue analytical_value(const ScenarioConfig& cfg, const MetricSpec& m) {
  m.validate();
  switch (m.kind) {
    case MetricKind::effective_orbits: return {avg_effective_orbits(cfg), 0.0};
    case MetricKind::effective_satellites: return avg_effective_satellites(cfg);
    case MetricKind::connectivity: return connectivity(cfg);
    case MetricKind::connectivity_ratio: return {connectivity_ratio(cfg), 0.0};
    case MetricKind::orbit_gain: return {gain_factors(cfg).orbit_factor, 0.0};
    case MetricKind::satellite_gain: return {gain_factors(cfg).satellite_factor, 0.0};
    case MetricKind::range_ccdf: return nearest_distance_ccdf(cfg, m.param);
    case MetricKind::range_quantile: return {nearest_distance_quantile(cfg, m.param), 0.0};
    case MetricKind::snr_coverage: return snr_coverage_platform(cfg, m.param);
    case MetricKind::snr_coverage_conditional: return snr_coverage_platform_conditional(cfg, m.param);
    case MetricKind::snr_coverage_ground: return {snr_coverage_ground(cfg, m.param), 0.0};
    case MetricKind::rate_platform: {
      const auto t = throughput(cfg);
      return {t.rate_platform_bps_hz, t.error};
    }
    case MetricKind::rate_ground: {
      const auto t = throughput(cfg);
      return {t.rate_ground_bps_hz, t.error};
    }
    case MetricKind::throughput: {
      const auto t = throughput(cfg);
      return {t.end_to_end_bps_hz, t.error};
    }
    case MetricKind::delay_ccdf: return delay_ccdf(cfg, m.param);
    case MetricKind::delay_floor: return {delay_ccdf_asymptotic(cfg), 0.0};
    case MetricKind::delay_quantile: return {delay_quantile(cfg, m.param), 0.0};
    // Conditioned on a nonempty cap; undefined (NaN) when that never happens.
    case MetricKind::propagation_delay_mean:
      if (connectivity(cfg).value == 0.0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
      return {PropagationDelay(cfg).mean_s(), 0.0};
    case MetricKind::propagation_delay_quantile:
      if (connectivity(cfg).value == 0.0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
      return {PropagationDelay(cfg).quantile(m.param), 0.0};
    case MetricKind::connectivity_zenith:
      return {connectivity_random_zenith(cfg, ZenithDistribution::uniform(0.0, m.param)), 0.0};
    case MetricKind::connectivity_min_elevation: return connectivity_min_elevation(cfg, m.param);
  }
  throw std::logic_error("unhandled metric kind");
}

struct MetricEstimate {
  std::string metric_id;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_trials = 0;  // trials that contributed an observation
  std::uint64_t seed = 0;
};

struct EstimateOptions {
  unsigned workers = 0;            // 0: hardware concurrency
  std::size_t block_size = 1024;   // fixed; results do not depend on the worker count
  std::ostream* warnings = nullptr;
};

inline constexpr std::size_t min_trials = 100;
inline constexpr std::size_t recommended_trials = 10000;

namespace detail {

inline constexpr std::uint64_t tag_fading_sat = 0x5A7F'AD1Eull;
inline constexpr std::uint64_t tag_fading_ground = 0x6E0D'FAD3ull;
inline constexpr std::uint64_t tag_zenith = 0x2E41'7A11ull;

inline Engine aux_stream(std::uint64_t seed, std::uint64_t tag, std::size_t trial) {
  return substream(splitmix64(seed ^ tag), trial);
}

// Mean and centered sum of squares; merged in a fixed order (Chan et al.).
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double delta = x - mean;
    mean += delta / n;
    m2 += delta * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double total = n + o.n;
    const double delta = o.mean - mean;
    mean += delta * o.n / total;
    m2 += o.m2 + delta * delta * n * o.n / total;
    n = total;
  }
};

// Realization-level quantities shared by all metrics of one trial.
struct TrialState {
  const ScenarioConfig* cfg = nullptr;
  std::uint64_t seed = 0;
  std::size_t trial = 0;
  ConstellationSample sample;
  ServingCap cap;

  std::optional<std::optional<double>> nearest;
  std::optional<double> sat_fade;
  std::optional<double> ground_fade;

  const std::optional<double>& nearest_distance() {
    if (!nearest) nearest = nearest_satellite_distance(sample, cfg->geom, cap.apex_radius_km, cap.half_angle);
    return *nearest;
  }
  double sat_fading() {
    if (!sat_fade) {
      auto e = aux_stream(seed, tag_fading_sat, trial);
      sat_fade = cfg->fading.sample(e);
    }
    return *sat_fade;
  }
  double ground_fading() {
    if (!ground_fade) {
      auto e = aux_stream(seed, tag_fading_ground, trial);
      ground_fade = cfg->fading.sample(e);
    }
    return *ground_fade;
  }
  double sat_snr() {
    const auto& d = nearest_distance();
    if (!d) return 0.0;
    return serving_link(*cfg).mean_snr(*d) * sat_fading();
  }
  double ground_snr() {
    const double h = cfg->geom.platform_altitude_km();
    if (h == 0.0) return std::numeric_limits<double>::infinity();
    return cfg->platform_link.mean_snr(h) * ground_fading();
  }
};

inline bool connected_with_random_zenith(TrialState& st, double zenith_max) {
  const ScenarioConfig& cfg = *st.cfg;
  auto e = aux_stream(st.seed, tag_zenith, st.trial);
  const double z = std::uniform_real_distribution<double>(0.0, zenith_max)(e);
  const double beta = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(e);
  const double h = serving_height_km(cfg);
  const double off = h * std::tan(z);
  const Vec3 p{off * std::cos(beta), off * std::sin(beta), st.cap.apex_radius_km};
  const double rl = p.norm();
  const double cos_cap = std::cos(cfg.geom.horizon_angle(rl));
  const double rs = cfg.geom.satellite_orbit_radius_km();
  for (std::size_t i = 0; i < st.sample.orbit_count(); ++i) {
    const auto& o = st.sample.orbits()[i];
    for (double w : st.sample.arguments(i)) {
      const Vec3 x = satellite_cartesian(cfg.geom, o.longitude_rad, o.inclination_rad, w);
      if (x.dot(p) >= cos_cap * rs * rl) return true;
    }
  }
  return false;
}

inline bool connected_above_elevation(const TrialState& st, double kappa) {
  const ScenarioConfig& cfg = *st.cfg;
  const double c = std::cos(visible_cap_angle(cfg.geom));
  for (std::size_t i = 0; i < st.sample.orbit_count(); ++i) {
    const double phi = st.sample.orbits()[i].inclination_rad;
    if (std::sin(phi) < c) continue;
    for (double w : st.sample.arguments(i)) {
      if (elevation_from_ground(cfg.geom, w, phi) >= kappa) return true;
    }
  }
  return false;
}

// Observation of one metric in one trial. Slot 1 is only used by throughput,
// which needs the means of both hops.
struct Observation {
  std::optional<double> slot0;
  std::optional<double> slot1;
};

inline Observation observe(TrialState& st, const MetricSpec& m) {
  const ScenarioConfig& cfg = *st.cfg;
  auto b = [](bool v) { return v ? 1.0 : 0.0; };
  switch (m.kind) {
    case MetricKind::effective_orbits:
      return {static_cast<double>(count_cap_crossing_orbits(st.sample, st.cap.half_angle)), {}};
    case MetricKind::effective_satellites:
      return {static_cast<double>(count_satellites_in_cap(st.sample, st.cap.half_angle)), {}};
    case MetricKind::connectivity:
      return {b(st.nearest_distance().has_value()), {}};
    case MetricKind::range_ccdf: {
      const auto& d = st.nearest_distance();
      return {b(!d || *d > m.param), {}};
    }
    case MetricKind::snr_coverage: {
      if (!st.nearest_distance()) return {0.0, {}};
      return {b(st.sat_snr() >= m.param), {}};
    }
    case MetricKind::snr_coverage_ground:
      return {b(st.ground_snr() >= m.param), {}};
    case MetricKind::rate_platform:
      return {std::log2(1.0 + st.sat_snr()), {}};
    case MetricKind::rate_ground:
      return {std::log2(1.0 + st.ground_snr()), {}};
    case MetricKind::throughput: {
      Observation o{std::log2(1.0 + st.sat_snr()), {}};
      if (cfg.platform_enabled) o.slot1 = std::log2(1.0 + st.ground_snr());
      return o;
    }
    case MetricKind::delay_ccdf:
      return {b(time_to_first_contact(st.sample, cfg.geom, st.cap.half_angle) > m.param), {}};
    case MetricKind::propagation_delay_mean: {
      const auto& d = st.nearest_distance();
      if (!d) return {};
      return {(*d + serving_height_km(cfg)) / speed_of_light_km_s, {}};
    }
    case MetricKind::connectivity_zenith:
      return {b(connected_with_random_zenith(st, m.param)), {}};
    case MetricKind::connectivity_min_elevation:
      return {b(connected_above_elevation(st, m.param)), {}};
    default:
      throw std::invalid_argument("metric " + m.id() + " has no Monte Carlo estimator");
  }
}

struct BlockResult {
  std::vector<Moments> slot0;
  std::vector<Moments> slot1;
};

}  // namespace detail

/// Estimates several metrics from the same n_trials realizations.
inline std::vector<MetricEstimate> estimate_many(const ScenarioConfig& cfg,
                                                 const std::vector<MetricSpec>& metrics,
                                                 std::size_t n_trials, std::uint64_t master_seed,
                                                 const EstimateOptions& options = {}) {
  cfg.validate();
  if (n_trials < min_trials) {
    throw std::invalid_argument("n_trials must be at least " + std::to_string(min_trials));
  }
  if (options.block_size == 0) throw std::invalid_argument("block size must be positive");
  for (const auto& m : metrics) {
    m.validate();
    if (!m.info().simulated) {
      throw std::invalid_argument("metric " + m.id() + " has no Monte Carlo estimator");
    }
  }
  if (options.warnings && n_trials < recommended_trials) {
    *options.warnings << "warning: " << n_trials << " trials give indicator standard errors up to "
                      << std::setprecision(3) << 0.5 / std::sqrt(static_cast<double>(n_trials))
                      << "; use at least " << recommended_trials << " for validation\n";
  }

  const std::size_t n_blocks = (n_trials + options.block_size - 1) / options.block_size;
  std::vector<detail::BlockResult> blocks(n_blocks);
  const ServingCap cap = serving_cap(cfg);

  auto run_block = [&](std::size_t bi) {
    detail::BlockResult r;
    r.slot0.resize(metrics.size());
    r.slot1.resize(metrics.size());
    detail::TrialState st;
    st.cfg = &cfg;
    st.seed = master_seed;
    st.cap = cap;
    const std::size_t begin = bi * options.block_size;
    const std::size_t end = std::min(n_trials, begin + options.block_size);
    for (std::size_t i = begin; i < end; ++i) {
      auto engine = substream(master_seed, i);
      sample_constellation(cfg.densities, engine, st.sample);
      st.trial = i;
      st.nearest.reset();
      st.sat_fade.reset();
      st.ground_fade.reset();
      for (std::size_t k = 0; k < metrics.size(); ++k) {
        const auto o = detail::observe(st, metrics[k]);
        if (o.slot0) r.slot0[k].add(*o.slot0);
        if (o.slot1) r.slot1[k].add(*o.slot1);
      }
    }
    blocks[bi] = std::move(r);
  };

  unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_blocks));
  if (workers <= 1) {
    for (std::size_t bi = 0; bi < n_blocks; ++bi) run_block(bi);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t bi = next++; bi < n_blocks; bi = next++) {
          try {
            run_block(bi);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<MetricEstimate> out;
  out.reserve(metrics.size());
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    detail::Moments a;
    detail::Moments g;
    for (const auto& b : blocks) {
      a.merge(b.slot0[k]);
      g.merge(b.slot1[k]);
    }
    const auto& info = metrics[k].info();
    auto stderr_of = [&](const detail::Moments& mo) {
      if (mo.n < 2.0) return 0.0;
      if (info.indicator) return std::sqrt(std::max(mo.mean * (1.0 - mo.mean), 0.0) / mo.n);
      return std::sqrt(mo.m2 / (mo.n - 1.0) / mo.n);
    };
    MetricEstimate e;
    e.metric_id = metrics[k].id();
    e.seed = master_seed;
    // The end-to-end rate is the smaller of the two mean hop rates.
    const detail::Moments& pick = (g.n > 0.0 && g.mean < a.mean) ? g : a;
    e.mean = pick.n > 0.0 ? pick.mean : std::numeric_limits<double>::quiet_NaN();
    e.std_error = stderr_of(pick);
    e.n_trials = static_cast<std::size_t>(pick.n);
    out.push_back(std::move(e));
  }
  return out;
}

inline MetricEstimate estimate(const ScenarioConfig& cfg, const MetricSpec& metric, std::size_t n_trials,
                               std::uint64_t master_seed, const EstimateOptions& options = {}) {
  return estimate_many(cfg, {metric}, n_trials, master_seed, options).front();
}

// ---------------------------------------------------------------------------
// Validation

struct GridPoint {
  ScenarioConfig cfg;
  std::string label;  // e.g. "lambda=5;mu=25;ha_km=20"
};

struct ValidationRow {
  std::string metric_id;
  std::string param_point;
  double analytical = 0.0;
  double analytical_error = 0.0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double z_score = 0.0;
  bool flagged = false;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  double z_threshold = 3.0;
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t flag_count() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(),
                                                  [](const ValidationRow& r) { return r.flagged; }));
  }
  [[nodiscard]] bool clean() const { return flag_count() == 0; }

  void write_csv(std::ostream& os) const {
    const auto old = os.precision(12);
    os << "metric_id,param_point,analytical,mc_mean,mc_stderr,z_score\n";
    for (const auto& r : rows) {
      os << r.metric_id << ',' << r.param_point << ',' << r.analytical << ',' << r.mc_mean << ','
         << r.mc_stderr << ',' << r.z_score << '\n';
    }
    os.precision(old);
  }

  void write_summary(std::ostream& os) const {
    double worst = 0.0;
    const ValidationRow* worst_row = nullptr;
    for (const auto& r : rows) {
      if (!worst_row || r.z_score > worst) {
        worst = r.z_score;
        worst_row = &r;
      }
    }
    os << "validation: " << rows.size() << " comparisons, " << n_trials << " trials each, seed "
       << seed << '\n';
    if (worst_row) {
      os << "largest |z| = " << std::setprecision(3) << worst << " (" << worst_row->metric_id << " at "
         << worst_row->param_point << ")\n";
    }
    for (const auto& r : rows) {
      if (!r.flagged) continue;
      os << "FLAG " << r.metric_id << " at " << r.param_point << ": analytical "
         << std::setprecision(8) << r.analytical << ", simulated " << r.mc_mean << " +- "
         << r.mc_stderr << " (z = " << std::setprecision(3) << r.z_score << ")\n";
    }
    os << (clean() ? "all comparisons within " : "comparisons outside ") << z_threshold
       << " standard errors: " << flag_count() << " flagged\n";
  }
};

struct ValidationOptions {
  double z_threshold = 3.0;
  // Added to every analytical value; a nonzero offset is the detector-sanity fixture.
  double analytical_offset = 0.0;
  EstimateOptions estimate;
};

/// |analytical - mean| / stderr. For indicators the binomial stderr is taken at
/// the analytical probability, which stays meaningful when the sample mean is 0
/// or 1, and the difference gets a half-count continuity correction so that a
/// single rare event does not read as a 3-sigma miss. The quadrature error
/// estimate is added in quadrature. Two undefined values agree.
inline double z_score(const MetricSpec& m, double analytical, double analytical_error,
                      const MetricEstimate& e) {
  if (std::isnan(analytical) || std::isnan(e.mean)) {
    return std::isnan(analytical) && std::isnan(e.mean) ? 0.0 : std::numeric_limits<double>::infinity();
  }
  double se = e.std_error;
  double diff = std::abs(analytical - e.mean);
  if (m.info().indicator && e.n_trials > 0) {
    const double n = static_cast<double>(e.n_trials);
    const double p = std::clamp(analytical, 0.0, 1.0);
    se = std::sqrt(p * (1.0 - p) / n);
    diff = std::max(0.0, diff - 0.5 / n);
  }
  const double scale = std::hypot(se, analytical_error);
  if (scale == 0.0) return diff <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / scale;
}

inline ValidationReport validate(const std::vector<GridPoint>& grid, const std::vector<MetricSpec>& metrics,
                                 std::size_t n_trials, std::uint64_t master_seed,
                                 const ValidationOptions& options = {}) {
  if (grid.empty()) throw std::invalid_argument("validation grid is empty");
  ValidationReport report;
  report.z_threshold = options.z_threshold;
  report.n_trials = n_trials;
  report.seed = master_seed;
  for (const auto& point : grid) {
    const auto estimates = estimate_many(point.cfg, metrics, n_trials, master_seed, options.estimate);
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      const auto a = analytical_value(point.cfg, metrics[k]);
      ValidationRow row;
      row.metric_id = metrics[k].id();
      row.param_point = point.label;
      if (const auto p = metrics[k].param_label(); !p.empty()) row.param_point += ";" + p;
      row.analytical = a.value + options.analytical_offset;
      row.analytical_error = a.error;
      row.mc_mean = estimates[k].mean;
      row.mc_stderr = estimates[k].std_error;
      row.z_score = z_score(metrics[k], row.analytical, a.error, estimates[k]);
      row.flagged = !(row.z_score <= options.z_threshold);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

/// lambda in {5, 15, 25} x mu in {5, 25} x h_a in {20, 40} km around `base`.
inline std::vector<GridPoint> default_validation_grid(const ScenarioConfig& base) {
  std::vector<GridPoint> grid;
  for (double lambda : {5.0, 15.0, 25.0}) {
    for (double mu : {5.0, 25.0}) {
      for (double ha : {20.0, 40.0}) {
        ScenarioConfig c = base.with_densities(lambda, mu).with_platform_altitude(ha).with_platform(true);
        std::ostringstream label;
        label << "lambda=" << lambda << ";mu=" << mu << ";ha_km=" << ha;
        grid.push_back({std::move(c), label.str()});
      }
    }
  }
  return grid;
}

/// Every simulated metric, with one representative parameter each.
inline std::vector<MetricSpec> default_validation_metrics() {
  const double deg = std::numbers::pi / 180.0;
  return {
      {MetricKind::effective_orbits},
      {MetricKind::effective_satellites},
      {MetricKind::connectivity},
      {MetricKind::range_ccdf, 800.0},
      {MetricKind::snr_coverage, db_to_linear(30.0)},
      {MetricKind::snr_coverage_ground, db_to_linear(60.0)},
      {MetricKind::rate_platform},
      {MetricKind::rate_ground},
      {MetricKind::throughput},
      {MetricKind::delay_ccdf, 120.0},
      {MetricKind::propagation_delay_mean},
      {MetricKind::connectivity_zenith, 30.0 * deg},
      {MetricKind::connectivity_min_elevation, 10.0 * deg},
  };
}

}  // namespace coxsat
