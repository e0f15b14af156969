// Acceptance checks. Run with a criterion id (c1..c10) or none for all.
// Each criterion prints its checks, then one PASS/FAIL line.

#include "coxsat/montecarlo.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace coxsat;

namespace {

const double pi = std::numbers::pi;
const double deg = pi / 180.0;

// Pinned tolerances.
constexpr double z_max = 3.0;
constexpr std::size_t mc_trials = 1000000;
constexpr double eff_sats_tol = 0.7;
constexpr double conn_tol = 0.03;
constexpr double triad_tol = 1e-9;
constexpr double median_tol_km = 3.0;
constexpr double coverage_runtime_s = 600.0;
constexpr double throughput_ratio_lo = 1.3, throughput_ratio_hi = 1.7;
constexpr double delay_anchor_tol = 0.05;
constexpr double delay_tol = 0.20;
constexpr double floor_tol = 1e-3;
constexpr double identity_tol = 1e-10;
constexpr double validate_runtime_s = 1800.0;

ScenarioConfig cfg_at(double lambda, double mu, bool platform = true, double ha = 20.0) {
  return ScenarioConfig::table1().with_densities(lambda, mu).with_platform(platform).with_platform_altitude(ha);
}

class Criterion {
 public:
  explicit Criterion(std::string id) : id_(std::move(id)), start_(std::chrono::steady_clock::now()) {}

  void check(bool ok, const std::string& what) {
    std::printf("  %s %s\n", ok ? "ok  " : "MISS", what.c_str());
    pass_ = pass_ && ok;
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool finish(const std::string& title) {
    std::printf("%s %s %s (%.1f s)\n", pass_ ? "PASS" : "FAIL", id_.c_str(), title.c_str(), elapsed());
    std::fflush(stdout);
    return pass_;
  }

 private:
  std::string id_;
  std::chrono::steady_clock::time_point start_;
  bool pass_ = true;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Analytical vs simulated for each metric at one configuration.
void mc_agreement(Criterion& c, const ScenarioConfig& cfg, const std::vector<MetricSpec>& metrics, std::size_t n,
                  std::uint64_t seed, const std::string& where) {
  const auto est = estimate_many(cfg, metrics, n, seed);
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    const auto a = analytical_value(cfg, metrics[k]);
    const double z = z_score(metrics[k], a.value, a.error, est[k]);
    std::string label = metrics[k].id();
    if (const auto p = metrics[k].param_label(); !p.empty()) label += " " + p;
    c.check(z <= z_max, fmt("%s %s: analytical %.6g, MC %.6g +- %.2g (z = %.2f)", where.c_str(), label.c_str(),
                            a.value, est[k].mean, est[k].std_error, z));
  }
}

bool c1() {
  Criterion c("C1");
  const auto on = cfg_at(15, 10, true);
  const auto off = cfg_at(15, 10, false);
  const double v_on = avg_effective_satellites(on).value;
  const double v_off = avg_effective_satellites(off).value;
  c.check(std::abs(v_off - 6.0) <= eff_sats_tol, fmt("no platform: %.4f vs 6 +- %.1f", v_off, eff_sats_tol));
  c.check(std::abs(v_on - 8.0) <= eff_sats_tol, fmt("h_a = 20 km: %.4f vs 8 +- %.1f", v_on, eff_sats_tol));
  mc_agreement(c, off, {{MetricKind::effective_satellites}}, mc_trials, 101, "no platform");
  mc_agreement(c, on, {{MetricKind::effective_satellites}}, mc_trials, 102, "h_a = 20 km");
  c.check(c.elapsed() < 60.0, fmt("runtime %.1f s < 60 s", c.elapsed()));
  return c.finish("effective satellites at lambda = 15, mu = 10");
}

bool c2() {
  Criterion c("C2");
  struct Case {
    double lambda, mu;
    bool platform;
    double target;
  };
  const Case cases[] = {{9, 15, false, 0.90}, {9, 9, true, 0.90}, {9, 9, false, 0.85}, {9, 7, true, 0.85}};
  std::uint64_t seed = 201;
  for (const auto& k : cases) {
    const auto cfg = cfg_at(k.lambda, k.mu, k.platform);
    const double v = connectivity(cfg).value;
    const auto where = fmt("lambda = %g, mu = %g, %s", k.lambda, k.mu, k.platform ? "h_a = 20 km" : "no platform");
    c.check(std::abs(v - k.target) <= conn_tol,
            fmt("%s: connectivity %.4f vs %.2f +- %.2f", where.c_str(), v, k.target, conn_tol));
    mc_agreement(c, cfg, {{MetricKind::connectivity}}, mc_trials, seed++, where);
  }
  c.check(c.elapsed() < 120.0, fmt("runtime %.1f s < 120 s", c.elapsed()));
  return c.finish("connectivity equivalences");
}

bool c3() {
  Criterion c("C3");
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_range = 0, worst_delay = 0;
  for (int i = 0; i < 20; ++i) {
    const auto cfg = cfg_at(0.5 + 40 * u(rng), 0.5 + 40 * u(rng), u(rng) < 0.7, 100 * u(rng));
    const auto cap = serving_cap(cfg);
    const double rim = cap_rim_distance(cfg.geom, cap.apex_radius_km, cap.half_angle);
    const double empty = 1.0 - connectivity(cfg).value;
    worst_range = std::max(worst_range, std::abs(nearest_distance_ccdf(cfg, std::nextafter(rim, 1e9)).value - empty));
    worst_delay = std::max(worst_delay, std::abs(delay_ccdf(cfg, 0.0).value - empty));
  }
  c.check(worst_range < triad_tol, fmt("max |P(D > d_max+) - (1 - conn)| = %.2e < %.0e", worst_range, triad_tol));
  c.check(worst_delay < triad_tol, fmt("max |P(T > 0) - (1 - conn)| = %.2e < %.0e", worst_delay, triad_tol));
  return c.finish("consistency triad over 20 random configurations");
}

bool c4() {
  Criterion c("C4");
  const auto with = cfg_at(10, 15, true);
  const auto without = cfg_at(10, 23, false);
  const double m_with = nearest_distance_quantile(with, 0.5);
  const double m_without = nearest_distance_quantile(without, 0.5);
  c.check(std::abs(m_with - m_without) <= median_tol_km,
          fmt("median with platform (10, 15) %.2f km vs without (10, 23) %.2f km, |diff| %.2f <= %.0f km", m_with,
              m_without, std::abs(m_with - m_without), median_tol_km));
  // The simulated CCDF crosses 1/2 at the analytical median.
  mc_agreement(c, with, {{MetricKind::range_ccdf, m_with}}, mc_trials, 401, "with platform");
  mc_agreement(c, without, {{MetricKind::range_ccdf, m_without}}, mc_trials, 402, "without platform");
  return c.finish("range medians");
}

bool c5() {
  Criterion c("C5");
  const auto cfg = ScenarioConfig::table1();
  std::vector<MetricSpec> grid;
  for (int k = 0; k < 15; ++k) grid.push_back({MetricKind::snr_coverage, db_to_linear(-5.0 + 2.5 * k)});
  double prev = 1.0;
  bool monotone = true;
  for (const auto& m : grid) {
    const double v = analytical_value(cfg, m).value;
    monotone = monotone && v <= prev;
    prev = v;
  }
  c.check(monotone, "coverage nonincreasing over -5..30 dB");
  mc_agreement(c, cfg, grid, mc_trials, 501, "reference network");
  c.check(c.elapsed() < coverage_runtime_s, fmt("runtime %.1f s < %.0f s", c.elapsed(), coverage_runtime_s));
  return c.finish("SNR coverage on the reference network");
}

bool c6() {
  Criterion c("C6");
  auto cfg = ScenarioConfig::table1();
  cfg.platform_link.noise_power_dbm = -101.0;
  const auto with = throughput(cfg);
  const auto without = throughput(cfg.with_platform(false));
  const double ratio = with.end_to_end_bps_hz / without.end_to_end_bps_hz;
  std::printf("  R_A = %.4f, R_G = %.4f, end-to-end %.4f; without platform %.4f bit/s/Hz\n",
              with.rate_platform_bps_hz, with.rate_ground_bps_hz, with.end_to_end_bps_hz, without.end_to_end_bps_hz);
  c.check(ratio >= throughput_ratio_lo && ratio <= throughput_ratio_hi,
          fmt("end-to-end ratio %.4f in [%.1f, %.1f]", ratio, throughput_ratio_lo, throughput_ratio_hi));
  mc_agreement(c, cfg, {{MetricKind::rate_platform}, {MetricKind::rate_ground}}, 200000, 601, "reference network, -101 dBm");
  return c.finish("throughput gain");
}

bool c7() {
  Criterion c("C7");
  const double anchor = 520.0, t20 = 150.0, t40 = 50.0;
  auto t70 = [](double lambda, double mu, bool platform, double ha) {
    return delay_quantile(cfg_at(lambda, mu, platform, ha), 0.7);
  };
  // For each mu, the lambda that puts the no-platform 70th percentile at 520 s,
  // found on the CCDF itself since the percentile is infinite for sparse networks.
  auto lambda_for = [&](double mu) {
    auto g = [&](double l) { return delay_ccdf(cfg_at(l, mu, false), anchor).value - 0.3; };
    boost::uintmax_t it = 100;
    const auto r = boost::math::tools::toms748_solve(g, 0.05, 200.0, boost::math::tools::eps_tolerance<double>(30), it);
    return 0.5 * (r.first + r.second);
  };
  // mu is then chosen to match the two platform percentiles as closely as possible.
  double best_mu = 0, best_lambda = 0, best_err = 1e300;
  for (double mu = 1.0; mu <= 15.0; mu += 0.25) {
    double lambda = 0;
    try {
      lambda = lambda_for(mu);
    } catch (const std::exception&) {
      continue;
    }
    const double e = std::max(std::abs(t70(lambda, mu, true, 20.0) / t20 - 1), std::abs(t70(lambda, mu, true, 40.0) / t40 - 1));
    if (e < best_err) {
      best_err = e;
      best_mu = mu;
      best_lambda = lambda;
    }
  }
  const double a0 = t70(best_lambda, best_mu, false, 20.0);
  const double a20 = t70(best_lambda, best_mu, true, 20.0);
  const double a40 = t70(best_lambda, best_mu, true, 40.0);
  std::printf("  fitted lambda = %.4f, mu = %.2f\n", best_lambda, best_mu);
  c.check(std::abs(a0 / anchor - 1) <= delay_anchor_tol, fmt("no platform 70th percentile %.1f s vs 520 s +- 5%%", a0));
  c.check(std::abs(a20 / t20 - 1) <= delay_tol, fmt("h_a = 20 km: %.1f s vs 150 s +- 20%%", a20));
  c.check(std::abs(a40 / t40 - 1) <= delay_tol, fmt("h_a = 40 km: %.1f s vs 50 s +- 20%%", a40));
  std::vector<MetricSpec> grid;
  for (int k = 0; k < 20; ++k) grid.push_back({MetricKind::delay_ccdf, 60.0 * k});
  mc_agreement(c, cfg_at(best_lambda, best_mu, false), grid, mc_trials, 701, "no platform");
  mc_agreement(c, cfg_at(best_lambda, best_mu, true, 20.0), grid, mc_trials, 702, "h_a = 20 km");
  return c.finish("association delay percentiles");
}

bool c8() {
  Criterion c("C8");
  for (double lambda : {5.0, 25.0}) {
    for (bool platform : {true, false}) {
      const auto cfg = cfg_at(lambda, 1e4, platform);
      const double floor = std::exp(-lambda * std::sin(serving_cap(cfg).half_angle));
      for (double t : {10.0, 100.0}) {
        const double v = delay_ccdf(cfg, t).value;
        c.check(std::abs(v - floor) <= floor_tol,
                fmt("lambda = %g, %s, t = %g s: %.6f vs floor %.6f", lambda, platform ? "platform" : "ground", t, v,
                    floor));
      }
    }
  }
  return c.finish("asymptotic delay floor at mu = 1e4");
}

bool c9() {
  Criterion c("C9");
  for (const auto& cfg : {cfg_at(5, 5), cfg_at(9, 9, true, 40.0), cfg_at(25, 3)}) {
    const double z0 = connectivity_random_zenith(cfg, ZenithDistribution::degenerate(0.0));
    const double ref = connectivity(cfg).value;
    c.check(std::abs(z0 - ref) <= identity_tol, fmt("zenith 0: %.15f vs %.15f", z0, ref));
    const double k0 = connectivity_min_elevation(cfg, 0.0).value;
    const double ground = connectivity(cfg.with_platform(false)).value;
    c.check(std::abs(k0 - ground) <= identity_tol, fmt("kappa 0: %.15f vs %.15f", k0, ground));
  }
  mc_agreement(c, cfg_at(5, 5), {{MetricKind::connectivity_zenith, 30.0 * deg}}, mc_trials, 901, "lambda = mu = 5");
  mc_agreement(c, cfg_at(9, 9), {{MetricKind::connectivity_min_elevation, 10.0 * deg}}, mc_trials, 902,
               "lambda = mu = 9");
  return c.finish("random zenith and minimum elevation");
}

bool c10() {
  Criterion c("C10");
  const auto geom = ScenarioConfig::table1().geom;
  // Poisson orbit counts.
  for (double lambda : {5.0, 25.0}) {
    auto e = substream(1001, static_cast<std::uint64_t>(lambda));
    double s = 0, s2 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(sample_constellation({lambda, 0.0}, e).orbit_count());
      s += k;
      s2 += k * k;
    }
    const double mean = s / n;
    c.check(std::abs(mean - lambda) <= z_max * std::sqrt(lambda / n), fmt("orbit count mean %.4f vs %g", mean, lambda));
  }
  // Per-orbit dispersion and the inclination law.
  {
    auto e = substream(1002, 0);
    std::vector<double> phi;
    double s = 0, s2 = 0;
    ConstellationSample smp;
    while (phi.size() < 1000000) {
      sample_constellation({25.0, 10.0}, e, smp);
      for (std::size_t i = 0; i < smp.orbit_count() && phi.size() < 1000000; ++i) {
        phi.push_back(smp.orbits()[i].inclination_rad);
        const double k = static_cast<double>(smp.arguments(i).size());
        s += k;
        s2 += k * k;
      }
    }
    const double n = static_cast<double>(phi.size());
    const double mean = s / n;
    const double dispersion = (s2 - s * s / n) / (n - 1) / mean;
    c.check(dispersion >= 0.99 && dispersion <= 1.01, fmt("per-orbit index of dispersion %.4f in [0.99, 1.01]", dispersion));
    std::sort(phi.begin(), phi.end());
    double ks = 0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const double f = 0.5 * (1 - std::cos(phi[i]));
      ks = std::max({ks, std::abs((i + 1) / n - f), std::abs(f - i / n)});
    }
    c.check(ks < 1.628 / std::sqrt(n), fmt("inclination KS %.5f < %.5f", ks, 1.628 / std::sqrt(n)));
  }
  // Time and rotation invariance of the in-cap count.
  {
    const double cap = extended_cap_angle(geom);
    auto e = substream(1003, 0);
    auto r = substream(1003, 1);
    std::uniform_real_distribution<double> turn(0.0, pi);
    double s[3] = {0, 0, 0}, s2[3] = {0, 0, 0};
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const auto smp = sample_constellation({15.0, 10.0}, e);
      // A rotation about the polar axis shifts longitudes only.
      ConstellationSample rot;
      const double d = turn(r);
      for (std::size_t k = 0; k < smp.orbit_count(); ++k) {
        auto o = smp.orbits()[k];
        o.longitude_rad = std::fmod(o.longitude_rad + d, pi);
        rot.add_orbit(o, smp.arguments(k));
      }
      const double v[3] = {static_cast<double>(count_satellites_in_cap(smp, cap)),
                           static_cast<double>(count_satellites_in_cap(propagate(smp, 500.0, geom), cap)),
                           static_cast<double>(count_satellites_in_cap(rot, cap))};
      for (int k = 0; k < 3; ++k) {
        s[k] += v[k];
        s2[k] += v[k] * v[k];
      }
    }
    auto se = [&](int k) { return std::sqrt((s2[k] / n - (s[k] / n) * (s[k] / n)) / n); };
    for (int k : {1, 2}) {
      const double z = std::abs(s[k] - s[0]) / n / std::hypot(se(0), se(k));
      c.check(z <= z_max, fmt("%s in-cap count: %.4f vs %.4f (z = %.2f)", k == 1 ? "propagated 500 s" : "rotated",
                              s[k] / n, s[0] / n, z));
    }
  }
  // Full validation grid.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const auto report =
        validate(default_validation_grid(ScenarioConfig::table1()), default_validation_metrics(), 100000, 1);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.write_summary(std::cout);
    c.check(report.clean(), fmt("validate: %zu comparisons, %zu flagged", report.rows.size(), report.flag_count()));
    c.check(secs < validate_runtime_s, fmt("validate runtime %.1f s < %.0f s", secs, validate_runtime_s));
  }
  return c.finish("process invariants and full validation grid");
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<bool()>> criteria = {
      {"c1", c1}, {"c2", c2}, {"c3", c3}, {"c4", c4}, {"c5", c5},
      {"c6", c6}, {"c7", c7}, {"c8", c8}, {"c9", c9}, {"c10", c10}};
  std::vector<std::string> chosen;
  for (int i = 1; i < argc; ++i) chosen.emplace_back(argv[i]);
  if (chosen.empty()) {
    for (int i = 1; i <= 10; ++i) chosen.push_back("c" + std::to_string(i));
  }
  bool all = true;
  for (const auto& id : chosen) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %s\n", id.c_str());
      return 2;
    }
    try {
      all = it->second() && all;
    } catch (const std::exception& e) {
      std::printf("FAIL %s error: %s\n", id.c_str(), e.what());
      all = false;
    }
  }
  return all ? 0 : 1;
}
