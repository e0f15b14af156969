#pragma once

// Command-line front end: sample | eval | sweep | validate, all emitting CSV.
// Needs CLI11 on the include path in addition to the library headers.

#include "coxsat/analysis.hpp"
#include "coxsat/coxnet.hpp"
#include "coxsat/montecarlo.hpp"
#include "coxsat/rng.hpp"
#include "coxsat/scenario.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <locale>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coxsat::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_flagged = 1;
inline constexpr int exit_usage = 2;
inline constexpr int exit_numeric = 3;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// "start:stop:step" (inclusive), "a,b,c", or a single number.
inline std::vector<double> parse_values(std::string_view text, std::string_view flag) {
  auto num = [&](std::string_view s) {
    try {
      return coxsat::detail::parse_real(coxsat::detail::trim(s));
    } catch (const std::invalid_argument& e) {
      throw UsageError("--" + std::string(flag) + ": " + e.what());
    }
  };
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos) {
      throw UsageError("--" + std::string(flag) + ": ranges are start:stop:step");
    }
    const double start = num(text.substr(0, c1));
    const double stop = num(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = num(text.substr(c2 + 1));
    if (step == 0.0 || (stop - start) / step < 0.0) {
      throw UsageError("--" + std::string(flag) + ": step must move start towards stop");
    }
    const double span = (stop - start) / step;
    if (span > 1e6) throw UsageError("--" + std::string(flag) + ": range has too many points");
    const auto n = static_cast<long>(std::floor(span + 1e-9)) + 1;
    for (long i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto piece = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    out.push_back(num(piece));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::vector<bool> parse_platform(std::string_view text) {
  if (text == "both") return {true, false};
  std::vector<bool> out;
  while (true) {
    const auto comma = text.find(',');
    const auto piece = coxsat::detail::trim(text.substr(0, comma));
    try {
      out.push_back(coxsat::detail::parse_bool(piece));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--platform: ") + e.what());
    }
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

struct GridFlags {
  std::string lambda, mu, ha, platform;
  std::string tau_db, d, t, kappa_deg, zenith_deg, p;
};

inline void add_scenario_axes(CLI::App& sub, GridFlags& g) {
  sub.add_option("--lambda", g.lambda, "mean number of orbits (grid)");
  sub.add_option("--mu", g.mu, "mean satellites per orbit (grid)");
  sub.add_option("--ha", g.ha, "platform altitude in km (grid)");
  sub.add_option("--platform", g.platform, "on, off, on,off or both");
}

inline void add_metric_axes(CLI::App& sub, GridFlags& g) {
  sub.add_option("--tau-db", g.tau_db, "SNR threshold in dB (grid)");
  sub.add_option("--d", g.d, "distance in km (grid)");
  sub.add_option("--t", g.t, "delay horizon in s (grid)");
  sub.add_option("--kappa-deg", g.kappa_deg, "minimum elevation in degrees (grid)");
  sub.add_option("--zenith-deg", g.zenith_deg, "upper end of the uniform platform zenith law in degrees (grid)");
  sub.add_option("--p", g.p, "quantile level (grid)");
}

struct ScenarioPoint {
  ScenarioConfig cfg;
  double lambda = 0.0;
  double mu = 0.0;
  double ha = 0.0;
  bool platform = true;
};

inline std::vector<ScenarioPoint> scenario_points(const ScenarioConfig& base, const GridFlags& g) {
  const auto lambdas = g.lambda.empty() ? std::vector<double>{base.densities.mean_orbits} : parse_values(g.lambda, "lambda");
  const auto mus = g.mu.empty() ? std::vector<double>{base.densities.mean_sats_per_orbit} : parse_values(g.mu, "mu");
  const auto has = g.ha.empty() ? std::vector<double>{base.geom.platform_altitude_km()} : parse_values(g.ha, "ha");
  const auto platforms = g.platform.empty() ? std::vector<bool>{base.platform_enabled} : parse_platform(g.platform);
  std::vector<ScenarioPoint> out;
  for (double l : lambdas) {
    for (double m : mus) {
      for (double h : has) {
        for (bool p : platforms) {
          ScenarioPoint sp;
          try {
            sp.cfg = base.with_densities(l, m).with_platform_altitude(h).with_platform(p);
            sp.cfg.validate();
          } catch (const std::exception& e) {
            throw UsageError(e.what());
          }
          sp.lambda = l;
          sp.mu = m;
          sp.ha = h;
          sp.platform = p;
          out.push_back(std::move(sp));
        }
      }
    }
  }
  return out;
}

struct MetricAxis {
  std::string column;                 // empty without a parameter
  std::vector<double> shown;          // user-facing units
  std::vector<double> internal;       // MetricSpec::param units
};

inline MetricAxis metric_axis(const MetricInfo& info, const GridFlags& g) {
  MetricAxis axis;
  const double deg = std::numbers::pi / 180.0;
  auto need = [&](const std::string& text, const char* flag) {
    if (text.empty()) throw UsageError("metric " + std::string(info.id) + " requires --" + flag);
    return parse_values(text, flag);
  };
  switch (info.param) {
    case ParamKind::none:
      axis.shown = axis.internal = {std::numeric_limits<double>::quiet_NaN()};
      return axis;
    case ParamKind::tau:
      axis.column = "tau_db";
      axis.shown = need(g.tau_db, "tau-db");
      for (double v : axis.shown) axis.internal.push_back(db_to_linear(v));
      return axis;
    case ParamKind::distance_km:
      axis.column = "d_km";
      axis.shown = axis.internal = need(g.d, "d");
      return axis;
    case ParamKind::time_s:
      axis.column = "t_s";
      axis.shown = axis.internal = need(g.t, "t");
      return axis;
    case ParamKind::probability:
      axis.column = "p";
      axis.shown = axis.internal = need(g.p, "p");
      return axis;
    case ParamKind::angle:
      if (info.kind == MetricKind::connectivity_zenith) {
        axis.column = "zenith_deg";
        axis.shown = need(g.zenith_deg, "zenith-deg");
      } else {
        axis.column = "kappa_deg";
        axis.shown = need(g.kappa_deg, "kappa-deg");
      }
      for (double v : axis.shown) axis.internal.push_back(v * deg);
      return axis;
  }
  return axis;
}

// Rejects metric flags the chosen metric does not read, so typos do not pass silently.
inline void check_unused_metric_flags(const MetricInfo& info, const GridFlags& g) {
  struct Flag {
    const std::string& value;
    const char* name;
    bool used;
  };
  const bool zen = info.kind == MetricKind::connectivity_zenith;
  const Flag flags[] = {
      {g.tau_db, "tau-db", info.param == ParamKind::tau},
      {g.d, "d", info.param == ParamKind::distance_km},
      {g.t, "t", info.param == ParamKind::time_s},
      {g.p, "p", info.param == ParamKind::probability},
      {g.kappa_deg, "kappa-deg", info.param == ParamKind::angle && !zen},
      {g.zenith_deg, "zenith-deg", info.param == ParamKind::angle && zen},
  };
  for (const auto& f : flags) {
    if (!f.value.empty() && !f.used) {
      throw UsageError("--" + std::string(f.name) + " does not apply to metric " + std::string(info.id));
    }
  }
}

inline void format_csv_stream(std::ostream& os) {
  os.imbue(std::locale::classic());
  os << std::setprecision(12);
}

/// Writes `content` to `path` through a temporary file and a rename, or to `out` when path is empty.
inline void emit(const std::string& content, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << content;
    out.flush();
    return;
  }
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move output into " + path + ": " + ec.message());
  }
}

struct CommonFlags {
  std::string scenario;
  std::string out;
  std::uint64_t seed = 1;
};

inline ScenarioConfig load_base(const CommonFlags& c) {
  if (c.scenario.empty()) return ScenarioConfig::table1();
  return load_scenario(c.scenario).config;
}

inline std::string run_eval(const CommonFlags& common, const std::string& metric_id, const GridFlags& g,
                            std::size_t with_mc, bool sweep, std::ostream& err) {
  const MetricInfo& info = [&]() -> const MetricInfo& {
    try {
      return metric_info(metric_id);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  check_unused_metric_flags(info, g);
  const ScenarioConfig base = load_base(common);
  const auto points = scenario_points(base, g);
  const auto axis = metric_axis(info, g);
  if (sweep) {
    int varying = axis.shown.size() > 1 ? 1 : 0;
    for (const std::string* s : {&g.lambda, &g.mu, &g.ha, &g.platform}) {
      if (s->empty()) continue;
      const std::size_t n = s == &g.platform ? parse_platform(*s).size() : parse_values(*s, "grid").size();
      if (n > 1) ++varying;
    }
    if (varying < 1 || varying > 2) {
      throw UsageError("sweep needs one or two parameters with more than one value");
    }
  }
  if (with_mc > 0) {
    if (!info.simulated) throw UsageError("metric " + std::string(info.id) + " has no Monte Carlo estimator");
    if (with_mc < min_trials) throw UsageError("--with-mc needs at least " + std::to_string(min_trials) + " trials");
    if (with_mc < recommended_trials) {
      err << "warning: " << with_mc << " trials give indicator standard errors up to "
          << std::setprecision(3) << 0.5 / std::sqrt(static_cast<double>(with_mc)) << '\n';
    }
  }

  std::ostringstream os;
  format_csv_stream(os);
  os << "lambda,mu,ha_km,platform,";
  if (!axis.column.empty()) os << axis.column << ',';
  os << "value,error";
  if (with_mc > 0) os << ",mc_mean,mc_stderr,mc_trials,z_score";
  os << '\n';
  for (const auto& pt : points) {
    std::vector<MetricSpec> specs;
    for (double v : axis.internal) specs.push_back(MetricSpec{info.kind, v});
    for (const auto& s : specs) {
      try {
        s.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
    std::vector<MetricEstimate> mc;
    if (with_mc > 0) mc = estimate_many(pt.cfg, specs, with_mc, common.seed);
    for (std::size_t k = 0; k < specs.size(); ++k) {
      const auto a = analytical_value(pt.cfg, specs[k]);
      if (a.error > 1e-4) {
        err << "warning: " << info.id << " error estimate " << a.error << " exceeds 1e-4\n";
      }
      os << pt.lambda << ',' << pt.mu << ',' << pt.ha << ',' << (pt.platform ? "on" : "off") << ',';
      if (!axis.column.empty()) os << axis.shown[k] << ',';
      os << a.value << ',' << a.error;
      if (with_mc > 0) {
        os << ',' << mc[k].mean << ',' << mc[k].std_error << ',' << mc[k].n_trials << ','
           << z_score(specs[k], a.value, a.error, mc[k]);
      }
      os << '\n';
    }
  }
  return os.str();
}

inline std::string run_sample(const CommonFlags& common, const GridFlags& g, double epoch_s) {
  ScenarioConfig cfg = load_base(common);
  if (!g.lambda.empty() || !g.mu.empty() || !g.ha.empty()) {
    const auto pts = scenario_points(cfg, g);
    if (pts.size() != 1) throw UsageError("sample takes single values for --lambda, --mu and --ha");
    cfg = pts.front().cfg;
  }
  auto engine = substream(common.seed, 0);
  auto snapshot = sample_constellation(cfg.densities, engine);
  if (epoch_s > 0.0) snapshot = propagate(snapshot, epoch_s, cfg.geom);
  std::ostringstream os;
  format_csv_stream(os);
  write_snapshot_csv(os, snapshot, cfg.geom);
  return os.str();
}

struct ValidateResult {
  std::string csv;
  bool clean = true;
};

inline ValidateResult run_validate(const CommonFlags& common, const GridFlags& g, const std::string& metrics_text,
                                   std::size_t trials, bool corrupt, std::ostream& err) {
  const ScenarioConfig base = load_base(common);
  std::vector<GridPoint> grid;
  if (g.lambda.empty() && g.mu.empty() && g.ha.empty() && g.platform.empty()) {
    grid = default_validation_grid(base);
  } else {
    for (auto& pt : scenario_points(base, g)) {
      std::ostringstream label;
      label << "lambda=" << pt.lambda << ";mu=" << pt.mu << ";ha_km=" << pt.ha
            << ";platform=" << (pt.platform ? "on" : "off");
      grid.push_back({std::move(pt.cfg), label.str()});
    }
  }
  std::vector<MetricSpec> metrics = default_validation_metrics();
  if (!metrics_text.empty()) {
    std::vector<MetricSpec> chosen;
    std::string_view rest(metrics_text);
    while (true) {
      const auto comma = rest.find(',');
      const auto id = coxsat::detail::trim(rest.substr(0, comma));
      bool found = false;
      for (const auto& m : metrics) {
        if (m.info().id == id) {
          chosen.push_back(m);
          found = true;
        }
      }
      if (!found) throw UsageError("validate has no check for metric '" + std::string(id) + "'");
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    metrics = std::move(chosen);
  }
  if (trials < min_trials) throw UsageError("--trials must be at least " + std::to_string(min_trials));
  if (trials < recommended_trials) {
    err << "warning: " << trials << " trials give indicator standard errors up to " << std::setprecision(3)
        << 0.5 / std::sqrt(static_cast<double>(trials)) << "; use at least " << recommended_trials
        << " for a meaningful report\n";
  }
  ValidationOptions opts;
  // Shifts every analytical value well outside any plausible sampling error.
  if (corrupt) opts.analytical_offset = 0.25;
  const auto report = validate(grid, metrics, trials, common.seed, opts);
  std::ostringstream os;
  format_csv_stream(os);
  report.write_csv(os);
  report.write_summary(err);
  return {os.str(), report.clean()};
}

inline std::string metric_help() {
  std::ostringstream os;
  os << "Metrics:\n";
  for (const auto& m : metric_table) {
    os << "  " << std::left << std::setw(28) << m.id << m.help << (m.simulated ? "" : " [no MC]") << '\n';
  }
  os << "\nCSV columns:\n"
        "  eval/sweep: lambda,mu,ha_km,platform,[tau_db|d_km|t_s|p|kappa_deg|zenith_deg,]value,error\n"
        "              with --with-mc: ...,mc_mean,mc_stderr,mc_trials,z_score\n"
        "  sample:     orbit_id,theta_rad,phi_rad,omega_rad,x_km,y_km,z_km\n"
        "  validate:   metric_id,param_point,analytical,mc_mean,mc_stderr,z_score\n"
        "Grid values: start:stop:step (inclusive), a,b,c, or a single value.\n";
  return os.str();
}

/// Entry point. Returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coverage, connectivity and delay of aerial-platform-assisted LEO satellite networks"};
  app.footer(metric_help());
  app.require_subcommand(1, 1);

  CommonFlags common;
  GridFlags grid;
  std::string metric;
  std::string metrics_list;
  std::size_t with_mc = 0;
  std::size_t trials = 100000;
  bool corrupt = false;
  double epoch_s = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", common.scenario, "scenario file (defaults to the reference network)");
    sub->add_option("--out", common.out, "write CSV here instead of standard output");
    sub->add_option("--seed", common.seed, "master seed");
  };

  auto* sample = app.add_subcommand("sample", "emit one constellation snapshot as CSV");
  add_common(sample);
  sample->add_option("--lambda", grid.lambda, "mean number of orbits");
  sample->add_option("--mu", grid.mu, "mean satellites per orbit");
  sample->add_option("--t", epoch_s, "propagate the snapshot by this many seconds")->check(CLI::NonNegativeNumber);

  auto* eval = app.add_subcommand("eval", "evaluate a metric at each grid point");
  auto* sweep = app.add_subcommand("sweep", "evaluate a metric over one or two varying parameters");
  for (auto* sub : {eval, sweep}) {
    add_common(sub);
    sub->add_option("--metric", metric, "metric id")->required();
    add_scenario_axes(*sub, grid);
    add_metric_axes(*sub, grid);
    sub->add_option("--with-mc", with_mc, "append Monte Carlo columns from this many trials");
  }

  auto* val = app.add_subcommand("validate", "compare analytical metrics with simulation; exit 1 on any flag");
  add_common(val);
  add_scenario_axes(*val, grid);
  val->add_option("--trials", trials, "trials per grid point");
  val->add_option("--metric", metrics_list, "comma-separated subset of the validated metrics");
  val->add_flag("--corrupt-fixture", corrupt, "offset every analytical value to exercise the detector");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (sample->parsed()) {
      emit(run_sample(common, grid, epoch_s), common.out, out);
      return exit_ok;
    }
    if (eval->parsed() || sweep->parsed()) {
      emit(run_eval(common, metric, grid, with_mc, sweep->parsed(), err), common.out, out);
      return exit_ok;
    }
    const auto r = run_validate(common, grid, metrics_list, trials, corrupt, err);
    emit(r.csv, common.out, out);
    return r.clean ? exit_ok : exit_flagged;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_numeric;
  }
}

}  // namespace coxsat::cli
