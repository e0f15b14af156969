#pragma once

// Plain-text scenario files: one `key = value` per line, '#' starts a comment.
// Altitudes are in km above the surface, powers in dBm, gains in dB. Keys left
// out keep their reference defaults; unknown or repeated keys are errors that
// name the offending line.

#include "coxsat/analysis.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coxsat {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioFile {
  ScenarioConfig config;
  // Listed for completeness; the distance-referenced path loss model never uses it.
  double carrier_frequency_hz = 1e9;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline double parse_real(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw std::invalid_argument("expected a finite number, got '" + std::string(text) + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view text) {
  if (text == "true" || text == "on" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "off" || text == "no" || text == "0") return false;
  throw std::invalid_argument("expected true/false, got '" + std::string(text) + "'");
}

}  // namespace detail

/// Parses a scenario document. `source` names the input in error messages.
inline ScenarioFile parse_scenario(std::istream& in, const std::string& source = "<scenario>") {
  double earth_radius = default_earth_radius_km;
  double sat_alt = 550.0;
  double plat_alt = 20.0;
  double nu = 0.0011;
  std::string fading_kind = "nakagami";
  double fading_m = 1.0;
  double fading_omega = 1.0;
  double fading_b = 0.5;
  ScenarioFile out;
  ScenarioConfig& cfg = out.config;

  using Setter = std::function<void(std::string_view)>;
  auto real = [](double& dst) { return Setter([&dst](std::string_view v) { dst = detail::parse_real(v); }); };
  const std::map<std::string, Setter, std::less<>> setters = {
      {"earth_radius_km", real(earth_radius)},
      {"satellite_altitude_km", real(sat_alt)},
      {"platform_altitude_km", real(plat_alt)},
      {"satellite_angular_speed_rad_s", real(nu)},
      {"mean_orbits", real(cfg.densities.mean_orbits)},
      {"mean_sats_per_orbit", real(cfg.densities.mean_sats_per_orbit)},
      {"platform_enabled", [&cfg](std::string_view v) { cfg.platform_enabled = detail::parse_bool(v); }},
      {"carrier_frequency_hz", real(out.carrier_frequency_hz)},
      {"sat_rx_power_at_1m_dbm", real(cfg.sat_link.rx_power_at_1m_dbm)},
      {"sat_aggregate_gain_db", real(cfg.sat_link.aggregate_gain_db)},
      {"sat_bandwidth_hz", real(cfg.sat_link.bandwidth_hz)},
      {"sat_noise_density_dbm_hz", real(cfg.sat_link.noise_density_dbm_hz)},
      {"sat_noise_power_dbm",
       [&cfg](std::string_view v) { cfg.sat_link.noise_power_dbm = detail::parse_real(v); }},
      {"sat_path_loss_exponent", real(cfg.sat_link.path_loss_exponent)},
      {"platform_rx_power_at_1m_dbm", real(cfg.platform_link.rx_power_at_1m_dbm)},
      {"platform_aggregate_gain_db", real(cfg.platform_link.aggregate_gain_db)},
      {"platform_bandwidth_hz", real(cfg.platform_link.bandwidth_hz)},
      {"platform_noise_density_dbm_hz", real(cfg.platform_link.noise_density_dbm_hz)},
      {"platform_noise_power_dbm",
       [&cfg](std::string_view v) { cfg.platform_link.noise_power_dbm = detail::parse_real(v); }},
      {"platform_path_loss_exponent", real(cfg.platform_link.path_loss_exponent)},
      {"fading", [&fading_kind](std::string_view v) { fading_kind = std::string(v); }},
      {"fading_m", real(fading_m)},
      {"fading_omega", real(fading_omega)},
      {"fading_b", real(fading_b)},
  };

  std::map<std::string, int, std::less<>> seen;
  std::string line;
  int lineno = 0;
  auto fail = [&source](int at, const std::string& msg) {
    std::ostringstream os;
    os << source << ':' << at << ": " << msg;
    throw ScenarioError(os.str());
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (lineno == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) fail(lineno, "expected 'key = value'");
    const auto key = detail::trim(view.substr(0, eq));
    const auto value = detail::trim(view.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) fail(lineno, "unknown key '" + std::string(key) + "'");
    if (auto prev = seen.find(key); prev != seen.end()) {
      fail(lineno, "duplicate key '" + std::string(key) + "' (first set on line " +
                       std::to_string(prev->second) + ")");
    }
    if (value.empty()) fail(lineno, "missing value for '" + std::string(key) + "'");
    seen.emplace(std::string(key), lineno);
    try {
      it->second(value);
    } catch (const std::invalid_argument& e) {
      fail(lineno, std::string(key) + ": " + e.what());
    }
  }

  // Cross-field checks are attributed to the line that set the later field.
  auto line_of = [&seen](std::initializer_list<std::string_view> keys) {
    int at = 0;
    for (auto k : keys) {
      if (auto it = seen.find(k); it != seen.end()) at = std::max(at, it->second);
    }
    return at;
  };
  try {
    cfg.geom = NetworkGeometry::from_altitudes(sat_alt, plat_alt, nu, earth_radius);
  } catch (const std::exception& e) {
    fail(line_of({"earth_radius_km", "satellite_altitude_km", "platform_altitude_km",
                  "satellite_angular_speed_rad_s"}),
         e.what());
  }
  try {
    if (fading_kind == "nakagami") {
      cfg.fading = FadingModel::nakagami(fading_m, fading_omega);
    } else if (fading_kind == "shadowed-rice") {
      cfg.fading = FadingModel::shadowed_rice(fading_b, fading_m, fading_omega);
    } else if (fading_kind == "none") {
      cfg.fading = FadingModel::none();
    } else {
      throw std::invalid_argument("fading must be nakagami, shadowed-rice or none");
    }
  } catch (const std::exception& e) {
    fail(line_of({"fading", "fading_m", "fading_omega", "fading_b"}), e.what());
  }
  try {
    cfg.densities.validate();
  } catch (const std::exception& e) {
    fail(line_of({"mean_orbits", "mean_sats_per_orbit"}), e.what());
  }
  try {
    cfg.sat_link.validate();
  } catch (const std::exception& e) {
    fail(line_of({"sat_bandwidth_hz", "sat_path_loss_exponent"}), std::string("satellite link: ") + e.what());
  }
  try {
    cfg.platform_link.validate();
  } catch (const std::exception& e) {
    fail(line_of({"platform_bandwidth_hz", "platform_path_loss_exponent"}),
         std::string("platform link: ") + e.what());
  }
  if (!(out.carrier_frequency_hz > 0.0)) fail(line_of({"carrier_frequency_hz"}), "carrier frequency must be positive");
  return out;
}

inline ScenarioFile parse_scenario_string(const std::string& text, const std::string& source = "<scenario>") {
  std::istringstream in(text);
  return parse_scenario(in, source);
}

inline ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open scenario file");
  return parse_scenario(in, path);
}

/// Writes a document that parses back to the same scenario.
inline void write_scenario(std::ostream& os, const ScenarioFile& file) {
  const ScenarioConfig& c = file.config;
  const auto old = os.precision(17);
  os << "earth_radius_km = " << c.geom.earth_radius_km() << '\n'
     << "satellite_altitude_km = " << c.geom.satellite_altitude_km() << '\n'
     << "platform_altitude_km = " << c.geom.platform_altitude_km() << '\n'
     << "satellite_angular_speed_rad_s = " << c.geom.satellite_angular_speed_rad_s() << '\n'
     << "mean_orbits = " << c.densities.mean_orbits << '\n'
     << "mean_sats_per_orbit = " << c.densities.mean_sats_per_orbit << '\n'
     << "platform_enabled = " << (c.platform_enabled ? "true" : "false") << '\n'
     << "carrier_frequency_hz = " << file.carrier_frequency_hz << '\n';
  auto link = [&os](const char* prefix, const LinkBudget& l) {
    os << prefix << "rx_power_at_1m_dbm = " << l.rx_power_at_1m_dbm << '\n'
       << prefix << "aggregate_gain_db = " << l.aggregate_gain_db << '\n'
       << prefix << "bandwidth_hz = " << l.bandwidth_hz << '\n'
       << prefix << "noise_density_dbm_hz = " << l.noise_density_dbm_hz << '\n';
    if (l.noise_power_dbm) os << prefix << "noise_power_dbm = " << *l.noise_power_dbm << '\n';
    os << prefix << "path_loss_exponent = " << l.path_loss_exponent << '\n';
  };
  link("sat_", c.sat_link);
  link("platform_", c.platform_link);
  std::visit(
      [&os](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NakagamiPower>) {
          os << "fading = nakagami\nfading_m = " << m.m << "\nfading_omega = " << m.omega << '\n';
        } else if constexpr (std::is_same_v<T, ShadowedRice>) {
          os << "fading = shadowed-rice\nfading_b = " << m.b << "\nfading_m = " << m.m_tilde
             << "\nfading_omega = " << m.omega_tilde << '\n';
        } else {
          os << "fading = none\n";
        }
      },
      c.fading.variant());
  os.precision(old);
}

}  // namespace coxsat
