#include "coxsat/cli.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace coxsat;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "coxsat");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

// Column `name` of every data row, as numbers.
std::vector<double> column(const std::string& csv, const std::string& name) {
  const auto rows = parse_csv(csv);
  std::vector<double> out;
  std::size_t idx = 0;
  while (idx < rows.at(0).size() && rows[0][idx] != name) ++idx;
  if (idx == rows[0].size()) throw std::runtime_error("no column " + name);
  for (std::size_t r = 1; r < rows.size(); ++r) out.push_back(std::stod(rows[r].at(idx)));
  return out;
}

std::string scenario_path(const std::string& name) {
  return std::string(COXSAT_SOURCE_DIR) + "/scenarios/" + name;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("coxsat_test_" + name);
}

}  // namespace

TEST(Cli, EvalConnectivityOnDefaults) {
  const auto r = run_cli({"eval", "--metric", "connectivity"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"lambda", "mu", "ha_km", "platform", "value", "error"}));
  const double v = std::stod(rows[1][4]);
  EXPECT_GE(v, 0.0);
  EXPECT_LE(v, 1.0);
  EXPECT_EQ(r.out.find('\r'), std::string::npos);
}

TEST(Cli, DelayAtZeroIsOneMinusConnectivity) {
  const auto conn = run_cli({"eval", "--metric", "connectivity", "--lambda", "5", "--mu", "3"});
  const auto delay = run_cli({"eval", "--metric", "delay-ccdf", "--t", "0", "--lambda", "5", "--mu", "3"});
  ASSERT_EQ(delay.code, 0) << delay.err;
  EXPECT_NEAR(column(delay.out, "value")[0], 1.0 - column(conn.out, "value")[0], 1e-10);
  EXPECT_EQ(column(delay.out, "t_s")[0], 0.0);
}

TEST(Cli, EffectiveSatellitesWithAndWithoutPlatform) {
  const auto r = run_cli({"eval", "--metric", "effective-satellites", "--lambda", "15", "--mu", "10", "--platform",
                          "on,off"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto v = column(r.out, "value");
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NEAR(v[0], 8.0, 0.7);
  EXPECT_NEAR(v[1], 6.0, 0.7);
}

TEST(Cli, SweepConnectivityGrid) {
  const auto r = run_cli({"sweep", "--metric", "connectivity", "--lambda", "3:15:1", "--mu", "5,10,15", "--platform",
                          "off"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lambda = column(r.out, "lambda");
  const auto mu = column(r.out, "mu");
  const auto v = column(r.out, "value");
  ASSERT_EQ(v.size(), 39u);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double ref = connectivity(ScenarioConfig::table1().with_densities(lambda[i], mu[i]).with_platform(false)).value;
    EXPECT_NEAR(v[i], ref, 1e-11);
  }
}

TEST(Cli, SweepCoverageOverThreshold) {
  const auto r = run_cli({"sweep", "--metric", "snr-coverage", "--tau-db", "-5:30:2.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto v = column(r.out, "value");
  ASSERT_EQ(v.size(), 15u);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LE(v[i], v[i - 1]);
  EXPECT_EQ(column(r.out, "tau_db").back(), 30.0);
}

TEST(Cli, SweepConnectivityOverAltitude) {
  const auto r = run_cli({"sweep", "--metric", "connectivity", "--lambda", "9", "--mu", "9", "--ha", "0:100:10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto v = column(r.out, "value");
  ASSERT_EQ(v.size(), 11u);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_GE(v[i], v[i - 1]);
}

TEST(Cli, EvalWithMonteCarloColumns) {
  const auto r = run_cli({"eval", "--metric", "range-ccdf", "--d", "700,900", "--lambda", "10", "--mu", "15",
                          "--with-mc", "20000", "--seed", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  EXPECT_EQ(rows[0].back(), "z_score");
  for (double z : column(r.out, "z_score")) EXPECT_LT(z, 4.0);
  EXPECT_EQ(column(r.out, "mc_trials")[0], 20000.0);
  EXPECT_EQ(r.out, run_cli({"eval", "--metric", "range-ccdf", "--d", "700,900", "--lambda", "10", "--mu", "15",
                            "--with-mc", "20000", "--seed", "9"})
                       .out);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({"eval", "--metric", "no-such-metric"}).code, cli::exit_usage);
  EXPECT_EQ(run_cli({"eval", "--metric", "range-ccdf"}).code, cli::exit_usage);
  EXPECT_EQ(run_cli({"eval", "--metric", "connectivity", "--t", "3"}).code, cli::exit_usage);
  EXPECT_EQ(run_cli({"eval", "--metric", "connectivity", "--lambda", "1:5:-1"}).code, cli::exit_usage);
  EXPECT_EQ(run_cli({"eval", "--metric", "connectivity", "--lambda", "-2"}).code, cli::exit_usage);
  EXPECT_EQ(run_cli({"eval", "--metric", "connectivity-ratio", "--with-mc", "1000"}).code, cli::exit_usage);
  EXPECT_EQ(run_cli({"sweep", "--metric", "connectivity"}).code, cli::exit_usage);
  EXPECT_EQ(run_cli({"sweep", "--metric", "connectivity", "--lambda", "1:3:1", "--mu", "1,2", "--ha", "10,20"}).code,
            cli::exit_usage);
  EXPECT_NE(run_cli({}).code, 0);
  const auto help = run_cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("orbit_id,theta_rad,phi_rad,omega_rad,x_km,y_km,z_km"), std::string::npos);
  EXPECT_NE(help.out.find("snr-coverage"), std::string::npos);
}

TEST(Cli, SampleIsDeterministicAndOnTheSphere) {
  const auto a = run_cli({"sample", "--lambda", "20", "--mu", "50", "--seed", "5"});
  const auto b = run_cli({"sample", "--lambda", "20", "--mu", "50", "--seed", "5"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto x = column(a.out, "x_km"), y = column(a.out, "y_km"), z = column(a.out, "z_km");
  ASSERT_FALSE(x.empty());
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]) / 6921.0, 1.0, 1e-6);
  }
  const auto later = run_cli({"sample", "--lambda", "20", "--mu", "50", "--seed", "5", "--t", "100"});
  EXPECT_NE(later.out, a.out);
  EXPECT_EQ(column(later.out, "theta_rad"), column(a.out, "theta_rad"));
}

TEST(Cli, SampleRowCountAveragesLambdaMu) {
  double sum = 0;
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) {
    const auto r = run_cli({"sample", "--lambda", "20", "--mu", "50", "--seed", std::to_string(s)});
    sum += static_cast<double>(std::count(r.out.begin(), r.out.end(), '\n') - 1);
  }
  const double se = std::sqrt(20.0 * (50.0 + 2500.0) / seeds);
  EXPECT_LE(std::abs(sum / seeds - 1000.0), 3 * se);
}

TEST(Cli, ValidateWarnsAndFlags) {
  const auto small = run_cli({"validate", "--lambda", "5", "--mu", "5", "--metric", "connectivity", "--trials", "100"});
  EXPECT_NE(small.err.find("warning"), std::string::npos);
  EXPECT_EQ(run_cli({"validate", "--trials", "50"}).code, cli::exit_usage);
  const auto bad = run_cli({"validate", "--lambda", "5", "--mu", "5", "--metric", "connectivity,effective-satellites",
                            "--trials", "20000", "--corrupt-fixture"});
  EXPECT_EQ(bad.code, cli::exit_flagged);
  EXPECT_NE(bad.err.find("FLAG"), std::string::npos);
  const auto good = run_cli({"validate", "--lambda", "5", "--mu", "5", "--metric", "connectivity,effective-satellites",
                             "--trials", "20000"});
  EXPECT_EQ(good.code, cli::exit_ok) << good.err;
  EXPECT_EQ(parse_csv(good.out)[0],
            (std::vector<std::string>{"metric_id", "param_point", "analytical", "mc_mean", "mc_stderr", "z_score"}));
  EXPECT_EQ(run_cli({"validate", "--metric", "connectivity-ratio"}).code, cli::exit_usage);
}

TEST(Cli, OutputFileIsWrittenWhole) {
  const auto path = temp_file("out.csv");
  std::filesystem::remove(path);
  const auto r = run_cli({"eval", "--metric", "connectivity", "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), run_cli({"eval", "--metric", "connectivity"}).out);
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
  EXPECT_NE(run_cli({"eval", "--metric", "connectivity", "--out", "/nonexistent-dir/x.csv"}).code, 0);
}

TEST(Scenario, DefaultFileHoldsReferenceValues) {
  const auto file = load_scenario(scenario_path("table1.scn"));
  const auto& c = file.config;
  const auto ref = ScenarioConfig::table1();
  EXPECT_EQ(c.geom.earth_radius_km(), 6371.0);
  EXPECT_EQ(c.geom.satellite_orbit_radius_km(), ref.geom.satellite_orbit_radius_km());
  EXPECT_EQ(c.geom.platform_orbit_radius_km(), ref.geom.platform_orbit_radius_km());
  EXPECT_EQ(c.geom.satellite_angular_speed_rad_s(), 0.0011);
  EXPECT_EQ(c.densities.mean_orbits, 25.0);
  EXPECT_EQ(c.densities.mean_sats_per_orbit, 25.0);
  EXPECT_TRUE(c.platform_enabled);
  EXPECT_EQ(c.sat_link.snr_scale(), ref.sat_link.snr_scale());
  EXPECT_EQ(c.platform_link.snr_scale(), ref.platform_link.snr_scale());
  EXPECT_EQ(c.fading.describe(), ref.fading.describe());
  EXPECT_EQ(file.carrier_frequency_hz, 1e9);
  const auto tp = load_scenario(scenario_path("throughput.scn"));
  EXPECT_NEAR(tp.config.platform_link.snr_scale(), std::pow(10.0, 15.7), 1e3);
}

TEST(Scenario, ErrorsNameTheLine) {
  auto message = [](const std::string& text) {
    try {
      parse_scenario_string(text, "s.scn");
    } catch (const ScenarioError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_EQ(message("mean_orbits = 5\n\nmean_satelites = 3\n"), "s.scn:3: unknown key 'mean_satelites'");
  EXPECT_EQ(message("mean_orbits = 5\nmean_orbits = 6\n"), "s.scn:2: duplicate key 'mean_orbits' (first set on line 1)");
  EXPECT_NE(message("# c\nmean_orbits = five\n").find("s.scn:2:"), std::string::npos);
  EXPECT_NE(message("mean_orbits\n").find("s.scn:1: expected"), std::string::npos);
  EXPECT_NE(message("satellite_altitude_km = 550\nplatform_altitude_km = 600\n").find("s.scn:2:"), std::string::npos);
  EXPECT_NE(message("fading = rayleigh\n").find("s.scn:1:"), std::string::npos);
  EXPECT_NE(message("sat_path_loss_exponent = 1\n").find("s.scn:1:"), std::string::npos);
  EXPECT_EQ(message("mean_orbits = 5 # trailing comment\n  platform_enabled = off\n"), "no error");
}

TEST(Scenario, RoundTrip) {
  auto file = parse_scenario_string(
      "mean_orbits = 7.5\nplatform_altitude_km = 33\nplatform_enabled = false\nplatform_noise_power_dbm = -101\n"
      "fading = shadowed-rice\nfading_b = 0.251\nfading_m = 5.21\nfading_omega = 0.278\n");
  std::ostringstream os;
  write_scenario(os, file);
  const auto back = parse_scenario_string(os.str());
  std::ostringstream again;
  write_scenario(again, back);
  EXPECT_EQ(os.str(), again.str());
  EXPECT_EQ(back.config.densities.mean_orbits, 7.5);
  EXPECT_FALSE(back.config.platform_enabled);
  EXPECT_EQ(back.config.fading.describe(), file.config.fading.describe());
}

TEST(Scenario, CliReportsScenarioErrors) {
  const auto path = temp_file("bad.scn");
  {
    std::ofstream f(path);
    f << "mean_orbits = 5\nmean_sats_per_orbit = 5\nbogus = 1\n";
  }
  const auto r = run_cli({"eval", "--metric", "connectivity", "--scenario", path.string()});
  EXPECT_EQ(r.code, cli::exit_usage);
  EXPECT_NE(r.err.find(":3: unknown key 'bogus'"), std::string::npos);
  std::filesystem::remove(path);
  EXPECT_EQ(run_cli({"eval", "--metric", "connectivity", "--scenario", "/no/such/file"}).code, cli::exit_usage);
  const auto ok = run_cli({"eval", "--metric", "connectivity", "--scenario", scenario_path("table1.scn")});
  EXPECT_EQ(ok.out, run_cli({"eval", "--metric", "connectivity"}).out);
}
