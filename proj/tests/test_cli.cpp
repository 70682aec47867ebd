#include "cgauge/config.hpp"
#include "cgauge/errors.hpp"
#include "cgauge/event_io.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("cgauge_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Run run_cli(const std::string& args, const fs::path& dir) {
  const auto err_file = dir / "stderr.txt";
  const std::string cmd = std::string(CGAUGE_CLI) + " " + args + " 2>" + err_file.string();
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream e(err_file);
  std::stringstream ss;
  ss << e.rdbuf();
  r.err = ss.str();
  return r;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& cfg) {
  const auto p = dir / name;
  std::ofstream(p) << cfg.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json spectrum_config() {
  return json::parse(R"({
    "species": [{"name": "H2", "mass_u": 2.016, "temperature_k": 300.0, "pressure_pa": 1e-10}],
    "sensor": {"shape": "sphere", "radius_m": 5e-8, "accommodation": 1.0},
    "grid": {"min_kevc": 0.01, "max_kevc": 40.0, "count": 200, "spacing": "logarithmic"},
    "run": {"scatter": ["specular", "diffuse"]}
  })");
}

json small_detect_config() {
  return json::parse(R"({
    "species": [{"name": "H2", "mass_u": 2.016, "temperature_k": 300.0, "pressure_pa": 1e-7}],
    "sensor": {"shape": "sphere", "radius_m": 5e-8, "accommodation": 1.0},
    "mode": {"mass_kg": 2.5e-23, "omega_hz": 10000.0, "gamma_hz": 1.0},
    "readout": {"balance_ratio": 10.0},
    "run": {"duration_s": 0.5, "sample_rate_hz": 2e6, "snr_threshold": 5.0,
            "segment_samples": 65536},
    "infer": {"input": "detected_events.csv"}
  })");
}

} // namespace

TEST_CASE("config errors name the offending key") {
  auto cfg = spectrum_config();
  cfg["species"][0].erase("mass_u");
  CHECK_THROWS_WITH_AS(cgauge::config::parse_species(cfg), doctest::Contains("species[0].mass_kg"),
                       cgauge::ConfigError);
  try {
    cgauge::config::parse_species(cfg);
  } catch (const cgauge::ConfigError& e) {
    CHECK(e.key() == "species[0].mass_kg");
  }
  auto bad_grid = spectrum_config();
  bad_grid["grid"]["count"] = 0;
  CHECK_THROWS_AS(cgauge::config::parse_grid(bad_grid), cgauge::ConfigError);
  auto bad_shape = spectrum_config();
  bad_shape["sensor"]["shape"] = "cube";
  CHECK_THROWS_AS(cgauge::config::parse_sensor(bad_shape), cgauge::ConfigError);
}

TEST_CASE("unit conversions at the config boundary") {
  auto cfg = spectrum_config();
  const auto grid = cgauge::config::parse_grid(cfg);
  CHECK(grid.min == doctest::Approx(0.01 * 5.344286e-25));
  cfg["mode"] = {{"mass_kg", 1e-18}, {"omega_hz", 1000.0}, {"gamma_rad_s", 2.0}};
  const auto mode = cgauge::config::parse_mode(cfg);
  CHECK(mode.omega == doctest::Approx(2.0 * M_PI * 1000.0));
  CHECK(mode.gamma == 2.0);
  cfg["readout"] = {{"balance_ratios", {1.0, 10.0, 100.0}}};
  CHECK(cgauge::config::parse_readouts(cfg, mode).size() == 3);
}

TEST_CASE("missing species mass exits with code 2 and cites the key") {
  const auto dir = scratch("missing_mass");
  auto cfg = spectrum_config();
  cfg["species"][0].erase("mass_u");
  const auto path = write_config(dir, "cfg.json", cfg);
  const auto r = run_cli("spectrum --config " + path.string() + " --out " + dir.string(), dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("species[0].mass_kg") != std::string::npos);
}

TEST_CASE("missing config file is an i/o error") {
  const auto dir = scratch("no_file");
  const auto r = run_cli("spectrum --config " + (dir / "nope.json").string(), dir);
  CHECK(r.code == 4);
}

TEST_CASE("spectrum writes one deterministic file per scatter model") {
  const auto dir = scratch("spectrum");
  const auto path = write_config(dir, "cfg.json", spectrum_config());
  const auto a = run_cli("spectrum --config " + path.string() + " --out " + (dir / "a").string(), dir);
  const auto b = run_cli("spectrum --config " + path.string() + " --out " + (dir / "b").string(), dir);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  for (const char* f : {"spectrum_specular.csv", "spectrum_diffuse.csv"}) {
    CHECK(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const auto side = json::parse(slurp(dir / "a" / "spectrum_diffuse.json"));
  CHECK(side["provenance"].contains("config_hash"));
  CHECK(side["provenance"].contains("seed"));
  CHECK(side["code_version"] == CGAUGE_VERSION);
  CHECK(slurp(dir / "a" / "spectrum_diffuse.csv").rfind("dp_si,rate_density_si\n", 0) == 0);
}

TEST_CASE("output directory from the environment") {
  const auto dir = scratch("env_out");
  const auto path = write_config(dir, "cfg.json", spectrum_config());
  const auto r = run_cli("spectrum --config " + path.string(), dir);
  REQUIRE(r.code == 0);
  // Without --out and without the variable, files land in the working
  // directory; with the variable they land there.
  const auto target = dir / "from_env";
  const std::string cmd = "COLLISION_GAUGE_OUT=" + target.string() + " " + std::string(CGAUGE_CLI) +
                          " spectrum --config " + path.string() + " > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(target / "spectrum_diffuse.csv"));
  for (const char* f : {"spectrum_specular.csv", "spectrum_specular.json", "spectrum_diffuse.csv",
                        "spectrum_diffuse.json", "spectrum_report.json"})
    fs::remove(fs::path(f));
}

TEST_CASE("snr reports one row per tuning and scales with the impulse") {
  const auto dir = scratch("snr");
  json cfg = json::parse(R"({
    "sensor": {"shape": "sphere", "radius_m": 5e-8},
    "mode": {"density_kg_m3": 2200.0, "omega_hz": 1000.0, "gamma_hz": 1.0},
    "readout": {"balance_ratios": [1.0, 3.0, 10.0]},
    "run": {"dp_kevc": 7.0, "nu_points": 101}
  })");
  const auto p1 = write_config(dir, "a.json", cfg);
  cfg["run"]["dp_kevc"] = 14.0;
  const auto p2 = write_config(dir, "b.json", cfg);
  const auto a = run_cli("snr --config " + p1.string() + " --out " + (dir / "a").string(), dir);
  const auto b = run_cli("snr --config " + p2.string() + " --out " + (dir / "b").string(), dir);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const auto ra = json::parse(a.out), rb = json::parse(b.out);
  REQUIRE(ra["tunings"].size() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(rb["tunings"][i]["snr"].get<double>() ==
          doctest::Approx(2.0 * ra["tunings"][i]["snr"].get<double>()).epsilon(1e-12));
  CHECK(fs::exists(dir / "a" / "snr_integrand_2.csv"));
  CHECK(slurp(dir / "a" / "noise_0.csv").rfind("nu_si,s_ff_si,", 0) == 0);
}

TEST_CASE("simulate-detect requires a seed and is reproducible") {
  const auto dir = scratch("simdet");
  const auto path = write_config(dir, "cfg.json", small_detect_config());
  const auto none = run_cli("simulate-detect --config " + path.string() + " --out " + dir.string(), dir);
  CHECK(none.code == 2);
  CHECK(none.err.find("run.seed") != std::string::npos);
  const auto a = run_cli("simulate-detect --config " + path.string() + " --seed 5 --out " +
                             (dir / "a").string(), dir);
  const auto b = run_cli("simulate-detect --config " + path.string() + " --seed 5 --out " +
                             (dir / "b").string(), dir);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  for (const char* f : {"truth_events.csv", "detected_events.csv", "simulate_detect_report.json"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  const auto report = json::parse(a.out);
  CHECK(report["matching"]["efficiency"].get<double>() > 0.97);
  const auto det = cgauge::events::read_events(dir / "a" / "detected_events.csv");
  CHECK(det.snr.size() == det.events.size());
  CHECK(det.sidecar.contains("dp_min_si"));

  const auto inf = run_cli("infer --config " + path.string() + " --out " + (dir / "a").string(), dir);
  REQUIRE(inf.code == 0);
  const auto est = json::parse(inf.out)["estimate"];
  const double p = est["pressure_pa"].get<double>();
  const double u = est["relative_uncertainty"].get<double>();
  CHECK(std::abs(p / 1e-7 - 1.0) < 4.0 * u);
}

TEST_CASE("zero pressure yields only noise detections") {
  const auto dir = scratch("zero_p");
  auto cfg = small_detect_config();
  cfg["species"][0]["pressure_pa"] = 0.0;
  cfg["run"]["snr_threshold"] = 4.0;
  const auto path = write_config(dir, "cfg.json", cfg);
  const auto r = run_cli("simulate-detect --config " + path.string() + " --seed 8 --out " + dir.string(), dir);
  REQUIRE(r.code == 0);
  const auto rep = json::parse(r.out);
  CHECK(rep["matching"]["truth_events"] == 0);
  CHECK(rep["matching"]["fake_events"] == rep["matching"]["detected_events"]);
  // 4-sigma up-crossings of oversampled noise: a handful per second, not thousands.
  CHECK(rep["matching"]["fake_rate_hz"].get<double>() < 200.0);
}

TEST_CASE("infer surfaces the ill-conditioned warning") {
  const auto dir = scratch("infer_warn");
  json cfg = spectrum_config();
  cfg["infer"] = {{"rate_s", 0.01}, {"dp_min_kevc", 45.0}, {"events", 100}};
  cfg["sensor"]["accommodation"] = 0.0;
  const auto path = write_config(dir, "cfg.json", cfg);
  const auto r = run_cli("infer --config " + path.string() + " --out " + dir.string(), dir);
  CHECK(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(!json::parse(r.out)["warnings"].empty());

  cfg["infer"]["dp_min_kevc"] = 200.0;
  const auto path2 = write_config(dir, "cfg2.json", cfg);
  const auto r2 = run_cli("infer --config " + path2.string() + " --out " + dir.string(), dir);
  CHECK(r2.code == 3);
}

TEST_CASE("infer splits a two-species event file") {
  const auto dir = scratch("infer_mix");
  json cfg = json::parse(R"({
    "species": [
      {"name": "H2", "mass_u": 2.016, "temperature_k": 300.0, "pressure_pa": 1e-8},
      {"name": "Xe", "mass_u": 131.29, "temperature_k": 300.0, "pressure_pa": 8e-8}
    ],
    "sensor": {"shape": "sphere", "radius_m": 5e-8, "accommodation": 1.0},
    "mode": {"mass_kg": 2.5e-23, "omega_hz": 10000.0, "gamma_hz": 1.0},
    "readout": {"balance_ratio": 10.0},
    "run": {"duration_s": 2.0, "sample_rate_hz": 2e6, "segment_samples": 65536},
    "infer": {"method": "mixture", "input": "truth_events.csv",
              "bins": {"min_kevc": 0.2, "max_kevc": 400.0, "count": 60, "spacing": "logarithmic"}}
  })");
  const auto path = write_config(dir, "cfg.json", cfg);
  REQUIRE(run_cli("simulate-detect --config " + path.string() + " --seed 3 --out " + dir.string(), dir).code == 0);
  const auto r = run_cli("infer --config " + path.string() + " --out " + dir.string(), dir);
  REQUIRE(r.code == 0);
  const auto fit = json::parse(r.out)["fit"];
  REQUIRE(fit["species"].size() == 2);
  for (const auto& s : fit["species"]) {
    CHECK(s.contains("partial_pressure_pa"));
    CHECK(s.contains("sigma"));
    CHECK(s["partial_pressure_pa"].get<double>() > 0.0);
  }
}
