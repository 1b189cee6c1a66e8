#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "sfwm/config.hpp"
#include "sfwm/csv.hpp"
#include "sfwm/error.hpp"
#include "sfwm/manifest.hpp"
#include "sfwm/svg.hpp"

using namespace sfwm;
using namespace sfwm::io;

namespace {

int count(const std::string& s, const std::string& needle) {
  int n = 0;
  for (size_t p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

double attribute(const std::string& svg, const std::string& name) {
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, std::regex(name + "=\"([^\"]+)\"")));
  return std::stod(m[1]);
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("sfwm_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("empty configuration yields the defaults") {
  const auto c = parse_config("");
  CHECK(c.physics.gamma_nat == doctest::Approx(2 * std::numbers::pi * 5.9e6));
  CHECK(c.physics.gamma_doppler == 55.0);
  CHECK(c.physics.omega_c == 5.4);
  CHECK(c.sim.histogram.window_s == 1.6e-6);
  CHECK(c.sim.histogram.bin_width_s == 0.8e-9);
  CHECK(serialize(c) == serialize(RunConfig{}));
}

TEST_CASE("range violations name the key") {
  try {
    parse_config(R"({"physics": {"alpha": -1}})");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key == "physics.alpha");
    CHECK(std::string(e.what()).find("physics.alpha") != std::string::npos);
  }
}

TEST_CASE("unknown keys and malformed text are rejected") {
  CHECK_THROWS_AS(parse_config(R"({"physics": {"alpah": 3}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"physic": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sim": {"statistics": "gaussian"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sim": {"duration_s": "long"}})"), ConfigError);
}

TEST_CASE("configuration round trip") {
  const std::string text = R"({"physics": {"alpha": 93, "gamma_dec": 0.02},
                              "sim": {"seed": 7, "statistics": "thermal", "duration_s": 12.5},
                              "sweep": {"temperatures": [38, 65], "pump_mw": [4, 8, 16]},
                              "output": {"formats": ["csv"]}})";
  const auto a = parse_config(text);
  const auto b = parse_config(serialize(a));
  CHECK(serialize(a) == serialize(b));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(b.physics.alpha == 93.0);
  CHECK(b.sim.statistics == detect::Statistics::kThermal);
  CHECK(b.grid().size() == 6);
  CHECK(config_hash(a) != config_hash(RunConfig{}));
}

TEST_CASE("load_config reports a missing file") {
  CHECK_THROWS_AS(load_config("/nonexistent/sfwm.json"), ConfigError);
}

TEST_CASE("numbers survive a CSV round trip bit for bit") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x, y;
  for (int i = 0; i < 500; ++i) {
    x.push_back(u(rng) * std::pow(10.0, 40 * u(rng)));
    y.push_back(u(rng));
  }
  y[3] = std::numeric_limits<double>::infinity();
  const auto t = curve_table(x, y, {{"fwhm_ns", 151.25}});
  const auto back = read_csv(write_csv(t));
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  const auto xs = back.numbers("x");
  for (size_t i = 0; i < x.size(); ++i) CHECK(xs[i] == x[i]);
  CHECK(back.numbers("value")[3] == std::numeric_limits<double>::infinity());
  CHECK(std::isnan(parse_double("nan")));
  CHECK_THROWS(parse_double("1.5x"));
}

TEST_CASE("histogram and sweep tables round trip") {
  CoincidenceHistogram h;
  h.duration_s = 10.0;
  for (int i = 0; i < h.n_bins(); ++i) h.counts.push_back(static_cast<std::uint64_t>(i * 7 % 13));
  const auto h2 = histogram_from_table(read_csv(write_csv(histogram_table(h))), 10.0);
  CHECK(h2.counts == h.counts);
  CHECK(h2.bin_width_s == doctest::Approx(h.bin_width_s).epsilon(1e-12));
  CHECK(h2.start_s == doctest::Approx(h.start_s).epsilon(1e-12));

  analysis::SweepRecord r;
  r.op = analysis::OperatingPoint::at_temperature(53.0, 6.0);
  r.generation_rate = 12345.678;
  r.linewidth_hz = 1.234e6;
  r.sbr = 17.5;
  r.brightness = r.generation_rate / (r.linewidth_hz * 1e-6);
  r.s_product = r.brightness * r.sbr;
  r.background_per_bin = 0.031;
  r.r_t = 1e4;
  r.r_s = 1.1e4;
  r.mode = analysis::Mode::kMonteCarlo;
  r.seed = 99;
  const auto t = sweep_table({r});
  const auto back = read_csv(write_csv(t));
  CHECK(back.rows == t.rows);
  const auto recs = sweep_from_table(back);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].generation_rate == r.generation_rate);
  CHECK(recs[0].linewidth_hz == doctest::Approx(r.linewidth_hz).epsilon(1e-15));
  CHECK(recs[0].mode == analysis::Mode::kMonteCarlo);
  CHECK(recs[0].seed == 99);
  CHECK(write_csv(sweep_table(recs)) == write_csv(t));
}

TEST_CASE("figure structure") {
  const auto one = render_figure({{"a", {1.0, 2.0}, {3.0, 4.0}}}, {"t", "x", "y"});
  CHECK(count(one, "<polyline") == 1);
  std::vector<Series> five;
  for (int k = 0; k < 5; ++k) five.push_back({std::to_string(38 + k) + " C", {2, 4, 6}, {1.0 + k, 2.0 + k, 3.0 + k}});
  const auto many = render_figure(five, {"t", "x", "y", true});
  CHECK(count(many, "<polyline") == 5);
  CHECK(count(many, "class=\"legend-label\"") == 5);
  CHECK(many.find("<svg") != std::string::npos);
  CHECK_THROWS_AS(render_figure({}, {}), InvalidArgument);
  CHECK_THROWS_AS(render_figure({{"a", {}, {}}}, {}), InvalidArgument);
}

TEST_CASE("histogram figure axis follows the peak counts") {
  std::vector<double> x, y;
  for (int i = 0; i < 2000; ++i) {
    const double t = -200.0 + 0.8 * i;
    x.push_back(t);
    y.push_back(615.0 + (t > 0 ? 1400.0 * std::exp(-t / 90.0) : 0.0));
  }
  const double peak = *std::max_element(y.begin(), y.end());
  const auto svg = render_figure({{"counts", x, y}}, {"h", "delay (ns)", "counts"});
  CHECK(attribute(svg, "data-y-max") == doctest::Approx(peak).epsilon(0.10));
}

TEST_CASE("atomic writes and manifests are reproducible") {
  const auto dir = scratch("manifest");
  RunManifest a, b;
  a.add((dir / "a").string(), "x.csv", "1,2\n");
  b.add((dir / "b").string(), "x.csv", "1,2\n");
  CHECK(a.to_json() == b.to_json());
  std::ifstream in(dir / "a" / "x.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "1,2\n");
  CHECK(a.files.front().checksum == hex64(fnv1a64("1,2\n")));
  for (const auto& e : std::filesystem::directory_iterator(dir / "a")) CHECK(e.path().filename() == "x.csv");
  std::filesystem::remove_all(dir);
}

TEST_CASE("timestamp comes from SOURCE_DATE_EPOCH") {
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  CHECK(reproducible_timestamp() == 1700000000);
  ::setenv("SOURCE_DATE_EPOCH", "junk", 1);
  CHECK(reproducible_timestamp() == 0);
  ::unsetenv("SOURCE_DATE_EPOCH");
  CHECK(reproducible_timestamp() == 0);
}

}
