#include "sfwm/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "sfwm/error.hpp"
#include "sfwm/manifest.hpp"

namespace sfwm::io {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Range {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = false;

  bool contains(double v) const { return (lo_open ? v > lo : v >= lo) && v <= hi; }
  std::string describe() const {
    std::ostringstream os;
    os << (lo_open ? "> " : ">= ") << lo;
    if (hi < kInf) os << " and <= " << hi;
    return os.str();
  }
};

const Range kAny{};
const Range kNonNeg{0.0};
const Range kPos{0.0, kInf, true};
const Range kUnit{0.0, 1.0};

template <class E>
using Choices = std::vector<std::pair<const char*, E>>;

const Choices<detect::Statistics> kStatistics = {{"poisson", detect::Statistics::kPoisson},
                                                  {"thermal", detect::Statistics::kThermal}};

// One schema, walked by both the reader and the writer.
template <class V>
void visit(RunConfig& c, V& v) {
  auto& ph = c.physics;
  v.num("physics", "alpha", ph.alpha, kNonNeg);
  v.num("physics", "omega_p", ph.omega_p, kNonNeg);
  v.num("physics", "omega_c", ph.omega_c, kPos);
  v.num("physics", "gamma_dec", ph.gamma_dec, kNonNeg);
  v.num("physics", "gamma_nat", ph.gamma_nat, kPos);
  v.num("physics", "gamma_doppler", ph.gamma_doppler, kPos);
  v.num("physics", "delta_p", ph.delta_p, kAny);

  v.num("geometry", "length_m", c.geometry.length_m, kPos);
  v.num("geometry", "angle_jitter_rad", c.geometry.angle_jitter_rad, Range{0.0, std::numbers::pi / 2});
  v.integer("geometry", "jitter_draws", c.geometry.jitter_draws, 1, 100000000);

  auto& d = c.detector;
  v.num("detector", "eff_as", d.eff_as, kUnit);
  v.num("detector", "eff_s", d.eff_s, kUnit);
  v.num("detector", "dark_as", d.dark_as, kNonNeg);
  v.num("detector", "dark_s", d.dark_s, kNonNeg);
  v.num("detector", "leak_as_per_mw", d.leak_as_per_mw, kNonNeg);
  v.num("detector", "leak_s_per_mw", d.leak_s_per_mw, kNonNeg);
  v.num("detector", "fluorescence_s", d.fluorescence_s, kNonNeg);

  auto& k = c.calibration;
  v.num("calibration", "rate_scale", k.rate_scale, kNonNeg);
  v.num("calibration", "omega_p_per_sqrt_mw", k.omega_p_per_sqrt_mw, kPos);
  v.num("calibration", "background_window_s", k.background_window_s, kPos);
  v.num("calibration", "gamma_slope", k.gamma_slope, kNonNeg);
  v.num("calibration", "gamma_low_t", k.gamma_low_t, kNonNeg);
  v.num("calibration", "gamma_high_t", k.gamma_high_t, kNonNeg);
  v.num("calibration", "low_t", k.low_t, kAny);
  v.num("calibration", "high_t", k.high_t, kAny);
  v.num("calibration", "anchor_rate", k.anchor_rate, kPos);
  v.num("calibration", "anchor_pump_mw", k.anchor_pump_mw, Range{0.0, 64.0, true});
  v.num("calibration", "anchor_od", k.anchor_od, kPos);
  v.num("calibration", "anchor_temp_c", k.anchor_temp_c, kAny);
  v.num("calibration", "unpaired_s_per_mw", k.unpaired_s_per_mw, Range{-1.0});
  v.num("calibration", "low_od_point", k.low_od_point, kPos);
  v.num("calibration", "low_od_temp_c", k.low_od_temp_c, kAny);
  v.num("calibration", "baseline_low_od", k.baseline_low_od, kPos);

  v.list("sweep", "temperatures", c.sweep.temperatures, Range{defaults::kLowT, defaults::kHighT});
  v.list("sweep", "pump_mw", c.sweep.pump_mw, Range{0.0, 64.0});
  v.list("sweep", "od_measured", c.sweep.od_measured, kPos);
  v.num("sweep", "coupling_mw", c.sweep.coupling_mw, kNonNeg);

  auto& s = c.sim;
  v.num("sim", "duration_s", s.duration_s, kPos);
  v.seed("sim", "seed", s.seed);
  v.choice("sim", "statistics", s.statistics, kStatistics);
  v.num("sim", "coherence_time_s", s.coherence_time_s, kNonNeg);
  v.num("sim", "chunk_s", s.chunk_s, kPos);
  v.num("sim", "pump_mw", s.pump_mw, Range{0.0, 64.0});
  v.num("sim", "temp_c", s.temp_c, Range{defaults::kLowT, defaults::kHighT});
  v.num("sim", "od_measured", s.od_measured, kNonNeg);
  v.num("sim", "bin_width_s", s.histogram.bin_width_s, kPos);
  v.num("sim", "window_s", s.histogram.window_s, kPos);
  v.num("sim", "window_start_s", s.histogram.start_s, kAny);
  v.num("sim", "holdoff_s", s.histogram.holdoff_s, kNonNeg);
  v.num("sim", "auto_bin_s", s.auto_bin_s, kPos);
  v.num("sim", "auto_max_delay_s", s.auto_max_delay_s, kPos);

  v.text("output", "dir", c.output.dir);
  v.words("output", "formats", c.output.formats, {"csv", "json", "svg"});

  v.num("numerics", "grid_half_span", c.numerics.grid.half_span, kPos);
  v.integer("numerics", "grid_points", c.numerics.grid.n_points, 4096, 1 << 24);
  v.integer("numerics", "threads", c.numerics.threads, 0u, 1024u);
}

const std::set<std::string> kSections = {"physics", "geometry", "detector", "calibration",
                                          "sweep",   "sim",      "output",   "numerics"};

std::string key_of(const char* sec, const char* name) { return std::string(sec) + "." + name; }

class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  void num(const char* sec, const char* name, double& out, const Range& r) {
    const json* j = find(sec, name);
    if (!j) return;
    if (!j->is_number()) fail(sec, name, "expected a number");
    const double v = j->get<double>();
    if (!std::isfinite(v) || !r.contains(v))
      fail(sec, name, "value " + j->dump() + " out of range, expected " + r.describe());
    out = v;
  }
  template <class I>
  void integer(const char* sec, const char* name, I& out, I lo, I hi) {
    const json* j = find(sec, name);
    if (!j) return;
    if (!j->is_number_integer()) fail(sec, name, "expected an integer");
    const auto v = j->get<long long>();
    if (v < static_cast<long long>(lo) || v > static_cast<long long>(hi))
      fail(sec, name, "value " + j->dump() + " out of range, expected [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    out = static_cast<I>(v);
  }
  void seed(const char* sec, const char* name, std::uint64_t& out) {
    const json* j = find(sec, name);
    if (!j) return;
    if (!j->is_number_unsigned()) fail(sec, name, "expected a non-negative integer");
    out = j->get<std::uint64_t>();
  }
  template <class E>
  void choice(const char* sec, const char* name, E& out, const Choices<E>& choices) {
    const json* j = find(sec, name);
    if (!j) return;
    if (!j->is_string()) fail(sec, name, "expected a string");
    const auto s = j->get<std::string>();
    for (const auto& [label, value] : choices) {
      if (s == label) {
        out = value;
        return;
      }
    }
    std::string allowed;
    for (const auto& c : choices) allowed += std::string(allowed.empty() ? "" : "|") + c.first;
    fail(sec, name, "unknown value \"" + s + "\", expected " + allowed);
  }
  void text(const char* sec, const char* name, std::string& out) {
    const json* j = find(sec, name);
    if (!j) return;
    if (!j->is_string()) fail(sec, name, "expected a string");
    out = j->get<std::string>();
  }
  void list(const char* sec, const char* name, std::vector<double>& out, const Range& r) {
    const json* j = find(sec, name);
    if (!j) return;
    if (!j->is_array()) fail(sec, name, "expected an array of numbers");
    std::vector<double> v;
    for (const auto& e : *j) {
      if (!e.is_number()) fail(sec, name, "expected an array of numbers");
      const double x = e.get<double>();
      if (!std::isfinite(x) || !r.contains(x))
        fail(sec, name, "element " + e.dump() + " out of range, expected " + r.describe());
      v.push_back(x);
    }
    out = std::move(v);
  }
  void words(const char* sec, const char* name, std::vector<std::string>& out, const std::set<std::string>& allowed) {
    const json* j = find(sec, name);
    if (!j) return;
    if (!j->is_array()) fail(sec, name, "expected an array of strings");
    std::vector<std::string> v;
    for (const auto& e : *j) {
      if (!e.is_string() || !allowed.count(e.get<std::string>()))
        fail(sec, name, "element " + e.dump() + " not one of csv|json|svg");
      v.push_back(e.get<std::string>());
    }
    out = std::move(v);
  }

  void reject_unknown() const {
    for (const auto& [sec, body] : root_.items()) {
      if (!kSections.count(sec)) throw ConfigError("unknown section \"" + sec + "\"", sec);
      if (!body.is_object()) throw ConfigError("section " + sec + " must be an object", sec);
      for (const auto& [name, value] : body.items()) {
        const std::string key = sec + "." + name;
        if (!used_.count(key)) throw ConfigError("unknown key " + key, key);
      }
    }
  }

 private:
  const json* find(const char* sec, const char* name) {
    used_.insert(key_of(sec, name));
    const auto s = root_.find(sec);
    if (s == root_.end() || !s->is_object()) return nullptr;
    const auto k = s->find(name);
    return k == s->end() ? nullptr : &*k;
  }
  [[noreturn]] void fail(const char* sec, const char* name, const std::string& msg) const {
    const std::string key = key_of(sec, name);
    throw ConfigError(key + ": " + msg, key);
  }

  const json& root_;
  std::set<std::string> used_;
};

class Writer {
 public:
  void num(const char* sec, const char* name, double& v, const Range&) { root[sec][name] = v; }
  template <class I>
  void integer(const char* sec, const char* name, I& v, I, I) {
    root[sec][name] = v;
  }
  void seed(const char* sec, const char* name, std::uint64_t& v) { root[sec][name] = v; }
  template <class E>
  void choice(const char* sec, const char* name, E& v, const Choices<E>& choices) {
    for (const auto& [label, value] : choices)
      if (value == v) root[sec][name] = label;
  }
  void text(const char* sec, const char* name, std::string& v) { root[sec][name] = v; }
  void list(const char* sec, const char* name, std::vector<double>& v, const Range&) { root[sec][name] = v; }
  void words(const char* sec, const char* name, std::vector<std::string>& v, const std::set<std::string>&) {
    root[sec][name] = v;
  }

  json root = json::object();
};

void cross_check(const RunConfig& c) {
  const auto wrap = [](const std::string& section, auto&& fn) {
    try {
      fn();
    } catch (const InvalidArgument& e) {
      throw ConfigError(section + ": " + e.what(), section);
    }
  };
  wrap("physics", [&] { c.physics.validate(); });
  wrap("calibration", [&] { c.calibration.validate(); });
  wrap("sim", [&] {
    c.sim.histogram.validate();
    if (c.sim.statistics == detect::Statistics::kThermal && c.sim.coherence_time_s < 0)
      throw InvalidArgument("coherence_time_s must be >= 0");
  });
  if (!c.sweep.od_measured.empty() && c.sweep.od_measured.size() != c.sweep.temperatures.size())
    throw ConfigError("sweep.od_measured must have one entry per temperature", "sweep.od_measured");
  if (c.calibration.high_t <= c.calibration.low_t)
    throw ConfigError("calibration.high_t must exceed calibration.low_t", "calibration.high_t");
  const int n = c.numerics.grid.n_points;
  if (n & (n - 1)) throw ConfigError("numerics.grid_points must be a power of two", "numerics.grid_points");
}

}  // namespace

std::vector<analysis::OperatingPoint> RunConfig::grid() const {
  std::vector<analysis::OperatingPoint> g;
  for (size_t i = 0; i < sweep.temperatures.size(); ++i) {
    for (double p : sweep.pump_mw) {
      analysis::OperatingPoint op;
      op.temp_c = sweep.temperatures[i];
      op.pump_mw = p;
      op.od_measured =
          sweep.od_measured.empty() ? analysis::od_for_temperature(op.temp_c) : sweep.od_measured[i];
      op.coupling_mw = sweep.coupling_mw;
      g.push_back(op);
    }
  }
  return g;
}

analysis::OperatingPoint RunConfig::sim_point() const {
  analysis::OperatingPoint op;
  op.temp_c = sim.temp_c;
  op.pump_mw = sim.pump_mw;
  op.od_measured = sim.od_measured > 0 ? sim.od_measured : analysis::od_for_temperature(sim.temp_c);
  op.coupling_mw = sweep.coupling_mw;
  return op;
}

bool RunConfig::wants(const std::string& format) const {
  for (const auto& f : output.formats)
    if (f == format) return true;
  return false;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return cfg;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what(), "");
  }
  if (!root.is_object()) throw ConfigError("top level must be an object", "");
  Reader r(root);
  visit(cfg, r);
  r.reject_unknown();
  cross_check(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path, "");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& cfg) {
  RunConfig copy = cfg;
  Writer w;
  visit(copy, w);
  return w.root.dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(serialize(cfg)); }

}  // namespace sfwm::io
