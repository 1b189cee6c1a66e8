// sfwm: command-line front end. Every subcommand writes its artifacts plus a
// manifest.json into the output directory.
//
// Exit status: 0 success, 1 usage or configuration error, 2 numeric failure,
// 3 acceptance failure.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfwm/acceptance.hpp"
#include "sfwm/analysis.hpp"
#include "sfwm/config.hpp"
#include "sfwm/csv.hpp"
#include "sfwm/error.hpp"
#include "sfwm/fitting.hpp"
#include "sfwm/manifest.hpp"
#include "sfwm/svg.hpp"
#include "sfwm/waveform.hpp"

namespace {

using namespace sfwm;
using json = nlohmann::ordered_json;

constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitAcceptance = 3;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mode = "theory";
  std::vector<std::string> formats;
};

struct Context {
  io::RunConfig cfg;
  std::string out_dir;
  io::RunManifest manifest;

  void emit(const std::string& name, const std::string& content) { manifest.add(out_dir, name, content); }
  void finish() { io::atomic_write((std::filesystem::path(out_dir) / "manifest.json").string(), manifest.to_json()); }
};

void print_error(const std::string& kind, const std::string& message, const std::string& key = {}) {
  json j = {{"error", kind}, {"message", message}};
  if (!key.empty()) j["key"] = key;
  std::cerr << j.dump() << std::endl;
}

Context make_context(const Globals& g, const std::string& command) {
  Context ctx;
  ctx.cfg = g.config_path.empty() ? io::RunConfig{} : io::load_config(g.config_path);
  if (g.seed) ctx.cfg.sim.seed = *g.seed;
  if (!g.formats.empty()) ctx.cfg.output.formats = g.formats;
  ctx.out_dir = g.out;
  if (ctx.out_dir.empty()) ctx.out_dir = ctx.cfg.output.dir;
  if (ctx.out_dir.empty()) {
    const char* env = std::getenv("SFWM_OUT_DIR");
    ctx.out_dir = env && *env ? env : "out";
  }
  ctx.manifest.config_hash = io::hex64(io::config_hash(ctx.cfg));
  ctx.manifest.command = command;
  ctx.manifest.timestamp = io::reproducible_timestamp();
  // Hashed as written; absolute rates are derived from the anchors afterwards.
  if (command != "check" && !ctx.cfg.calibration.calibrated())
    ctx.cfg.calibration = analysis::calibrate(ctx.cfg.calibration, ctx.cfg.detector);
  return ctx;
}

json curve_json(const std::vector<double>& x, const std::vector<double>& y) {
  json a = json::array();
  for (size_t i = 0; i < x.size(); ++i) a.push_back({x[i], y[i]});
  return a;
}

// Keeps the SVG light: at most n points, evenly strided.
io::Series decimated(std::string label, const std::vector<double>& x, const std::vector<double>& y, size_t n = 2000) {
  io::Series s{std::move(label), {}, {}};
  const size_t stride = std::max<size_t>(1, x.size() / n);
  for (size_t i = 0; i < x.size(); i += stride) {
    s.x.push_back(x[i]);
    s.y.push_back(y[i]);
  }
  return s;
}

int cmd_wavepacket(Context& ctx) {
  const auto& p = ctx.cfg.physics;
  const auto w = analysis::theory_widths(p, ctx.cfg.sim.histogram.bin_width_s);
  const auto wp = wave::wavepacket(p, ctx.cfg.numerics.grid).window(-0.2e-6, 1.4e-6);
  std::vector<double> tau_ns;
  for (double t : wp.tau_grid) tau_ns.push_back(t * 1e9);
  const double fwhm_ns = w.temporal_fwhm_s * 1e9;
  if (ctx.cfg.wants("csv"))
    ctx.emit("wavepacket.csv",
             io::write_csv(io::curve_table(tau_ns, wp.values, {{"fwhm_ns", fwhm_ns}, {"raw_fwhm_ns", w.raw_fwhm_s * 1e9}})));
  if (ctx.cfg.wants("json")) {
    json j = {{"fwhm_ns", fwhm_ns}, {"raw_fwhm_ns", w.raw_fwhm_s * 1e9}, {"curve", curve_json(tau_ns, wp.values)}};
    ctx.emit("wavepacket.json", j.dump(1) + "\n");
  }
  if (ctx.cfg.wants("svg"))
    ctx.emit("wavepacket.svg", io::render_figure({decimated("G2", tau_ns, wp.values)},
                                                 {"Biphoton wave packet", "delay (ns)", "G2 (s^-2)"}));
  std::cout << "temporal FWHM " << fwhm_ns << " ns (raw " << w.raw_fwhm_s * 1e9 << " ns)\n";
  return 0;
}

int cmd_spectrum(Context& ctx) {
  const auto sp = wave::spectrum(ctx.cfg.physics, ctx.cfg.numerics.grid);
  std::vector<double> mhz;
  for (double d : sp.delta_grid) mhz.push_back(d / defaults::kTwoPi * 1e-6);
  const double lw_khz = sp.fwhm * 1e-3;
  if (ctx.cfg.wants("csv"))
    ctx.emit("spectrum.csv", io::write_csv(io::curve_table(mhz, sp.values, {{"linewidth_khz", lw_khz}})));
  if (ctx.cfg.wants("json")) {
    json j = {{"linewidth_khz", lw_khz}, {"multiple_crossings", sp.multiple_crossings}, {"curve", curve_json(mhz, sp.values)}};
    ctx.emit("spectrum.json", j.dump(1) + "\n");
  }
  if (ctx.cfg.wants("svg")) {
    // Plot a few linewidths either side of the peak.
    const double half = 5.0 * sp.fwhm * 1e-6;
    std::vector<double> x, y;
    for (size_t i = 0; i < mhz.size(); ++i)
      if (std::abs(mhz[i]) <= half) {
        x.push_back(mhz[i]);
        y.push_back(sp.values[i]);
      }
    ctx.emit("spectrum.svg", io::render_figure({decimated("F", x, y)}, {"Biphoton spectrum", "detuning (MHz)", "F"}));
  }
  std::cout << "linewidth " << lw_khz << " kHz\n";
  return 0;
}

json fit_json(const fit::WavePacketFit& f) {
  const auto& p = f.params;
  return {{"A", p.a_amp},
          {"B", p.baseline},
          {"epsilon", p.epsilon},
          {"t0_ns", p.t0 * 1e9},
          {"p", p.p_exp},
          {"tau1_ns", p.tau1 * 1e9},
          {"tau2_ns", p.tau2 * 1e9},
          {"t_d_ns", p.t_d * 1e9},
          {"temporal_fwhm_ns", f.temporal_fwhm * 1e9},
          {"linewidth_khz", f.linewidth_hz * 1e-3},
          {"chi2_reduced", f.chi2_reduced},
          {"residual_norm", f.residual_norm},
          {"normality_pvalue", f.normality_pvalue},
          {"converged", f.converged},
          {"degenerate_plateau", f.degenerate_plateau}};
}

json sbr_json(const detect::SbrResult& s) {
  json j = {{"peak", s.peak}, {"baseline", s.baseline}, {"infinite", s.infinite}};
  j["sbr"] = s.infinite ? json("inf") : json(s.value);
  if (std::isfinite(s.sigma)) j["sigma"] = s.sigma;
  return j;
}

void emit_histogram(Context& ctx, const std::string& stem, const CoincidenceHistogram& h, const fit::WavePacketFit& f) {
  if (ctx.cfg.wants("csv")) ctx.emit(stem + ".csv", io::write_csv(io::histogram_table(h)));
  if (ctx.cfg.wants("svg")) {
    io::Series data{"counts", {}, {}}, model{"fit", {}, {}};
    for (int i = 0; i < h.n_bins(); ++i) {
      const double t = h.bin_center(i);
      data.x.push_back(t * 1e9);
      data.y.push_back(static_cast<double>(h.counts[i]));
      model.x.push_back(t * 1e9);
      model.y.push_back(fit::eval_phenomenological(t, f.params));
    }
    ctx.emit(stem + ".svg", io::render_figure({data, model}, {"Coincidence histogram", "delay (ns)", "counts/bin"}));
  }
}

int cmd_simulate(Context& ctx, std::size_t keep_events) {
  const auto& sc = ctx.cfg.sim;
  analysis::SimOptions so;
  so.duration_s = sc.duration_s;
  so.seed = sc.seed;
  so.statistics = sc.statistics;
  so.coherence_time_s = sc.coherence_time_s;
  so.chunk_s = sc.chunk_s;
  so.histogram = sc.histogram;
  so.detector = ctx.cfg.detector;
  so.auto_bin_s = sc.auto_bin_s;
  so.auto_max_delay_s = sc.auto_max_delay_s;
  so.auto_correlations = true;
  so.keep_events = keep_events;
  const auto op = ctx.cfg.sim_point();
  analysis::SimResult res;
  try {
    res = analysis::simulate_point(op, ctx.cfg.calibration, so);
  } catch (const InsufficientEventsError&) {
    so.auto_correlations = false;
    res = analysis::simulate_point(op, ctx.cfg.calibration, so);
  }

  emit_histogram(ctx, "histogram", res.histogram, res.fit);
  if (keep_events > 0) {
    std::string s = "detector,time_ps\n";
    for (auto t : res.events.anti_stokes) s += "as," + std::to_string(t) + "\n";
    for (auto t : res.events.stokes) s += "s," + std::to_string(t) + "\n";
    ctx.emit("events.csv", s);
  }
  const auto g2 = [](const std::optional<detect::AutoCorrelation>& a) -> json {
    if (!a) return nullptr;
    return {{"bin_ns", a->bin_width_s * 1e9}, {"g2", a->g2}, {"sigma", a->sigma}};
  };
  const auto& r = res.record;
  json rep = {{"pump_mw", op.pump_mw},
              {"temp_c", op.temp_c},
              {"od", op.od_measured},
              {"seed", so.seed},
              {"duration_s", so.duration_s},
              {"statistics", so.statistics == detect::Statistics::kThermal ? "thermal" : "poisson"},
              {"generation_rate", r.generation_rate},
              {"detected_as", res.n_as},
              {"detected_s", res.n_s},
              {"triggers", res.histogram.n_triggers},
              {"detected_pair_rate", r.detected_pair_rate},
              {"success_probability", r.success_probability},
              {"sbr", sbr_json(res.sbr)},
              {"fit", fit_json(res.fit)},
              {"g2_as", g2(res.g2_as)},
              {"g2_s", g2(res.g2_s)},
              {"coherence_time_ns", res.coherence_time_s * 1e9}};
  ctx.emit("report.json", rep.dump(2) + "\n");
  std::cout << "SBR " << (res.sbr.infinite ? "inf" : std::to_string(res.sbr.value)) << ", detected pairs "
            << r.detected_pair_rate << " /s, success " << 100 * r.success_probability << " %\n";
  return 0;
}

int cmd_fit(Context& ctx, const std::string& input) {
  const auto h = io::histogram_from_table(io::read_csv_file(input), ctx.cfg.sim.duration_s);
  const auto f = fit::fit_wavepacket(h);
  const auto s = detect::measure_sbr(h, f);
  json rep = {{"input", input}, {"fit", fit_json(f)}, {"sbr", sbr_json(s)}};
  ctx.emit("fit.json", rep.dump(2) + "\n");
  if (ctx.cfg.wants("svg")) emit_histogram(ctx, "fit", h, f);
  std::cout << "temporal FWHM " << f.temporal_fwhm * 1e9 << " ns, linewidth " << f.linewidth_hz * 1e-3 << " kHz, SBR "
            << (s.infinite ? "inf" : std::to_string(s.value)) << "\n";
  return 0;
}

int cmd_sweep(Context& ctx, const std::string& mode) {
  analysis::SweepOptions so;
  so.mode = mode == "mc" ? analysis::Mode::kMonteCarlo : analysis::Mode::kTheory;
  so.theory.detector = ctx.cfg.detector;
  so.theory.histogram = ctx.cfg.sim.histogram;
  so.sim.duration_s = ctx.cfg.sim.duration_s;
  so.sim.seed = ctx.cfg.sim.seed;
  so.sim.statistics = ctx.cfg.sim.statistics;
  so.sim.coherence_time_s = ctx.cfg.sim.coherence_time_s;
  so.sim.chunk_s = ctx.cfg.sim.chunk_s;
  so.sim.histogram = ctx.cfg.sim.histogram;
  so.sim.detector = ctx.cfg.detector;
  so.threads = ctx.cfg.numerics.threads;
  const auto table = analysis::sweep(ctx.cfg.grid(), ctx.cfg.calibration, so);

  int failed = 0;
  for (const auto& r : table)
    if (!r.ok()) {
      ++failed;
      print_error("sweep_point", r.error);
    }
  const auto t = io::sweep_table(table);
  if (ctx.cfg.wants("csv")) ctx.emit("sweep.csv", io::write_csv(t));
  if (ctx.cfg.wants("json")) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json o;
      for (size_t c = 0; c < t.columns.size(); ++c) o[t.columns[c]] = row[c];
      rows.push_back(o);
    }
    ctx.emit("sweep.json", rows.dump(1) + "\n");
  }
  if (ctx.cfg.wants("svg")) {
    struct Panel {
      const char* file;
      const char* title;
      const char* y_label;
      double (*get)(const analysis::SweepRecord&);
      bool log_y;
    };
    const Panel panels[] = {
        {"rate.svg", "Pair generation rate", "pairs/s", [](const analysis::SweepRecord& r) { return r.generation_rate; }, false},
        {"sbr.svg", "Signal-to-background ratio", "SBR", [](const analysis::SweepRecord& r) { return r.sbr; }, true},
        {"linewidth.svg", "Linewidth", "kHz", [](const analysis::SweepRecord& r) { return r.linewidth_hz * 1e-3; }, false},
        {"brightness.svg", "Spectral brightness", "pairs/s/MHz", [](const analysis::SweepRecord& r) { return r.brightness; }, false},
        {"s_product.svg", "Brightness x SBR", "pairs/s/MHz", [](const analysis::SweepRecord& r) { return r.s_product; }, false},
        {"background.svg", "Background", "counts/s/bin", [](const analysis::SweepRecord& r) { return r.background_per_bin; }, false},
    };
    for (const auto& pn : panels) {
      std::vector<io::Series> series;
      for (double temp : ctx.cfg.sweep.temperatures) {
        io::Series s{io::format_double(temp) + " C", {}, {}};
        for (const auto& r : analysis::series(table, temp)) {
          const double v = pn.get(r);
          if (!r.ok() || !std::isfinite(v) || (pn.log_y && v <= 0)) continue;
          s.x.push_back(r.op.pump_mw);
          s.y.push_back(v);
        }
        if (!s.x.empty()) series.push_back(std::move(s));
      }
      if (!series.empty()) ctx.emit(pn.file, io::render_figure(series, {pn.title, "pump power (mW)", pn.y_label, pn.log_y}));
    }
  }
  std::cout << table.size() << " points, " << failed << " failed\n";
  return failed == 0 ? 0 : kExitNumeric;
}

int cmd_check(Context& ctx) {
  acceptance::Options opts;
  opts.seed = ctx.cfg.sim.seed;
  io::Table t{{"id", "name", "pass"}, {}};
  int failed = 0;
  for (int id = 1; id <= acceptance::kCriteria; ++id) {
    const auto r = acceptance::run_criterion(id, opts);
    std::cout << acceptance::format_line(r) << std::endl;
    t.rows.push_back({std::to_string(r.id), r.name, r.pass ? "1" : "0"});
    if (!r.pass) ++failed;
  }
  ctx.emit("check.csv", io::write_csv(t));
  std::cout << (acceptance::kCriteria - failed) << "/" << acceptance::kCriteria << " criteria passed\n";
  return failed == 0 ? 0 : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spontaneous four-wave mixing biphoton source model"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "seed for Monte Carlo runs (overrides sim.seed)");
  app.add_option("--out", g.out, "output directory (default: output.dir, then $SFWM_OUT_DIR, then ./out)");
  app.add_option("--mode", g.mode, "sweep mode")->check(CLI::IsMember({"theory", "mc"}));
  app.add_option("--format", g.formats, "output formats (repeatable)")->check(CLI::IsMember({"csv", "json", "svg"}));

  auto* wp = app.add_subcommand("wavepacket", "G2 curve of the configured physics");
  auto* sp = app.add_subcommand("spectrum", "F(delta) and its linewidth");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo run at sim.* operating point");
  std::size_t keep_events = 0;
  sim->add_option("--events", keep_events, "write the first N timestamps of each detected stream");
  auto* fit_cmd = app.add_subcommand("fit", "fit an external histogram CSV (delay_ns, counts)");
  std::string input;
  fit_cmd->add_option("input", input, "histogram CSV")->required()->check(CLI::ExistingFile);
  auto* sw = app.add_subcommand("sweep", "theory or Monte Carlo sweep over the configured grid");
  auto* chk = app.add_subcommand("check", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Context ctx = make_context(g, command);
    int rc = 0;
    if (*wp) rc = cmd_wavepacket(ctx);
    else if (*sp) rc = cmd_spectrum(ctx);
    else if (*sim) rc = cmd_simulate(ctx, keep_events);
    else if (*fit_cmd) rc = cmd_fit(ctx, input);
    else if (*sw) rc = cmd_sweep(ctx, g.mode);
    else if (*chk) rc = cmd_check(ctx);
    ctx.finish();
    return rc;
  } catch (const ConfigError& e) {
    print_error(e.kind(), e.what(), e.key);
    return kExitUsage;
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    print_error("failure", e.what());
    return kExitNumeric;
  }
}
