#include "sfwm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "sfwm/error.hpp"

namespace sfwm::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw InvalidArgument("not a number: \"" + std::string(s) + "\"");
  return v;
}

int Table::column(std::string_view name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> Table::numbers(std::string_view name) const {
  const int c = column(name);
  if (c < 0) throw InvalidArgument("missing column " + std::string(name));
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(parse_double(r.at(c)));
  return v;
}

std::string write_csv(const Table& t) {
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
  return out;
}

Table read_csv(std::string_view text) {
  Table t;
  bool header = true;
  while (!text.empty()) {
    const size_t nl = text.find('\n');
    std::string_view ln = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!ln.empty() && ln.back() == '\r') ln.remove_suffix(1);
    if (ln.empty() || ln.front() == '#') continue;
    std::vector<std::string> cells;
    size_t start = 0;
    for (;;) {
      const size_t comma = ln.find(',', start);
      std::string_view cell = ln.substr(start, comma == std::string_view::npos ? ln.npos : comma - start);
      while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
      while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
      cells.emplace_back(cell);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (header) {
      t.columns = std::move(cells);
      header = false;
    } else {
      if (cells.size() != t.columns.size())
        throw InvalidArgument("csv row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(cells.size()) +
                              " cells, header has " + std::to_string(t.columns.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (header) throw InvalidArgument("csv: empty input");
  return t;
}

Table read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_csv(ss.str());
}

Table curve_table(const std::vector<double>& x, const std::vector<double>& values,
                  const std::vector<std::pair<std::string, double>>& constants) {
  Table t;
  t.columns = {"x", "value"};
  for (const auto& c : constants) t.columns.push_back(c.first);
  for (size_t i = 0; i < x.size(); ++i) {
    std::vector<std::string> r = {format_double(x[i]), format_double(values[i])};
    for (const auto& c : constants) r.push_back(format_double(c.second));
    t.rows.push_back(std::move(r));
  }
  return t;
}

Table histogram_table(const CoincidenceHistogram& h) {
  Table t;
  t.columns = {"delay_ns", "counts"};
  for (size_t i = 0; i < h.counts.size(); ++i)
    t.rows.push_back({format_double(h.bin_center(static_cast<int>(i)) * 1e9), std::to_string(h.counts[i])});
  return t;
}

CoincidenceHistogram histogram_from_table(const Table& t, double duration_s) {
  const auto d = t.numbers("delay_ns");
  const auto c = t.numbers("counts");
  if (d.size() < 2) throw InvalidArgument("histogram needs at least 2 bins");
  CoincidenceHistogram h;
  const double bin_ns = (d.back() - d.front()) / static_cast<double>(d.size() - 1);
  if (!(bin_ns > 0)) throw InvalidArgument("histogram delays must increase");
  for (size_t i = 1; i < d.size(); ++i)
    if (std::abs(d[i] - d[i - 1] - bin_ns) > 1e-6 * bin_ns) throw InvalidArgument("histogram delays must be uniform");
  h.bin_width_s = bin_ns * 1e-9;
  h.window_s = h.bin_width_s * static_cast<double>(d.size());
  h.start_s = (d.front() - 0.5 * bin_ns) * 1e-9;
  h.duration_s = duration_s;
  for (double v : c) {
    if (!(v >= 0) || v != std::floor(v)) throw InvalidArgument("histogram counts must be non-negative integers");
    h.counts.push_back(static_cast<std::uint64_t>(v));
  }
  return h;
}

Table sweep_table(const std::vector<analysis::SweepRecord>& records) {
  Table t;
  t.columns = {"pump_mw", "temp_c",  "od",         "rate_pairs_s",       "linewidth_khz", "sbr", "brightness_pairs_s_mhz",
               "s_product", "background_per_bin", "r_t", "r_s", "mode", "seed"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : records) {
    const auto v = [&](double x) { return format_double(r.ok() ? x : nan); };
    t.rows.push_back({format_double(r.op.pump_mw), format_double(r.op.temp_c), format_double(r.op.od_measured),
                      v(r.generation_rate), v(r.linewidth_hz * 1e-3), v(r.sbr), v(r.brightness), v(r.s_product),
                      v(r.background_per_bin), v(r.r_t), v(r.r_s), analysis::to_string(r.mode),
                      std::to_string(r.seed)});
  }
  return t;
}

std::vector<analysis::SweepRecord> sweep_from_table(const Table& t) {
  std::vector<analysis::SweepRecord> out;
  const auto col = [&](const char* name) {
    const int c = t.column(name);
    if (c < 0) throw InvalidArgument(std::string("missing column ") + name);
    return c;
  };
  const int cp = col("pump_mw"), ct = col("temp_c"), co = col("od"), cr = col("rate_pairs_s"),
            cl = col("linewidth_khz"), cs = col("sbr"), cb = col("brightness_pairs_s_mhz"), cx = col("s_product"),
            cg = col("background_per_bin"), crt = col("r_t"), crs = col("r_s"), cm = col("mode"), cd = col("seed");
  for (const auto& row : t.rows) {
    analysis::SweepRecord r;
    r.op.pump_mw = parse_double(row[cp]);
    r.op.temp_c = parse_double(row[ct]);
    r.op.od_measured = parse_double(row[co]);
    r.generation_rate = parse_double(row[cr]);
    r.linewidth_hz = parse_double(row[cl]) * 1e3;
    r.sbr = parse_double(row[cs]);
    r.sbr_infinite = std::isinf(r.sbr);
    r.brightness = parse_double(row[cb]);
    r.s_product = parse_double(row[cx]);
    r.background_per_bin = parse_double(row[cg]);
    r.r_t = parse_double(row[crt]);
    r.r_s = parse_double(row[crs]);
    if (row[cm] == "theory") {
      r.mode = analysis::Mode::kTheory;
    } else if (row[cm] == "mc") {
      r.mode = analysis::Mode::kMonteCarlo;
    } else {
      throw InvalidArgument("unknown mode " + row[cm]);
    }
    r.seed = std::stoull(row[cd]);
    if (std::isnan(r.generation_rate)) r.error = "failed";
    out.push_back(r);
  }
  return out;
}

}  // namespace sfwm::io
