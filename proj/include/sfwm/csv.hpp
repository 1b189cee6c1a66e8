#pragma once
// Plain comma-separated tables. Numbers are written in shortest round-trip form,
// so reading a file back reproduces the doubles bit for bit.

#include <string>
#include <string_view>
#include <vector>

#include "sfwm/analysis.hpp"
#include "sfwm/histogram.hpp"

namespace sfwm::io {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(std::string_view name) const;  // -1 when absent
  std::vector<double> numbers(std::string_view name) const;
};

std::string format_double(double v);
/// Accepts the output of format_double plus "nan", "inf", "-inf".
double parse_double(std::string_view s);

std::string write_csv(const Table& t);
Table read_csv(std::string_view text);
Table read_csv_file(const std::string& path);

/// Columns x, value and optionally extra constant columns.
Table curve_table(const std::vector<double>& x, const std::vector<double>& values,
                  const std::vector<std::pair<std::string, double>>& constants = {});

/// Columns delay_ns, counts.
Table histogram_table(const CoincidenceHistogram& h);
/// Inverse of histogram_table; bin width, window and start are inferred from the centres.
CoincidenceHistogram histogram_from_table(const Table& t, double duration_s = defaults::kDuration);

Table sweep_table(const std::vector<analysis::SweepRecord>& records);
std::vector<analysis::SweepRecord> sweep_from_table(const Table& t);

}  // namespace sfwm::io
