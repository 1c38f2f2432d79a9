#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace memcap {

/// Line-oriented CSV writer.  Floating values are printed with %.*g so that
/// the default precision (17) round-trips IEEE-754 doubles exactly.
class CsvWriter {
public:
  CsvWriter(const std::string& path, int precision = 17);
  void header(std::initializer_list<const char*> names);
  void header(const std::vector<std::string>& names);
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  /// Mixed row: doubles plus a trailing string cell.
  void row(const std::vector<double>& values, const std::string& label);
  void raw_row(const std::vector<std::string>& cells);

private:
  std::ofstream out_;
  int precision_;
  std::string fmt(double v) const;
};

std::string format_double(double v, int precision = 17);

/// Minimal CSV reader (no quoting), used for round-trip checks and the CLI.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

void ensure_directory(const std::string& path);

// ---------------------------------------------------------------------------
// Small self-contained SVG line plots for experiment artifacts.

struct SvgSeries {
  std::string name;
  const std::vector<double>* x = nullptr;
  const std::vector<double>* y = nullptr;
};

void write_svg_lines(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series, int width = 960,
                     int height = 540);

}  // namespace memcap
