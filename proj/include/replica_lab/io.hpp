#pragma once

#include "json.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace replica_lab {

/// "0.1.0-g<git describe>" of the build.
std::string version_string();

/// %.12g, with inf/-inf/nan spelled out.
std::string format_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);
  /// Numeric cells in column order.
  void add_numeric_row(const std::vector<double>& cells);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::vector<double> numeric_column(const std::string& name) const;

  /// Optional comment lines are written first, each prefixed with "# ".
  void write(std::ostream& os, const std::vector<std::string>& comments = {}) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// {config, version, results}.
nlohmann::json json_envelope(const nlohmann::json& config, const nlohmann::json& results);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartLabels {
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Axes, ticks, one polyline per series and a legend. Non-finite points break the line.
void write_svg_line_chart(std::ostream& os, const std::vector<Series>& series, const ChartLabels& labels);

}  // namespace replica_lab
