#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bilatrr/estimation.hpp"
#include "bilatrr/gof.hpp"
#include "bilatrr/intervals.hpp"
#include "bilatrr/simharness.hpp"
#include "bilatrr/types.hpp"

namespace bilatrr::cli {

enum class Format { Csv, Md, Text };

std::optional<Format> parse_format(std::string_view s);

struct ReportRow {
  std::string section;
  std::string name;
  std::optional<double> estimate;
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<double> width;
  std::optional<double> statistic;
  std::optional<int> df;
  std::optional<double> p_value;
  std::string note;
  /// estimate is a count or iteration number, printed without decimals.
  bool integral = false;
};

struct AnalysisReport {
  Dataset data;
  double alpha = 0.05;
  double delta0 = 1.0;
  MleResult mle;
  std::vector<GofResult> gof;
  std::string gof_error;
  /// Interval rows in display order.
  std::vector<CiOutcome> intervals;
  std::vector<TestOutcome> tests;
};

/// Column names of the CSV report, in order.
const std::vector<std::string>& report_columns();

/// Sections data, mle, gof, ci and test, in that order.
std::vector<ReportRow> report_rows(const AnalysisReport& r);

/// CSV: one table with report_columns(). Markdown: one table per section
/// restricted to the columns that section uses.
std::string render_analysis(const AnalysisReport& r, Format format, int precision);

/// variant=paper df=1 G2=0.3871 p=0.5338 X2=0.3867 p=0.5341
std::string gof_line(const GofResult& g, int precision);
std::string render_gof(const std::vector<GofResult>& results, Format format, int precision);

/// pi1, delta0, R, m, n, reps, then ECP, MIW and RMNCP per method in the
/// order W, PL, SC, MV, GE, then the failure count per method, then error.
std::vector<std::string> simulation_columns();
std::vector<std::string> simulation_row(const CellResult& cell, int precision);
/// CSV output starts with a single '#' metadata line.
std::string render_simulation(const std::vector<CellResult>& cells, std::string_view metadata, Format format,
                              int precision);

std::string fixed(double v, int precision);

}  // namespace bilatrr::cli
