#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bilatrr/intervals.hpp"
#include "bilatrr/simharness.hpp"
#include "bilatrr_cli/report.hpp"

namespace bilatrr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitEstimation = 2;

struct AnalyzeOptions {
  std::string data;
  double alpha = 0.05;
  double delta0 = 1.0;
  std::vector<std::string> methods;
  std::string format = "md";
  int precision = 4;
  bool strict_search = false;
  std::string output;
};

struct GofOptions {
  std::string data;
  std::string variant = "both";
  std::string format = "text";
  int precision = 4;
  std::string output;
};

struct SimulateOptions {
  double pi1 = 0.2;
  double delta0 = 1.0;
  double r = 1.0;
  std::int64_t m = 30;
  std::int64_t n = 30;
  std::int64_t reps = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string grid_file;
  std::string sweep_r;
  std::int64_t random = 0;
  std::string pi_range = "0.1:0.4";
  std::string delta_range = "0.5:2.5";
  double margin = 0.02;
  bool paper_grid = false;
  bool strict_search = false;
  std::string format = "csv";
  int precision = 4;
  std::string output;
};

struct CheckOptions {
  std::string data;
  std::string output;
};

/// Display order of the interval methods in reports: SC, PL, W, MV, GE.
std::vector<CiMethod> report_methods(const std::vector<std::string>& names);

/// Fits the data and runs the requested methods. Throws bilatrr::Error when
/// the unconstrained fit fails.
AnalysisReport build_report(const Dataset& data, double alpha, double delta0, const std::vector<CiMethod>& methods,
                            const SearchOptions& search = {});

/// Settings described by the simulate options, validated. Throws
/// bilatrr::Error naming the offending cell and constraint.
std::vector<SimSetting> simulation_settings(const SimulateOptions& o);

std::string simulation_metadata(const SimulateOptions& o);

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err);
int cmd_gof(const GofOptions& o, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err);
/// Validates a count file and writes it back in canonical form.
int cmd_check(const CheckOptions& o, std::ostream& out, std::ostream& err);

}  // namespace bilatrr::cli
