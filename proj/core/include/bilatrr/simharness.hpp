#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bilatrr/intervals.hpp"
#include "bilatrr/rng.hpp"
#include "bilatrr/types.hpp"

namespace bilatrr {

struct SimSetting {
  double pi1 = 0.2;
  double delta0 = 1.0;
  double r = 1.0;
  std::int64_t m = 30;
  std::int64_t n = 30;
  std::int64_t reps = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  /// Mixed into every replication stream so that cells sharing a seed still
  /// draw independent data.
  std::uint64_t cell_index = 0;
};

/// Throws AdmissibilityError or DomainError naming the violated constraint.
void validate(const SimSetting& s);

struct MethodMetrics {
  double ecp = 0.0;
  double miw = 0.0;
  /// Share of non-covering intervals that lie entirely above delta0; empty
  /// when every successful interval covered.
  std::optional<double> rmncp;
  std::int64_t failures = 0;
  std::int64_t successes = 0;
  /// Non-covering intervals lying entirely above / below delta0.
  std::int64_t above = 0;
  std::int64_t below = 0;
};

struct SimMetrics {
  /// Indexed in the order of kAllCiMethods (W, PL, SC, MV, GE).
  std::array<MethodMetrics, 5> methods;

  [[nodiscard]] const MethodMetrics& operator[](CiMethod m) const;
};

struct CellResult {
  SimSetting setting;
  std::optional<SimMetrics> metrics;
  std::string error;
};

/// Key of the random stream used by replication rep of a setting.
std::uint64_t replication_key(const SimSetting& s, std::int64_t rep);

/// Draws one dataset under delta = delta0: multinomial bilateral triples via
/// conditional binomials and binomial unilateral counts, group 1 first.
Dataset generate_dataset(const SimSetting& s, Engine& rng);

/// Runs all replications of one setting. threads == 0 uses the hardware
/// concurrency. Results do not depend on the thread count.
SimMetrics run_cell(const SimSetting& s, unsigned threads = 0, const SearchOptions& search = {});

/// run_cell over a list, in order. A cell whose setting is invalid reports
/// its error and leaves the others unaffected.
std::vector<CellResult> run_grid(const std::vector<SimSetting>& settings, unsigned threads = 0,
                                 const SearchOptions& search = {});

struct RandomSweep {
  std::int64_t count = 1000;
  std::int64_t m = 30;
  std::int64_t n = 30;
  std::int64_t reps = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  double lo_pi = 0.1;
  double hi_pi = 0.4;
  double lo_delta = 0.5;
  double hi_delta = 2.5;
  double margin = 0.02;
};

/// Parameter settings of a random sweep: pi1 and delta0 uniform, delta0
/// redrawn while delta0 * pi1 >= 1 - margin, then R uniform on its
/// admissible range.
std::vector<SimSetting> sample_random_settings(const RandomSweep& sweep);

std::vector<CellResult> run_random(const RandomSweep& sweep, unsigned threads = 0,
                                   const SearchOptions& search = {});

/// The thirteen (pi1, delta0, R) rows of the published coverage tables.
std::vector<SimSetting> paper_grid(std::int64_t m, std::int64_t n, std::int64_t reps, double alpha,
                                   std::uint64_t seed);

/// Settings for R from lo to hi in steps of step (inclusive, rounded to the
/// nearest whole number of steps).
std::vector<SimSetting> r_sweep(const SimSetting& base, double lo, double hi, double step);

}  // namespace bilatrr
