#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bilatrr/estimation.hpp"
#include "bilatrr/types.hpp"

namespace bilatrr {

enum class CiMethod { SC, PL, W, MV, GE };
enum class TestMethod { Score, Lrt, Wald };

inline constexpr CiMethod kAllCiMethods[] = {CiMethod::W, CiMethod::PL, CiMethod::SC, CiMethod::MV,
                                             CiMethod::GE};

std::string_view method_name(CiMethod m);
std::string_view method_name(TestMethod m);
/// Accepts the short codes (SC, PL, W, MV, GE) and the long names (score,
/// profile, wald, mover, gee), case-insensitively.
std::optional<CiMethod> parse_ci_method(std::string_view s);

struct CiResult {
  CiMethod method = CiMethod::SC;
  double delta_hat = 1.0;
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.05;

  [[nodiscard]] double width() const { return upper - lower; }
};

struct TestResult {
  TestMethod method = TestMethod::Score;
  double statistic = 0.0;
  double delta0 = 1.0;
  double p_value = 1.0;
};

struct SearchOptions {
  /// Start every constrained fit of the bound search from the unconstrained
  /// MLE instead of the previous solution.
  bool strict = false;
  double initial_step = 0.1;
  double shrink = 0.1;
  double min_step = 1e-5;
  double min_delta = 1e-6;
  double max_delta = 1e6;
  FitOptions fit;
};

TestResult score_stat(const Dataset& data, double delta0);
TestResult lr_stat(const Dataset& data, double delta0);
TestResult wald_stat(const Dataset& data, double delta0);

/// Statistics against an already fitted unconstrained MLE. The optional
/// start seeds the constrained fit.
TestResult score_stat(const Dataset& data, const MleResult& mle, double delta0,
                      std::optional<ParamPoint> start = std::nullopt, const FitOptions& fit = {});
TestResult lr_stat(const Dataset& data, const MleResult& mle, double delta0,
                   std::optional<ParamPoint> start = std::nullopt, const FitOptions& fit = {});
TestResult wald_stat(const Dataset& data, const MleResult& mle, double delta0);

CiResult ci_score(const Dataset& data, double alpha, const SearchOptions& opts = {});
CiResult ci_profile(const Dataset& data, double alpha, const SearchOptions& opts = {});
CiResult ci_wald(const Dataset& data, double alpha);
CiResult ci_mover(const Dataset& data, double alpha);
CiResult ci_gee(const Dataset& data, double alpha);

CiResult ci_score(const Dataset& data, const MleResult& mle, double alpha, const SearchOptions& opts = {});
CiResult ci_profile(const Dataset& data, const MleResult& mle, double alpha,
                    const SearchOptions& opts = {});
CiResult ci_wald(const Dataset& data, const MleResult& mle, double alpha);

struct CiOutcome {
  CiMethod method = CiMethod::SC;
  std::optional<CiResult> result;
  std::string error;
};

struct TestOutcome {
  TestMethod method = TestMethod::Score;
  std::optional<TestResult> result;
  std::string error;
};

struct Analysis {
  std::optional<MleResult> mle;
  std::string mle_error;
  std::vector<CiOutcome> intervals;
  std::vector<TestOutcome> tests;
};

/// Runs the requested intervals and, for SC, PL and W, the matching test at
/// delta0. Failures are recorded per method.
Analysis analyze_all(const Dataset& data, double alpha, double delta0,
                     const std::vector<CiMethod>& methods = {std::begin(kAllCiMethods),
                                                             std::end(kAllCiMethods)},
                     const SearchOptions& opts = {});

}  // namespace bilatrr
