#include "bilatrr/intervals.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <string>

#include "bilatrr/distributions.hpp"
#include "bilatrr/errors.hpp"
#include "bilatrr/model.hpp"

namespace bilatrr {

namespace {

std::string lower_case(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

void require_fit(const MleResult& mle) {
  if (!mle.converged) throw DegenerateDataError("unconstrained fit is degenerate or did not converge");
}

void check_delta0(double delta0) {
  if (!(delta0 > 0.0) || !std::isfinite(delta0)) throw AdmissibilityError("delta0 must be positive");
}

TestResult make_test(TestMethod method, double statistic, double delta0) {
  const double t = std::max(statistic, 0.0);
  return {method, t, delta0, chi2_upper_tail(1.0, t)};
}

struct Evaluation {
  double statistic = 0.0;
  ParamPoint solution;
};

Evaluation score_at(const Dataset& data, double delta0, std::optional<ParamPoint> start,
                    const FitOptions& fit) {
  const ConstrainedMleResult c = fit_constrained(data, delta0, start, fit);
  const ParamPoint p = c.point();
  // The nuisance scores vanish at an interior constrained maximum, which
  // reduces this to (dl/ddelta)^2 I^{delta delta}; on the edge of the
  // admissible region they do not.
  const ConstrainedScore nuisance = score_constrained(data, delta0, p.pi1, p.r);
  const Eigen::Vector3d u(score_delta(data, p), nuisance.d_pi1, nuisance.d_r);
  return {u.dot(expected_info_inverse(data, p) * u), p};
}

Evaluation lr_at(const Dataset& data, const MleResult& mle, double delta0, std::optional<ParamPoint> start,
                 const FitOptions& fit) {
  const ConstrainedMleResult c = fit_constrained(data, delta0, start, fit);
  return {std::max(2.0 * (mle.loglik - c.loglik), 0.0), c.point()};
}

using Statistic = std::function<Evaluation(double, std::optional<ParamPoint>)>;

// Stepwise search for the delta at which the statistic reaches the critical
// value: walk away from the MLE, and every time the statistic crosses the
// critical value reverse direction and cut the step.
double search_bound(const Statistic& stat, const MleResult& mle, double critical, int outward,
                    const SearchOptions& opts) {
  double delta = mle.delta_hat;
  double step = opts.initial_step;
  int dir = outward;
  bool crossed = false;
  ParamPoint warm = mle.point();
  double in_delta = mle.delta_hat;
  double in_stat = 0.0;
  double out_delta = 0.0;
  double out_stat = 0.0;

  while (step >= opts.min_step) {
    const double next = delta + dir * step;
    if (next <= opts.min_delta) {
      step *= opts.shrink;
      continue;
    }
    if (next > opts.max_delta) throw SearchError("bound search left the admissible delta range");
    std::optional<ParamPoint> start = opts.strict ? std::optional<ParamPoint>(mle.point()) : warm;
    Evaluation e;
    try {
      e = stat(next, start);
    } catch (const ConvergenceError&) {
      if (opts.strict) throw;
      e = stat(next, mle.point());
    }
    delta = next;
    warm = e.solution;
    const bool beyond = e.statistic > critical;
    if (beyond) {
      out_delta = delta;
      out_stat = e.statistic;
    } else {
      in_delta = delta;
      in_stat = e.statistic;
    }
    if ((dir == outward) == beyond) {
      dir = -dir;
      step *= opts.shrink;
      crossed = true;
    }
  }
  if (!crossed) throw SearchError("statistic never reached the critical value");
  // Linear interpolation across the final bracket.
  if (std::abs(out_delta - in_delta) <= 2.0 * opts.min_step / opts.shrink && out_stat > in_stat) {
    return in_delta + (critical - in_stat) / (out_stat - in_stat) * (out_delta - in_delta);
  }
  return delta;
}

CiResult search_interval(CiMethod method, const Statistic& stat, const MleResult& mle, double alpha,
                         const SearchOptions& opts) {
  check_alpha(alpha);
  require_fit(mle);
  const double critical = chi2_quantile(1.0, 1.0 - alpha);
  CiResult out;
  out.method = method;
  out.alpha = alpha;
  out.delta_hat = mle.delta_hat;
  out.lower = search_bound(stat, mle, critical, -1, opts);
  out.upper = search_bound(stat, mle, critical, +1, opts);
  return out;
}

}  // namespace

std::string_view method_name(CiMethod m) {
  switch (m) {
    case CiMethod::SC: return "SC";
    case CiMethod::PL: return "PL";
    case CiMethod::W: return "W";
    case CiMethod::MV: return "MV";
    case CiMethod::GE: return "GE";
  }
  return "?";
}

std::string_view method_name(TestMethod m) {
  switch (m) {
    case TestMethod::Score: return "score";
    case TestMethod::Lrt: return "lrt";
    case TestMethod::Wald: return "wald";
  }
  return "?";
}

std::optional<CiMethod> parse_ci_method(std::string_view s) {
  const std::string k = lower_case(s);
  if (k == "sc" || k == "score") return CiMethod::SC;
  if (k == "pl" || k == "profile" || k == "lrt") return CiMethod::PL;
  if (k == "w" || k == "wald") return CiMethod::W;
  if (k == "mv" || k == "mover") return CiMethod::MV;
  if (k == "ge" || k == "gee") return CiMethod::GE;
  return std::nullopt;
}

TestResult score_stat(const Dataset& data, const MleResult& mle, double delta0,
                      std::optional<ParamPoint> start, const FitOptions& fit) {
  check_delta0(delta0);
  require_fit(mle);
  return make_test(TestMethod::Score, score_at(data, delta0, start ? start : mle.point(), fit).statistic,
                   delta0);
}

TestResult lr_stat(const Dataset& data, const MleResult& mle, double delta0, std::optional<ParamPoint> start,
                   const FitOptions& fit) {
  check_delta0(delta0);
  require_fit(mle);
  return make_test(TestMethod::Lrt, lr_at(data, mle, delta0, start ? start : mle.point(), fit).statistic,
                   delta0);
}

TestResult wald_stat(const Dataset& data, const MleResult& mle, double delta0) {
  check_delta0(delta0);
  require_fit(mle);
  const double var = i_delta_delta(data, mle.point());
  if (!(var > 0.0)) throw SingularInfoError("non-positive variance for delta-hat");
  const double d = mle.delta_hat - delta0;
  return make_test(TestMethod::Wald, d * d / var, delta0);
}

TestResult score_stat(const Dataset& data, double delta0) {
  return score_stat(data, fit_unconstrained(data), delta0);
}

TestResult lr_stat(const Dataset& data, double delta0) { return lr_stat(data, fit_unconstrained(data), delta0); }

TestResult wald_stat(const Dataset& data, double delta0) {
  return wald_stat(data, fit_unconstrained(data), delta0);
}

CiResult ci_score(const Dataset& data, const MleResult& mle, double alpha, const SearchOptions& opts) {
  const Statistic stat = [&](double d, std::optional<ParamPoint> start) {
    return score_at(data, d, start, opts.fit);
  };
  return search_interval(CiMethod::SC, stat, mle, alpha, opts);
}

CiResult ci_profile(const Dataset& data, const MleResult& mle, double alpha, const SearchOptions& opts) {
  const Statistic stat = [&](double d, std::optional<ParamPoint> start) {
    return lr_at(data, mle, d, start, opts.fit);
  };
  return search_interval(CiMethod::PL, stat, mle, alpha, opts);
}

CiResult ci_wald(const Dataset& data, const MleResult& mle, double alpha) {
  check_alpha(alpha);
  require_fit(mle);
  const double var = i_delta_delta(data, mle.point());
  if (!(var > 0.0)) throw SingularInfoError("non-positive variance for delta-hat");
  const double half = two_sided_z(alpha) * std::sqrt(var);
  return {CiMethod::W, mle.delta_hat, std::max(0.0, mle.delta_hat - half), mle.delta_hat + half, alpha};
}

CiResult ci_score(const Dataset& data, double alpha, const SearchOptions& opts) {
  return ci_score(data, fit_unconstrained(data, opts.fit), alpha, opts);
}

CiResult ci_profile(const Dataset& data, double alpha, const SearchOptions& opts) {
  return ci_profile(data, fit_unconstrained(data, opts.fit), alpha, opts);
}

CiResult ci_wald(const Dataset& data, double alpha) { return ci_wald(data, fit_unconstrained(data), alpha); }

CiResult ci_mover(const Dataset& data, double alpha) {
  check_alpha(alpha);
  const double z = two_sided_z(alpha);
  const double z2 = z * z;
  double est[2];
  double lo[2];
  double hi[2];
  for (int i = 0; i < 2; ++i) {
    const GroupCounts& g = data.group(i + 1);
    if (!g.valid()) throw DomainError("negative count");
    const double n = static_cast<double>(g.organs()) + z2;
    const double p = (static_cast<double>(g.responses()) + 0.5 * z2) / n;
    const double half = z * std::sqrt(p * (1.0 - p) / n);
    est[i] = p;
    lo[i] = std::max(p - half, 0.0);
    hi[i] = std::min(p + half, 1.0);
    if (!(lo[i] > 0.0)) throw DomainError("adjusted lower limit is zero in group " + std::to_string(i + 1));
  }
  const double centre = std::log(est[1] / est[0]);
  const double down = std::hypot(std::log(est[1] / lo[1]), std::log(hi[0] / est[0]));
  const double up = std::hypot(std::log(hi[1] / est[1]), std::log(est[0] / lo[0]));
  return {CiMethod::MV, est[1] / est[0], std::exp(centre - down), std::exp(centre + up), alpha};
}

CiResult ci_gee(const Dataset& data, double alpha) {
  check_alpha(alpha);
  const double z = two_sided_z(alpha);
  double pi[2];
  double var = 0.0;
  for (int i = 0; i < 2; ++i) {
    const GroupCounts& g = data.group(i + 1);
    if (!g.valid()) throw DomainError("negative count");
    if (g.responses() <= 0) throw DomainError("group " + std::to_string(i + 1) + " has no responses");
    const double p = static_cast<double>(g.responses()) / static_cast<double>(g.organs());
    const double y = static_cast<double>(g.responses());
    const double q = 1.0 - 2.0 * p;
    const double s = 2.0 - 2.0 * p;
    var += (4.0 * p * p * static_cast<double>(g.m0) + q * q * static_cast<double>(g.m1) +
            s * s * static_cast<double>(g.m2) + p * p * static_cast<double>(g.n0) +
            (1.0 - p) * (1.0 - p) * static_cast<double>(g.n1)) /
           (y * y);
    pi[i] = p;
  }
  const double delta = pi[1] / pi[0];
  const double half = z * std::sqrt(var);
  return {CiMethod::GE, delta, std::exp(std::log(delta) - half), std::exp(std::log(delta) + half), alpha};
}

Analysis analyze_all(const Dataset& data, double alpha, double delta0, const std::vector<CiMethod>& methods,
                     const SearchOptions& opts) {
  Analysis out;
  if (methods.empty()) return out;
  const bool wants_mle = std::any_of(methods.begin(), methods.end(), [](CiMethod m) {
    return m == CiMethod::SC || m == CiMethod::PL || m == CiMethod::W;
  });
  if (wants_mle) {
    try {
      out.mle = fit_unconstrained(data, opts.fit);
    } catch (const Error& e) {
      out.mle_error = e.what();
    }
  }

  auto run_ci = [&](CiMethod m) {
    CiOutcome o{m, std::nullopt, {}};
    try {
      switch (m) {
        case CiMethod::MV: o.result = ci_mover(data, alpha); break;
        case CiMethod::GE: o.result = ci_gee(data, alpha); break;
        default:
          if (!out.mle) throw DegenerateDataError(out.mle_error);
          if (m == CiMethod::SC) o.result = ci_score(data, *out.mle, alpha, opts);
          if (m == CiMethod::PL) o.result = ci_profile(data, *out.mle, alpha, opts);
          if (m == CiMethod::W) o.result = ci_wald(data, *out.mle, alpha);
      }
    } catch (const Error& e) {
      o.error = e.what();
    }
    out.intervals.push_back(std::move(o));
  };

  auto run_test = [&](TestMethod t) {
    TestOutcome o{t, std::nullopt, {}};
    try {
      if (!out.mle) throw DegenerateDataError(out.mle_error);
      switch (t) {
        case TestMethod::Score: o.result = score_stat(data, *out.mle, delta0, std::nullopt, opts.fit); break;
        case TestMethod::Lrt: o.result = lr_stat(data, *out.mle, delta0, std::nullopt, opts.fit); break;
        case TestMethod::Wald: o.result = wald_stat(data, *out.mle, delta0); break;
      }
    } catch (const Error& e) {
      o.error = e.what();
    }
    out.tests.push_back(std::move(o));
  };

  for (CiMethod m : methods) run_ci(m);
  for (CiMethod m : methods) {
    if (m == CiMethod::SC) run_test(TestMethod::Score);
    if (m == CiMethod::PL) run_test(TestMethod::Lrt);
    if (m == CiMethod::W) run_test(TestMethod::Wald);
  }
  return out;
}

}  // namespace bilatrr
