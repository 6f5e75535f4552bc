#include "bilatrr/estimation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "bilatrr/errors.hpp"
#include "bilatrr/model.hpp"

namespace bilatrr {

namespace {

// Distance kept from the edge of the admissible pi range.
constexpr double kEdge = 1e-9;
// Smallest R an iterate may take; the open lower end of the R range.
constexpr double kRFloor = 1e-8;
// Smallest probability of any populated cell for a strictly interior iterate.
constexpr double kInteriorProb = 1e-9;
// Cells below this at convergence mark the fit as sitting on the boundary.
constexpr double kBoundaryProb = 1e-6;
constexpr double kScoreTol = 1e-6;
constexpr int kMaxHalvings = 30;

double as_real(std::int64_t v) { return static_cast<double>(v); }

struct PiSolution {
  double pi = 0.0;
  bool at_edge = false;
};

// Score of one group in pi, used by the bisection fallback. Next to the
// edge of the range a vanishing cell may make it undefined; the caller then
// supplies the limiting sign.
double pi_score(const GroupCounts& g, double pi, double r) { return group_score_pi(g, pi, r); }

double pi_score_or(const GroupCounts& g, double pi, double r, double fallback) {
  try {
    return pi_score(g, pi, r);
  } catch (const DomainError&) {
    return fallback;
  }
}

double horner(const std::array<double, 5>& c, double x) {
  return (((c[4] * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0];
}

double horner_derivative(const std::array<double, 5>& c, double x) {
  return ((4.0 * c[4] * x + 3.0 * c[3]) * x + 2.0 * c[2]) * x + c[1];
}

std::vector<double> real_quartic_roots(const std::array<double, 5>& c) {
  Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
  for (int i = 1; i < 4; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < 4; ++i) companion(i, 3) = -c[i] / c[4];
  const Eigen::EigenSolver<Eigen::Matrix4d> solver(companion, false);
  std::vector<double> roots;
  for (const auto& z : solver.eigenvalues()) {
    if (std::abs(z.imag()) > 1e-7 * std::max(1.0, std::abs(z.real()))) continue;
    double x = z.real();
    for (int k = 0; k < 3; ++k) {
      const double dp = horner_derivative(c, x);
      if (dp == 0.0) break;
      x -= horner(c, x) / dp;
    }
    roots.push_back(x);
  }
  return roots;
}

PiSolution solve_pi_detail(const GroupCounts& g, double r) {
  if (!g.valid()) throw DomainError("negative count");
  if (!g.informative()) {
    throw DegenerateDataError("group needs at least one responding and one non-responding organ");
  }
  if (!(r > 0.0) || !std::isfinite(r)) throw AdmissibilityError("R must be positive");
  const double lo = kEdge;
  const double hi = max_admissible_pi(r) - kEdge;
  if (!(hi > lo)) throw NoRootError("admissible pi range is empty for R=" + std::to_string(r));

  PiSolution best{hi, true};
  double best_ll = -std::numeric_limits<double>::infinity();
  try {
    best_ll = group_log_likelihood(g, hi, r);
  } catch (const DomainError&) {
  }
  bool found_interior = false;
  auto consider = [&](double pi) {
    if (!(pi > lo && pi < hi)) return;
    double ll = 0.0;
    try {
      ll = group_log_likelihood(g, pi, r);
    } catch (const DomainError&) {
      return;
    }
    found_interior = true;
    if (ll > best_ll) {
      best_ll = ll;
      best = {pi, false};
    }
  };
  for (double root : real_quartic_roots(detail::quartic_coefficients(g, r))) consider(root);

  if (!found_interior) {
    const double inf = std::numeric_limits<double>::infinity();
    const double f_lo = pi_score_or(g, lo, r, inf);
    const double f_hi = pi_score_or(g, hi, r, -inf);
    if (f_lo > 0.0 && f_hi < 0.0) {
      double a = lo;
      double b = hi;
      for (int k = 0; k < 200 && b - a > 1e-15; ++k) {
        const double mid = 0.5 * (a + b);
        (pi_score(g, mid, r) > 0.0 ? a : b) = mid;
      }
      consider(0.5 * (a + b));
    } else if (!(f_hi >= 0.0)) {
      throw NoRootError("no admissible stationary point for pi at R=" + std::to_string(r));
    }
  }
  if (!std::isfinite(best_ll)) throw NoRootError("no admissible maximizer for pi at R=" + std::to_string(r));
  return best;
}

// d/dR of the edge of the admissible pi range.
double max_pi_slope(double r) {
  if (r >= 1.0) return -1.0 / (r * r);
  const double s = std::sqrt(1.0 - r);
  return 1.0 / (2.0 * s * (1.0 + s) * (1.0 + s));
}

// Log-likelihood profiled over the response rates at fixed R. Groups that
// are not informative are left out and their rate pinned to its limit.
struct Profile {
  double r = 1.0;
  std::array<double, 2> pi{};
  std::array<bool, 2> edge{};
  double loglik = 0.0;
};

Profile evaluate_profile(const std::array<const GroupCounts*, 2>& groups,
                         const std::array<bool, 2>& active, double r) {
  Profile p;
  p.r = r;
  for (int i = 0; i < 2; ++i) {
    const GroupCounts& g = *groups[i];
    if (active[i]) {
      const PiSolution s = solve_pi_detail(g, r);
      p.pi[i] = s.pi;
      p.edge[i] = s.at_edge;
      p.loglik += group_log_likelihood(g, s.pi, r);
    } else {
      p.pi[i] = g.responses() == 0 ? 0.0 : max_admissible_pi(r);
      p.edge[i] = true;
    }
  }
  return p;
}

// Score and scoring weight for R along the profile. A rate pinned to the
// edge moves with R, so its contribution uses the total derivative and the
// information in the direction of the edge curve.
void profile_score(const std::array<const GroupCounts*, 2>& groups, const std::array<bool, 2>& active,
                   const Profile& p, double& score, double& info) {
  score = 0.0;
  info = 0.0;
  for (int i = 0; i < 2; ++i) {
    if (!active[i]) continue;
    const GroupCounts& g = *groups[i];
    if (p.edge[i]) {
      const double slope = max_pi_slope(p.r);
      score += group_score_r(g, p.pi[i], p.r) + slope * group_score_pi(g, p.pi[i], p.r);
      const Eigen::Vector2d dir(slope, 1.0);
      info += dir.dot(group_info(g, p.pi[i], p.r) * dir);
    } else {
      score += group_score_r(g, p.pi[i], p.r);
      info += group_info_r_r(g, p.pi[i], p.r);
    }
  }
}

double initial_r(const Dataset& data, const std::array<bool, 2>& active) {
  double rate_sq = 0.0;
  int used = 0;
  double pi_max = 0.0;
  for (int i = 0; i < 2; ++i) {
    if (!active[i]) continue;
    const GroupCounts& g = data.group(i + 1);
    const double pi0 = std::clamp(as_real(g.responses()) / as_real(g.organs()), 1e-4, 1.0 - 1e-4);
    rate_sq += pi0 * pi0;
    pi_max = std::max(pi_max, pi0);
    ++used;
  }
  const double m_total = as_real(data.group1.bilateral_total() + data.group2.bilateral_total());
  const double m2_total = as_real(data.group1.m2 + data.group2.m2);
  double r0 = 1.0;
  if (m_total > 0.0 && m2_total > 0.0 && used > 0) r0 = (m2_total / m_total) / (rate_sq / used);
  const RRange range = admissible_r_range(pi_max, pi_max);
  const double lower = std::max(range.lower, kRFloor) + 1e-6 * range.upper;
  return std::clamp(r0, lower, range.upper * (1.0 - 1e-6));
}

double min_populated_prob(const Dataset& data, double delta0, double pi1, double r) {
  double smallest = std::numeric_limits<double>::infinity();
  const std::array<double, 2> pis{pi1, delta0 * pi1};
  for (int i = 0; i < 2; ++i) {
    const GroupCounts& g = data.group(i + 1);
    const double pi = pis[i];
    if (g.bilateral_total() > 0) {
      const double p0 = r * pi * pi - 2.0 * pi + 1.0;
      const double p1 = 2.0 * pi * (1.0 - r * pi);
      const double p2 = r * pi * pi;
      smallest = std::min({smallest, p0, p1, p2});
    }
    if (g.organs() > 0) smallest = std::min({smallest, pi, 1.0 - pi});
  }
  return smallest;
}

bool strictly_interior(const Dataset& data, double delta0, double pi1, double r) {
  if (!(pi1 > 0.0 && delta0 * pi1 < 1.0 && r >= kRFloor) || !std::isfinite(r)) return false;
  return min_populated_prob(data, delta0, pi1, r) >= kInteriorProb;
}

constexpr int kStallIterations = 100;

struct ProfileFit {
  double pi1 = 0.0;
  double r = 1.0;
  double loglik = -std::numeric_limits<double>::infinity();
};

// Direct maximization of the constrained likelihood: Brent over log R of the
// likelihood maximized by Brent over pi1. Used when scoring stalls because
// the expected information badly overstates the curvature.
ProfileFit constrained_by_profile(const Dataset& data, double delta0) {
  constexpr int bits = std::numeric_limits<double>::digits / 2;
  const double huge = std::numeric_limits<double>::max();
  auto best_pi1 = [&](double r) {
    const double hi = max_admissible_pi(r) / std::max(1.0, delta0) - kEdge;
    auto neg = [&](double pi1) {
      try {
        return -log_likelihood(data, {delta0, pi1, r});
      } catch (const Error&) {
        return huge;
      }
    };
    return boost::math::tools::brent_find_minima(neg, kEdge, hi, bits);
  };
  auto neg_profile = [&](double log_r) { return best_pi1(std::exp(log_r)).second; };
  const auto outer = boost::math::tools::brent_find_minima(neg_profile, std::log(kRFloor), std::log(1e3), bits);
  ProfileFit fit;
  fit.r = std::exp(outer.first);
  const auto inner = best_pi1(fit.r);
  fit.pi1 = inner.first;
  if (inner.second < huge) fit.loglik = -inner.second;
  return fit;
}

}  // namespace

namespace detail {

std::array<double, 5> quartic_coefficients(const GroupCounts& g, double r) {
  const double m0 = as_real(g.m0);
  const double m1 = as_real(g.m1);
  const double m2 = as_real(g.m2);
  const double n0 = as_real(g.n0);
  const double n1 = as_real(g.n1);
  const double organs = 2.0 * (m0 + m1 + m2) + n0 + n1;
  return {
      -(m1 + 2.0 * m2 + n1),
      2.0 * m0 + (2.0 * r + 3.0) * m1 + (2.0 * r + 6.0) * m2 + n0 + (r + 3.0) * n1,
      -((4.0 * r + 2.0) * m0 + (7.0 * r + 2.0) * m1 + (8.0 * r + 4.0) * m2 + (r + 2.0) * n0 +
        (4.0 * r + 2.0) * n1),
      r * (2.0 * r * (m0 + m1 + m2) + r * n1 + 4.0 * m0 + 5.0 * m1 + 6.0 * m2 + 3.0 * n0 + 3.0 * n1),
      -r * r * organs,
  };
}

ParamPoint project_interior(double delta0, double pi1, double r) {
  constexpr double margin = 1e-4;
  const double scale = std::max(1.0, delta0);
  const double p = std::clamp(pi1, margin / scale, (1.0 - margin) / scale);
  const RRange range = admissible_r_range(p, delta0 * p);
  const double lower = std::max(range.lower, kRFloor) + margin * (range.upper - range.lower);
  const double upper = range.upper - margin * (range.upper - range.lower);
  return {delta0, p, std::clamp(r, lower, upper)};
}

}  // namespace detail

double solve_pi_given_r(const GroupCounts& g, double r) { return solve_pi_detail(g, r).pi; }

MleResult fit_unconstrained(const Dataset& data, const FitOptions& opts) {
  if (!data.group1.valid() || !data.group2.valid()) throw DomainError("negative count");
  const std::array<const GroupCounts*, 2> groups{&data.group1, &data.group2};
  const std::array<bool, 2> active{data.group1.informative(), data.group2.informative()};
  if (!active[0] && !active[1]) {
    throw DegenerateDataError("neither group has both responding and non-responding organs");
  }
  const bool degenerate = !(active[0] && active[1]);

  MleResult out;
  Profile cur = evaluate_profile(groups, active, initial_r(data, active));
  if (opts.record_trace) out.trace.push_back(cur.loglik);

  bool done = false;
  int iter = 0;
  while (iter < opts.max_iter) {
    ++iter;
    double score = 0.0;
    double info = 0.0;
    profile_score(groups, active, cur, score, info);
    if (std::abs(score) < kScoreTol) {
      done = true;
      break;
    }
    if (!(info > 0.0) || !std::isfinite(info)) throw SingularInfoError("non-positive information for R");

    const double full = score / info;
    double step = full;
    bool accepted = false;
    Profile next;
    for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
      const double r_new = std::max(cur.r + step, kRFloor);
      if (r_new == cur.r) break;
      try {
        next = evaluate_profile(groups, active, r_new);
      } catch (const NoRootError&) {
        continue;
      }
      if (next.loglik >= cur.loglik - 1e-12 * (1.0 + std::abs(cur.loglik))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No admissible ascent step remains: the profile maximum is reached to
      // working precision, possibly against the R floor or a rate edge.
      done = true;
      break;
    }
    if (step == full) {
      // With an empty cell the expected information can far exceed the
      // curvature of the likelihood, so longer steps are tried as well.
      for (int k = 0; k < kMaxHalvings && next.r > kRFloor; ++k) {
        step *= 2.0;
        Profile longer;
        try {
          longer = evaluate_profile(groups, active, std::max(cur.r + step, kRFloor));
        } catch (const NoRootError&) {
          break;
        }
        if (!(longer.loglik > next.loglik)) break;
        next = longer;
      }
    }
    const double moved = std::abs(next.r - cur.r);
    cur = next;
    if (opts.record_trace) out.trace.push_back(cur.loglik);
    const bool pinned = cur.r <= kRFloor || (active[0] && cur.edge[0]) || (active[1] && cur.edge[1]);
    if (moved < opts.tol && pinned) {
      done = true;
      break;
    }
  }
  if (!done) {
    throw ConvergenceError("unconstrained fit did not converge in " + std::to_string(opts.max_iter) +
                           " iterations");
  }

  out.pi1_hat = cur.pi[0];
  out.pi2_hat = cur.pi[1];
  out.r_hat = cur.r;
  out.delta_hat = cur.pi[1] / cur.pi[0];
  out.loglik = cur.loglik;
  out.iterations = iter;
  out.at_boundary = cur.r <= kRFloor * 1.0001 || (active[0] && cur.edge[0]) ||
                    (active[1] && cur.edge[1]) || degenerate;
  out.converged = !degenerate;
  return out;
}

ConstrainedMleResult fit_constrained(const Dataset& data, double delta0, std::optional<ParamPoint> init,
                                     const FitOptions& opts) {
  if (!(delta0 > 0.0) || !std::isfinite(delta0)) {
    throw AdmissibilityError("delta0 must be a positive finite number");
  }
  if (!data.group1.informative() || !data.group2.informative()) {
    throw DegenerateDataError("constrained fit needs both groups to have responses and non-responses");
  }
  if (!init) {
    const MleResult mle = fit_unconstrained(data, opts);
    init = mle.point();
  }
  ParamPoint start = detail::project_interior(delta0, init->pi1, init->r);
  if (min_populated_prob(data, delta0, start.pi1, start.r) < kBoundaryProb) {
    start.r = 1.0;
    start.pi1 = std::min(start.pi1, 0.5 / std::max(1.0, delta0));
  }

  ConstrainedMleResult out;
  out.delta0 = delta0;
  double pi1 = start.pi1;
  double r = start.r;
  double ll = log_likelihood(data, {delta0, pi1, r});
  if (opts.record_trace) out.trace.push_back(ll);

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    if (iter > kStallIterations) {
      const ProfileFit direct = constrained_by_profile(data, delta0);
      if (direct.loglik > ll) {
        pi1 = direct.pi1;
        r = direct.r;
        ll = direct.loglik;
        if (opts.record_trace) out.trace.push_back(ll);
      }
      out.converged = true;
      out.iterations = iter;
      break;
    }
    const ConstrainedScore score = score_constrained(data, delta0, pi1, r);
    const Eigen::Vector2d grad(score.d_pi1, score.d_r);
    if (grad.cwiseAbs().maxCoeff() < kScoreTol) {
      out.converged = true;
      out.iterations = iter;
      break;
    }
    const Eigen::Vector2d full_step = invert_2x2(info_constrained(data, delta0, pi1, r)) * grad;

    double lambda = 1.0;
    bool accepted = false;
    double pi1_new = pi1;
    double r_new = r;
    double ll_new = ll;
    for (int h = 0; h <= kMaxHalvings; ++h, lambda *= 0.5) {
      pi1_new = pi1 + lambda * full_step(0);
      r_new = r + lambda * full_step(1);
      if (!strictly_interior(data, delta0, pi1_new, r_new)) continue;
      ll_new = log_likelihood(data, {delta0, pi1_new, r_new});
      if (ll_new >= ll - 1e-12 * (1.0 + std::abs(ll))) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.converged = true;
      out.iterations = iter;
      break;
    }
    if (lambda == 1.0) {
      // Against an edge whose cell is empty the information blows up and
      // full steps shrink geometrically; extend the step while it still pays.
      for (int k = 0; k < kMaxHalvings; ++k) {
        lambda *= 2.0;
        const double pi1_try = pi1 + lambda * full_step(0);
        const double r_try = r + lambda * full_step(1);
        if (!strictly_interior(data, delta0, pi1_try, r_try)) break;
        const double ll_try = log_likelihood(data, {delta0, pi1_try, r_try});
        if (!(ll_try > ll_new)) break;
        pi1_new = pi1_try;
        r_new = r_try;
        ll_new = ll_try;
      }
    }
    const bool settled = std::abs(pi1_new - pi1) < opts.tol && std::abs(r_new - r) < opts.tol;
    pi1 = pi1_new;
    r = r_new;
    ll = ll_new;
    if (opts.record_trace) out.trace.push_back(ll);
    const bool on_edge = min_populated_prob(data, delta0, pi1, r) < kBoundaryProb;
    if (settled && on_edge) {
      out.converged = true;
      out.iterations = iter;
      break;
    }
  }
  if (!out.converged) {
    throw ConvergenceError("constrained fit at delta0=" + std::to_string(delta0) +
                           " did not converge in " + std::to_string(opts.max_iter) + " iterations");
  }
  out.pi1_hat = pi1;
  out.r_hat = r;
  out.loglik = ll;
  out.at_boundary = min_populated_prob(data, delta0, pi1, r) < kBoundaryProb || r <= kRFloor * 1.0001;
  return out;
}

}  // namespace bilatrr
