#pragma once

#include <array>
#include <optional>
#include <vector>

#include "bilatrr/types.hpp"

namespace bilatrr {

struct FitOptions {
  /// Convergence tolerance on successive parameter iterates.
  double tol = 1e-6;
  int max_iter = 500;
  /// Record the log-likelihood after every accepted iteration.
  bool record_trace = false;
};

/// Unconstrained maximum-likelihood estimates of (pi1, pi2, R).
struct MleResult {
  double pi1_hat = 0.0;
  double pi2_hat = 0.0;
  double r_hat = 1.0;
  double delta_hat = 1.0;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  /// The maximum sits on (or within the clamp margin of) the edge of the
  /// admissible region, so the score need not vanish there.
  bool at_boundary = false;
  std::vector<double> trace;

  [[nodiscard]] ParamPoint point() const { return {delta_hat, pi1_hat, r_hat}; }
};

/// Maximum-likelihood estimates of (pi1, R) with delta fixed at delta0.
struct ConstrainedMleResult {
  double delta0 = 1.0;
  double pi1_hat = 0.0;
  double r_hat = 1.0;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  bool at_boundary = false;
  std::vector<double> trace;

  [[nodiscard]] double pi2_hat() const { return delta0 * pi1_hat; }
  [[nodiscard]] ParamPoint point() const { return {delta0, pi1_hat, r_hat}; }
};

/// Maximizer of one group's log-likelihood over pi at fixed R.
///
/// The stationary points are the real roots of a quartic obtained by clearing
/// the denominators of dl/dpi = 0; the admissible root with the largest
/// log-likelihood wins. When the likelihood keeps increasing up to the edge
/// of the admissible pi range (possible only when the vanishing cell is
/// empty) the clamped edge is returned. Throws DegenerateDataError when the
/// group has no responses or no non-responses, NoRootError when neither the
/// quartic nor the bisection fallback yields a maximizer.
double solve_pi_given_r(const GroupCounts& g, double r);

/// Unconstrained MLE. R is updated by Fisher scoring while each pi_i is
/// re-solved exactly for the current R; a step that lowers the profile
/// likelihood is halved. If exactly one group is degenerate only the other
/// group is fitted and the result is flagged as not converged.
MleResult fit_unconstrained(const Dataset& data, const FitOptions& opts = {});

/// Constrained MLE under delta = delta0 by Fisher scoring on (pi1, R) with
/// step halving that keeps iterates strictly admissible and the
/// log-likelihood non-decreasing. Defaults to starting from the unconstrained
/// MLE; any start is first projected into the admissible interior. If scoring
/// has not settled after 100 iterations the likelihood is maximized directly
/// by nested one-dimensional searches over R and pi1.
ConstrainedMleResult fit_constrained(const Dataset& data, double delta0,
                                     std::optional<ParamPoint> init = std::nullopt,
                                     const FitOptions& opts = {});

namespace detail {

/// Coefficients (c0..c4, ascending powers) of the quartic whose roots are the
/// stationary points of the group log-likelihood in pi at fixed R. The
/// polynomial equals dl/dpi * pi (1 - pi) (R pi^2 - 2 pi + 1) (R pi - 1).
std::array<double, 5> quartic_coefficients(const GroupCounts& g, double r);

/// Moves (pi1, R) strictly inside the admissible region for delta0, keeping
/// pi1, pi2 and R a relative margin of 1e-4 away from the edges.
ParamPoint project_interior(double delta0, double pi1, double r);

}  // namespace detail

}  // namespace bilatrr
