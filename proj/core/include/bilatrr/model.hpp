#pragma once

// Rosner's equal-dependence model for combined unilateral and bilateral
// binary data: cell probabilities, log-likelihood, analytic scores and
// expected information matrices.
//
// Log-likelihood values omit the multinomial and binomial coefficients, so
// they are only comparable between parameter points for one fixed dataset.

#include <Eigen/Core>

#include "bilatrr/types.hpp"

namespace bilatrr {

/// Trinomial probabilities (R pi^2 - 2 pi + 1, 2 pi (1 - R pi), R pi^2).
/// Components in [-1e-9, 0) are clamped to zero; anything more negative, or
/// pi outside (0, 1), or R <= 0, throws AdmissibilityError.
CellProbs cell_probabilities(double pi, double r);

/// Admissible R for the pair of response rates, with a = max(pi1, pi2):
/// (0, 1/a] when a <= 1/2 and [(2 - 1/a)/a, 1/a] otherwise.
RRange admissible_r_range(double pi1, double pi2);

/// Largest response rate compatible with a given R, i.e. the supremum of pi
/// for which all three cell probabilities are nonnegative.
double max_admissible_pi(double r);

/// Whether (pi1, pi2, r) lies in the admissible region.
bool is_admissible(double pi1, double pi2, double r);

/// Intraclass correlation between the two organs of one subject.
double icc(double pi, double r);

/// Contribution of one group to the log-likelihood. Cells with zero counts
/// contribute nothing, so boundary points are fine as long as every
/// zero-probability cell is empty; otherwise DomainError.
double group_log_likelihood(const GroupCounts& g, double pi, double r);

/// Log-likelihood in the (delta, pi1, R) parameterization.
double log_likelihood(const Dataset& data, const ParamPoint& p);

/// dl_i/dpi_i for one group at fixed R. Zero-count terms are skipped.
double group_score_pi(const GroupCounts& g, double pi, double r);

/// dl_i/dR for one group at fixed pi.
double group_score_r(const GroupCounts& g, double pi, double r);

/// Expected information for R contributed by one group's bilateral subjects.
double group_info_r_r(const GroupCounts& g, double pi, double r);

/// Expected information for (pi, R) contributed by one group.
Eigen::Matrix2d group_info(const GroupCounts& g, double pi, double r);

struct ConstrainedScore {
  double d_pi1 = 0.0;
  double d_r = 0.0;
};

/// (dl/dpi1, dl/dR) with delta held at delta0.
ConstrainedScore score_constrained(const Dataset& data, double delta0, double pi1, double r);

/// dl/ddelta at the given point.
double score_delta(const Dataset& data, const ParamPoint& p);

/// Expected information for (pi1, R) with delta fixed at delta0, switching to
/// the cell-by-cell form next to the edge of the admissible region.
/// Throws SingularInfoError when the determinant is <= 1e-14.
Eigen::Matrix2d info_constrained(const Dataset& data, double delta0, double pi1, double r);

/// Expected information for (delta, pi1, R), entries in that order.
Eigen::Matrix3d info_full(const Dataset& data, const ParamPoint& p);

/// The same expected information assembled cell by cell as
/// sum N (grad p)(grad p)^T / p. Stays accurate when a cell probability is
/// close to zero, where the closed forms above cancel badly.
Eigen::Matrix3d info_full_by_cells(const Dataset& data, const ParamPoint& p);

/// info_full, or info_full_by_cells when some bilateral cell probability is
/// below 1e-4.
Eigen::Matrix3d expected_info(const Dataset& data, const ParamPoint& p);

/// Inverse of expected_info. Near the edge the terms of nearly empty cells
/// are split off and restored through the Woodbury identity, which keeps the
/// result accurate when the matrix itself is close to singular.
Eigen::Matrix3d expected_info_inverse(const Dataset& data, const ParamPoint& p);

/// Upper-left entry of the inverse of a (delta, pi1, R) information matrix,
/// i.e. the reciprocal of the Schur complement of the (pi1, R) block.
double i_delta_delta(const Eigen::Matrix3d& info);

/// Asymptotic variance of delta-hat at p, from expected_info_inverse.
double i_delta_delta(const Dataset& data, const ParamPoint& p);

/// Closed-form inverse of a 2x2 matrix with the determinant guard.
Eigen::Matrix2d invert_2x2(const Eigen::Matrix2d& m);

}  // namespace bilatrr
