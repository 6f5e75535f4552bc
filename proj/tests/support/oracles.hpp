#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "bilatrr/types.hpp"

namespace bilatrr::testing {

/// Log-likelihood written directly from the trinomial and binomial cell
/// probabilities, without any library code. -inf when a cell with a positive
/// count has probability <= 0.
double oracle_loglik(const Dataset& d, double delta, double pi1, double r);

/// Per-cell log-probabilities of one group as a function of (pi, R):
/// bilateral 0/1/2 responses then unilateral 0/1.
std::array<double, 5> oracle_log_cells(double pi, double r);

/// Central-difference gradient of oracle_loglik in (delta, pi1, R).
Eigen::Vector3d fd_gradient(const Dataset& d, const ParamPoint& p, double rel_step = 1e-6);

/// -E[Hessian] of the log-likelihood for bilateral/unilateral group sizes
/// (m1, n1, m2, n2), estimated by averaging the finite-difference Hessian
/// over reps simulated datasets. The Hessian is linear in the counts, so
/// the average is taken over the pooled counts of all replications.
Eigen::Matrix3d mc_expected_info(const ParamPoint& p, std::int64_t m1, std::int64_t n1, std::int64_t m2,
                                 std::int64_t n2, std::int64_t reps, std::uint64_t seed);

/// Uniformly random admissible interior point with pi1, pi2 in [lo, hi].
ParamPoint random_point(std::mt19937_64& rng, double lo = 0.1, double hi = 0.8);

/// Dataset drawn at p with the given group sizes.
Dataset draw_dataset(std::mt19937_64& rng, const ParamPoint& p, std::int64_t m, std::int64_t n);

/// Dataset with counts in [0, max_count] whose groups both have responses
/// and non-responses.
Dataset random_small_dataset(std::mt19937_64& rng, std::int64_t max_count);

/// Dataset of moderate size drawn from the model at a random point, redrawn
/// until both groups are informative.
Dataset random_model_dataset(std::mt19937_64& rng, std::int64_t m, std::int64_t n);

struct GridMax {
  double loglik = -1e300;
  double pi1 = 0.0;
  double pi2 = 0.0;
  double r = 1.0;
};

/// Maximum of oracle_loglik over an n_pi x n_pi x n_r grid of (pi1, pi2, R),
/// R spanning the admissible range of each (pi1, pi2) pair.
GridMax grid_max_unconstrained(const Dataset& d, int n_pi = 200, int n_r = 50);

/// Maximum over (pi1, R) with pi2 = delta0 * pi1.
GridMax grid_max_constrained(const Dataset& d, double delta0, int n_pi = 400, int n_r = 200);

/// Compass search started from a grid maximum; constrained when delta0 > 0.
GridMax polish(const Dataset& d, GridMax start, double delta0 = -1.0);

/// Modified-Poisson (log link, independence working correlation) fit of the
/// organ-level responses on a group indicator with subjects as clusters;
/// returns (log delta, sandwich variance of log delta).
std::pair<double, double> sandwich_log_rr(const Dataset& d);

}  // namespace bilatrr::testing
