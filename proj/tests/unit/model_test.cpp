#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "bilatrr/errors.hpp"
#include "bilatrr/estimation.hpp"
#include "bilatrr/model.hpp"
#include "oracles.hpp"

using namespace bilatrr;
using bilatrr::testing::oracle_loglik;
using bilatrr::testing::random_point;

namespace {

const Dataset kOme{{9, 7, 23, 20, 34}, {7, 5, 13, 19, 36}};

void expect_cells(const CellProbs& p, double p0, double p1, double p2) {
  EXPECT_NEAR(p.p0, p0, 1e-15);
  EXPECT_NEAR(p.p1, p1, 1e-15);
  EXPECT_NEAR(p.p2, p2, 1e-15);
}

}  // namespace

TEST(CellProbabilities, IndependenceIsBinomial) {
  expect_cells(cell_probabilities(0.5, 1.0), 0.25, 0.5, 0.25);
  expect_cells(cell_probabilities(0.2, 1.0), 0.64, 0.32, 0.04);
}

TEST(CellProbabilities, MiddleCellVanishesAtUpperR) { expect_cells(cell_probabilities(0.5, 2.0), 0.5, 0.0, 0.5); }

TEST(CellProbabilities, SumToOneOnAdmissibleRegion) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const ParamPoint p = random_point(rng, 0.01, 0.99);
    const CellProbs c = cell_probabilities(p.pi1, p.r);
    EXPECT_LT(std::abs(c.p0 + c.p1 + c.p2 - 1.0), 1e-12);
    EXPECT_GE(c.p0, 0.0);
    EXPECT_GE(c.p1, 0.0);
    EXPECT_GE(c.p2, 0.0);
  }
}

TEST(CellProbabilities, RejectsInadmissible) {
  EXPECT_THROW(cell_probabilities(0.8, 2.0), AdmissibilityError);
  EXPECT_THROW(cell_probabilities(0.0, 1.0), AdmissibilityError);
  EXPECT_THROW(cell_probabilities(0.5, -1.0), AdmissibilityError);
}

TEST(AdmissibleRange, Examples) {
  const RRange a = admissible_r_range(0.2, 0.3);
  EXPECT_EQ(a.lower, 0.0);
  EXPECT_TRUE(a.lower_exclusive);
  EXPECT_NEAR(a.upper, 1.0 / 0.3, 1e-12);

  const RRange b = admissible_r_range(0.8, 0.4);
  EXPECT_NEAR(b.lower, 0.9375, 1e-12);
  EXPECT_FALSE(b.lower_exclusive);
  EXPECT_NEAR(b.upper, 1.25, 1e-12);

  const RRange c = admissible_r_range(0.5, 0.5);
  EXPECT_EQ(c.lower, 0.0);
  EXPECT_NEAR(c.upper, 2.0, 1e-12);
  EXPECT_FALSE(c.contains(0.0));
  EXPECT_TRUE(c.contains(2.0));
}

TEST(AdmissibleRange, MaxPiIsEdgeOfCells) {
  for (double r : {0.3, 0.9, 1.5, 3.0}) {
    const double pi = max_admissible_pi(r);
    EXPECT_NO_THROW(cell_probabilities(pi * (1.0 - 1e-9), r)) << r;
    EXPECT_THROW(cell_probabilities(pi * 1.01, r), AdmissibilityError) << r;
    EXPECT_TRUE(admissible_r_range(pi * (1.0 - 1e-9), 0.1).contains(r)) << r;
  }
}

TEST(Icc, Examples) {
  EXPECT_EQ(icc(0.3, 1.0), 0.0);
  EXPECT_NEAR(icc(0.2, 2.0), 0.25, 1e-15);
  EXPECT_NEAR(icc(0.6528, 1.3172), 0.5964, 5e-4);
  for (double pi : {0.01, 0.3, 0.77, 0.99}) EXPECT_EQ(icc(pi, 1.0), 0.0);
}

TEST(LogLikelihood, SingleCellHandValue) {
  const Dataset d{{0, 1, 0, 0, 0}, {}};
  EXPECT_NEAR(log_likelihood(d, {1.0, 0.5, 1.0}), std::log(0.5), 1e-15);
  const Dataset e{{1, 0, 0, 0, 0}, {}};
  EXPECT_NEAR(log_likelihood(e, {1.0, 0.5, 1.0}), std::log(0.25), 1e-15);
}

TEST(LogLikelihood, OmeEstimateBeatsPerturbation) {
  EXPECT_GT(log_likelihood(kOme, {0.9841, 0.6528, 1.3172}), log_likelihood(kOme, {1.0, 0.60, 1.20}));
  EXPECT_EQ(log_likelihood(kOme, {0.9841, 0.6528, 1.3172}), log_likelihood(kOme, {0.9841, 0.6528, 1.3172}));
}

TEST(LogLikelihood, MatchesDirectOracleAndGroupSum) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    const ParamPoint p = random_point(rng);
    const Dataset d = bilatrr::testing::draw_dataset(rng, random_point(rng), 25, 15);
    const double l = log_likelihood(d, p);
    EXPECT_NEAR(l, oracle_loglik(d, p.delta, p.pi1, p.r), 1e-9 * std::abs(l));
    EXPECT_NEAR(l, group_log_likelihood(d.group1, p.pi1, p.r) + group_log_likelihood(d.group2, p.pi2(), p.r),
                1e-12 * std::abs(l));
  }
}

TEST(LogLikelihood, PositiveCountInEmptyCellIsDomainError) {
  const GroupCounts g{0, 3, 0, 0, 0};
  EXPECT_THROW(group_log_likelihood(g, 0.5, 2.0), DomainError);
  EXPECT_NO_THROW(group_log_likelihood(GroupCounts{3, 0, 3, 0, 0}, 0.5, 2.0));
}

TEST(ScoreConstrained, VanishesAtOmeEstimate) {
  const ConstrainedScore s = score_constrained(kOme, 0.9841, 0.6528, 1.3172);
  const Eigen::Vector2d step = invert_2x2(info_constrained(kOme, 0.9841, 0.6528, 1.3172)) *
                               Eigen::Vector2d(s.d_pi1, s.d_r);
  EXPECT_LT(step.cwiseAbs().maxCoeff(), 5e-4);
}

TEST(ScoreConstrained, VanishesAtConstrainedFit) {
  for (double delta0 : {0.8, 0.9841, 1.2}) {
    const ConstrainedMleResult c = fit_constrained(kOme, delta0);
    const ConstrainedScore s = score_constrained(kOme, delta0, c.pi1_hat, c.r_hat);
    EXPECT_LT(std::abs(s.d_pi1), 1e-6) << delta0;
    EXPECT_LT(std::abs(s.d_r), 1e-6) << delta0;
  }
}

TEST(ScoreConstrained, MatchesFiniteDifferencesTightly) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const ParamPoint p = random_point(rng);
    const Dataset d = bilatrr::testing::draw_dataset(rng, random_point(rng), 30, 30);
    const Eigen::Vector3d fd = bilatrr::testing::fd_gradient(d, p, 1e-5);
    const ConstrainedScore s = score_constrained(d, p.delta, p.pi1, p.r);
    EXPECT_NEAR(s.d_pi1, fd[1], 1e-6 * std::max(1.0, std::abs(fd[1])));
    EXPECT_NEAR(s.d_r, fd[2], 1e-6 * std::max(1.0, std::abs(fd[2])));
    EXPECT_NEAR(score_delta(d, p), fd[0], 1e-6 * std::max(1.0, std::abs(fd[0])));
  }
}

TEST(InfoConstrained, SymmetricAndPositiveDefiniteAtOmeConstrainedFit) {
  const ConstrainedMleResult c = fit_constrained(kOme, 1.0);
  const Eigen::Matrix2d m = info_constrained(kOme, 1.0, c.pi1_hat, c.r_hat);
  EXPECT_EQ(m(0, 1), m(1, 0));
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(InfoFull, PrintedMixedFormsAgree) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 200; ++i) {
    const ParamPoint p = random_point(rng);
    const Eigen::Matrix3d m = info_full(kOme, p);
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        EXPECT_NEAR(m(a, b), m(b, a), 1e-9 * std::sqrt(m(a, a) * m(b, b))) << a << b;
      }
    }
    EXPECT_TRUE(m.allFinite());
  }
}

TEST(InfoFull, LinearInCounts) {
  const Dataset scaled{{90, 70, 230, 200, 340}, {70, 50, 130, 190, 360}};
  const ParamPoint p{0.9, 0.55, 1.2};
  const Eigen::Matrix3d a = info_full(kOme, p);
  const Eigen::Matrix3d b = info_full(scaled, p);
  EXPECT_LT((b - 10.0 * a).cwiseAbs().maxCoeff(), 1e-9 * b.cwiseAbs().maxCoeff());
  const Eigen::Matrix2d c = info_constrained(kOme, p.delta, p.pi1, p.r);
  const Eigen::Matrix2d e = info_constrained(scaled, p.delta, p.pi1, p.r);
  EXPECT_LT((e - 10.0 * c).cwiseAbs().maxCoeff(), 1e-9 * e.cwiseAbs().maxCoeff());
}

TEST(InfoFull, ConstrainedBlockIsSubmatrix) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 50; ++i) {
    const ParamPoint p = random_point(rng);
    const Eigen::Matrix3d full = info_full(kOme, p);
    const Eigen::Matrix2d con = info_constrained(kOme, p.delta, p.pi1, p.r);
    EXPECT_LT((full.bottomRightCorner<2, 2>() - con).cwiseAbs().maxCoeff(), 1e-9 * con.cwiseAbs().maxCoeff());
  }
}

TEST(InfoFull, CellAssemblyMatchesClosedForm) {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 100; ++i) {
    const ParamPoint p = random_point(rng);
    const Eigen::Matrix3d a = info_full(kOme, p);
    const Eigen::Matrix3d b = info_full_by_cells(kOme, p);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9 * a.cwiseAbs().maxCoeff());
  }
}

TEST(InfoFull, InverseIsAccurateNearTheEdge) {
  // pi2 = 0.5 with R just below 1/pi2 empties the middle cell of group 2.
  for (double gap : {1e-2, 1e-5, 1e-8}) {
    const ParamPoint p{1.25, 0.4, 2.0 * (1.0 - gap)};
    const Eigen::Matrix3d info = expected_info(kOme, p);
    const Eigen::Matrix3d inv = expected_info_inverse(kOme, p);
    const Eigen::Matrix3d prod = inv * info;
    EXPECT_LT((prod - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-6) << gap;
  }
}

TEST(IDeltaDelta, EqualsInverseEntry) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 50; ++i) {
    const ParamPoint p = random_point(rng);
    const Eigen::Matrix3d m = info_full(kOme, p);
    const double direct = m.inverse()(0, 0);
    EXPECT_NEAR(i_delta_delta(m), direct, 1e-10 * direct);
    EXPECT_NEAR(i_delta_delta(kOme, p), direct, 1e-8 * direct);
  }
}

TEST(IDeltaDelta, OmeStandardErrorBacksOutOfWaldBounds) {
  const MleResult mle = fit_unconstrained(kOme);
  const double v = i_delta_delta(kOme, mle.point());
  EXPECT_GT(v, 0.0);
  EXPECT_NEAR(std::sqrt(v), (1.1403 - 0.8280) / (2.0 * 1.959964), 1e-4);
}

TEST(Invert2x2, GuardsSingular) {
  Eigen::Matrix2d m;
  m << 1.0, 2.0, 2.0, 4.0;
  EXPECT_THROW(invert_2x2(m), SingularInfoError);
  m << 2.0, 1.0, 1.0, 3.0;
  EXPECT_LT((invert_2x2(m) * m - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}
