#include "bilatrr/model.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bilatrr/errors.hpp"

namespace bilatrr {

namespace {

constexpr double kClampTolerance = 1e-9;
constexpr double kMinDenominator = 1e-10;
constexpr double kMinDeterminant = 1e-14;

double checked(double den, const char* what) {
  if (!(std::abs(den) > kMinDenominator)) {
    throw DomainError(std::string("vanishing denominator: ") + what);
  }
  return den;
}

// w * num / den, skipping the division entirely when the weight is zero so
// boundary points with empty cells stay evaluable.
double wdiv(double w, double num, double den, const char* what) {
  if (w == 0.0) return 0.0;
  return w * num / checked(den, what);
}

double as_real(std::int64_t v) { return static_cast<double>(v); }

void require_open_unit(double pi, const char* what) {
  if (!(pi > 0.0 && pi < 1.0)) {
    throw AdmissibilityError(std::string(what) + " must lie in (0, 1), got " + std::to_string(pi));
  }
}

}  // namespace

CellProbs cell_probabilities(double pi, double r) {
  require_open_unit(pi, "response rate");
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw AdmissibilityError("R must be positive, got " + std::to_string(r));
  }
  CellProbs c{r * pi * pi - 2.0 * pi + 1.0, 2.0 * pi * (1.0 - r * pi), r * pi * pi};
  for (double* v : {&c.p0, &c.p1, &c.p2}) {
    if (*v < -kClampTolerance) {
      throw AdmissibilityError("R=" + std::to_string(r) + " is not admissible for pi=" +
                               std::to_string(pi));
    }
    *v = std::max(*v, 0.0);
  }
  return c;
}

RRange admissible_r_range(double pi1, double pi2) {
  const double a = std::max(pi1, pi2);
  if (a <= 0.5) return {0.0, true, 1.0 / a};
  return {(2.0 - 1.0 / a) / a, false, 1.0 / a};
}

double max_admissible_pi(double r) {
  if (r >= 1.0) return 1.0 / r;
  // smaller root of R pi^2 - 2 pi + 1, written without cancellation
  return 1.0 / (1.0 + std::sqrt(1.0 - r));
}

bool is_admissible(double pi1, double pi2, double r) {
  if (!(pi1 > 0.0 && pi1 < 1.0 && pi2 > 0.0 && pi2 < 1.0)) return false;
  return admissible_r_range(pi1, pi2).contains(r);
}

double icc(double pi, double r) { return pi / (1.0 - pi) * (r - 1.0); }

double group_log_likelihood(const GroupCounts& g, double pi, double r) {
  const CellProbs c = cell_probabilities(pi, r);
  double ll = 0.0;
  auto add = [&ll](std::int64_t count, double prob) {
    if (count == 0) return;
    if (!(prob > 0.0)) throw DomainError("zero-probability cell has a positive count");
    ll += as_real(count) * std::log(prob);
  };
  add(g.m0, c.p0);
  add(g.m1, c.p1);
  add(g.m2, c.p2);
  add(g.n0, 1.0 - pi);
  add(g.n1, pi);
  return ll;
}

double log_likelihood(const Dataset& data, const ParamPoint& p) {
  if (!(p.delta > 0.0)) throw AdmissibilityError("delta must be positive");
  return group_log_likelihood(data.group1, p.pi1, p.r) +
         group_log_likelihood(data.group2, p.pi2(), p.r);
}

double group_score_pi(const GroupCounts& g, double pi, double r) {
  const double d0 = r * pi * pi - 2.0 * pi + 1.0;
  return wdiv(as_real(g.m2), 2.0, pi, "pi") +
         wdiv(as_real(g.m0), 2.0 * r * pi - 2.0, d0, "R pi^2 - 2 pi + 1") +
         wdiv(as_real(g.m1), 4.0 * r * pi - 2.0, 2.0 * pi * (r * pi - 1.0), "pi (R pi - 1)") +
         wdiv(as_real(g.n1), 1.0, pi, "pi") - wdiv(as_real(g.n0), 1.0, 1.0 - pi, "1 - pi");
}

double group_score_r(const GroupCounts& g, double pi, double r) {
  return wdiv(as_real(g.m2), 1.0, r, "R") +
         wdiv(as_real(g.m0), pi * pi, r * pi * pi - 2.0 * pi + 1.0, "R pi^2 - 2 pi + 1") +
         wdiv(as_real(g.m1), pi, r * pi - 1.0, "R pi - 1");
}

double group_info_r_r(const GroupCounts& g, double pi, double r) {
  const double m = as_real(g.bilateral_total());
  return wdiv(m, pi * pi, r, "R") - wdiv(m, 2.0 * pi * pi * pi, r * pi - 1.0, "R pi - 1") +
         wdiv(m, std::pow(pi, 4), r * pi * pi - 2.0 * pi + 1.0, "R pi^2 - 2 pi + 1");
}

Eigen::Matrix2d group_info(const GroupCounts& g, double pi, double r) {
  const double m = as_real(g.bilateral_total());
  const double n = as_real(g.unilateral_total());
  const double d0 = r * pi * pi - 2.0 * pi + 1.0;
  Eigen::Matrix2d info;
  info(0, 0) = 4.0 * r * m + wdiv(n, 1.0, pi, "pi") - wdiv(n, 1.0, pi - 1.0, "pi - 1") -
               wdiv(m, 4.0 * r * pi - 2.0, pi, "pi") +
               wdiv(m, 4.0 * (r * pi - 1.0) * (r * pi - 1.0), d0, "R pi^2 - 2 pi + 1") -
               wdiv(m, r * (4.0 * r * pi - 2.0), r * pi - 1.0, "R pi - 1");
  info(0, 1) = wdiv(m, pi * pi * (2.0 * r * pi - 2.0), d0, "R pi^2 - 2 pi + 1") -
               wdiv(m, 2.0 * r * pi * pi, r * pi - 1.0, "R pi - 1");
  info(1, 0) = info(0, 1);
  info(1, 1) = group_info_r_r(g, pi, r);
  return info;
}

ConstrainedScore score_constrained(const Dataset& data, double delta0, double pi1, double r) {
  const GroupCounts& a = data.group1;
  const GroupCounts& b = data.group2;
  const double p = pi1;
  const double d = delta0;
  const double s2 = as_real(a.m2 + b.m2);
  const double big_n1 = as_real(a.n1 + b.n1);
  const double d1 = r * p * p - 2.0 * p + 1.0;
  const double d2 = r * d * d * p * p - 2.0 * d * p + 1.0;

  ConstrainedScore s;
  s.d_pi1 = wdiv(2.0 * s2 + big_n1, 1.0, p, "pi1") +
            wdiv(as_real(a.n0), 1.0, p - 1.0, "pi1 - 1") +
            wdiv(as_real(b.n0), d, d * p - 1.0, "delta pi1 - 1") +
            wdiv(as_real(a.m0), 2.0 * r * p - 2.0, d1, "R pi1^2 - 2 pi1 + 1") -
            wdiv(as_real(b.m1), 2.0 * r * d * p - 1.0, p - r * d * p * p, "pi1 - R delta pi1^2") -
            wdiv(as_real(a.m1), 2.0 * r * p - 1.0, p - r * p * p, "pi1 - R pi1^2") +
            wdiv(as_real(b.m0), 2.0 * d * (r * d * p - 1.0), d2, "R delta^2 pi1^2 - 2 delta pi1 + 1");
  s.d_r = wdiv(s2, 1.0, r, "R") + wdiv(as_real(a.m1), p, r * p - 1.0, "R pi1 - 1") +
          wdiv(as_real(a.m0), p * p, d1, "R pi1^2 - 2 pi1 + 1") +
          wdiv(as_real(b.m0), d * d * p * p, d2, "R delta^2 pi1^2 - 2 delta pi1 + 1") +
          wdiv(as_real(b.m1), d * p, r * d * p - 1.0, "R delta pi1 - 1");
  return s;
}

double score_delta(const Dataset& data, const ParamPoint& p) {
  // l depends on delta only through pi2 = delta * pi1.
  return p.pi1 * group_score_pi(data.group2, p.pi2(), p.r);
}

namespace {

// Entries of the expected information shared by the constrained (pi1, R)
// problem and the full (delta, pi1, R) problem. m1, m2, n1, n2 are the group
// sizes, not cell counts.
struct InfoInputs {
  double m1, m2, n1, n2;
  double d, p, r;
  double d1;  // R p^2 - 2 p + 1
  double d2;  // R d^2 p^2 - 2 d p + 1

  InfoInputs(const Dataset& data, double delta, double pi1, double rr)
      : m1(as_real(data.group1.bilateral_total())),
        m2(as_real(data.group2.bilateral_total())),
        n1(as_real(data.group1.unilateral_total())),
        n2(as_real(data.group2.unilateral_total())),
        d(delta),
        p(pi1),
        r(rr),
        d1(rr * pi1 * pi1 - 2.0 * pi1 + 1.0),
        d2(rr * delta * delta * pi1 * pi1 - 2.0 * delta * pi1 + 1.0) {
    if (!(delta > 0.0)) throw AdmissibilityError("delta must be positive");
    require_open_unit(pi1, "pi1");
    require_open_unit(delta * pi1, "pi2");
    if (!(rr > 0.0)) throw AdmissibilityError("R must be positive");
  }

  [[nodiscard]] double pi1_pi1() const {
    const double rdp = r * d * p;
    return 4.0 * r * m1 + wdiv(n1, 1.0, p, "pi1") - wdiv(n1, 1.0, p - 1.0, "pi1 - 1") +
           wdiv(n2, d, p, "pi1") +
           wdiv(m2, 4.0 * std::pow(d - r * d * d * p, 2), d2, "R delta^2 pi1^2 - 2 delta pi1 + 1") -
           wdiv(m1, 4.0 * r * p - 2.0, p, "pi1") - wdiv(n2, d * d, d * p - 1.0, "delta pi1 - 1") +
           wdiv(m1, 4.0 * std::pow(r * p - 1.0, 2), d1, "R pi1^2 - 2 pi1 + 1") +
           4.0 * r * d * d * m2 - wdiv(m1, r * (4.0 * r * p - 2.0), r * p - 1.0, "R pi1 - 1") -
           wdiv(m2, 2.0 * d * (2.0 * rdp - 1.0), p, "pi1") -
           wdiv(m2, 2.0 * r * d * d * (2.0 * rdp - 1.0), rdp - 1.0, "R delta pi1 - 1");
  }

  // E(-d2l/dR dpi1), the form printed alongside the constrained problem.
  [[nodiscard]] double r_pi1() const {
    const double rdp = r * d * p;
    return wdiv(m1, p * p * (2.0 * r * p - 2.0), d1, "R pi1^2 - 2 pi1 + 1") -
           wdiv(m1, 2.0 * r * p * p, r * p - 1.0, "R pi1 - 1") +
           wdiv(m2, 2.0 * d * d * d * p * p * (rdp - 1.0), d2, "R delta^2 pi1^2 - 2 delta pi1 + 1") -
           wdiv(m2, 2.0 * r * d * d * d * p * p, rdp - 1.0, "R delta pi1 - 1");
  }

  // E(-d2l/dpi1 dR), algebraically equal to r_pi1().
  [[nodiscard]] double pi1_r() const {
    const double rdp = r * d * p;
    return 2.0 * m1 * p + 2.0 * d * d * m2 * p +
           wdiv(m1, p * p * (2.0 * r * p - 2.0), d1, "R pi1^2 - 2 pi1 + 1") -
           wdiv(m1, p * (4.0 * r * p - 2.0), r * p - 1.0, "R pi1 - 1") -
           wdiv(m2, 2.0 * d * d * p * (2.0 * rdp - 1.0), rdp - 1.0, "R delta pi1 - 1") +
           wdiv(m2, 2.0 * d * d * d * p * p * (rdp - 1.0), d2, "R delta^2 pi1^2 - 2 delta pi1 + 1");
  }

  [[nodiscard]] double r_r() const {
    const double rdp = r * d * p;
    return wdiv(m1, p * p, r, "R") - wdiv(m1, 2.0 * p * p * p, r * p - 1.0, "R pi1 - 1") +
           wdiv(m1, std::pow(p, 4), d1, "R pi1^2 - 2 pi1 + 1") + wdiv(m2, d * d * p * p, r, "R") +
           wdiv(m2, std::pow(d, 4) * std::pow(p, 4), d2, "R delta^2 pi1^2 - 2 delta pi1 + 1") -
           wdiv(m2, 2.0 * d * d * d * p * p * p, rdp - 1.0, "R delta pi1 - 1");
  }

  [[nodiscard]] double delta_delta() const {
    const double rdp = r * d * p;
    return wdiv(n2, p, d, "delta") +
           wdiv(m2, 4.0 * std::pow(p - r * d * p * p, 2), d2, "R delta^2 pi1^2 - 2 delta pi1 + 1") -
           wdiv(n2, p * p, d * p - 1.0, "delta pi1 - 1") + 4.0 * r * m2 * p * p -
           wdiv(m2, 2.0 * p * (2.0 * rdp - 1.0), d, "delta") -
           wdiv(m2, 2.0 * r * p * p * (2.0 * rdp - 1.0), rdp - 1.0, "R delta pi1 - 1");
  }

  // E(-d2l/ddelta dpi1)
  [[nodiscard]] double delta_pi1() const {
    const double rdp = r * d * p;
    const double inner = 2.0 * p * (rdp - 1.0) + 2.0 * r * d * p * p;
    return n2 - m2 * (4.0 * rdp - 2.0) + m2 * (8.0 * rdp - 2.0) - wdiv(m2, inner, p, "pi1") +
           wdiv(m2, (2.0 * d - 2.0 * r * d * d * p) * (2.0 * p - 2.0 * r * d * p * p), d2,
                "R delta^2 pi1^2 - 2 delta pi1 + 1") -
           wdiv(n2, d * p, d * p - 1.0, "delta pi1 - 1") -
           wdiv(m2, r * d * inner, rdp - 1.0, "R delta pi1 - 1");
  }

  // E(-d2l/dpi1 ddelta)
  [[nodiscard]] double pi1_delta() const {
    const double rdp = r * d * p;
    const double inner = 2.0 * d * (rdp - 1.0) + 2.0 * r * d * d * p;
    return n2 - m2 * (4.0 * rdp - 2.0) + m2 * (8.0 * rdp - 2.0) - wdiv(m2, inner, d, "delta") +
           wdiv(m2, (2.0 * d - 2.0 * r * d * d * p) * (2.0 * p - 2.0 * r * d * p * p), d2,
                "R delta^2 pi1^2 - 2 delta pi1 + 1") -
           wdiv(n2, d * p, d * p - 1.0, "delta pi1 - 1") -
           wdiv(m2, r * p * inner, rdp - 1.0, "R delta pi1 - 1");
  }

  // E(-d2l/ddelta dR); the cubic denominator factors as (R d p - 1) * d2.
  [[nodiscard]] double delta_r() const {
    const double rdp = r * d * p;
    if (m2 == 0.0) return 0.0;
    checked(rdp - 1.0, "R delta pi1 - 1");
    checked(d2, "R delta^2 pi1^2 - 2 delta pi1 + 1");
    const double cubic = r * r * d * d * d * p * p * p - 3.0 * r * d * d * p * p + rdp + 2.0 * d * p - 1.0;
    return -2.0 * d * d * m2 * p * p * p * (r - 1.0) / cubic;
  }

  // E(-d2l/dR ddelta)
  [[nodiscard]] double r_delta() const {
    const double rdp = r * d * p;
    return -wdiv(m2, d * d * p * p * (2.0 * p - 2.0 * r * d * p * p), d2,
                 "R delta^2 pi1^2 - 2 delta pi1 + 1") -
           wdiv(m2, 2.0 * r * d * d * p * p * p, rdp - 1.0, "R delta pi1 - 1");
  }
};

void require_nonsingular(double det, const char* what) {
  if (!(det > kMinDeterminant) || !std::isfinite(det)) {
    throw SingularInfoError(std::string(what) + " is singular (det=" + std::to_string(det) + ")");
  }
}

// Smallest bilateral cell probability, over groups with bilateral subjects.
double min_bilateral_prob(const Dataset& data, double delta, double pi1, double r) {
  double smallest = 1.0;
  const double pis[2] = {pi1, delta * pi1};
  for (int i = 0; i < 2; ++i) {
    if (data.group(i + 1).bilateral_total() == 0) continue;
    const double pi = pis[i];
    smallest = std::min({smallest, r * pi * pi - 2.0 * pi + 1.0, 2.0 * pi * (1.0 - r * pi), r * pi * pi});
  }
  return smallest;
}

// Below this cell probability the closed-form entries lose too many digits
// to cancellation and the cell-by-cell sum is used instead.
constexpr double kNearEdgeProb = 1e-4;

}  // namespace

namespace {

struct CellTerm {
  double weight = 0.0;  // N / p
  double prob = 1.0;
  double size = 0.0;    // N
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
};

// Every rank-one term N (grad p)(grad p)^T / p of the expected information,
// unilateral binomials included (as a single term each).
std::vector<CellTerm> information_terms(const Dataset& data, const ParamPoint& p) {
  if (!(p.delta > 0.0)) throw AdmissibilityError("delta must be positive");
  require_open_unit(p.pi1, "pi1");
  require_open_unit(p.pi2(), "pi2");
  if (!(p.r > 0.0)) throw AdmissibilityError("R must be positive");
  std::vector<CellTerm> terms;
  const double r = p.r;
  for (int i = 1; i <= 2; ++i) {
    const GroupCounts& g = data.group(i);
    const double pi = i == 1 ? p.pi1 : p.pi2();
    const Eigen::Vector3d dpi = i == 1 ? Eigen::Vector3d(0.0, 1.0, 0.0) : Eigen::Vector3d(p.pi1, p.delta, 0.0);
    const Eigen::Vector3d dr(0.0, 0.0, 1.0);
    const double m = as_real(g.bilateral_total());
    if (m > 0.0) {
      const double probs[3] = {r * pi * pi - 2.0 * pi + 1.0, 2.0 * pi * (1.0 - r * pi), r * pi * pi};
      const double by_pi[3] = {2.0 * r * pi - 2.0, 2.0 - 4.0 * r * pi, 2.0 * r * pi};
      const double by_r[3] = {pi * pi, -2.0 * pi * pi, pi * pi};
      for (int c = 0; c < 3; ++c) {
        if (!(probs[c] > 0.0)) throw SingularInfoError("cell probability is zero");
        terms.push_back({m / probs[c], probs[c], m, by_pi[c] * dpi + by_r[c] * dr});
      }
    }
    const double n = as_real(g.unilateral_total());
    if (n > 0.0) terms.push_back({n / (pi * (1.0 - pi)), 1.0, n, dpi});
  }
  return terms;
}

}  // namespace

Eigen::Matrix3d info_full_by_cells(const Dataset& data, const ParamPoint& p) {
  Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
  for (const CellTerm& t : information_terms(data, p)) info += t.weight * t.grad * t.grad.transpose();
  return info;
}

Eigen::Matrix3d expected_info_inverse(const Dataset& data, const ParamPoint& p) {
  if (min_bilateral_prob(data, p.delta, p.pi1, p.r) >= kNearEdgeProb) {
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(info_full(data, p));
    if (!lu.isInvertible()) throw SingularInfoError("information matrix is singular");
    return lu.inverse();
  }
  // Woodbury: split off the terms of nearly empty cells, whose huge weights
  // would otherwise swamp the rest of the matrix.
  Eigen::Matrix3d base = Eigen::Matrix3d::Zero();
  std::vector<CellTerm> tiny;
  for (const CellTerm& t : information_terms(data, p)) {
    if (t.prob < kNearEdgeProb) {
      tiny.push_back(t);
    } else {
      base += t.weight * t.grad * t.grad.transpose();
    }
  }
  const Eigen::FullPivLU<Eigen::Matrix3d> base_lu(base);
  if (!base_lu.isInvertible()) {
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(info_full_by_cells(data, p));
    if (!lu.isInvertible()) throw SingularInfoError("information matrix is singular");
    return lu.inverse();
  }
  const Eigen::Matrix3d base_inv = base_lu.inverse();
  const auto k = static_cast<Eigen::Index>(tiny.size());
  Eigen::MatrixXd g(3, k);
  Eigen::MatrixXd core = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    g.col(j) = tiny[static_cast<std::size_t>(j)].grad;
    core(j, j) = tiny[static_cast<std::size_t>(j)].prob / tiny[static_cast<std::size_t>(j)].size;
  }
  core += g.transpose() * base_inv * g;
  const Eigen::MatrixXd bg = base_inv * g;
  const Eigen::Matrix3d inv = base_inv - bg * core.fullPivLu().solve(bg.transpose());
  if (!inv.allFinite()) throw SingularInfoError("information matrix is singular");
  return inv;
}

Eigen::Matrix2d info_constrained(const Dataset& data, double delta0, double pi1, double r) {
  if (min_bilateral_prob(data, delta0, pi1, r) < kNearEdgeProb) {
    const Eigen::Matrix2d info = info_full_by_cells(data, {delta0, pi1, r}).bottomRightCorner<2, 2>();
    require_nonsingular(info.determinant(), "information matrix for (pi1, R)");
    return info;
  }
  const InfoInputs in(data, delta0, pi1, r);
  Eigen::Matrix2d info;
  info(0, 0) = in.pi1_pi1();
  info(0, 1) = in.r_pi1();
  info(1, 0) = info(0, 1);
  info(1, 1) = in.r_r();
  require_nonsingular(info.determinant(), "information matrix for (pi1, R)");
  return info;
}

Eigen::Matrix3d info_full(const Dataset& data, const ParamPoint& p) {
  const InfoInputs in(data, p.delta, p.pi1, p.r);
  Eigen::Matrix3d info;
  info(0, 0) = in.delta_delta();
  info(0, 1) = in.delta_pi1();
  info(0, 2) = in.delta_r();
  info(1, 0) = in.pi1_delta();
  info(1, 1) = in.pi1_pi1();
  info(1, 2) = in.pi1_r();
  info(2, 0) = in.r_delta();
  info(2, 1) = in.r_pi1();
  info(2, 2) = in.r_r();
  if (!info.allFinite()) throw SingularInfoError("information matrix has non-finite entries");
  return info;
}

Eigen::Matrix2d invert_2x2(const Eigen::Matrix2d& m) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  require_nonsingular(std::abs(det), "2x2 information block");
  Eigen::Matrix2d inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv / det;
}

double i_delta_delta(const Eigen::Matrix3d& info) {
  // Near the edge of the admissible region one cell dominates the matrix and
  // the explicit Schur complement cancels badly; a pivoted solve does not.
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(info);
  if (!lu.isInvertible()) throw SingularInfoError("information matrix is singular");
  const double v = lu.solve(Eigen::Vector3d::UnitX())(0);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw SingularInfoError("variance for delta is not positive (" + std::to_string(v) + ")");
  }
  return v;
}

Eigen::Matrix3d expected_info(const Dataset& data, const ParamPoint& p) {
  if (min_bilateral_prob(data, p.delta, p.pi1, p.r) < kNearEdgeProb) return info_full_by_cells(data, p);
  return info_full(data, p);
}

double i_delta_delta(const Dataset& data, const ParamPoint& p) {
  const double v = expected_info_inverse(data, p)(0, 0);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw SingularInfoError("variance for delta is not positive (" + std::to_string(v) + ")");
  }
  return v;
}

}  // namespace bilatrr
