#include "bilatrr/gof.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "bilatrr/distributions.hpp"
#include "bilatrr/errors.hpp"
#include "bilatrr/model.hpp"

namespace bilatrr {

namespace {

constexpr double kMinExpected = 1e-8;

int degrees_of_freedom(GofVariant v) { return v == GofVariant::Paper ? 1 : 3; }

}  // namespace

std::string_view variant_name(GofVariant v) { return v == GofVariant::Paper ? "paper" : "saturated"; }

GofResult gof_rosner(const Dataset& data, const MleResult& mle, GofVariant variant) {
  if (!mle.converged) throw DegenerateDataError("goodness of fit needs a non-degenerate fit");
  GofResult out;
  out.variant = variant;
  out.df = degrees_of_freedom(variant);
  const std::array<double, 2> pis{mle.pi1_hat, mle.pi2_hat};
  for (int i = 0; i < 2; ++i) {
    const GroupCounts& g = data.group(i + 1);
    const CellProbs p = cell_probabilities(pis[i], mle.r_hat);
    const double m = static_cast<double>(g.bilateral_total());
    const double n = static_cast<double>(g.unilateral_total());
    const std::array<double, 5> observed{static_cast<double>(g.m0), static_cast<double>(g.m1),
                                         static_cast<double>(g.m2), static_cast<double>(g.n0),
                                         static_cast<double>(g.n1)};
    const std::array<double, 5> expected{m * p.p0, m * p.p1, m * p.p2, n * (1.0 - pis[i]), n * pis[i]};
    for (int k = 0; k < 5; ++k) {
      const double o = observed[k];
      const double e = expected[k];
      if (e < kMinExpected) {
        if (o > 0.0) throw DegenerateDataError("fitted expected count is zero for an observed cell");
        continue;
      }
      if (o > 0.0) out.g2 += 2.0 * o * std::log(o / e);
      out.chi2 += (o - e) * (o - e) / e;
    }
  }
  out.g2 = std::max(out.g2, 0.0);
  out.p_g2 = chi2_upper_tail(out.df, out.g2);
  out.p_chi2 = chi2_upper_tail(out.df, out.chi2);
  return out;
}

GofResult gof_rosner(const Dataset& data, GofVariant variant) {
  return gof_rosner(data, fit_unconstrained(data), variant);
}

std::vector<GofResult> gof_all(const Dataset& data) {
  const MleResult mle = fit_unconstrained(data);
  return {gof_rosner(data, mle, GofVariant::Paper), gof_rosner(data, mle, GofVariant::Saturated)};
}

}  // namespace bilatrr
