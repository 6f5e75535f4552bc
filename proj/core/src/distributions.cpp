#include "bilatrr/distributions.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "bilatrr/errors.hpp"

namespace bilatrr {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
}

double two_sided_z(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  return normal_quantile(1.0 - alpha / 2.0);
}

double chi2_quantile(double df, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chi-square quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>{df}, p);
}

double chi2_upper_tail(double df, double x) {
  if (!(x > 0.0)) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>{df}, x));
}

}  // namespace bilatrr
