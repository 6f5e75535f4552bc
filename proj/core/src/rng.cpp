#include "bilatrr/rng.hpp"

#include <boost/random/binomial_distribution.hpp>

namespace bilatrr {

Engine make_engine(std::uint64_t key) { return Engine{key}; }

std::int64_t sample_binomial(Engine& rng, std::int64_t n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  boost::random::binomial_distribution<std::int64_t, double> dist(n, p);
  return dist(rng);
}

double sample_uniform(Engine& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace bilatrr
