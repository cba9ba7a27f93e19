#include "inflection/rng.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>

namespace inflection {

double CounterRng::normal() noexcept {
  // Box-Muller, one variate per call so draw counts stay fixed per cell.
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t poisson_from_uniform(double lambda, double u) {
  if (!(lambda > 0.0)) return 0;
  if (lambda < 600.0) {
    std::int64_t k = 0;
    double p = std::exp(-lambda);
    double cdf = p;
    while (u > cdf) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cdf += p;
      if (p < 1e-300 && static_cast<double>(k) > lambda) break;
    }
    return k;
  }
  // Large means: continuity-corrected normal inversion.
  static const boost::math::normal_distribution<double> std_normal(0.0, 1.0);
  const double z = boost::math::quantile(std_normal, u);
  const double k = std::floor(lambda + std::sqrt(lambda) * z + 0.5);
  return k < 0.0 ? 0 : static_cast<std::int64_t>(k);
}

}  // namespace inflection
