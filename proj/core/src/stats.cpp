#include "inflection/stats.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

namespace inflection::stats {

double t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const double at = std::abs(t);
  double tail;
  if (!std::isfinite(df) || df > 1e7) {
    tail = boost::math::cdf(boost::math::complement(boost::math::normal_distribution<>(), at));
  } else {
    tail = boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<>(df), at));
  }
  return std::min(1.0, 2.0 * tail);
}

double t_upper_quantile(double upper_tail, double df) {
  if (!std::isfinite(df) || df > 1e7) {
    return boost::math::quantile(
        boost::math::complement(boost::math::normal_distribution<>(), upper_tail));
  }
  return boost::math::quantile(
      boost::math::complement(boost::math::students_t_distribution<>(df), upper_tail));
}

double f_upper_p(double f, double df1, double df2) {
  if (std::isnan(f)) return 1.0;
  if (std::isinf(f)) return 0.0;
  if (f <= 0.0) return 1.0;
  return boost::math::cdf(
      boost::math::complement(boost::math::fisher_f_distribution<>(df1, df2), f));
}

double mean(std::span<const double> x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  WelchResult r;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = variance(a) / na;
  const double vb = variance(b) / nb;
  const double diff = mean(a) - mean(b);
  const double se2 = va + vb;
  if (!(se2 > 0.0)) {
    // Both groups constant: identical means are a perfect match.
    r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    r.df = na + nb - 2.0;
    r.p = diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = diff / std::sqrt(se2);
  r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p = t_two_sided_p(r.t, r.df);
  return r;
}

}  // namespace inflection::stats
