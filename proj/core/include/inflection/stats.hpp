#pragma once

#include <span>

namespace inflection::stats {

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
/// Infinite |t| gives 0; NaN gives 1.
double t_two_sided_p(double t, double df);

/// Upper quantile: P(T > x) = upper_tail for T ~ t(df).
double t_upper_quantile(double upper_tail, double df);

/// Upper-tail probability of an F(df1, df2) statistic.
double f_upper_p(double f, double df1, double df2);

double mean(std::span<const double> x);
/// Sample variance with n - 1 in the denominator.
double variance(std::span<const double> x);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Welch unequal-variance two-sample t-test of mean(a) == mean(b).
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace inflection::stats
