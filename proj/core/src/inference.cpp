#include <cmath>

#include "inflection/econometrics.hpp"
#include "inflection/errors.hpp"
#include "inflection/stats.hpp"

namespace inflection {

TostResult tost_pretrends(const FitResult& event_fit, double delta, double alpha) {
  if (!(delta > 0.0)) throw ValidationError("tost_pretrends: bounds must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("tost_pretrends: alpha must lie in (0, 1)");
  }
  TostResult out;
  out.delta = delta;
  out.alpha = alpha;
  out.t_crit = stats::t_upper_quantile(alpha, event_fit.df > 0 ? event_fit.df : INFINITY);
  for (const auto& c : event_fit.coefficients) {
    if (!c.period || *c.period >= 0) continue;
    TostPeriod p;
    p.period = *c.period;
    p.term = c.term;
    p.estimate = c.estimate;
    p.se = c.se;
    if (c.se > 0.0) {
      p.t_lower = (c.estimate + delta) / c.se;
      p.t_upper = (c.estimate - delta) / c.se;
      p.pass = p.t_lower > out.t_crit && p.t_upper < -out.t_crit;
    } else {
      p.t_lower = c.estimate + delta > 0.0 ? INFINITY : -INFINITY;
      p.t_upper = c.estimate - delta < 0.0 ? -INFINITY : INFINITY;
      p.pass = std::abs(c.estimate) < delta;
    }
    out.periods.push_back(p);
  }
  if (out.periods.empty()) {
    throw MissingPeriodsError("tost_pretrends: fit has no pre-period coefficients");
  }
  out.pass = true;
  for (const auto& p : out.periods) out.pass = out.pass && p.pass;
  return out;
}

double default_tost_bounds(const Panel& panel, const RegressionSpec& spec) {
  std::vector<double> y;
  y.reserve(panel.size());
  const Transform tr = spec.effective_transform();
  for (const auto& r : panel) {
    double raw = 0.0;
    switch (spec.outcome) {
      case OutcomeColumn::FjobNum:
        raw = static_cast<double>(r.fjobnum);
        break;
      case OutcomeColumn::FjobRatio:
        raw = r.fjobratio;
        break;
      case OutcomeColumn::FjobEarn:
        raw = r.fjobearn;
        break;
    }
    if (tr == Transform::LogDropZeros) {
      if (raw > 0.0) y.push_back(std::log(raw));
    } else {
      y.push_back(tr == Transform::Log1p ? std::log1p(raw) : raw);
    }
  }
  return 0.36 * std::sqrt(stats::variance(y));
}

double coef_to_percent(double beta) { return std::expm1(beta); }

}  // namespace inflection
