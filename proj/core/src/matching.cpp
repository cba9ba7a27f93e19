#include "inflection/matching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "inflection/errors.hpp"
#include "inflection/stats.hpp"

namespace inflection {

namespace {

constexpr double kSeparationBound = 30.0;
constexpr double kIrlsTol = 1e-8;
constexpr int kIrlsMaxIter = 100;

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& covariates) {
  Eigen::MatrixXd X(covariates.rows(), covariates.cols() + 1);
  X.col(0).setOnes();
  X.rightCols(covariates.cols()) = covariates;
  return X;
}

std::string num(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

Eigen::VectorXd PropensityModel::predict(const Eigen::MatrixXd& covariates) const {
  const Eigen::VectorXd eta = with_intercept(covariates) * coef;
  return eta.unaryExpr([](double z) { return logistic(z); });
}

PropensityModel logit_fit(const Eigen::MatrixXd& covariates, std::span<const int> treat,
                          std::vector<std::string> names) {
  const Eigen::Index n = covariates.rows();
  if (static_cast<Eigen::Index>(treat.size()) != n) {
    throw ValidationError("logit_fit: covariates and labels differ in length");
  }
  Eigen::VectorXd y(n);
  int n_treated = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int t = treat[static_cast<std::size_t>(i)];
    if (t != 0 && t != 1) throw ValidationError("logit_fit: labels must be 0/1");
    y[i] = t;
    n_treated += t;
  }
  if (n_treated == 0 || n_treated == n) {
    throw ValidationError("logit_fit: need at least one observation in each class");
  }

  const Eigen::MatrixXd X = with_intercept(covariates);
  const Eigen::Index k = X.cols();
  PropensityModel model;
  model.names.push_back("(Intercept)");
  for (Eigen::Index j = 0; j < covariates.cols(); ++j) {
    model.names.push_back(static_cast<std::size_t>(j) < names.size()
                              ? names[static_cast<std::size_t>(j)]
                              : "x" + std::to_string(j + 1));
  }
  model.coef = Eigen::VectorXd::Zero(k);

  Eigen::MatrixXd info(k, k);
  for (int iter = 1; iter <= kIrlsMaxIter; ++iter) {
    const Eigen::VectorXd p = (X * model.coef).unaryExpr([](double z) { return logistic(z); });
    const Eigen::VectorXd w = p.cwiseProduct((Eigen::VectorXd::Ones(n) - p));
    info = X.transpose() * w.asDiagonal() * X;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw SeparationError("logit_fit: information matrix is singular (separation)");
    }
    const Eigen::VectorXd step = ldlt.solve(X.transpose() * (y - p));
    if (!step.allFinite()) {
      throw SeparationError("logit_fit: Newton step is not finite (separation)");
    }
    model.coef += step;
    model.iterations = iter;
    if (model.coef.cwiseAbs().maxCoeff() > kSeparationBound) {
      throw SeparationError("logit_fit: |coefficient| exceeded 30 (separation)");
    }
    if (step.cwiseAbs().maxCoeff() < kIrlsTol) {
      model.converged = true;
      break;
    }
  }
  if (!model.converged) {
    throw SeparationError("logit_fit: IRLS did not converge in 100 iterations");
  }

  const Eigen::VectorXd p = (X * model.coef).unaryExpr([](double z) { return logistic(z); });
  const Eigen::VectorXd w = p.cwiseProduct((Eigen::VectorXd::Ones(n) - p));
  info = X.transpose() * w.asDiagonal() * X;
  const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  model.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    ll += y[i] > 0.5 ? std::log(p[i]) : std::log1p(-p[i]);
  }
  model.log_likelihood = ll;
  return model;
}

std::string_view to_string(DropReason reason) {
  return reason == DropReason::OffSupport ? "off-support" : "no-neighbor-within-caliper";
}

MatchResult propensity_match(std::span<const std::int64_t> ids,
                             std::span<const double> scores, std::span<const int> treat,
                             const MatchOptions& opts) {
  if (!(opts.caliper > 0.0)) throw ValidationError("propensity_match: caliper must be > 0");
  if (ids.size() != scores.size() || treat.size() != scores.size()) {
    throw ValidationError("propensity_match: ids, scores and labels differ in length");
  }
  MatchResult out;
  out.caliper = opts.caliper;

  std::vector<std::size_t> treated;
  std::vector<std::size_t> controls;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (treat[i] ? treated : controls).push_back(i);
  }
  if (treated.empty() || controls.empty()) {
    throw EmptySideError("propensity_match: no treated or no control units");
  }

  double cmin = std::numeric_limits<double>::infinity();
  double cmax = -cmin;
  for (auto i : controls) {
    cmin = std::min(cmin, scores[i]);
    cmax = std::max(cmax, scores[i]);
  }
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -tmin;

  std::vector<std::size_t> on_support;
  for (auto i : treated) {
    if (scores[i] < cmin || scores[i] > cmax) {
      out.dropped_treated.push_back({ids[i], DropReason::OffSupport});
    } else {
      on_support.push_back(i);
      tmin = std::min(tmin, scores[i]);
      tmax = std::max(tmax, scores[i]);
    }
  }
  if (on_support.empty()) {
    throw EmptySideError("propensity_match: no treated units on common support");
  }

  // Available controls ordered by (score, position) for nearest lookups.
  std::set<std::pair<double, std::size_t>> pool;
  for (auto i : controls) {
    if (scores[i] < tmin || scores[i] > tmax) {
      out.dropped_control.push_back({ids[i], DropReason::OffSupport});
    }
    pool.emplace(scores[i], i);
  }

  switch (opts.order) {
    case MatchOrder::DescendingScore:
      std::stable_sort(on_support.begin(), on_support.end(),
                       [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
      break;
    case MatchOrder::AscendingScore:
      std::stable_sort(on_support.begin(), on_support.end(),
                       [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
      break;
    case MatchOrder::InputOrder:
      break;
  }

  for (auto ti : on_support) {
    const double s = scores[ti];
    auto best = pool.end();
    double best_d = std::numeric_limits<double>::infinity();
    auto hi = pool.lower_bound({s, 0});
    if (hi != pool.end()) {
      best = hi;
      best_d = std::abs(hi->first - s);
    }
    if (hi != pool.begin()) {
      auto lo = std::prev(hi);
      const double d = std::abs(s - lo->first);
      if (d <= best_d) {  // ties go to the lower score
        best = lo;
        best_d = d;
      }
    }
    if (best == pool.end() || best_d > opts.caliper) {
      out.dropped_treated.push_back({ids[ti], DropReason::NoNeighborWithinCaliper});
      continue;
    }
    out.pairs.push_back({ids[ti], ids[best->second], best_d});
    if (!opts.with_replacement) pool.erase(best);
  }
  return out;
}

MatchResult propensity_match(std::span<const double> scores, std::span<const int> treat,
                             const MatchOptions& opts) {
  std::vector<std::int64_t> ids(scores.size());
  std::iota(ids.begin(), ids.end(), std::int64_t{0});
  return propensity_match(ids, scores, treat, opts);
}

BalanceStats balance_stats(std::span<const double> treated, std::span<const double> control) {
  BalanceStats s;
  s.mean_treated = stats::mean(treated);
  s.mean_control = stats::mean(control);
  const double vt = treated.size() > 1 ? stats::variance(treated) : 0.0;
  const double vc = control.size() > 1 ? stats::variance(control) : 0.0;
  const double pooled = std::sqrt((vt + vc) / 2.0);
  if (pooled > 0.0) {
    s.std_diff = (s.mean_treated - s.mean_control) / pooled;
  } else {
    s.std_diff = std::numeric_limits<double>::quiet_NaN();
    s.zero_variance = true;
  }
  if (treated.size() > 1 && control.size() > 1) {
    s.p_value = stats::welch_t_test(treated, control).p;
  } else {
    s.p_value = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

BalanceTable balance_table(const Eigen::MatrixXd& covariates,
                           std::span<const std::string> names,
                           std::span<const std::int64_t> ids, std::span<const int> treat,
                           const MatchResult& match) {
  const auto n = static_cast<std::size_t>(covariates.rows());
  if (ids.size() != n || treat.size() != n) {
    throw ValidationError("balance_table: covariates, ids and labels differ in length");
  }
  if (match.pairs.empty()) throw ValidationError("balance_table: no matched pairs");

  std::unordered_map<std::int64_t, std::size_t> row_of;
  for (std::size_t i = 0; i < n; ++i) row_of.emplace(ids[i], i);

  BalanceTable table;
  table.n_pairs = static_cast<int>(match.pairs.size());
  for (int t : treat) (t ? table.n_treated : table.n_control) += 1;

  for (Eigen::Index j = 0; j < covariates.cols(); ++j) {
    std::vector<double> pre_t;
    std::vector<double> pre_c;
    for (std::size_t i = 0; i < n; ++i) {
      (treat[i] ? pre_t : pre_c).push_back(covariates(static_cast<Eigen::Index>(i), j));
    }
    std::vector<double> post_t;
    std::vector<double> post_c;
    for (const auto& p : match.pairs) {
      const auto ti = row_of.find(p.treated_id);
      const auto ci = row_of.find(p.control_id);
      if (ti == row_of.end() || ci == row_of.end()) {
        throw ValidationError("balance_table: matched id not present in covariates");
      }
      post_t.push_back(covariates(static_cast<Eigen::Index>(ti->second), j));
      post_c.push_back(covariates(static_cast<Eigen::Index>(ci->second), j));
    }
    BalanceRow row;
    row.covariate = static_cast<std::size_t>(j) < names.size()
                        ? names[static_cast<std::size_t>(j)]
                        : "x" + std::to_string(j + 1);
    row.pre = balance_stats(pre_t, pre_c);
    row.post = balance_stats(post_t, post_c);
    table.rows.push_back(row);
  }
  return table;
}

std::vector<std::int64_t> PsmResult::matched_workers() const {
  std::vector<std::int64_t> out;
  out.reserve(match.pairs.size() * 2);
  for (const auto& p : match.pairs) {
    out.push_back(p.treated_id);
    out.push_back(p.control_id);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PsmResult run_psm(const std::vector<WorkerCovariates>& workers, int treated_market,
                  int control_market, const MatchOptions& opts) {
  if (treated_market == control_market) {
    throw ValidationError("run_psm: treated and control market are the same");
  }
  std::vector<const WorkerCovariates*> sample;
  for (const auto& w : workers) {
    if (w.market_id == treated_market || w.market_id == control_market) sample.push_back(&w);
  }
  const auto n = static_cast<Eigen::Index>(sample.size());
  const auto& names = covariate_names();
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(names.size()));
  std::vector<std::int64_t> ids;
  std::vector<int> treat;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& w = *sample[static_cast<std::size_t>(i)];
    const auto v = covariate_values(w);
    for (std::size_t j = 0; j < v.size(); ++j) X(i, static_cast<Eigen::Index>(j)) = v[j];
    ids.push_back(w.worker_id);
    treat.push_back(w.market_id == treated_market ? 1 : 0);
  }

  PsmResult out;
  out.treated_market = treated_market;
  out.control_market = control_market;
  out.model = logit_fit(X, treat, names);
  const Eigen::VectorXd scores = out.model.predict(X);
  out.match = propensity_match(ids, std::span<const double>(scores.data(), scores.size()),
                               treat, opts);
  if (!out.match.pairs.empty()) {
    out.balance = balance_table(X, names, ids, treat, out.match);
  }
  return out;
}

void write_pairs_csv(std::ostream& out, const MatchResult& match) {
  out << "treated_id,control_id,distance\n";
  for (const auto& p : match.pairs) {
    out << p.treated_id << ',' << p.control_id << ',' << num("%.10g", p.distance) << '\n';
  }
}

void write_balance_csv(std::ostream& out, const BalanceTable& table) {
  out << "covariate,pre_mean_treated,pre_mean_control,pre_p,pre_std_diff,"
         "post_mean_treated,post_mean_control,post_p,post_std_diff\n";
  for (const auto& r : table.rows) {
    out << r.covariate;
    for (const auto* s : {&r.pre, &r.post}) {
      out << ',' << num("%.10g", s->mean_treated) << ',' << num("%.10g", s->mean_control)
          << ',' << num("%.10g", s->p_value) << ','
          << (s->zero_variance ? std::string("NA") : num("%.10g", s->std_diff));
    }
    out << '\n';
  }
}

std::string format_balance_table(const BalanceTable& table) {
  std::ostringstream os;
  std::size_t label_w = 22;
  for (const auto& r : table.rows) label_w = std::max(label_w, r.covariate.size() + 2);
  auto cell = [](const std::string& s) {
    return s.size() >= 10 ? s : std::string(10 - s.size(), ' ') + s;
  };
  const std::string rule(label_w + 80, '-');
  os << rule << '\n'
     << std::string(label_w, ' ') << "               Prematching                "
     << "              Postmatching\n"
     << std::string(label_w, ' ');
  for (int b = 0; b < 2; ++b) {
    os << cell("Mean T") << cell("Mean C") << cell("p>|t|") << cell("Std.diff");
  }
  os << '\n' << rule << '\n';
  for (const auto& r : table.rows) {
    os << r.covariate << std::string(label_w - r.covariate.size(), ' ');
    for (const auto* s : {&r.pre, &r.post}) {
      os << cell(num("%.3f", s->mean_treated)) << cell(num("%.3f", s->mean_control))
         << cell(num("%.3f", s->p_value))
         << cell(s->zero_variance ? std::string("n/a") : num("%.3f", s->std_diff));
    }
    os << '\n';
  }
  os << rule << '\n'
     << "Treated: " << table.n_treated << "  Control: " << table.n_control
     << "  Matched pairs: " << table.n_pairs << '\n';
  return os.str();
}

}  // namespace inflection
