#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "inflection/econometrics.hpp"
#include "inflection/errors.hpp"
#include "inflection/stats.hpp"

namespace inflection {

namespace {

struct Design {
  std::string label;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> names;
  std::vector<bool> interest;
  std::vector<std::optional<int>> periods;
  std::vector<int> unit;
  std::vector<int> time;
  std::vector<int> cluster;
  int n_units = 0;
  int n_times = 0;
  int n_clusters = 0;
  bool unit_nested_in_cluster = false;
};

void erase_column(Eigen::MatrixXd& m, Eigen::Index j) {
  const Eigen::Index cols = m.cols();
  if (j < cols - 1) {
    m.middleCols(j, cols - j - 1) = m.rightCols(cols - j - 1).eval();
  }
  m.conservativeResize(Eigen::NoChange, cols - 1);
}

FitResult fit_design(Design d, bool unit_fe, bool time_fe) {
  const Eigen::Index n = d.X.rows();
  if (n == 0) throw ValidationError(d.label + ": no observations");
  if (!unit_fe && !time_fe) {
    d.X.conservativeResize(Eigen::NoChange, d.X.cols() + 1);
    d.X.col(d.X.cols() - 1).setOnes();
    d.names.push_back("(Intercept)");
    d.interest.push_back(false);
    d.periods.emplace_back();
  }

  std::vector<double> ref_norms;
  for (Eigen::Index j = 0; j < d.X.cols(); ++j) ref_norms.push_back(d.X.col(j).norm());

  Eigen::MatrixXd stacked(n, d.X.cols() + 1);
  stacked.col(0) = d.y;
  stacked.rightCols(d.X.cols()) = d.X;
  AbsorbOptions aopts;
  aopts.unit = unit_fe;
  aopts.time = time_fe;
  AbsorbResult absorbed = absorb_two_way(stacked, d.unit, d.time, aopts);
  const Eigen::VectorXd yd = absorbed.demeaned.col(0);
  Eigen::MatrixXd Xd = absorbed.demeaned.rightCols(d.X.cols());

  FitResult fit;
  fit.label = d.label;
  OlsResult ols;
  while (true) {
    if (Xd.cols() == 0) throw ValidationError(d.label + ": no estimable regressors");
    OlsOptions oopts;
    oopts.names = d.names;
    oopts.reference_norms = ref_norms;
    try {
      ols = ols_fit(Xd, yd, oopts);
      break;
    } catch (const RankDeficiencyError& e) {
      const auto it = std::find(d.names.begin(), d.names.end(), e.column());
      if (it == d.names.end()) throw;
      const auto j = static_cast<std::size_t>(it - d.names.begin());
      if (d.interest[j]) throw;
      fit.omitted.push_back(d.names[j]);
      erase_column(Xd, static_cast<Eigen::Index>(j));
      d.names.erase(d.names.begin() + static_cast<std::ptrdiff_t>(j));
      d.interest.erase(d.interest.begin() + static_cast<std::ptrdiff_t>(j));
      d.periods.erase(d.periods.begin() + static_cast<std::ptrdiff_t>(j));
      ref_norms.erase(ref_norms.begin() + static_cast<std::ptrdiff_t>(j));
    }
  }

  int fe_params = 0;
  if (unit_fe) fe_params += d.unit_nested_in_cluster ? 0 : d.n_units;
  if (time_fe) fe_params += d.n_times;
  if (unit_fe && time_fe) fe_params -= 1;
  const int K = static_cast<int>(Xd.cols()) + std::max(fe_params, 0);
  fit.vcov = cluster_vcov(Xd, ols.residuals, d.cluster, K);

  fit.n_obs = static_cast<int>(n);
  fit.n_clusters = d.n_clusters;
  fit.n_units = d.n_units;
  fit.df = d.n_clusters - 1;
  fit.fe_iterations = absorbed.iterations;
  const double tss = yd.squaredNorm();
  fit.within_r2 = tss > 0.0 ? 1.0 - ols.residuals.squaredNorm() / tss : 0.0;

  for (Eigen::Index j = 0; j < Xd.cols(); ++j) {
    Coefficient c;
    c.term = d.names[static_cast<std::size_t>(j)];
    c.estimate = ols.coef[j];
    c.se = std::sqrt(std::max(fit.vcov(j, j), 0.0));
    if (c.se > 0.0) {
      c.t = c.estimate / c.se;
    } else {
      c.t = c.estimate == 0.0 ? 0.0
                              : std::copysign(std::numeric_limits<double>::infinity(),
                                              c.estimate);
    }
    c.p = stats::t_two_sided_p(c.t, fit.df);
    c.period = d.periods[static_cast<std::size_t>(j)];
    fit.coefficients.push_back(c);
  }
  return fit;
}

double raw_outcome(const PanelRow& r, OutcomeColumn c) {
  switch (c) {
    case OutcomeColumn::FjobNum:
      return static_cast<double>(r.fjobnum);
    case OutcomeColumn::FjobRatio:
      return r.fjobratio;
    case OutcomeColumn::FjobEarn:
      return r.fjobearn;
  }
  return 0.0;
}

int moderator_value(const PanelRow& r, Moderator m) {
  return m == Moderator::Us ? r.us : r.experienced;
}

std::string moderator_label(Moderator m) {
  return m == Moderator::Us ? "US" : "Experienced";
}

/// First month index flagged post35 anywhere in the panel.
std::optional<int> release_index(const Panel& panel) {
  std::optional<int> s;
  for (const auto& r : panel) {
    if (r.post35 && (!s || r.month_index < *s)) s = r.month_index;
  }
  return s;
}

double interest_value(const InterestTerm& term, const PanelRow& r, int release) {
  switch (term.kind) {
    case InterestTerm::Kind::TreatPost:
    case InterestTerm::Kind::TreatPost35:
      return r.treat * r.post35;
    case InterestTerm::Kind::TreatPost40:
      return r.treat * r.post40;
    case InterestTerm::Kind::TreatRelTime:
      return (r.treat && r.month_index - release == term.sigma) ? 1.0 : 0.0;
    case InterestTerm::Kind::ModeratorTreatPost:
      return moderator_value(r, term.moderator) * r.treat * r.post35;
    case InterestTerm::Kind::ModeratorPost:
      return moderator_value(r, term.moderator) * r.post35;
  }
  return 0.0;
}

Design build_panel_design(const Panel& panel, const RegressionSpec& spec,
                          const std::string& label) {
  if (panel.empty()) throw ValidationError(label + ": empty panel");
  const Transform transform = spec.effective_transform();

  std::vector<const PanelRow*> rows;
  rows.reserve(panel.size());
  for (const auto& r : panel) {
    if (transform == Transform::LogDropZeros && !(raw_outcome(r, spec.outcome) > 0.0)) {
      continue;
    }
    rows.push_back(&r);
  }
  if (rows.empty()) throw ValidationError(label + ": no rows left after dropping zeros");

  const bool needs_release =
      std::any_of(spec.interest.begin(), spec.interest.end(), [](const InterestTerm& t) {
        return t.kind == InterestTerm::Kind::TreatRelTime;
      });
  int release = 0;
  if (needs_release) {
    const auto s = release_index(panel);
    if (!s) throw MissingPeriodsError(label + ": panel has no post-release rows");
    release = *s;
  }

  Design d;
  d.label = label;
  const auto n = static_cast<Eigen::Index>(rows.size());
  std::size_t n_cols = spec.interest.size() + spec.controls.size() +
                       (spec.market_trend ? 1 : 0);
  d.y.resize(n);
  d.X.resize(n, static_cast<Eigen::Index>(n_cols));

  for (const auto& t : spec.interest) {
    d.names.push_back(t.name());
    d.interest.push_back(true);
    d.periods.push_back(t.kind == InterestTerm::Kind::TreatRelTime
                            ? std::optional<int>(t.sigma)
                            : std::nullopt);
  }
  if (spec.market_trend) {
    d.names.push_back("Treat:Trend");
    d.interest.push_back(false);
    d.periods.emplace_back();
  }
  for (auto c : spec.controls) {
    (void)c;
    d.names.push_back("Tenure");
    d.interest.push_back(false);
    d.periods.emplace_back();
  }

  std::vector<std::int64_t> workers;
  std::vector<std::int64_t> months;
  std::vector<std::int64_t> markets;
  workers.reserve(rows.size());
  months.reserve(rows.size());
  markets.reserve(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const PanelRow& r = *rows[static_cast<std::size_t>(i)];
    const double raw = raw_outcome(r, spec.outcome);
    switch (transform) {
      case Transform::Identity:
        d.y[i] = raw;
        break;
      case Transform::Log1p:
        d.y[i] = std::log1p(raw);
        break;
      case Transform::LogDropZeros:
        d.y[i] = std::log(raw);
        break;
    }
    Eigen::Index col = 0;
    for (const auto& t : spec.interest) d.X(i, col++) = interest_value(t, r, release);
    if (spec.market_trend) d.X(i, col++) = r.treat * static_cast<double>(r.month_index);
    for (std::size_t c = 0; c < spec.controls.size(); ++c) {
      d.X(i, col++) = static_cast<double>(r.tenure);
    }
    workers.push_back(r.worker_id);
    months.push_back(r.month_index);
    markets.push_back(r.market_id);
  }

  const DenseIndex wu = dense_index(workers);
  const DenseIndex tm = dense_index(months);
  d.unit = wu.index;
  d.time = tm.index;
  d.n_units = wu.levels;
  d.n_times = tm.levels;
  switch (spec.cluster) {
    case ClusterBy::Worker:
      d.cluster = wu.index;
      d.n_clusters = wu.levels;
      d.unit_nested_in_cluster = true;
      break;
    case ClusterBy::Market: {
      const DenseIndex mk = dense_index(markets);
      d.cluster = mk.index;
      d.n_clusters = mk.levels;
      d.unit_nested_in_cluster = true;  // workers never switch markets
      break;
    }
    case ClusterBy::Observation:
      d.cluster.resize(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) d.cluster[i] = static_cast<int>(i);
      d.n_clusters = static_cast<int>(rows.size());
      break;
  }
  return d;
}

void require_two_way(const RegressionSpec& spec, const std::string& label) {
  if (!spec.unit_fe || !spec.time_fe) {
    throw ValidationError(label + " requires worker and month fixed effects");
  }
}

void require_interest(RegressionSpec& spec, const std::vector<InterestTerm>& expected,
                      const std::string& label) {
  if (spec.interest.empty()) {
    spec.interest = expected;
  } else if (spec.interest != expected) {
    throw ValidationError(label + ": unexpected interest terms for this estimator");
  }
}

}  // namespace

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::Log1p:
      return "log1p";
    case Transform::Identity:
      return "identity";
    case Transform::LogDropZeros:
      return "log_drop_zeros";
  }
  return "unknown";
}

std::string_view to_string(Moderator m) { return m == Moderator::Us ? "us" : "experienced"; }

Moderator moderator_from_string(std::string_view name) {
  if (name == "us") return Moderator::Us;
  if (name == "experienced") return Moderator::Experienced;
  throw ValidationError("unknown moderator '" + std::string(name) +
                        "' (expected us or experienced)");
}

std::string InterestTerm::name() const {
  switch (kind) {
    case Kind::TreatPost:
      return "ChatGPT";
    case Kind::TreatPost35:
      return "ChatGPT3.5";
    case Kind::TreatPost40:
      return "ChatGPT4.0";
    case Kind::TreatRelTime:
      return "RelTime(" + std::to_string(sigma) + ")";
    case Kind::ModeratorTreatPost:
      return moderator_label(moderator) + ":ChatGPT";
    case Kind::ModeratorPost:
      return moderator_label(moderator) + ":After";
  }
  return "?";
}

Transform RegressionSpec::effective_transform() const {
  if (transform) return *transform;
  return outcome == OutcomeColumn::FjobRatio ? Transform::Identity : Transform::Log1p;
}

bool FitResult::has(std::string_view term) const {
  return std::any_of(coefficients.begin(), coefficients.end(),
                     [&](const Coefficient& c) { return c.term == term; });
}

const Coefficient& FitResult::at(std::string_view term) const {
  for (const auto& c : coefficients) {
    if (c.term == term) return c;
  }
  throw std::out_of_range("FitResult: no term '" + std::string(term) + "'");
}

FitResult fit_panel(const Panel& panel, const RegressionSpec& spec) {
  if (spec.interest.empty()) throw ValidationError("fit_panel: no interest terms");
  Design d = build_panel_design(panel, spec, "fit_panel");
  return fit_design(std::move(d), spec.unit_fe, spec.time_fe);
}

FitResult did_fit(const Panel& panel, RegressionSpec spec) {
  require_two_way(spec, "did_fit");
  require_interest(spec, {InterestTerm{InterestTerm::Kind::TreatPost}}, "did_fit");
  Design d = build_panel_design(panel, spec, "did_fit");
  return fit_design(std::move(d), true, true);
}

FitResult event_study_fit(const Panel& panel, RegressionSpec spec) {
  require_two_way(spec, "event_study_fit");
  if (spec.event_min > spec.event_max) {
    throw ValidationError("event_study_fit: empty event window");
  }
  const auto release = release_index(panel);
  if (!release) throw MissingPeriodsError("event_study_fit: panel has no post-release rows");

  std::set<int> present;
  for (const auto& r : panel) present.insert(r.month_index - *release);
  std::vector<std::string> missing;
  std::vector<InterestTerm> terms;
  for (int s = spec.event_min; s <= spec.event_max; ++s) {
    InterestTerm t{InterestTerm::Kind::TreatRelTime, s};
    if (!present.count(s)) missing.push_back(t.name());
    if (s != spec.baseline_period) terms.push_back(t);
  }
  if (!present.count(spec.baseline_period)) {
    missing.push_back("baseline RelTime(" + std::to_string(spec.baseline_period) + ")");
  }
  if (!missing.empty()) {
    std::string msg = "event_study_fit: missing relative periods:";
    for (const auto& m : missing) msg += " " + m;
    throw MissingPeriodsError(msg);
  }
  require_interest(spec, terms, "event_study_fit");
  Design d = build_panel_design(panel, spec, "event_study_fit");
  return fit_design(std::move(d), true, true);
}

FitResult dual_shock_fit(const Panel& panel, RegressionSpec spec) {
  require_two_way(spec, "dual_shock_fit");
  for (std::size_t i = 0; i < panel.size(); ++i) {
    if (panel[i].post40 && !panel[i].post35) {
      throw ValidationError("dual_shock_fit: row " + std::to_string(i) +
                            " has post40 = 1 with post35 = 0");
    }
  }
  require_interest(spec,
                   {InterestTerm{InterestTerm::Kind::TreatPost35},
                    InterestTerm{InterestTerm::Kind::TreatPost40}},
                   "dual_shock_fit");
  Design d = build_panel_design(panel, spec, "dual_shock_fit");
  return fit_design(std::move(d), true, true);
}

FitResult heterogeneity_fit(const Panel& panel, RegressionSpec spec, Moderator moderator) {
  require_two_way(spec, "heterogeneity_fit");
  std::unordered_map<std::int64_t, int> seen;
  for (const auto& r : panel) {
    const int v = moderator_value(r, moderator);
    if (v != 0 && v != 1) {
      throw NonBinaryModeratorError("heterogeneity_fit: moderator " +
                                    moderator_label(moderator) + " takes value " +
                                    std::to_string(v));
    }
    auto [it, inserted] = seen.emplace(r.worker_id, v);
    if (!inserted && it->second != v) {
      throw NonBinaryModeratorError("heterogeneity_fit: moderator " +
                                    moderator_label(moderator) +
                                    " varies within worker " + std::to_string(r.worker_id));
    }
  }
  InterestTerm chatgpt{InterestTerm::Kind::TreatPost};
  InterestTerm mod_chatgpt{InterestTerm::Kind::ModeratorTreatPost, 0, moderator};
  InterestTerm mod_after{InterestTerm::Kind::ModeratorPost, 0, moderator};
  require_interest(spec, {mod_chatgpt, chatgpt, mod_after}, "heterogeneity_fit");
  Design d = build_panel_design(panel, spec, "heterogeneity_fit");
  return fit_design(std::move(d), true, true);
}

FitResult demand_did_fit(const std::vector<DemandRow>& rows, const DemandFitOptions& opts) {
  if (rows.empty()) throw ValidationError("demand_did_fit: no rows");
  std::set<int> markets;
  bool any_pre = false;
  bool any_post = false;
  for (const auto& r : rows) {
    markets.insert(r.market_id);
    any_pre |= r.post == 0;
    any_post |= r.post == 1;
  }
  if (markets.size() < 2) throw ValidationError("demand_did_fit: needs at least two markets");
  if (!any_pre || !any_post) {
    throw ValidationError("demand_did_fit: window must span the release");
  }

  Design d;
  d.label = "demand_did_fit";
  const auto n = static_cast<Eigen::Index>(rows.size());
  d.y.resize(n);
  d.X.resize(n, 1);
  d.names = {"ChatGPT"};
  d.interest = {true};
  d.periods = {std::nullopt};
  std::vector<std::int64_t> mk;
  std::vector<std::int64_t> wk;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    d.y[i] = std::log1p(static_cast<double>(r.postnum));
    d.X(i, 0) = r.treat * r.post;
    mk.push_back(r.market_id);
    wk.push_back(r.week_index);
  }
  const DenseIndex mi = dense_index(mk);
  const DenseIndex wi = dense_index(wk);
  d.unit = mi.index;
  d.time = wi.index;
  d.n_units = mi.levels;
  d.n_times = wi.levels;
  if (opts.cluster == ClusterBy::Observation) {
    d.cluster.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) d.cluster[i] = static_cast<int>(i);
    d.n_clusters = static_cast<int>(rows.size());
  } else {
    d.cluster = mi.index;
    d.n_clusters = mi.levels;
    d.unit_nested_in_cluster = true;
  }
  return fit_design(std::move(d), true, true);
}

WaldResult wald_test(const FitResult& fit, std::span<const std::string> terms) {
  if (terms.empty()) throw ValidationError("wald_test: no terms");
  std::vector<Eigen::Index> idx;
  for (const auto& t : terms) {
    const auto it = std::find_if(fit.coefficients.begin(), fit.coefficients.end(),
                                 [&](const Coefficient& c) { return c.term == t; });
    if (it == fit.coefficients.end()) {
      throw ValidationError("wald_test: no term '" + t + "'");
    }
    idx.push_back(it - fit.coefficients.begin());
  }
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd b(k);
  Eigen::MatrixXd V(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    b[a] = fit.coefficients[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])].estimate;
    for (Eigen::Index c = 0; c < k; ++c) {
      V(a, c) = fit.vcov(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(c)]);
    }
  }
  WaldResult w;
  w.df1 = static_cast<int>(k);
  w.df2 = fit.df;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(V);
  w.f = b.dot(ldlt.solve(b)) / static_cast<double>(k);
  w.p = stats::f_upper_p(w.f, w.df1, w.df2);
  return w;
}

std::vector<std::string> pre_period_terms(const FitResult& fit) {
  std::vector<std::string> out;
  for (const auto& c : fit.coefficients) {
    if (c.period && *c.period < 0) out.push_back(c.term);
  }
  return out;
}

std::vector<std::string> post_period_terms(const FitResult& fit) {
  std::vector<std::string> out;
  for (const auto& c : fit.coefficients) {
    if (c.period && *c.period >= 0) out.push_back(c.term);
  }
  return out;
}

}  // namespace inflection
