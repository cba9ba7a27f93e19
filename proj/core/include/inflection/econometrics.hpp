#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inflection/panel_synth.hpp"

namespace inflection {

// ---------------------------------------------------------------------------
// Kernel: fixed-effect absorption, least squares, cluster-robust covariance.
// ---------------------------------------------------------------------------

/// Maps arbitrary group labels onto dense indices 0..levels-1 in order of
/// first appearance.
struct DenseIndex {
  std::vector<int> index;
  int levels = 0;
};
DenseIndex dense_index(std::span<const std::int64_t> labels);

struct AbsorbOptions {
  bool unit = true;
  bool time = true;
  double tol = 1e-10;
  int max_iter = 10000;
};

struct AbsorbResult {
  Eigen::MatrixXd demeaned;
  int iterations = 0;
};

/// Within transformation by alternating projections: every column is
/// repeatedly demeaned by unit then by time until the largest change another
/// sweep would make drops below `tol`. Balanced panels finish after one sweep.
/// Throws NonConvergenceError after `max_iter` sweeps.
AbsorbResult absorb_two_way(const Eigen::MatrixXd& m, std::span<const int> unit,
                            std::span<const int> time, const AbsorbOptions& opts = {});

struct OlsOptions {
  std::vector<std::string> names;
  /// Column scales used for the rank test; defaults to the norms of X.
  /// Pass the pre-absorption norms to catch columns the fixed effects ate.
  std::vector<double> reference_norms;
  double rank_tol = 1e-9;
};

struct OlsResult {
  Eigen::VectorXd coef;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd xtx_inv;
};

/// Least squares through a Householder QR of X. A column whose component
/// orthogonal to the preceding columns is below rank_tol times its reference
/// norm raises RankDeficiencyError naming it.
OlsResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const OlsOptions& opts = {});

/// CR1 sandwich (X'X)^-1 (sum_g X_g' e_g e_g' X_g) (X'X)^-1 scaled by
/// G/(G-1) * (N-1)/(N-K). `n_params` is K; it defaults to X.cols().
Eigen::MatrixXd cluster_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                             std::span<const int> clusters,
                             std::optional<int> n_params = std::nullopt);

// ---------------------------------------------------------------------------
// Panel regressions.
// ---------------------------------------------------------------------------

enum class Transform { Log1p, Identity, LogDropZeros };
enum class Control { Tenure };
enum class ClusterBy { Worker, Market, Observation };
enum class Moderator { Us, Experienced };

std::string_view to_string(Transform t);
std::string_view to_string(Moderator m);
Moderator moderator_from_string(std::string_view name);

struct InterestTerm {
  enum class Kind {
    TreatPost,           // ChatGPT = Treat x After (post35)
    TreatPost35,         // ChatGPT3.5
    TreatPost40,         // ChatGPT4.0
    TreatRelTime,        // Treat x RelTime(sigma)
    ModeratorTreatPost,  // Moderator x ChatGPT
    ModeratorPost,       // Moderator x After
  };
  Kind kind = Kind::TreatPost;
  int sigma = 0;
  Moderator moderator = Moderator::Us;

  std::string name() const;
  bool operator==(const InterestTerm&) const = default;
};

struct RegressionSpec {
  OutcomeColumn outcome = OutcomeColumn::FjobNum;
  /// Defaults to log1p for counts and earnings, identity for the ratio.
  std::optional<Transform> transform;
  std::vector<InterestTerm> interest;
  std::vector<Control> controls = {Control::Tenure};
  bool unit_fe = true;
  bool time_fe = true;
  ClusterBy cluster = ClusterBy::Worker;
  /// Adds Treat x month_index.
  bool market_trend = false;
  int baseline_period = -1;
  int event_min = -6;
  int event_max = 9;

  Transform effective_transform() const;
};

struct Coefficient {
  std::string term;
  double estimate = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p = 1.0;
  std::optional<int> period;  // relative period for event-study terms
};

struct FitResult {
  std::string label;
  std::vector<Coefficient> coefficients;  // interest terms first, then controls
  Eigen::MatrixXd vcov;                   // aligned with `coefficients`
  std::vector<std::string> omitted;       // controls absorbed by the fixed effects
  int n_obs = 0;
  int n_clusters = 0;
  int n_units = 0;
  int df = 0;  // n_clusters - 1, used for t and F reference distributions
  double within_r2 = 0.0;
  int fe_iterations = 0;

  bool has(std::string_view term) const;
  const Coefficient& at(std::string_view term) const;
  double estimate(std::string_view term) const { return at(term).estimate; }
  double se(std::string_view term) const { return at(term).se; }
  double pvalue(std::string_view term) const { return at(term).p; }
};

/// Two-way FE regression of the transformed outcome on `spec.interest` plus
/// controls. Controls swallowed by the fixed effects are listed in `omitted`;
/// a rank-deficient interest term is an error.
FitResult fit_panel(const Panel& panel, const RegressionSpec& spec);

/// Two-way FE difference-in-differences: beta on ChatGPT = Treat x After.
FitResult did_fit(const Panel& panel, RegressionSpec spec);

/// Relative-time model around the first release; sigma = baseline is
/// omitted. Requires every period in [event_min, event_max].
FitResult event_study_fit(const Panel& panel, RegressionSpec spec);

/// ChatGPT3.5 and ChatGPT4.0 indicators together; the 4.0 coefficient is the
/// incremental effect after the second release.
FitResult dual_shock_fit(const Panel& panel, RegressionSpec spec);

/// ChatGPT plus Moderator x ChatGPT and Moderator x After. The moderator's
/// main effect is absorbed by the worker fixed effect.
FitResult heterogeneity_fit(const Panel& panel, RegressionSpec spec, Moderator moderator);

struct DemandFitOptions {
  /// Observation-level clustering (HC1) by default: with two markets a
  /// market-clustered CRVE has one degree of freedom.
  ClusterBy cluster = ClusterBy::Observation;
};

/// log1p(postnum) on ChatGPT = Treat x Post with market and week effects.
FitResult demand_did_fit(const std::vector<DemandRow>& rows,
                         const DemandFitOptions& opts = {});

struct WaldResult {
  double f = 0.0;
  int df1 = 0;
  int df2 = 0;
  double p = 1.0;
};

/// Joint test that all listed coefficients are zero, using the fit's
/// cluster-robust covariance and F(k, G-1).
WaldResult wald_test(const FitResult& fit, std::span<const std::string> terms);

/// Names of the event-study terms with negative relative period.
std::vector<std::string> pre_period_terms(const FitResult& fit);
std::vector<std::string> post_period_terms(const FitResult& fit);

// ---------------------------------------------------------------------------
// Equivalence testing and effect sizes.
// ---------------------------------------------------------------------------

struct TostPeriod {
  int period = 0;
  std::string term;
  double estimate = 0.0;
  double se = 0.0;
  double t_lower = 0.0;  // (beta + delta) / se
  double t_upper = 0.0;  // (beta - delta) / se
  bool pass = false;
};

struct TostResult {
  std::vector<TostPeriod> periods;
  bool pass = false;
  double delta = 0.0;
  double alpha = 0.05;
  double t_crit = 0.0;
};

/// Two one-sided tests per pre-period coefficient against [-delta, delta].
TostResult tost_pretrends(const FitResult& event_fit, double delta, double alpha = 0.05);

/// 0.36 x standard deviation of the transformed outcome.
double default_tost_bounds(const Panel& panel, const RegressionSpec& spec);

/// Percent change implied by a log-point coefficient: e^beta - 1.
double coef_to_percent(double beta);

// ---------------------------------------------------------------------------
// Reporting.
// ---------------------------------------------------------------------------

/// `term,estimate,se,p`
void write_fit_csv(std::ostream& out, const FitResult& fit);

/// Significance stars at 0.1 / 0.05 / 0.01.
std::string stars(double p);

/// Aligned text table: one column per fit, estimate with stars over the
/// clustered SE in parentheses, then Observations, N and Within R^2.
std::string format_fit_table(std::span<const FitResult> fits,
                             std::span<const std::string> column_labels);

void write_tost_csv(std::ostream& out, const TostResult& tost);

}  // namespace inflection
