#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "inflection/panel_synth.hpp"

namespace inflection {

/// Logistic propensity model with an intercept in position 0.
struct PropensityModel {
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::VectorXd se;  // from the inverse Fisher information
  int iterations = 0;
  bool converged = false;
  double log_likelihood = 0.0;

  /// Fitted probabilities for rows of covariates (without the intercept column).
  Eigen::VectorXd predict(const Eigen::MatrixXd& covariates) const;
};

/// Maximum likelihood by iteratively reweighted least squares, stopping when
/// the largest coefficient update is below 1e-8 (at most 100 iterations).
/// Throws SeparationError if |coef| exceeds 30 or the iteration cap is hit.
PropensityModel logit_fit(const Eigen::MatrixXd& covariates, std::span<const int> treat,
                          std::vector<std::string> names = {});

enum class DropReason { OffSupport, NoNeighborWithinCaliper };
std::string_view to_string(DropReason reason);

struct MatchedPair {
  std::int64_t treated_id = 0;
  std::int64_t control_id = 0;
  double distance = 0.0;
};

struct DroppedUnit {
  std::int64_t id = 0;
  DropReason reason = DropReason::OffSupport;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;
  std::vector<DroppedUnit> dropped_treated;
  /// Controls outside the treated score range. Unused controls inside the
  /// range are simply absent from `pairs`.
  std::vector<DroppedUnit> dropped_control;
  double caliper = 0.0;
};

enum class MatchOrder { DescendingScore, AscendingScore, InputOrder };

struct MatchOptions {
  /// Maximum |score difference| on the probability scale.
  double caliper = 2e-4;
  bool with_replacement = false;
  MatchOrder order = MatchOrder::DescendingScore;
};

/// Greedy 1:1 nearest-neighbour matching on the propensity score. Treated
/// units outside [min control, max control] are dropped as off-support
/// before matching. Throws EmptySideError when one side is empty on support.
MatchResult propensity_match(std::span<const std::int64_t> ids,
                             std::span<const double> scores, std::span<const int> treat,
                             const MatchOptions& opts = {});
/// Same, with ids equal to row positions.
MatchResult propensity_match(std::span<const double> scores, std::span<const int> treat,
                             const MatchOptions& opts = {});

struct BalanceStats {
  double mean_treated = 0.0;
  double mean_control = 0.0;
  double p_value = 1.0;  // Welch two-sample t-test
  double std_diff = 0.0;
  bool zero_variance = false;  // std_diff undefined
};

struct BalanceRow {
  std::string covariate;
  BalanceStats pre;
  BalanceStats post;
};

struct BalanceTable {
  std::vector<BalanceRow> rows;
  int n_treated = 0;
  int n_control = 0;
  int n_pairs = 0;
};

/// Standardized difference (m_T - m_C) / sqrt((s_T^2 + s_C^2) / 2).
BalanceStats balance_stats(std::span<const double> treated, std::span<const double> control);

/// Pre-matching compares all treated with all controls; post-matching
/// compares the treated and control members of each pair.
BalanceTable balance_table(const Eigen::MatrixXd& covariates,
                           std::span<const std::string> names,
                           std::span<const std::int64_t> ids, std::span<const int> treat,
                           const MatchResult& match);

/// Propensity model, matching and balance for one treated market against the
/// control market.
struct PsmResult {
  int treated_market = 0;
  int control_market = 0;
  PropensityModel model;
  MatchResult match;
  BalanceTable balance;
  std::vector<std::int64_t> matched_workers() const;
};

PsmResult run_psm(const std::vector<WorkerCovariates>& workers, int treated_market,
                  int control_market, const MatchOptions& opts = {});

void write_pairs_csv(std::ostream& out, const MatchResult& match);
void write_balance_csv(std::ostream& out, const BalanceTable& table);
/// Aligned text with Prematching / Postmatching column blocks.
std::string format_balance_table(const BalanceTable& table);

}  // namespace inflection
