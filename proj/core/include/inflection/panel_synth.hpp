#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inflection/market_model.hpp"

namespace inflection {

/// AI level before the first release, after it, and after the second one.
struct APath {
  double pre = 0.0;
  double post35 = 0.0;
  double post40 = 0.0;

  bool constant() const noexcept { return pre == post35 && post35 == post40; }
  bool operator==(const APath&) const = default;
};

struct MarketScenario {
  int market_id = 0;
  std::string name;
  MarketSpec spec;
  APath a_path;

  bool operator==(const MarketScenario&) const = default;
};

/// Market-week demand series settings. Weeks are counted from the start of
/// the demand window; the shock weeks mark the first post-release week.
struct DemandSettings {
  int weeks = 95;
  int shock_week = 47;
  int shock2_week = 62;
  double weekly_scale = 30.0;
  double week_fe_sigma = 0.05;

  bool operator==(const DemandSettings&) const = default;
};

/// Worker-level matching covariates are driven by a latent seniority score
/// whose mean is shifted by `shift` in treated markets (selection on
/// observables). shift = 0 gives balanced groups.
struct CovariateSettings {
  double shift = 0.0;

  bool operator==(const CovariateSettings&) const = default;
};

/// Moderated workers see their a-shift scaled by the multiplier:
/// a_eff = a_pre + m * (a_t - a_pre), clamped to [0, 1].
struct ModeratorSettings {
  double us_share = 0.3;
  double us_shock_multiplier = 1.0;
  double experienced_shock_multiplier = 1.0;

  bool operator==(const ModeratorSettings&) const = default;
};

std::vector<std::string> default_month_calendar();

struct ScenarioConfig {
  std::vector<MarketScenario> markets;
  int control_market_id = 0;
  int workers_per_market = 1000;
  /// "YYYY-MM" labels in calendar order; gaps (excluded months) are allowed.
  std::vector<std::string> months = default_month_calendar();
  int shock1_index = 6;
  int shock2_index = 8;
  double worker_fe_sigma = 0.3;
  double month_fe_sigma = 0.05;
  double noise_sigma = 0.3;
  std::uint64_t seed = 20221130;

  /// Poisson mean of focal jobs is q * quantity_scale * exp(eta + tau).
  double quantity_scale = 2.5;
  /// Poisson mean of non-focal jobs feeding fjobratio.
  double background_lambda = 0.5;
  /// Converts model price units into currency for fjobearn.
  double earnings_scale = 100.0;

  DemandSettings demand;
  CovariateSettings covariates;
  ModeratorSettings moderators;

  bool operator==(const ScenarioConfig&) const = default;

  const MarketScenario& market(int market_id) const;
  bool is_treated(int market_id) const { return market_id != control_market_id; }
};

/// Throws InvalidConfigError / InvalidSpecError / BoundaryViolationError
/// naming the violated invariant.
void validate(const ScenarioConfig& config);

/// Seed used by Monte Carlo replication r of a scenario.
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t replication);
ScenarioConfig with_seed(ScenarioConfig config, std::uint64_t seed);

struct PanelRow {
  std::int64_t worker_id = 0;
  int market_id = 0;
  int month_index = 0;
  int treat = 0;
  int post35 = 0;
  int post40 = 0;
  std::int64_t fjobnum = 0;
  double fjobearn = 0.0;
  double fjobratio = 0.0;
  int tenure = 0;
  int us = 0;
  int experienced = 0;

  bool operator==(const PanelRow&) const = default;
};

using Panel = std::vector<PanelRow>;

struct DemandRow {
  int market_id = 0;
  int week_index = 0;
  std::int64_t postnum = 0;
  int treat = 0;
  int post = 0;

  bool operator==(const DemandRow&) const = default;
};

/// The five matching covariates, in log units where applicable.
struct WorkerCovariates {
  std::int64_t worker_id = 0;
  int market_id = 0;
  int treat = 0;
  double log_acc_fjobnum = 0.0;
  double log_experience = 0.0;
  double log_avg_fjobprice = 0.0;
  double log_avg_fhourprice = 0.0;
  double avg_fjobrating = 0.0;

  bool operator==(const WorkerCovariates&) const = default;
};

const std::vector<std::string>& covariate_names();
std::vector<double> covariate_values(const WorkerCovariates& w);

enum class OutcomeColumn { FjobNum, FjobRatio, FjobEarn };

std::string_view to_string(OutcomeColumn column);
OutcomeColumn outcome_column_from_string(std::string_view name);

/// log1p for counts and earnings, identity for the ratio.
double transformed_outcome(const PanelRow& row, OutcomeColumn column);

/// Stable worker ids: 1-based, consecutive within each market in config order.
std::int64_t worker_id_for(const ScenarioConfig& config, std::size_t market_pos,
                           int worker);

std::vector<WorkerCovariates> generate_worker_covariates(const ScenarioConfig& config);

Panel generate_panel(const ScenarioConfig& config);

std::vector<DemandRow> generate_demand_series(const ScenarioConfig& config, int weeks);
std::vector<DemandRow> generate_demand_series(const ScenarioConfig& config);

struct AttEstimate {
  double att = 0.0;
  double mc_se = 0.0;
  int reps = 0;
  std::int64_t cells_per_rep = 0;
};

/// Monte Carlo ATT on treated post-period cells: factual a-path versus a
/// counterfactual frozen at a_pre, under common random numbers.
AttEstimate ground_truth_att(const ScenarioConfig& config, OutcomeColumn outcome,
                             int reps);

/// AI level of `market` in month t; `multiplier` scales the shift away from
/// a_pre for moderated workers.
double scenario_a_level(const MarketScenario& market, const ScenarioConfig& config,
                        int month_index, double multiplier = 1.0);

}  // namespace inflection
