#include "inflection/panel_synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "inflection/errors.hpp"
#include "inflection/rng.hpp"

namespace inflection {

namespace {

// Stream tags keep worker-, month-, cell- and week-level draws disjoint.
constexpr std::uint64_t kTagWorker = 1;
constexpr std::uint64_t kTagMonth = 2;
constexpr std::uint64_t kTagCell = 3;
constexpr std::uint64_t kTagWeek = 4;
constexpr std::uint64_t kTagDemandCell = 5;
constexpr std::uint64_t kTagCovariate = 6;

int parse_month_label(const std::string& label) {
  int year = 0;
  int month = 0;
  if (label.size() != 7 || label[4] != '-' ||
      std::sscanf(label.c_str(), "%4d-%2d", &year, &month) != 2 || month < 1 ||
      month > 12) {
    throw InvalidConfigError("month label '" + label + "' is not YYYY-MM");
  }
  return year * 12 + (month - 1);
}

double clamp01(double a) { return std::clamp(a, 0.0, 1.0); }

struct WorkerDraws {
  std::int64_t worker_id = 0;
  double eta = 0.0;
  int tenure_start = 0;
  int us = 0;
  int experienced = 0;
  double multiplier = 1.0;
};

struct CellOutcome {
  std::int64_t fjobnum = 0;
  double fjobearn = 0.0;
  double fjobratio = 0.0;
};

/// Pre-draws every worker- and month-level quantity of one scenario so that
/// individual cells can be simulated under any a-level with fixed uniforms.
class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& config) : config_(config) {
    validate(config_);
    const auto covariates = generate_worker_covariates(config_);
    const int W = config_.workers_per_market;
    workers_.resize(config_.markets.size());
    for (std::size_t m = 0; m < config_.markets.size(); ++m) {
      std::vector<double> acc;
      acc.reserve(static_cast<std::size_t>(W));
      for (int i = 0; i < W; ++i) {
        acc.push_back(covariates[m * static_cast<std::size_t>(W) +
                                 static_cast<std::size_t>(i)]
                          .log_acc_fjobnum);
      }
      std::vector<double> sorted = acc;
      std::nth_element(sorted.begin(), sorted.begin() + W / 2, sorted.end());
      const double median = sorted[static_cast<std::size_t>(W / 2)];

      auto& out = workers_[m];
      out.resize(static_cast<std::size_t>(W));
      for (int i = 0; i < W; ++i) {
        WorkerDraws d;
        d.worker_id = worker_id_for(config_, m, i);
        CounterRng rng(derive_key(config_.seed,
                                  {kTagWorker, static_cast<std::uint64_t>(d.worker_id)}));
        d.eta = config_.worker_fe_sigma * rng.normal();
        d.tenure_start = static_cast<int>(std::floor(rng.uniform() * 120.0));
        d.us = rng.uniform() < config_.moderators.us_share ? 1 : 0;
        d.experienced = acc[static_cast<std::size_t>(i)] > median ? 1 : 0;
        d.multiplier = (d.us ? config_.moderators.us_shock_multiplier : 1.0) *
                       (d.experienced ? config_.moderators.experienced_shock_multiplier
                                      : 1.0);
        out[static_cast<std::size_t>(i)] = d;
      }
    }

    const std::size_t T = config_.months.size();
    tau_.resize(T);
    calendar_offset_.resize(T);
    const int first = parse_month_label(config_.months.front());
    for (std::size_t t = 0; t < T; ++t) {
      CounterRng rng(derive_key(config_.seed, {kTagMonth, t}));
      tau_[t] = config_.month_fe_sigma * rng.normal();
      calendar_offset_[t] = parse_month_label(config_.months[t]) - first;
    }
  }

  const ScenarioConfig& config() const { return config_; }
  const WorkerDraws& worker(std::size_t m, int i) const {
    return workers_[m][static_cast<std::size_t>(i)];
  }

  CellOutcome cell(std::size_t m, const WorkerDraws& w, int t, double a) const {
    const auto& market = config_.markets[m];
    const Equilibrium eq = cournot_equilibrium(market.spec, AiLevel(a));
    CounterRng rng(derive_key(config_.seed,
                              {kTagCell, static_cast<std::uint64_t>(w.worker_id),
                               static_cast<std::uint64_t>(t)}));
    const double u_count = rng.uniform();
    const double eps = rng.normal();
    const double u_background = rng.uniform();

    const double lambda = eq.q * config_.quantity_scale *
                          std::exp(w.eta + tau_[static_cast<std::size_t>(t)]);
    CellOutcome out;
    out.fjobnum = poisson_from_uniform(lambda, u_count);
    if (out.fjobnum > 0) {
      out.fjobearn = static_cast<double>(out.fjobnum) * eq.p *
                     config_.earnings_scale * std::exp(config_.noise_sigma * eps);
    }
    const auto background = poisson_from_uniform(config_.background_lambda, u_background);
    const auto total = out.fjobnum + background;
    out.fjobratio = total > 0 ? static_cast<double>(out.fjobnum) /
                                    static_cast<double>(total)
                              : 0.0;
    return out;
  }

  int tenure(const WorkerDraws& w, int t) const {
    return w.tenure_start + calendar_offset_[static_cast<std::size_t>(t)];
  }

 private:
  ScenarioConfig config_;
  std::vector<std::vector<WorkerDraws>> workers_;
  std::vector<double> tau_;
  std::vector<int> calendar_offset_;
};

double outcome_value(const CellOutcome& c, OutcomeColumn column) {
  switch (column) {
    case OutcomeColumn::FjobNum:
      return std::log1p(static_cast<double>(c.fjobnum));
    case OutcomeColumn::FjobRatio:
      return c.fjobratio;
    case OutcomeColumn::FjobEarn:
      return std::log1p(c.fjobearn);
  }
  return 0.0;
}

}  // namespace

std::vector<std::string> default_month_calendar() {
  // May-Oct 2022 before the first release, Jan-Oct 2023 after it; the
  // release month and the holiday month are left out.
  return {"2022-05", "2022-06", "2022-07", "2022-08", "2022-09", "2022-10",
          "2023-01", "2023-02", "2023-03", "2023-04", "2023-05", "2023-06",
          "2023-07", "2023-08", "2023-09", "2023-10"};
}

const MarketScenario& ScenarioConfig::market(int market_id) const {
  for (const auto& m : markets) {
    if (m.market_id == market_id) return m;
  }
  throw InvalidConfigError("unknown market_id " + std::to_string(market_id));
}

void validate(const ScenarioConfig& config) {
  if (config.markets.size() < 2) {
    throw InvalidConfigError("scenario needs a control market and at least one "
                             "treated market");
  }
  std::set<int> ids;
  bool has_control = false;
  for (const auto& m : config.markets) {
    const std::string where = "market " + std::to_string(m.market_id) + ": ";
    if (!ids.insert(m.market_id).second) {
      throw InvalidConfigError(where + "duplicate market_id");
    }
    validate(m.spec);
    for (double a : {m.a_path.pre, m.a_path.post35, m.a_path.post40}) {
      if (!(a >= 0.0 && a <= 1.0)) {
        throw InvalidConfigError(where + "a_path values must lie in [0, 1]");
      }
    }
    if (!(m.a_path.pre <= m.a_path.post35 && m.a_path.post35 <= m.a_path.post40)) {
      throw InvalidConfigError(where + "a_path nondecreasing violated (a_pre <= "
                               "a_post35 <= a_post40)");
    }
    if (m.market_id == config.control_market_id) {
      has_control = true;
      if (!m.a_path.constant()) {
        throw InvalidConfigError(where + "control market requires a constant a_path");
      }
    }
  }
  if (!has_control) {
    throw InvalidConfigError("control_market_id " +
                             std::to_string(config.control_market_id) +
                             " does not name a market");
  }
  if (config.workers_per_market < 2) {
    throw InvalidConfigError("workers_per_market must be at least 2");
  }
  const auto T = static_cast<int>(config.months.size());
  if (T < 2) throw InvalidConfigError("months needs at least two entries");
  int prev = -1;
  for (const auto& label : config.months) {
    const int v = parse_month_label(label);
    if (v <= prev) throw InvalidConfigError("months must be strictly increasing");
    prev = v;
  }
  if (!(config.shock1_index >= 1 && config.shock1_index < T)) {
    throw InvalidConfigError("shock1_index must leave at least one pre and one "
                             "post month");
  }
  if (!(config.shock2_index >= config.shock1_index && config.shock2_index <= T)) {
    throw InvalidConfigError("shock2_index must satisfy shock1_index <= "
                             "shock2_index <= months");
  }
  if (!(config.worker_fe_sigma >= 0.0 && config.month_fe_sigma >= 0.0 &&
        config.noise_sigma >= 0.0)) {
    throw InvalidConfigError("noise scales must be nonnegative");
  }
  if (!(config.quantity_scale > 0.0) || !(config.earnings_scale > 0.0) ||
      !(config.background_lambda >= 0.0)) {
    throw InvalidConfigError("quantity_scale and earnings_scale must be positive, "
                             "background_lambda nonnegative");
  }
  const auto& d = config.demand;
  if (d.weeks < 8) throw InvalidConfigError("demand.weeks must be at least 8");
  if (!(d.shock_week >= 1 && d.shock_week < d.weeks)) {
    throw InvalidConfigError("demand.shock_week must fall inside the window");
  }
  if (!(d.shock2_week >= d.shock_week && d.shock2_week <= d.weeks)) {
    throw InvalidConfigError("demand.shock2_week must satisfy shock_week <= "
                             "shock2_week <= weeks");
  }
  if (!(d.weekly_scale > 0.0) || !(d.week_fe_sigma >= 0.0)) {
    throw InvalidConfigError("demand.weekly_scale must be positive and "
                             "week_fe_sigma nonnegative");
  }
  const auto& mod = config.moderators;
  if (!(mod.us_share >= 0.0 && mod.us_share <= 1.0)) {
    throw InvalidConfigError("moderators.us_share must lie in [0, 1]");
  }
  if (!(mod.us_shock_multiplier >= 0.0) || !(mod.experienced_shock_multiplier >= 0.0)) {
    throw InvalidConfigError("moderator shock multipliers must be nonnegative");
  }
}

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t replication) {
  return seed ^ mix64(replication);
}

ScenarioConfig with_seed(ScenarioConfig config, std::uint64_t seed) {
  config.seed = seed;
  return config;
}

const std::vector<std::string>& covariate_names() {
  static const std::vector<std::string> names = {
      "log_acc_fjobnum", "log_experience", "log_avg_fjobprice",
      "log_avg_fhourprice", "avg_fjobrating"};
  return names;
}

std::vector<double> covariate_values(const WorkerCovariates& w) {
  return {w.log_acc_fjobnum, w.log_experience, w.log_avg_fjobprice,
          w.log_avg_fhourprice, w.avg_fjobrating};
}

std::string_view to_string(OutcomeColumn column) {
  switch (column) {
    case OutcomeColumn::FjobNum:
      return "fjobnum";
    case OutcomeColumn::FjobRatio:
      return "fjobratio";
    case OutcomeColumn::FjobEarn:
      return "fjobearn";
  }
  return "unknown";
}

OutcomeColumn outcome_column_from_string(std::string_view name) {
  if (name == "fjobnum") return OutcomeColumn::FjobNum;
  if (name == "fjobratio") return OutcomeColumn::FjobRatio;
  if (name == "fjobearn") return OutcomeColumn::FjobEarn;
  throw ValidationError("unknown outcome column '" + std::string(name) +
                        "' (expected fjobnum, fjobratio or fjobearn)");
}

double transformed_outcome(const PanelRow& row, OutcomeColumn column) {
  return outcome_value({row.fjobnum, row.fjobearn, row.fjobratio}, column);
}

std::int64_t worker_id_for(const ScenarioConfig& config, std::size_t market_pos,
                           int worker) {
  return static_cast<std::int64_t>(market_pos) * config.workers_per_market + worker + 1;
}

double scenario_a_level(const MarketScenario& market, const ScenarioConfig& config,
                        int month_index, double multiplier) {
  double a = market.a_path.pre;
  if (month_index >= config.shock2_index) {
    a = market.a_path.post40;
  } else if (month_index >= config.shock1_index) {
    a = market.a_path.post35;
  }
  return clamp01(market.a_path.pre + multiplier * (a - market.a_path.pre));
}

std::vector<WorkerCovariates> generate_worker_covariates(const ScenarioConfig& config) {
  validate(config);
  std::vector<WorkerCovariates> out;
  out.reserve(config.markets.size() * static_cast<std::size_t>(config.workers_per_market));
  for (std::size_t m = 0; m < config.markets.size(); ++m) {
    const auto& market = config.markets[m];
    const int treat = config.is_treated(market.market_id) ? 1 : 0;
    for (int i = 0; i < config.workers_per_market; ++i) {
      WorkerCovariates w;
      w.worker_id = worker_id_for(config, m, i);
      w.market_id = market.market_id;
      w.treat = treat;
      CounterRng rng(derive_key(config.seed,
                                {kTagCovariate, static_cast<std::uint64_t>(w.worker_id)}));
      const double z = rng.normal() + (treat ? config.covariates.shift : 0.0);
      w.log_acc_fjobnum = 2.8 + 0.8 * z + 0.6 * rng.normal();
      w.log_experience = 3.4 + 0.5 * z + 0.5 * rng.normal();
      w.log_avg_fjobprice = 5.8 - 0.5 * z + 0.7 * rng.normal();
      w.log_avg_fhourprice = 2.85 - 0.3 * z + 0.45 * rng.normal();
      w.avg_fjobrating = 4.88 + 0.05 * z + 0.07 * rng.normal();
      out.push_back(w);
    }
  }
  return out;
}

Panel generate_panel(const ScenarioConfig& config) {
  const Simulator sim(config);
  const int T = static_cast<int>(config.months.size());
  Panel panel;
  panel.reserve(config.markets.size() *
                static_cast<std::size_t>(config.workers_per_market * T));
  for (std::size_t m = 0; m < config.markets.size(); ++m) {
    const auto& market = config.markets[m];
    const int treat = config.is_treated(market.market_id) ? 1 : 0;
    for (int i = 0; i < config.workers_per_market; ++i) {
      const WorkerDraws& w = sim.worker(m, i);
      for (int t = 0; t < T; ++t) {
        const double a = scenario_a_level(market, config, t, w.multiplier);
        const CellOutcome c = sim.cell(m, w, t, a);
        PanelRow row;
        row.worker_id = w.worker_id;
        row.market_id = market.market_id;
        row.month_index = t;
        row.treat = treat;
        row.post35 = t >= config.shock1_index ? 1 : 0;
        row.post40 = t >= config.shock2_index ? 1 : 0;
        row.fjobnum = c.fjobnum;
        row.fjobearn = c.fjobearn;
        row.fjobratio = c.fjobratio;
        row.tenure = sim.tenure(w, t);
        row.us = w.us;
        row.experienced = w.experienced;
        panel.push_back(row);
      }
    }
  }
  return panel;
}

std::vector<DemandRow> generate_demand_series(const ScenarioConfig& config) {
  return generate_demand_series(config, config.demand.weeks);
}

std::vector<DemandRow> generate_demand_series(const ScenarioConfig& config, int weeks) {
  ScenarioConfig cfg = config;
  cfg.demand.weeks = weeks;
  if (cfg.demand.shock2_week > weeks) cfg.demand.shock2_week = weeks;
  validate(cfg);
  const auto& d = cfg.demand;

  std::vector<double> week_effect(static_cast<std::size_t>(weeks));
  for (int w = 0; w < weeks; ++w) {
    CounterRng rng(derive_key(cfg.seed, {kTagWeek, static_cast<std::uint64_t>(w)}));
    week_effect[static_cast<std::size_t>(w)] = d.week_fe_sigma * rng.normal();
  }

  std::vector<DemandRow> rows;
  rows.reserve(cfg.markets.size() * static_cast<std::size_t>(weeks));
  for (const auto& market : cfg.markets) {
    const int treat = cfg.is_treated(market.market_id) ? 1 : 0;
    for (int w = 0; w < weeks; ++w) {
      double a = market.a_path.pre;
      if (w >= d.shock2_week) {
        a = market.a_path.post40;
      } else if (w >= d.shock_week) {
        a = market.a_path.post35;
      }
      const Equilibrium eq = cournot_equilibrium(market.spec, AiLevel(a));
      const double lambda = static_cast<double>(market.spec.n) * eq.q *
                            d.weekly_scale *
                            std::exp(week_effect[static_cast<std::size_t>(w)]);
      CounterRng rng(derive_key(cfg.seed,
                                {kTagDemandCell, static_cast<std::uint64_t>(market.market_id),
                                 static_cast<std::uint64_t>(w)}));
      DemandRow row;
      row.market_id = market.market_id;
      row.week_index = w;
      row.postnum = poisson_from_uniform(lambda, rng.uniform());
      row.treat = treat;
      row.post = w >= d.shock_week ? 1 : 0;
      rows.push_back(row);
    }
  }
  return rows;
}

AttEstimate ground_truth_att(const ScenarioConfig& config, OutcomeColumn outcome,
                             int reps) {
  if (reps < 100) throw InvalidConfigError("ground_truth_att needs reps >= 100");
  validate(config);
  const int T = static_cast<int>(config.months.size());
  std::vector<double> rep_means(static_cast<std::size_t>(reps), 0.0);
  std::int64_t cells = 0;
  for (int r = 0; r < reps; ++r) {
    const Simulator sim(
        with_seed(config, replication_seed(config.seed, static_cast<std::uint64_t>(r))));
    double sum = 0.0;
    std::int64_t n = 0;
    for (std::size_t m = 0; m < config.markets.size(); ++m) {
      const auto& market = config.markets[m];
      if (!config.is_treated(market.market_id)) continue;
      for (int i = 0; i < config.workers_per_market; ++i) {
        const WorkerDraws& w = sim.worker(m, i);
        for (int t = config.shock1_index; t < T; ++t) {
          const double a = scenario_a_level(market, config, t, w.multiplier);
          const CellOutcome factual = sim.cell(m, w, t, a);
          const CellOutcome counterfactual = sim.cell(m, w, t, market.a_path.pre);
          sum += outcome_value(factual, outcome) - outcome_value(counterfactual, outcome);
          ++n;
        }
      }
    }
    cells = n;
    rep_means[static_cast<std::size_t>(r)] = n > 0 ? sum / static_cast<double>(n) : 0.0;
  }
  double mean = 0.0;
  for (double v : rep_means) mean += v;
  mean /= static_cast<double>(reps);
  double ss = 0.0;
  for (double v : rep_means) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(reps - 1));
  return {mean, sd / std::sqrt(static_cast<double>(reps)), reps, cells};
}

}  // namespace inflection
