// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "inflection/econometrics.hpp"
#include "inflection/errors.hpp"
#include "inflection/market_model.hpp"
#include "inflection/matching.hpp"
#include "inflection/panel_synth.hpp"
#include "inflection/pipeline.hpp"
#include "inflection/quadrant.hpp"
#include "inflection/scenario_io.hpp"
#include "oracles.hpp"

using namespace inflection;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

MarketSpec demo_market() {
  return {10, 4.0, 1.0, MarketPotentialSpec::quadratic(5.0, 4.0)};  // a* = 0.5
}

ScenarioConfig two_markets(APath control, APath treated, int workers) {
  ScenarioConfig cfg;
  cfg.markets = {{0, "control", demo_market(), control}, {1, "treated", demo_market(), treated}};
  cfg.workers_per_market = workers;
  cfg.quantity_scale = 30.0;
  return cfg;
}

// --------------------------------------------------------------------------

Outcome effect_sizes() {
  const std::pair<double, double> cases[] = {
      {-0.094, -0.0897}, {0.062, 0.0640}, {-0.353, -0.2974}, {0.510, 0.6653}};
  double worst = 0.0;
  for (auto [beta, pct] : cases) worst = std::max(worst, std::abs(coef_to_percent(beta) - pct));
  return {worst <= 1e-4, fmt("max |error| %.2e over 4 identities", worst)};
}

Outcome cournot_oracle() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const MarketSpec m = i % 2 == 0 ? oracle::random_quadratic(rng) : oracle::random_logistic(rng);
    const double a = u(rng);
    const Equilibrium eq = cournot_equilibrium(m, AiLevel(a));
    const double mc = (1.0 - a) * m.c;
    const auto q = oracle::best_response_equilibrium(eval_potential(m.potential, AiLevel(a)), mc, m.b,
                                                     m.n);
    for (double qi : q) worst = std::max(worst, std::abs(qi - eq.q));
  }
  return {worst <= 1e-9, fmt("max |q - q_br| %.2e on 100 specs", worst)};
}

Outcome proposition_one() {
  std::mt19937_64 rng(202);
  int failures = 0;
  double worst_quad = 0.0;
  std::string first_failure;
  for (int family = 0; family < 2; ++family) {
    for (int k = 0; k < 10; ++k) {
      const MarketSpec m = family == 0 ? oracle::random_quadratic(rng)
                                       : oracle::random_logistic(rng);
      const double a_star = inflection_point(m);
      if (family == 0) {
        worst_quad = std::max(worst_quad, std::abs(a_star - m.c / (2.0 * m.potential.kappa)));
      }
      std::vector<Equilibrium> eq;
      for (int g = 0; g <= 1000; ++g) eq.push_back(cournot_equilibrium(m, AiLevel(g / 1000.0)));
      bool ok = true;
      int argmax = 0;
      for (int g = 1; g <= 1000; ++g) {
        const double a0 = (g - 1) / 1000.0;
        const double a1 = g / 1000.0;
        if (eq[static_cast<std::size_t>(g)].profit > eq[static_cast<std::size_t>(argmax)].profit) {
          argmax = g;
        }
        const auto& e0 = eq[static_cast<std::size_t>(g - 1)];
        const auto& e1 = eq[static_cast<std::size_t>(g)];
        if (a1 <= a_star) ok = ok && e1.q > e0.q && e1.profit > e0.profit;
        if (a0 >= a_star) {
          ok = ok && e1.q < e0.q && e1.profit < e0.profit && e1.revenue < e0.revenue;
        }
      }
      ok = ok && std::abs(argmax / 1000.0 - a_star) <= 1e-3 + 1e-12;
      if (!ok) {
        ++failures;
        if (first_failure.empty()) first_failure = fmt(" first: family %d spec %d", family, k);
      }
    }
  }
  return {failures == 0 && worst_quad <= 1e-8,
          fmt("%d of 20 specs violate monotonicity or argmax; quadratic a* error %.1e%s",
              failures, worst_quad, first_failure.c_str())};
}

Outcome recovery() {
  // The control sits at the treated market's pre-release level so untreated
  // outcomes share one distribution and parallel trends hold exactly.
  struct Case {
    const char* name;
    APath path;
  };
  const Case cases[] = {{"substitution", {0.6, 0.85, 0.85}}, {"honeymoon", {0.1, 0.4, 0.4}}};
  const int reps = 200;
  std::string detail;
  bool pass = true;
  double signs[2] = {0.0, 0.0};
  int idx = 0;
  for (const auto& c : cases) {
    const APath control{c.path.pre, c.path.pre, c.path.pre};
    const ScenarioConfig cfg = two_markets(control, c.path, 1000);
    const double att = ground_truth_att(cfg, OutcomeColumn::FjobNum, 200).att;
    int covered = 0;
    for (int r = 0; r < reps; ++r) {
      const auto rep = with_seed(cfg, replication_seed(cfg.seed, 5000 + r));
      const FitResult f = did_fit(generate_panel(rep), RegressionSpec{});
      covered += std::abs(f.estimate("ChatGPT") - att) <= 2.0 * f.se("ChatGPT") ? 1 : 0;
    }
    const double rate = static_cast<double>(covered) / reps;
    pass = pass && rate >= 0.93;
    signs[idx++] = att;
    detail += fmt("%s ATT %+.4f covered %.1f%%; ", c.name, att, 100.0 * rate);
  }
  pass = pass && signs[0] < 0.0 && signs[1] > 0.0;
  return {pass, detail + "2 markets x 1000 workers x 16 months, 200 reps"};
}

Outcome fe_correctness() {
  std::mt19937_64 rng(303);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_int_distribution<int> size(3, 8);
  double worst = 0.0;
  double worst_shift = 0.0;
  for (int p = 0; p < 20; ++p) {
    const int U = size(rng);
    const int T = size(rng);
    const int k = 1 + p % 3;
    const int n = U * T;
    Eigen::MatrixXd X(n, k);
    Eigen::VectorXd y(n);
    std::vector<int> unit;
    std::vector<int> time;
    for (int i = 0; i < U; ++i) {
      for (int t = 0; t < T; ++t) {
        const int r = i * T + t;
        for (int j = 0; j < k; ++j) X(r, j) = z(rng) + 0.3 * i - 0.2 * t;
        y[r] = X.row(r).sum() + i - t + z(rng);
        unit.push_back(i);
        time.push_back(t);
      }
    }
    Eigen::MatrixXd yx(n, k + 1);
    yx << y, X;
    const Eigen::MatrixXd dm = absorb_two_way(yx, unit, time).demeaned;
    const Eigen::VectorXd beta = ols_fit(dm.rightCols(k), dm.col(0)).coef;
    const auto ref = oracle::dummy_regression(X, y, unit, time);
    worst = std::max(worst, (beta - ref.beta).cwiseAbs().maxCoeff());

    // Adding arbitrary unit and time constants to y leaves beta unchanged.
    Eigen::VectorXd shifted = y;
    for (int r = 0; r < n; ++r) {
      shifted[r] += 50.0 * std::sin(unit[static_cast<std::size_t>(r)] + 1.0) +
                    7.0 * time[static_cast<std::size_t>(r)] * time[static_cast<std::size_t>(r)];
    }
    yx.col(0) = shifted;
    const Eigen::MatrixXd dm2 = absorb_two_way(yx, unit, time).demeaned;
    const Eigen::VectorXd beta2 = ols_fit(dm2.rightCols(k), dm2.col(0)).coef;
    worst_shift = std::max(worst_shift, (beta2 - beta).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8 && worst_shift <= 1e-8,
          fmt("max |beta - beta_dummies| %.1e, max shift change %.1e on 20 panels", worst,
              worst_shift)};
}

Outcome event_study_contract() {
  const APath flat{0.3, 0.3, 0.3};
  const ScenarioConfig cfg = two_markets(flat, flat, 1000);
  const FitResult f0 = event_study_fit(generate_panel(cfg), RegressionSpec{});
  std::vector<int> periods;
  for (const auto& c : f0.coefficients) {
    if (c.period) periods.push_back(*c.period);
  }
  const std::vector<int> expected{-6, -5, -4, -3, -2, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const bool shape = periods == expected && !f0.has("RelTime(-1)");

  const int reps = 200;
  int passed = 0;
  for (int r = 0; r < reps; ++r) {
    const auto rep = with_seed(cfg, replication_seed(cfg.seed, 7000 + r));
    const Panel panel = generate_panel(rep);
    const RegressionSpec spec;
    const FitResult f = event_study_fit(panel, spec);
    passed += tost_pretrends(f, default_tost_bounds(panel, spec)).pass ? 1 : 0;
  }
  const double rate = static_cast<double>(passed) / reps;
  return {shape && rate >= 0.90,
          fmt("%zu relative-time terms%s; joint TOST passes in %.1f%% of %d null reps",
              periods.size(), shape ? " (-6..-2, 0..9)" : " (WRONG SET)", 100.0 * rate, reps)};
}

Outcome matching() {
  ScenarioConfig cfg = two_markets({0.3, 0.3, 0.3}, {0.3, 0.4, 0.4}, 4000);
  cfg.covariates.shift = 0.8;
  const auto workers = generate_worker_covariates(cfg);
  MatchOptions opts;
  opts.caliper = 5e-4;
  const PsmResult r = run_psm(workers, 1, 0, opts);

  double min_pre = 1e9;
  double max_post = 0.0;
  for (const auto& row : r.balance.rows) {
    min_pre = std::min(min_pre, std::abs(row.pre.std_diff));
    max_post = std::max(max_post, std::abs(row.post.std_diff));
  }
  std::set<std::int64_t> controls;
  bool reused = false;
  bool within = true;
  for (const auto& p : r.match.pairs) {
    reused = reused || !controls.insert(p.control_id).second;
    within = within && p.distance <= opts.caliper;
  }
  const bool pass = r.balance.rows.size() == 5 && min_pre > 0.3 && max_post < 0.1 && within &&
                    !reused;
  return {pass, fmt("min pre |d| %.3f, max post |d| %.3f, %zu pairs, caliper %.0e%s%s", min_pre,
                    max_post, r.match.pairs.size(), opts.caliper,
                    within ? "" : ", PAIR OUTSIDE CALIPER", reused ? ", CONTROL REUSED" : "")};
}

Outcome quadrant_exclusion() {
  const ScenarioConfig demo = parse_scenario(std::string(INFLECTION_CONFIG_DIR) +
                                             "/demo_scenario.json");
  ScenarioConfig cfg = demo;
  cfg.workers_per_market = 300;
  const int reps = 200;
  int clean = 0;
  std::map<QuadrantLabel, int> counts;
  for (int r = 0; r < reps; ++r) {
    const auto rep = with_seed(cfg, replication_seed(cfg.seed, 9000 + r));
    const Panel panel = generate_panel(rep);
    bool any_excluded = false;
    for (const auto& m : rep.markets) {
      if (!rep.is_treated(m.market_id)) continue;
      Panel sub;
      for (const auto& row : panel) {
        if (row.market_id == m.market_id || row.market_id == rep.control_market_id) {
          sub.push_back(row);
        }
      }
      const FitResult f = dual_shock_fit(sub, RegressionSpec{});
      const QuadrantLabel q =
          classify_quadrant(f.estimate("ChatGPT3.5"), f.pvalue("ChatGPT3.5"),
                            f.estimate("ChatGPT4.0"), f.pvalue("ChatGPT4.0"), 0.05);
      ++counts[q];
      any_excluded = any_excluded || q == QuadrantLabel::DispToProd;
    }
    clean += any_excluded ? 0 : 1;
  }
  const double rate = static_cast<double>(clean) / reps;
  const bool all_three = counts[QuadrantLabel::ProdToProd] > 0 &&
                         counts[QuadrantLabel::ProdToDisp] > 0 &&
                         counts[QuadrantLabel::DispToDisp] > 0;
  return {rate >= 0.95 && all_three,
          fmt("no DispToProd in %.1f%% of %d reps; labels PP %d PD %d DD %d DP %d inconclusive "
              "%d over 9 markets x %d reps",
              100.0 * rate, reps, counts[QuadrantLabel::ProdToProd],
              counts[QuadrantLabel::ProdToDisp], counts[QuadrantLabel::DispToDisp],
              counts[QuadrantLabel::DispToProd], counts[QuadrantLabel::Inconclusive], reps)};
}

Outcome demand_signs() {
  struct Case {
    const char* name;
    APath path;
    double sign;
  };
  const Case cases[] = {{"substitution", {0.6, 0.85, 0.85}, -1.0},
                        {"honeymoon", {0.1, 0.4, 0.4}, 1.0}};
  const int reps = 200;
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    const APath control{c.path.pre, c.path.pre, c.path.pre};
    const ScenarioConfig cfg = two_markets(control, c.path, 2);
    int hits = 0;
    for (int r = 0; r < reps; ++r) {
      const auto rep = with_seed(cfg, replication_seed(cfg.seed, 11000 + r));
      const FitResult f = demand_did_fit(generate_demand_series(rep));
      hits += c.sign * f.estimate("ChatGPT") > 0.0 && f.pvalue("ChatGPT") < 0.05 ? 1 : 0;
    }
    const double rate = static_cast<double>(hits) / reps;
    pass = pass && rate >= 0.90;
    detail += fmt("%s %s and significant in %.1f%%; ", c.name, c.sign < 0 ? "< 0" : "> 0",
                  100.0 * rate);
  }
  return {pass, detail + "200 reps each"};
}

Outcome determinism() {
  const std::filesystem::path work = INFLECTION_WORK_DIR;
  const std::string config = std::string(INFLECTION_CONFIG_DIR) + "/demo_scenario.json";
  const RunManifest a = run_pipeline(config, work / "run_a", std::nullopt);
  const RunManifest b = run_pipeline(config, work / "run_b", std::nullopt);
  return {a.manifest_hash == b.manifest_hash && !a.outputs.empty(),
          fmt("manifest %.16s... over %zu files, identical: %s", a.manifest_hash.c_str(),
              a.outputs.size(), a.manifest_hash == b.manifest_hash ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"effect-size identities", effect_sizes},
      {"Cournot closed form vs best-response iteration", cournot_oracle},
      {"phase monotonicity around the inflection point", proposition_one},
      {"DiD recovery of the simulated ATT", recovery},
      {"two-way FE absorption vs explicit dummies", fe_correctness},
      {"event-study contract and null TOST", event_study_contract},
      {"propensity matching balance", matching},
      {"quadrant exclusion", quadrant_exclusion},
      {"demand DiD signs", demand_signs},
      {"pipeline determinism", determinism},
  };
  int failed = 0;
  int index = 1;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", index, name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
    ++index;
  }
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
