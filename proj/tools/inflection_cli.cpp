#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "inflection/econometrics.hpp"
#include "inflection/errors.hpp"
#include "inflection/market_model.hpp"
#include "inflection/pipeline.hpp"
#include "inflection/quadrant.hpp"
#include "inflection/scenario_io.hpp"

namespace {

using namespace inflection;

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  double alpha = 0.05;
  double caliper = 2e-4;
  std::optional<double> bounds;
  std::string outcome = "fjobnum";
  bool no_matching = false;
  std::optional<std::string> panel_csv;
  std::optional<std::string> demand_csv;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "Override the scenario seed");
  cmd->add_option("--out", a.out, "Output directory")->capture_default_str();
  cmd->add_option("--alpha", a.alpha, "Significance level")->capture_default_str();
  cmd->add_option("--caliper", a.caliper, "Matching caliper on the probability scale")
      ->capture_default_str();
  cmd->add_option("--bounds", a.bounds, "TOST equivalence bound (default 0.36 x SD)");
  cmd->add_option("--outcome", a.outcome, "fjobnum, fjobratio or fjobearn")
      ->capture_default_str();
  cmd->add_flag("--no-matching", a.no_matching, "Estimate on all workers");
  cmd->add_option("--panel", a.panel_csv, "Ingest this panel CSV instead of simulating")
      ->check(CLI::ExistingFile);
  cmd->add_option("--demand", a.demand_csv, "Ingest this demand CSV instead of simulating")
      ->check(CLI::ExistingFile);
}

int run_stages(const CommonArgs& a, std::vector<Stage> stages,
               std::vector<EstimateKind> estimates = {}) {
  PipelineOptions opts;
  opts.stages = std::move(stages);
  opts.estimates = std::move(estimates);
  opts.alpha = a.alpha;
  opts.match.caliper = a.caliper;
  opts.tost_bounds = a.bounds;
  opts.outcome = outcome_column_from_string(a.outcome);
  opts.skip_matching = a.no_matching;
  if (a.panel_csv) opts.panel_csv = *a.panel_csv;
  if (a.demand_csv) opts.demand_csv = *a.demand_csv;

  const RunManifest m = run_pipeline(a.config, a.out, a.seed, opts);
  std::printf("seed %llu, version %s\n", static_cast<unsigned long long>(m.seed),
              m.version.c_str());
  for (const auto& t : m.timings) std::printf("  %-9s %8.3f s\n", t.stage.c_str(), t.seconds);
  std::printf("%zu files written to %s\n", m.outputs.size(), a.out.c_str());
  std::printf("manifest %s\n", m.manifest_hash.c_str());
  if (std::find(opts.stages.begin(), opts.stages.end(), Stage::Report) != opts.stages.end()) {
    std::ifstream in(std::filesystem::path(a.out) / "quadrant.txt");
    std::cout << in.rdbuf();
  }
  return 0;
}

int write_statics(const std::string& config_path, const std::string& out, int grid) {
  const ScenarioConfig cfg = parse_scenario(config_path);
  std::filesystem::create_directories(out);
  for (const auto& m : cfg.markets) {
    const auto path =
        std::filesystem::path(out) / ("statics_m" + std::to_string(m.market_id) + ".csv");
    std::ofstream f(path);
    write_comparative_statics_csv(f, sweep_comparative_statics(m.spec, grid));
    std::printf("%s  a* = %.6f\n", path.string().c_str(), inflection_point(m.spec));
  }
  return 0;
}

/// Fast internal consistency checks on fixed inputs.
int selftest() {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    failures += ok ? 0 : 1;
  };

  check("coef_to_percent(-0.094) = -0.0897",
        std::abs(coef_to_percent(-0.094) + 0.0897) < 1e-4);
  check("coef_to_percent(0.062) = 0.0640", std::abs(coef_to_percent(0.062) - 0.0640) < 1e-4);

  const MarketSpec spec{4, 2.0, 1.0, MarketPotentialSpec::quadratic(10.0, 3.0)};
  check("quadratic a* = c / (2 kappa)", std::abs(inflection_point(spec) - 1.0 / 3.0) < 1e-8);

  const Equilibrium eq = cournot_equilibrium(spec, AiLevel(0.0));
  std::vector<double> q(4, 0.0);
  for (int it = 0; it < 500; ++it) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      double others = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) others += j == i ? 0.0 : q[j];
      q[i] = std::max(0.0, (10.0 - 2.0 - others) / 2.0);
    }
  }
  check("closed form matches best-response iteration", std::abs(q[0] - eq.q) < 1e-9);

  // 3 units x 3 periods with one regressor: absorption against explicit dummies.
  const int U = 3;
  const int T = 3;
  Eigen::MatrixXd yx(U * T, 2);
  Eigen::MatrixXd dummies = Eigen::MatrixXd::Zero(U * T, 1 + U + T - 1);
  std::vector<int> unit;
  std::vector<int> time;
  for (int u = 0; u < U; ++u) {
    for (int t = 0; t < T; ++t) {
      const int r = u * T + t;
      const double x = std::sin(1.0 + r * r);
      yx(r, 1) = x;
      yx(r, 0) = 0.7 * x + u - 0.5 * t + 0.1 * std::cos(3.0 * r);
      dummies(r, 0) = x;
      dummies(r, 1 + u) = 1.0;
      if (t > 0) dummies(r, U + t) = 1.0;
      unit.push_back(u);
      time.push_back(t);
    }
  }
  const auto dm = absorb_two_way(yx, unit, time).demeaned;
  const double within = ols_fit(dm.col(1), dm.col(0)).coef[0];
  const double dummy = dummies.colPivHouseholderQr().solve(yx.col(0))[0];
  check("two-way absorption matches dummy regression", std::abs(within - dummy) < 1e-8);

  check("quadrant: 0.106*** / -0.064* is ProdToDisp",
        classify_quadrant(0.106, 0.005, -0.064, 0.08, 0.1) == QuadrantLabel::ProdToDisp);

  std::printf("%s\n", failures == 0 ? "selftest passed" : "selftest FAILED");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic labor-market panels and AI-shock estimators"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);

  CommonArgs args;
  std::function<int()> action;

  auto* run = app.add_subcommand("run", "Run every stage");
  add_common(run, args);
  run->callback([&] {
    action = [&] { return run_stages(args, {}); };
  });

  auto* simulate = app.add_subcommand("simulate", "Write panel, demand and covariate CSVs");
  add_common(simulate, args);
  simulate->callback([&] { action = [&] { return run_stages(args, {Stage::Simulate}); }; });

  auto* match = app.add_subcommand("match", "Propensity-score matching and balance tables");
  add_common(match, args);
  match->callback([&] { action = [&] { return run_stages(args, {Stage::Match}); }; });

  std::string kind;
  auto* estimate = app.add_subcommand("estimate", "Fit did, event, dual or demand models");
  estimate->add_option("kind", kind, "did, event, dual or demand")
      ->required()
      ->check(CLI::IsMember({"did", "event", "dual", "demand"}));
  add_common(estimate, args);
  estimate->callback([&] {
    action = [&] {
      return run_stages(args, {Stage::Estimate}, {estimate_kind_from_string(kind)});
    };
  });

  auto* tost = app.add_subcommand("tost", "Equivalence tests on event-study pre-periods");
  add_common(tost, args);
  tost->callback([&] { action = [&] { return run_stages(args, {Stage::Tost}); }; });

  std::string report_kind;
  auto* report = app.add_subcommand("report", "Summary reports");
  report->add_option("kind", report_kind, "quadrant")
      ->required()
      ->check(CLI::IsMember({"quadrant"}));
  add_common(report, args);
  report->callback([&] { action = [&] { return run_stages(args, {Stage::Report}); }; });

  std::string statics_config;
  std::string statics_out = "out";
  int grid = 101;
  auto* statics = app.add_subcommand("statics", "Comparative statics over the AI level");
  statics->add_option("--config", statics_config, "Scenario JSON")
      ->required()
      ->check(CLI::ExistingFile);
  statics->add_option("--out", statics_out, "Output directory")->capture_default_str();
  statics->add_option("--grid", grid, "Grid points on [0, 1]")->capture_default_str();
  statics->callback(
      [&] { action = [&] { return write_statics(statics_config, statics_out, grid); }; });

  auto* self = app.add_subcommand("selftest", "Run internal consistency checks");
  self->callback([&] { action = selftest; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    return action();
  } catch (const StageError& e) {
    std::fprintf(stderr, "error in stage %s\n", e.what());
    return e.numeric() ? kExitNumeric : kExitValidation;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  }
}
