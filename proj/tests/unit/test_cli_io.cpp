#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "inflection/csv_io.hpp"
#include "inflection/errors.hpp"
#include "inflection/pipeline.hpp"
#include "inflection/quadrant.hpp"
#include "inflection/scenario_io.hpp"

using namespace inflection;
namespace fs = std::filesystem;

namespace {

const fs::path kConfig = fs::path(INFLECTION_CONFIG_DIR) / "demo_scenario.json";
const fs::path kData = INFLECTION_DATA_DIR;
const fs::path kWork = INFLECTION_WORK_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ScenarioConfig small_config() {
  ScenarioConfig c = parse_scenario(kConfig);
  c.workers_per_market = 40;
  c.markets.resize(3);
  return c;
}

}  // namespace

// --------------------------------------------------------------------------
// Scenario files
// --------------------------------------------------------------------------

TEST_CASE("scenario round trip") {
  const ScenarioConfig c = parse_scenario(kConfig);
  CHECK(c.markets.size() == 10);
  CHECK(c.control_market_id == 0);
  const ScenarioConfig back = parse_scenario_text(serialize_scenario(c));
  CHECK(back == c);

  ScenarioConfig logistic = c;
  logistic.markets[1].spec = {3, 1.0, 2.0, MarketPotentialSpec::logistic(10.0, 1.2, 0.3)};
  logistic.moderators.us_shock_multiplier = 1.5;
  logistic.demand.weeks = 60;
  logistic.demand.shock2_week = 50;
  CHECK(parse_scenario_text(serialize_scenario(logistic)) == logistic);
}

TEST_CASE("scenario errors") {
  const std::string good = serialize_scenario(small_config());

  SUBCASE("a_path must be nondecreasing") {
    ScenarioConfig c = small_config();
    c.markets[1].a_path = {0.5, 0.3, 0.6};
    CHECK_THROWS_WITH_AS(parse_scenario_text(serialize_scenario(c)),
                         doctest::Contains("nondecreasing"), InvalidConfigError);
  }
  SUBCASE("no interior inflection point") {
    CHECK_THROWS_AS(parse_scenario(kData / "bad_boundary.json"), BoundaryViolationError);
  }
  SUBCASE("malformed JSON reports its line") {
    try {
      parse_scenario(kData / "bad_syntax.json");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("unknown field") {
    std::string text = good;
    text.insert(text.find('{') + 1, "\"bogus\": 1,");
    CHECK_THROWS_WITH_AS(parse_scenario_text(text), doctest::Contains("bogus"), ParseError);
  }
  SUBCASE("wrongly typed field") {
    std::string text = good;
    const auto pos = text.find("\"c\": ");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 5, "\"c\": \"four\", \"_\": ");
    CHECK_THROWS_AS(parse_scenario_text(text), ParseError);
  }
  SUBCASE("missing required field") {
    CHECK_THROWS_AS(parse_scenario_text("{\"control_market_id\": 0}"), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(parse_scenario(kData / "does_not_exist.json"), ValidationError);
  }
}

// --------------------------------------------------------------------------
// CSV
// --------------------------------------------------------------------------

TEST_CASE("CSV round trips are exact") {
  const ScenarioConfig c = small_config();
  const Panel panel = generate_panel(c);
  std::stringstream ps;
  write_panel_csv(ps, panel);
  CHECK(ingest_panel_csv(ps) == panel);

  const auto demand = generate_demand_series(c);
  std::stringstream ds;
  write_demand_csv(ds, demand);
  CHECK(ingest_demand_csv(ds) == demand);

  const auto cov = generate_worker_covariates(c);
  std::stringstream cs;
  write_covariates_csv(cs, cov);
  CHECK(ingest_covariates_csv(cs) == cov);
}

TEST_CASE("panel CSV invariants") {
  const std::string header = std::string(kPanelHeader) + "\n";
  auto ingest = [&](const std::string& rows) {
    std::istringstream in(header + rows);
    return ingest_panel_csv(in);
  };
  CHECK(ingest("1,0,0,0,0,0,2,50,0.5,0,0,1\n").size() == 1);

  try {
    ingest("1,0,0,0,0,0,0,5,0,0,0,0\n");
    FAIL("expected InvariantViolationError");
  } catch (const InvariantViolationError& e) {
    CHECK(e.row() == 1);
    CHECK(std::string(e.what()).find("fjobnum=0 requires fjobearn=0") != std::string::npos);
  }
  CHECK_THROWS_AS(ingest("1,0,0,1,0,1,1,5,0.5,0,0,0\n"), InvariantViolationError);
  CHECK_THROWS_AS(ingest("1,0,0,1,2,0,1,5,0.5,0,0,0\n"), InvariantViolationError);
  CHECK_THROWS_AS(ingest("1,0,0,0,0,0,1,5,1.5,0,0,0\n"), InvariantViolationError);
  CHECK_THROWS_AS(ingest("1,0,0,0,0,0,-1,0,0,0,0,0\n"), InvariantViolationError);
  CHECK_THROWS_AS(ingest("1,0,0,0,0,0,1,5,0.5,0,0,0\n1,0,0,0,0,0,1,5,0.5,0,0,0\n"),
                  InvariantViolationError);
  CHECK_THROWS_AS(ingest("1,0,0,0,0,0,1,5\n"), ValidationError);
  CHECK_THROWS_AS(ingest("1,0,x,0,0,0,1,5,0.5,0,0,0\n"), ValidationError);

  std::istringstream shuffled(
      "market_id,worker_id,month_index,treat,post35,post40,fjobnum,fjobearn,fjobratio,tenure,"
      "us,experienced\n");
  CHECK_THROWS_WITH_AS(ingest_panel_csv(shuffled),
                       doctest::Contains("column 1 is 'market_id', expected 'worker_id'"),
                       SchemaMismatchError);
}

// --------------------------------------------------------------------------
// Quadrant classification
// --------------------------------------------------------------------------

TEST_CASE("quadrant examples") {
  CHECK(classify_quadrant(0.106, 0.005, -0.064, 0.08, 0.1) == QuadrantLabel::ProdToDisp);
  CHECK(classify_quadrant(0.139, 0.001, 0.094, 0.02, 0.1) == QuadrantLabel::ProdToProd);
  CHECK(classify_quadrant(-0.074, 0.003, -0.025, 0.04, 0.1) == QuadrantLabel::DispToDisp);
  CHECK(classify_quadrant(-0.1, 0.01, 0.2, 0.01, 0.05) == QuadrantLabel::DispToProd);
  // p >= alpha counts as zero.
  CHECK(classify_quadrant(0.106, 0.005, -0.064, 0.08, 0.05) == QuadrantLabel::Inconclusive);
  CHECK(classify_quadrant(0.106, 0.05, -0.064, 0.01, 0.05) == QuadrantLabel::Inconclusive);
  CHECK(classify_quadrant(0.0, 0.0, -0.064, 0.01, 0.05) == QuadrantLabel::Inconclusive);
  CHECK(to_string(QuadrantLabel::ProdToDisp) == "ProdToDisp");
  CHECK(to_string(QuadrantLabel::Inconclusive) == "Inconclusive");
  CHECK_THROWS_AS(classify_quadrant(1, 0, 1, 0, 0.0), ValidationError);
  CHECK_THROWS_AS(classify_quadrant(1, 0, 1, 0, 1.0), ValidationError);
}

// --------------------------------------------------------------------------
// Pipeline
// --------------------------------------------------------------------------

TEST_CASE("pipeline is deterministic") {
  const RunManifest a = run_pipeline(kConfig, kWork / "det_a", std::nullopt);
  const RunManifest b = run_pipeline(kConfig, kWork / "det_b", std::nullopt);
  CHECK(a.manifest_hash == b.manifest_hash);
  REQUIRE(a.outputs.size() == b.outputs.size());
  for (std::size_t i = 0; i < a.outputs.size(); ++i) {
    CHECK(a.outputs[i].name == b.outputs[i].name);
    CHECK(a.outputs[i].sha256 == b.outputs[i].sha256);
  }
  CHECK(std::is_sorted(a.outputs.begin(), a.outputs.end(),
                       [](const auto& x, const auto& y) { return x.name < y.name; }));
  CHECK(fs::exists(kWork / "det_a" / "manifest.json"));

  const RunManifest c = run_pipeline(kConfig, kWork / "det_c", 7);
  CHECK(c.seed == 7);
  CHECK(c.manifest_hash != a.manifest_hash);

  // The demo markets were chosen so no market lands in the excluded quadrant.
  const std::string q = slurp(kWork / "det_a" / "quadrant.csv");
  CHECK(q.rfind("market_id,name,beta11,p11,beta12,p12,quadrant\n", 0) == 0);
  CHECK(q.find("DispToProd") == std::string::npos);
  CHECK(q.find("ProdToDisp") != std::string::npos);
}

TEST_CASE("simulate stage writes only the simulated data") {
  PipelineOptions o;
  o.stages = {Stage::Simulate};
  const RunManifest m = run_pipeline(kConfig, kWork / "sim_only", std::nullopt, o);
  std::set<std::string> names;
  for (const auto& f : m.outputs) names.insert(f.name);
  CHECK(names == std::set<std::string>{"covariates.csv", "demand.csv", "panel.csv"});
  CHECK(m.stages == std::vector<std::string>{"simulate"});
  CHECK(m.manifest_hash.size() == 64);

  // Ingesting the written panel reproduces the same estimates.
  PipelineOptions est;
  est.stages = {Stage::Estimate};
  est.estimates = {EstimateKind::Did};
  est.skip_matching = true;
  const RunManifest sim =
      run_pipeline(kConfig, kWork / "est_sim", std::nullopt, est);
  est.panel_csv = kWork / "sim_only" / "panel.csv";
  const RunManifest ingested = run_pipeline(kConfig, kWork / "est_csv", std::nullopt, est);
  CHECK(ingested.outputs.size() == sim.outputs.size());
  CHECK(slurp(kWork / "est_sim" / "did_m1.csv") == slurp(kWork / "est_csv" / "did_m1.csv"));
}

TEST_CASE("pipeline errors carry the stage") {
  try {
    run_pipeline(kData / "bad_boundary.json", kWork / "bad", std::nullopt);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "config");
    CHECK_FALSE(e.numeric());
  }
  try {
    PipelineOptions o;
    o.stages = {Stage::Match};
    run_pipeline(kData / "separated.json", kWork / "sep", std::nullopt, o);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "match");
    CHECK(e.numeric());
  }
  CHECK_THROWS_AS(stage_from_string("plot"), InvalidConfigError);
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
