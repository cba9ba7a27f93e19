#include "inflection/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "inflection/csv_io.hpp"
#include "inflection/econometrics.hpp"
#include "inflection/errors.hpp"
#include "inflection/quadrant.hpp"
#include "inflection/scenario_io.hpp"

#ifndef INFLECTION_VERSION
#define INFLECTION_VERSION "0.0.0"
#endif

namespace inflection {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view library_version() { return INFLECTION_VERSION; }

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericError("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

namespace {

constexpr std::pair<Stage, std::string_view> kStages[] = {
    {Stage::Simulate, "simulate"}, {Stage::Match, "match"},   {Stage::Estimate, "estimate"},
    {Stage::Tost, "tost"},         {Stage::Report, "report"},
};
constexpr std::pair<EstimateKind, std::string_view> kKinds[] = {
    {EstimateKind::Did, "did"},
    {EstimateKind::Event, "event"},
    {EstimateKind::Dual, "dual"},
    {EstimateKind::Demand, "demand"},
};

}  // namespace

std::string_view to_string(Stage stage) {
  for (const auto& [s, name] : kStages) {
    if (s == stage) return name;
  }
  return "?";
}

Stage stage_from_string(std::string_view name) {
  for (const auto& [s, n] : kStages) {
    if (n == name) return s;
  }
  throw InvalidConfigError("unknown stage '" + std::string(name) + "'");
}

std::string_view to_string(EstimateKind kind) {
  for (const auto& [k, name] : kKinds) {
    if (k == kind) return name;
  }
  return "?";
}

EstimateKind estimate_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKinds) {
    if (n == name) return k;
  }
  throw InvalidConfigError("unknown estimate '" + std::string(name) +
                           "' (expected did, event, dual or demand)");
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string market_tag(int market_id) { return "m" + std::to_string(market_id); }

struct MarketFits {
  std::optional<FitResult> did;
  std::optional<FitResult> event;
  std::optional<FitResult> dual;
  std::optional<FitResult> demand;
};

/// State shared by the stages of one run. Each accessor computes its value
/// on first use, so any stage can run without its predecessors.
class Run {
 public:
  Run(ScenarioConfig config, fs::path out, const PipelineOptions& opts)
      : config_(std::move(config)), out_(std::move(out)), opts_(opts) {}

  const ScenarioConfig& config() const { return config_; }

  const Panel& panel() {
    if (!panel_) {
      panel_ = opts_.panel_csv ? ingest_panel_csv(*opts_.panel_csv) : generate_panel(config_);
    }
    return *panel_;
  }

  const std::vector<DemandRow>& demand() {
    if (!demand_) {
      demand_ = opts_.demand_csv ? ingest_demand_csv(*opts_.demand_csv)
                                 : generate_demand_series(config_);
    }
    return *demand_;
  }

  const std::vector<WorkerCovariates>& covariates() {
    if (!covariates_) {
      covariates_ = opts_.covariates_csv ? ingest_covariates_csv(*opts_.covariates_csv)
                                         : generate_worker_covariates(config_);
    }
    return *covariates_;
  }

  std::vector<int> treated_markets() const {
    std::vector<int> out;
    for (const auto& m : config_.markets) {
      if (config_.is_treated(m.market_id)) out.push_back(m.market_id);
    }
    return out;
  }

  const PsmResult& psm(int market) {
    auto it = psm_.find(market);
    if (it == psm_.end()) {
      it = psm_.emplace(market, run_psm(covariates(), market, config_.control_market_id,
                                        opts_.match))
               .first;
    }
    return it->second;
  }

  /// Treated market plus control, restricted to matched workers unless
  /// matching is skipped.
  const Panel& market_panel(int market) {
    auto it = market_panels_.find(market);
    if (it != market_panels_.end()) return it->second;
    std::set<std::int64_t> keep;
    if (!opts_.skip_matching) {
      const auto ids = psm(market).matched_workers();
      keep.insert(ids.begin(), ids.end());
    }
    Panel sub;
    for (const auto& r : panel()) {
      if (r.market_id != market && r.market_id != config_.control_market_id) continue;
      if (!opts_.skip_matching && !keep.count(r.worker_id)) continue;
      sub.push_back(r);
    }
    if (sub.empty()) {
      throw EmptySideError("no panel rows for market " + std::to_string(market));
    }
    return market_panels_.emplace(market, std::move(sub)).first->second;
  }

  std::vector<DemandRow> market_demand(int market) {
    std::vector<DemandRow> sub;
    for (const auto& r : demand()) {
      if (r.market_id == market || r.market_id == config_.control_market_id) {
        sub.push_back(r);
      }
    }
    return sub;
  }

  RegressionSpec spec() const {
    RegressionSpec s;
    s.outcome = opts_.outcome;
    return s;
  }

  MarketFits& fits(int market) { return fits_[market]; }

  const FitResult& event_fit(int market) {
    auto& f = fits(market);
    if (!f.event) f.event = event_study_fit(market_panel(market), spec());
    return *f.event;
  }

  const FitResult& dual_fit(int market) {
    auto& f = fits(market);
    if (!f.dual) f.dual = dual_shock_fit(market_panel(market), spec());
    return *f.dual;
  }

  template <class F>
  void write(const std::string& name, F&& body) {
    std::ofstream out(out_ / name, std::ios::binary);
    if (!out) throw InvalidConfigError("cannot write " + (out_ / name).string());
    body(out);
    written_.insert(name);
  }

  void write_text(const std::string& name, const std::string& text) {
    write(name, [&](std::ostream& out) { out << text; });
  }

  const std::set<std::string>& written() const { return written_; }
  const PipelineOptions& options() const { return opts_; }

 private:
  ScenarioConfig config_;
  fs::path out_;
  const PipelineOptions& opts_;
  std::optional<Panel> panel_;
  std::optional<std::vector<DemandRow>> demand_;
  std::optional<std::vector<WorkerCovariates>> covariates_;
  std::map<int, PsmResult> psm_;
  std::map<int, Panel> market_panels_;
  std::map<int, MarketFits> fits_;
  std::set<std::string> written_;
};

void stage_simulate(Run& run) {
  run.write("panel.csv", [&](std::ostream& o) { write_panel_csv(o, run.panel()); });
  run.write("demand.csv", [&](std::ostream& o) { write_demand_csv(o, run.demand()); });
  run.write("covariates.csv",
            [&](std::ostream& o) { write_covariates_csv(o, run.covariates()); });
}

void stage_match(Run& run) {
  for (int m : run.treated_markets()) {
    const auto& psm = run.psm(m);
    const std::string tag = market_tag(m);
    run.write("pairs_" + tag + ".csv", [&](std::ostream& o) { write_pairs_csv(o, psm.match); });
    if (psm.match.pairs.empty()) continue;
    run.write("balance_" + tag + ".csv",
              [&](std::ostream& o) { write_balance_csv(o, psm.balance); });
    run.write_text("balance_" + tag + ".txt", format_balance_table(psm.balance));
  }
}

void stage_estimate(Run& run) {
  auto kinds = run.options().estimates;
  if (kinds.empty()) {
    kinds = {EstimateKind::Did, EstimateKind::Event, EstimateKind::Dual, EstimateKind::Demand};
  }
  auto wants = [&](EstimateKind k) {
    return std::find(kinds.begin(), kinds.end(), k) != kinds.end();
  };

  std::map<EstimateKind, std::vector<FitResult>> tables;
  std::vector<std::string> labels;
  for (int m : run.treated_markets()) {
    const std::string tag = market_tag(m);
    labels.push_back(run.config().market(m).name.empty() ? tag : run.config().market(m).name);
    auto& f = run.fits(m);
    if (wants(EstimateKind::Did)) {
      f.did = did_fit(run.market_panel(m), run.spec());
      tables[EstimateKind::Did].push_back(*f.did);
    }
    if (wants(EstimateKind::Event)) tables[EstimateKind::Event].push_back(run.event_fit(m));
    if (wants(EstimateKind::Dual)) tables[EstimateKind::Dual].push_back(run.dual_fit(m));
    if (wants(EstimateKind::Demand)) {
      f.demand = demand_did_fit(run.market_demand(m));
      tables[EstimateKind::Demand].push_back(*f.demand);
    }
    for (const auto& [kind, fit] :
         {std::pair{EstimateKind::Did, &f.did}, std::pair{EstimateKind::Event, &f.event},
          std::pair{EstimateKind::Dual, &f.dual}, std::pair{EstimateKind::Demand, &f.demand}}) {
      if (!wants(kind) || !*fit) continue;
      run.write(std::string(to_string(kind)) + "_" + tag + ".csv",
                [&](std::ostream& o) { write_fit_csv(o, **fit); });
    }
  }
  for (const auto& [kind, fits] : tables) {
    run.write_text("table_" + std::string(to_string(kind)) + ".txt",
                   format_fit_table(fits, labels));
  }
}

void stage_tost(Run& run) {
  for (int m : run.treated_markets()) {
    const double delta = run.options().tost_bounds
                             ? *run.options().tost_bounds
                             : default_tost_bounds(run.market_panel(m), run.spec());
    const auto result = tost_pretrends(run.event_fit(m), delta, run.options().alpha);
    run.write("tost_" + market_tag(m) + ".csv",
              [&](std::ostream& o) { write_tost_csv(o, result); });
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void stage_report(Run& run) {
  const double alpha = run.options().alpha;
  std::ostringstream csv;
  std::ostringstream txt;
  csv << "market_id,name,beta11,p11,beta12,p12,quadrant\n";
  txt << "Quadrant report (alpha = " << fmt("%g", alpha) << ")\n"
      << "market  name                        beta11      p11     beta12      p12  quadrant\n";
  for (int m : run.treated_markets()) {
    const auto& fit = run.dual_fit(m);
    const auto& b11 = fit.at("ChatGPT3.5");
    const auto& b12 = fit.at("ChatGPT4.0");
    const auto label = classify_quadrant(b11.estimate, b11.p, b12.estimate, b12.p, alpha);
    const std::string& name = run.config().market(m).name;
    csv << m << ',' << name << ',' << fmt("%.10g", b11.estimate) << ',' << fmt("%.10g", b11.p)
        << ',' << fmt("%.10g", b12.estimate) << ',' << fmt("%.10g", b12.p) << ','
        << to_string(label) << '\n';
    char line[256];
    std::snprintf(line, sizeof line, "%6d  %-24.24s %10.4f %8.4f %10.4f %8.4f  %s\n", m,
                  name.c_str(), b11.estimate, b11.p, b12.estimate, b12.p,
                  std::string(to_string(label)).c_str());
    txt << line;
  }
  run.write_text("quadrant.csv", csv.str());
  run.write_text("quadrant.txt", txt.str());
}

json manifest_core(const RunManifest& m, const PipelineOptions& opts) {
  json outputs = json::array();
  for (const auto& o : m.outputs) outputs.push_back({{"file", o.name}, {"sha256", o.sha256}});
  json options = {{"alpha", opts.alpha},
                  {"caliper", opts.match.caliper},
                  {"with_replacement", opts.match.with_replacement},
                  {"outcome", std::string(to_string(opts.outcome))},
                  {"skip_matching", opts.skip_matching}};
  options["tost_bounds"] =
      opts.tost_bounds ? json(*opts.tost_bounds) : json("0.36*sd(outcome)");
  json kinds = json::array();
  for (auto k : opts.estimates) kinds.push_back(std::string(to_string(k)));
  options["estimates"] = kinds;
  return {{"config_hash", m.config_hash}, {"seed", m.seed},       {"version", m.version},
          {"stages", m.stages},           {"options", options}, {"outputs", outputs}};
}

}  // namespace

RunManifest run_pipeline(const fs::path& config_path, const fs::path& out_dir,
                         std::optional<std::uint64_t> seed, const PipelineOptions& options) {
  ScenarioConfig config = [&] {
    try {
      return parse_scenario(config_path);
    } catch (const ValidationError& e) {
      throw StageError("config", e.what(), false);
    }
  }();
  if (seed) config.seed = *seed;
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw StageError("config", "alpha must lie in (0, 1)", false);
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw StageError("config", "cannot create output directory " + out_dir.string(), false);
  }

  std::vector<Stage> stages = options.stages;
  if (stages.empty()) {
    for (const auto& [s, name] : kStages) stages.push_back(s);
  }
  std::sort(stages.begin(), stages.end());
  stages.erase(std::unique(stages.begin(), stages.end()), stages.end());

  RunManifest manifest;
  manifest.seed = config.seed;
  manifest.version = std::string(library_version());
  manifest.config_hash = sha256_hex(serialize_scenario(config));
  for (auto s : stages) manifest.stages.emplace_back(to_string(s));

  Run run(config, out_dir, options);
  for (auto s : stages) {
    const auto start = std::chrono::steady_clock::now();
    try {
      switch (s) {
        case Stage::Simulate:
          stage_simulate(run);
          break;
        case Stage::Match:
          stage_match(run);
          break;
        case Stage::Estimate:
          stage_estimate(run);
          break;
        case Stage::Tost:
          stage_tost(run);
          break;
        case Stage::Report:
          stage_report(run);
          break;
      }
    } catch (const NumericError& e) {
      throw StageError(std::string(to_string(s)), e.what(), true);
    } catch (const ValidationError& e) {
      throw StageError(std::string(to_string(s)), e.what(), false);
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    manifest.timings.push_back({std::string(to_string(s)), dt.count()});
  }

  for (const auto& name : run.written()) {
    manifest.outputs.push_back({name, sha256_hex(read_file(out_dir / name))});
  }
  manifest.manifest_hash = sha256_hex(manifest_core(manifest, options).dump());

  json doc = manifest_core(manifest, options);
  doc["manifest_hash"] = manifest.manifest_hash;
  json timings = json::array();
  for (const auto& t : manifest.timings) {
    timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  }
  doc["timings"] = timings;
  std::ofstream out(out_dir / "manifest.json");
  out << doc.dump(2) << '\n';
  return manifest;
}

}  // namespace inflection
