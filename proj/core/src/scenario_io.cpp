#include "inflection/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <sstream>

#include "inflection/errors.hpp"

namespace inflection {

namespace {

using nlohmann::json;

std::size_t line_of(const std::string& text, std::size_t byte) {
  const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(byte, text.size()));
  return 1 + static_cast<std::size_t>(std::count(text.begin(), end, '\n'));
}

/// Typed, path-aware access to one JSON object.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : obj_.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
        fail(field(k), "unknown field");
      }
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }

  const json& at(const char* key) const {
    if (!obj_.contains(key)) fail(field(key), "required field missing");
    return obj_.at(key);
  }

  template <class T>
  void get(const char* key, T& out, bool required = false) const {
    if (!obj_.contains(key)) {
      if (required) fail(field(key), "required field missing");
      return;
    }
    const json& v = obj_.at(key);
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(field(key), "expected a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(field(key), "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned()) {
          fail(field(key), "expected a nonnegative integer");
        }
      }
    } else {
      if (!v.is_number()) fail(field(key), "expected a number");
    }
    out = v.get<T>();
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] static void fail(const std::string& field, const std::string& msg) {
    throw ParseError("scenario field '" + field + "': " + msg, 0);
  }

 private:
  const json& obj_;
  std::string path_;
};

MarketScenario read_market(const json& j, const std::string& path) {
  Reader r(j, path);
  r.allow_only({"market_id", "name", "n", "c", "b", "potential", "a_path"});
  MarketScenario m;
  r.get("market_id", m.market_id, true);
  r.get("name", m.name);
  r.get("n", m.spec.n, true);
  r.get("c", m.spec.c, true);
  r.get("b", m.spec.b, true);

  Reader p(r.at("potential"), r.field("potential"));
  std::string family;
  p.get("family", family, true);
  try {
    m.spec.potential.family = potential_family_from_string(family);
  } catch (const ValidationError& e) {
    Reader::fail(p.field("family"), e.what());
  }
  p.get("S0", m.spec.potential.S0, true);
  if (m.spec.potential.family == PotentialFamily::Quadratic) {
    p.allow_only({"family", "S0", "kappa"});
    p.get("kappa", m.spec.potential.kappa, true);
  } else {
    p.allow_only({"family", "S0", "mu", "s"});
    m.spec.potential.kappa = 0.0;
    p.get("mu", m.spec.potential.mu, true);
    p.get("s", m.spec.potential.s, true);
  }

  Reader a(r.at("a_path"), r.field("a_path"));
  a.allow_only({"a_pre", "a_post35", "a_post40"});
  a.get("a_pre", m.a_path.pre, true);
  a.get("a_post35", m.a_path.post35, true);
  a.get("a_post40", m.a_path.post40, true);
  return m;
}

ScenarioConfig read_config(const json& root) {
  Reader r(root, "");
  r.allow_only({"markets", "control_market_id", "workers_per_market", "months",
                "shock1_index", "shock2_index", "worker_fe_sigma", "month_fe_sigma",
                "noise_sigma", "seed", "quantity_scale", "background_lambda",
                "earnings_scale", "demand", "covariates", "moderators"});
  ScenarioConfig cfg;
  const json& markets = r.at("markets");
  if (!markets.is_array()) Reader::fail("markets", "expected an array");
  for (std::size_t i = 0; i < markets.size(); ++i) {
    cfg.markets.push_back(read_market(markets[i], "markets[" + std::to_string(i) + "]"));
  }
  r.get("control_market_id", cfg.control_market_id, true);
  r.get("workers_per_market", cfg.workers_per_market);
  if (r.has("months")) {
    const json& months = r.at("months");
    if (!months.is_array()) Reader::fail("months", "expected an array of strings");
    cfg.months.clear();
    for (const auto& m : months) {
      if (!m.is_string()) Reader::fail("months", "expected an array of strings");
      cfg.months.push_back(m.get<std::string>());
    }
  }
  r.get("shock1_index", cfg.shock1_index);
  r.get("shock2_index", cfg.shock2_index);
  r.get("worker_fe_sigma", cfg.worker_fe_sigma);
  r.get("month_fe_sigma", cfg.month_fe_sigma);
  r.get("noise_sigma", cfg.noise_sigma);
  r.get("seed", cfg.seed);
  r.get("quantity_scale", cfg.quantity_scale);
  r.get("background_lambda", cfg.background_lambda);
  r.get("earnings_scale", cfg.earnings_scale);
  if (r.has("demand")) {
    Reader d(r.at("demand"), "demand");
    d.allow_only({"weeks", "shock_week", "shock2_week", "weekly_scale", "week_fe_sigma"});
    d.get("weeks", cfg.demand.weeks);
    d.get("shock_week", cfg.demand.shock_week);
    d.get("shock2_week", cfg.demand.shock2_week);
    d.get("weekly_scale", cfg.demand.weekly_scale);
    d.get("week_fe_sigma", cfg.demand.week_fe_sigma);
  }
  if (r.has("covariates")) {
    Reader c(r.at("covariates"), "covariates");
    c.allow_only({"shift"});
    c.get("shift", cfg.covariates.shift);
  }
  if (r.has("moderators")) {
    Reader m(r.at("moderators"), "moderators");
    m.allow_only({"us_share", "us_shock_multiplier", "experienced_shock_multiplier"});
    m.get("us_share", cfg.moderators.us_share);
    m.get("us_shock_multiplier", cfg.moderators.us_shock_multiplier);
    m.get("experienced_shock_multiplier", cfg.moderators.experienced_shock_multiplier);
  }
  return cfg;
}

}  // namespace

ScenarioConfig parse_scenario_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t line = line_of(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("scenario JSON, line " + std::to_string(line) + ": " + e.what(), line);
  }
  ScenarioConfig cfg = read_config(root);
  validate(cfg);
  return cfg;
}

ScenarioConfig parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfigError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  json root;
  json markets = json::array();
  for (const auto& m : cfg.markets) {
    json p;
    p["family"] = std::string(to_string(m.spec.potential.family));
    p["S0"] = m.spec.potential.S0;
    if (m.spec.potential.family == PotentialFamily::Quadratic) {
      p["kappa"] = m.spec.potential.kappa;
    } else {
      p["mu"] = m.spec.potential.mu;
      p["s"] = m.spec.potential.s;
    }
    markets.push_back({{"market_id", m.market_id},
                       {"name", m.name},
                       {"n", m.spec.n},
                       {"c", m.spec.c},
                       {"b", m.spec.b},
                       {"potential", p},
                       {"a_path",
                        {{"a_pre", m.a_path.pre},
                         {"a_post35", m.a_path.post35},
                         {"a_post40", m.a_path.post40}}}});
  }
  root["markets"] = markets;
  root["control_market_id"] = cfg.control_market_id;
  root["workers_per_market"] = cfg.workers_per_market;
  root["months"] = cfg.months;
  root["shock1_index"] = cfg.shock1_index;
  root["shock2_index"] = cfg.shock2_index;
  root["worker_fe_sigma"] = cfg.worker_fe_sigma;
  root["month_fe_sigma"] = cfg.month_fe_sigma;
  root["noise_sigma"] = cfg.noise_sigma;
  root["seed"] = cfg.seed;
  root["quantity_scale"] = cfg.quantity_scale;
  root["background_lambda"] = cfg.background_lambda;
  root["earnings_scale"] = cfg.earnings_scale;
  root["demand"] = {{"weeks", cfg.demand.weeks},
                    {"shock_week", cfg.demand.shock_week},
                    {"shock2_week", cfg.demand.shock2_week},
                    {"weekly_scale", cfg.demand.weekly_scale},
                    {"week_fe_sigma", cfg.demand.week_fe_sigma}};
  root["covariates"] = {{"shift", cfg.covariates.shift}};
  root["moderators"] = {
      {"us_share", cfg.moderators.us_share},
      {"us_shock_multiplier", cfg.moderators.us_shock_multiplier},
      {"experienced_shock_multiplier", cfg.moderators.experienced_shock_multiplier}};
  return root.dump(2) + "\n";
}

void write_scenario(const std::filesystem::path& path, const ScenarioConfig& config) {
  std::ofstream out(path);
  if (!out) throw InvalidConfigError("cannot write scenario file " + path.string());
  out << serialize_scenario(config);
}

}  // namespace inflection
