#include "inflection/market_model.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "inflection/errors.hpp"
#include "inflection/root_finding.hpp"

namespace inflection {

namespace {

constexpr double kInflectionTol = 1e-10;

double logistic_cdf(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_pdf(double z) {
  const double e = std::exp(-std::abs(z));
  return e / ((1.0 + e) * (1.0 + e));
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string_view to_string(PotentialFamily family) {
  switch (family) {
    case PotentialFamily::Quadratic:
      return "quadratic";
    case PotentialFamily::LogisticAdoption:
      return "logistic_adoption";
  }
  return "unknown";
}

PotentialFamily potential_family_from_string(std::string_view name) {
  if (name == "quadratic") return PotentialFamily::Quadratic;
  if (name == "logistic_adoption") return PotentialFamily::LogisticAdoption;
  throw InvalidSpecError("unknown potential family '" + std::string(name) +
                         "' (expected quadratic or logistic_adoption)");
}

std::string_view to_string(Phase phase) {
  return phase == Phase::Honeymoon ? "honeymoon" : "substitution";
}

AiLevel::AiLevel(double a) : a_(a) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw InvalidSpecError("AI level must lie in [0, 1], got " + fmt6(a));
  }
}

void validate(const MarketPotentialSpec& spec) {
  if (!(spec.S0 > 0.0) || !std::isfinite(spec.S0)) {
    throw InvalidSpecError("potential S0 must be positive and finite");
  }
  switch (spec.family) {
    case PotentialFamily::Quadratic:
      if (!(spec.kappa > 0.0)) {
        throw InvalidSpecError("quadratic potential requires kappa > 0");
      }
      // S(1) > 0 keeps the potential positive on the whole domain.
      if (!(spec.S0 > spec.kappa)) {
        throw InvalidSpecError("quadratic potential requires S0 > kappa");
      }
      break;
    case PotentialFamily::LogisticAdoption:
      if (!(spec.s > 0.0)) {
        throw InvalidSpecError("logistic potential requires s > 0");
      }
      if (!(spec.mu >= 1.0)) {
        throw InvalidSpecError(
            "logistic potential requires mu >= 1 (concave on [0, 1])");
      }
      break;
  }
}

void validate(const MarketSpec& market) {
  if (market.n < 1) throw InvalidSpecError("market requires n >= 1");
  if (!(market.c > 0.0)) throw InvalidSpecError("market requires c > 0");
  if (!(market.b > 0.0)) throw InvalidSpecError("market requires b > 0");
  validate(market.potential);
  if (market.potential.family == PotentialFamily::Quadratic &&
      !(market.potential.kappa > market.c / 2.0)) {
    throw BoundaryViolationError(
        "boundary-violation: quadratic potential needs kappa > c/2 so that "
        "|S'(1)| = " + fmt6(2.0 * market.potential.kappa) + " > c = " +
        fmt6(market.c));
  }
  const double slope0 = std::abs(potential_slope(market.potential, AiLevel(0.0)));
  const double slope1 = std::abs(potential_slope(market.potential, AiLevel(1.0)));
  if (!(slope0 < market.c)) {
    throw BoundaryViolationError("boundary-violation: |S'(0)| = " +
                                 fmt6(slope0) + " >= c = " + fmt6(market.c));
  }
  if (!(slope1 > market.c)) {
    throw BoundaryViolationError("boundary-violation: |S'(1)| = " +
                                 fmt6(slope1) + " <= c = " + fmt6(market.c));
  }
}

double eval_potential(const MarketPotentialSpec& spec, AiLevel a) {
  validate(spec);
  switch (spec.family) {
    case PotentialFamily::Quadratic:
      return spec.S0 - spec.kappa * a * a;
    case PotentialFamily::LogisticAdoption:
      return spec.S0 * (1.0 - logistic_cdf((a - spec.mu) / spec.s));
  }
  return 0.0;
}

double potential_slope(const MarketPotentialSpec& spec, AiLevel a) {
  validate(spec);
  switch (spec.family) {
    case PotentialFamily::Quadratic:
      return -2.0 * spec.kappa * a;
    case PotentialFamily::LogisticAdoption:
      return -(spec.S0 / spec.s) * logistic_pdf((a - spec.mu) / spec.s);
  }
  return 0.0;
}

Equilibrium cournot_closed_form(double intercept, double marginal_cost,
                                double b, int n) {
  Equilibrium eq;
  if (intercept <= marginal_cost) {
    eq.q = 0.0;
    eq.p = intercept;
    eq.corner = true;
    return eq;
  }
  const double np1 = static_cast<double>(n) + 1.0;
  eq.q = (intercept - marginal_cost) / (b * np1);
  eq.p = (intercept + static_cast<double>(n) * marginal_cost) / np1;
  eq.profit = b * eq.q * eq.q;
  eq.revenue = eq.p * eq.q;
  return eq;
}

Equilibrium cournot_equilibrium(const MarketSpec& market, AiLevel a) {
  validate(market);
  const double intercept = eval_potential(market.potential, a);
  const double mc = (1.0 - a) * market.c;
  return cournot_closed_form(intercept, mc, market.b, market.n);
}

double inflection_point(const MarketSpec& market) {
  validate(market);
  const auto& pot = market.potential;
  auto marginal_gain = [&](double a) {
    return potential_slope(pot, AiLevel(a)) + market.c;
  };
  const RootResult r = brent_root(marginal_gain, 0.0, 1.0, 1e-13, 1e-16, 500);
  if (!r.converged || !(std::abs(r.value) < kInflectionTol)) {
    throw NonConvergenceError("inflection point search did not reach "
                              "|S'(a) + c| < 1e-10",
                              r.iterations);
  }
  return r.root;
}

PhaseClassification classify_phase(const MarketSpec& market, AiLevel a) {
  const double a_star = inflection_point(market);
  if (a.value() < a_star) return {Phase::Honeymoon, false};
  return {Phase::Substitution, a.value() == a_star};
}

std::vector<ComparativeStaticsRow> sweep_comparative_statics(
    const MarketSpec& market, int grid_size) {
  if (grid_size < 3) {
    throw InvalidSpecError("comparative statics grid needs at least 3 points");
  }
  const double a_star = inflection_point(market);
  std::vector<ComparativeStaticsRow> rows;
  rows.reserve(static_cast<std::size_t>(grid_size));
  for (int k = 0; k < grid_size; ++k) {
    const double a = static_cast<double>(k) / static_cast<double>(grid_size - 1);
    ComparativeStaticsRow row;
    row.a = a;
    row.eq = cournot_equilibrium(market, AiLevel(a));
    row.phase = a < a_star ? Phase::Honeymoon : Phase::Substitution;
    rows.push_back(row);
  }
  return rows;
}

void write_comparative_statics_csv(
    std::ostream& out, const std::vector<ComparativeStaticsRow>& rows) {
  out << "a,q,p,profit,revenue,phase\n";
  for (const auto& r : rows) {
    out << fmt6(r.a) << ',' << fmt6(r.eq.q) << ',' << fmt6(r.eq.p) << ','
        << fmt6(r.eq.profit) << ',' << fmt6(r.eq.revenue) << ','
        << to_string(r.phase) << '\n';
  }
}

}  // namespace inflection
