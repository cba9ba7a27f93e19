#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace inflection {

enum class PotentialFamily { Quadratic, LogisticAdoption };

std::string_view to_string(PotentialFamily family);
PotentialFamily potential_family_from_string(std::string_view name);

/// Market potential S(a): the demand intercept as a function of AI level.
///
/// Quadratic:        S(a) = S0 - kappa * a^2
/// LogisticAdoption: S(a) = S0 * (1 - L((a - mu) / s)), L the logistic CDF
///
/// Both families are decreasing and concave on [0, 1] when valid.
struct MarketPotentialSpec {
  PotentialFamily family = PotentialFamily::Quadratic;
  double S0 = 1.0;
  double kappa = 0.0;  // Quadratic only
  double mu = 1.0;     // LogisticAdoption only
  double s = 1.0;      // LogisticAdoption only

  static MarketPotentialSpec quadratic(double S0, double kappa) {
    return {PotentialFamily::Quadratic, S0, kappa, 1.0, 1.0};
  }
  static MarketPotentialSpec logistic(double S0, double mu, double s) {
    return {PotentialFamily::LogisticAdoption, S0, 0.0, mu, s};
  }

  bool operator==(const MarketPotentialSpec&) const = default;
};

/// Cournot market with n identical workers, marginal cost (1 - a) c and
/// inverse demand p = S(a) - b * Q.
struct MarketSpec {
  int n = 1;
  double c = 1.0;
  double b = 1.0;
  MarketPotentialSpec potential;

  bool operator==(const MarketSpec&) const = default;
};

/// Fraction of an occupation's tasks AI completes; always in [0, 1].
class AiLevel {
 public:
  explicit AiLevel(double a);
  double value() const noexcept { return a_; }
  operator double() const noexcept { return a_; }

 private:
  double a_;
};

struct Equilibrium {
  double q = 0.0;        // per-worker quantity
  double p = 0.0;        // market price
  double profit = 0.0;   // per-worker profit
  double revenue = 0.0;  // per-worker p * q
  bool corner = false;   // q clamped to 0 because S(a) <= (1 - a) c
};

enum class Phase { Honeymoon, Substitution };

std::string_view to_string(Phase phase);

struct PhaseClassification {
  Phase phase = Phase::Honeymoon;
  bool at_boundary = false;  // a == a* exactly (reported as Substitution)
};

/// Throws InvalidSpecError when a family constraint fails.
void validate(const MarketPotentialSpec& spec);
/// Validates the potential, n/c/b, and the boundary conditions
/// |S'(0)| < c < |S'(1)|. Throws InvalidSpecError or BoundaryViolationError.
void validate(const MarketSpec& market);

double eval_potential(const MarketPotentialSpec& spec, AiLevel a);
double potential_slope(const MarketPotentialSpec& spec, AiLevel a);

/// Symmetric Cournot equilibrium in closed form for a given intercept,
/// marginal cost, demand slope and worker count.
Equilibrium cournot_closed_form(double intercept, double marginal_cost,
                                double b, int n);

Equilibrium cournot_equilibrium(const MarketSpec& market, AiLevel a);

/// Unique root a* in (0, 1) of S'(a) + c = 0, found by Brent iteration to
/// |S'(a*) + c| < 1e-10.
double inflection_point(const MarketSpec& market);

PhaseClassification classify_phase(const MarketSpec& market, AiLevel a);

struct ComparativeStaticsRow {
  double a = 0.0;
  Equilibrium eq;
  Phase phase = Phase::Honeymoon;
};

/// Equilibria on a uniform grid of `grid_size` points over [0, 1].
std::vector<ComparativeStaticsRow> sweep_comparative_statics(
    const MarketSpec& market, int grid_size);

/// CSV with header `a,q,p,profit,revenue,phase`, 6 significant digits.
void write_comparative_statics_csv(
    std::ostream& out, const std::vector<ComparativeStaticsRow>& rows);

}  // namespace inflection
