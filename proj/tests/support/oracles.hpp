#pragma once

// Reference implementations used only by tests. Each takes a different
// computational route from the library code it checks.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "inflection/market_model.hpp"
#include "inflection/panel_synth.hpp"

namespace oracle {

/// Gauss-Seidel best responses q_i = max(0, (S - mc - b * Q_-i) / (2b)).
inline std::vector<double> best_response_equilibrium(double intercept, double mc, double b,
                                                     int n, int sweeps = 20000,
                                                     double tol = 1e-14) {
  std::vector<double> q(static_cast<std::size_t>(n), 0.0);
  double total = 0.0;
  for (int s = 0; s < sweeps; ++s) {
    double change = 0.0;
    for (auto& qi : q) {
      const double others = total - qi;
      const double next = std::max(0.0, (intercept - mc - b * others) / (2.0 * b));
      change = std::max(change, std::abs(next - qi));
      total += next - qi;
      qi = next;
    }
    if (change < tol) break;
  }
  return q;
}

/// One simultaneous best-response step from a symmetric profile.
inline double best_response_to(double q_each, double intercept, double mc, double b, int n) {
  return std::max(0.0, (intercept - mc - b * (n - 1) * q_each) / (2.0 * b));
}

inline double central_difference(const auto& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Bisection on an increasing function, independent of Brent.
inline double bisect(const auto& f, double lo, double hi, int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Least squares through the normal equations (Cholesky of X'X).
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd xtx = X.transpose() * X;
  return xtx.llt().solve(X.transpose() * y);
}

/// Regression of y on [X, unit dummies, time dummies minus the first].
/// Returns the coefficients on X and the residuals.
struct DummyFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
};

inline DummyFit dummy_regression(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const std::vector<int>& unit, const std::vector<int>& time,
                                 bool use_unit = true, bool use_time = true) {
  const int U = use_unit ? *std::max_element(unit.begin(), unit.end()) + 1 : 0;
  const int T = use_time ? *std::max_element(time.begin(), time.end()) + 1 : 0;
  const Eigen::Index k = X.cols();
  const Eigen::Index extra = U + (T > 0 ? (U > 0 ? T - 1 : T) : 0);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(X.rows(), k + extra);
  D.leftCols(k) = X;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    if (U > 0) D(i, k + unit[s]) = 1.0;
    if (T > 0) {
      const int t = time[s];
      if (U == 0) {
        D(i, k + U + t) = 1.0;
      } else if (t > 0) {
        D(i, k + U + t - 1) = 1.0;
      }
    }
  }
  const Eigen::VectorXd coef = D.colPivHouseholderQr().solve(y);
  return {coef.head(k), y - D * coef};
}

/// Cluster-robust covariance with explicit per-cluster loops and the CR1
/// factor G/(G-1) * (N-1)/(N-K).
inline Eigen::MatrixXd brute_force_crve(const Eigen::MatrixXd& X, const Eigen::VectorXd& e,
                                        const std::vector<int>& cluster, int K) {
  const Eigen::Index k = X.cols();
  const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  std::map<int, Eigen::VectorXd> scores;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    auto [it, fresh] = scores.try_emplace(cluster[static_cast<std::size_t>(i)],
                                          Eigen::VectorXd::Zero(k));
    it->second += X.row(i).transpose() * e[i];
  }
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  for (const auto& [g, s] : scores) meat += s * s.transpose();
  const double G = static_cast<double>(scores.size());
  const double N = static_cast<double>(X.rows());
  return (G / (G - 1.0)) * ((N - 1.0) / (N - K)) * bread * meat * bread;
}

/// A random valid quadratic market with S(a) > (1 - a) c on [0, 1].
inline inflection::MarketSpec random_quadratic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double c = 0.5 + 4.0 * u(rng);
  const double kappa = c / 2.0 + 0.05 + 4.0 * u(rng);
  const double S0 = std::max(kappa, c) + 0.5 + 5.0 * u(rng);
  const int n = 1 + static_cast<int>(u(rng) * 20.0);
  const double b = 0.2 + 3.0 * u(rng);
  return {n, c, b, inflection::MarketPotentialSpec::quadratic(S0, kappa)};
}

/// A random valid logistic-adoption market. mu >= 1 and s chosen so that
/// |S'(0)| < c < |S'(1)| with margins; S0 is large enough to stay interior.
inline inflection::MarketSpec random_logistic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (true) {
    const double mu = 1.0 + 0.8 * u(rng);
    const double s = 0.15 + 0.35 * u(rng);
    const double S0 = 5.0 + 20.0 * u(rng);
    auto slope = [&](double a) {
      const double z = (a - mu) / s;
      const double e = std::exp(-std::abs(z));
      return (S0 / s) * e / ((1.0 + e) * (1.0 + e));
    };
    const double lo = slope(0.0);
    const double hi = slope(1.0);
    if (hi < 1.2 * lo + 0.2) continue;
    const double c = lo + (0.2 + 0.6 * u(rng)) * (hi - lo);
    const auto pot = inflection::MarketPotentialSpec::logistic(S0, mu, s);
    auto S = [&](double a) { return S0 * (1.0 - 1.0 / (1.0 + std::exp(-(a - mu) / s))); };
    bool interior = true;
    for (int k = 0; k <= 100; ++k) {
      const double a = k / 100.0;
      interior = interior && S(a) > (1.0 - a) * c + 1e-3;
    }
    if (!interior) continue;
    const int n = 1 + static_cast<int>(u(rng) * 20.0);
    const double b = 0.2 + 3.0 * u(rng);
    return {n, c, b, pot};
  }
}

}  // namespace oracle
