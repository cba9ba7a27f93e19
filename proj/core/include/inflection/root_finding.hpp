#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <utility>

namespace inflection {

template <typename F>
concept ScalarFunction = requires(F f, double x) {
  { f(x) } -> std::convertible_to<double>;
};

struct RootResult {
  double root = 0.0;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Brent's method on a bracket [lo, hi] with f(lo) and f(hi) of opposite sign.
///
/// Combines inverse quadratic interpolation, secant steps and bisection.
/// Stops when |f(x)| < ftol or the bracket is narrower than xtol. A bracket
/// without a sign change returns converged = false immediately.
template <ScalarFunction F>
RootResult brent_root(F&& f, double lo, double hi, double ftol = 1e-12,
                      double xtol = 1e-15, int max_iter = 200) {
  double a = lo;
  double b = hi;
  double fa = f(a);
  double fb = f(b);
  RootResult out;
  if (fa == 0.0) return {a, fa, 0, true};
  if (fb == 0.0) return {b, fb, 0, true};
  if ((fa > 0.0) == (fb > 0.0)) {
    out.root = b;
    out.value = fb;
    return out;
  }

  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 1; iter <= max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol =
        2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(fb) < ftol || std::abs(m) <= tol) {
      return {b, fb, iter, std::abs(fb) < ftol || std::abs(m) <= tol};
    }

    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      } else {
        p = -p;
      }
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  return {b, fb, max_iter, std::abs(fb) < ftol};
}

}  // namespace inflection
