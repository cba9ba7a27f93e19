#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "inflection/econometrics.hpp"

namespace inflection {

namespace {

std::string num(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace

std::string stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

void write_fit_csv(std::ostream& out, const FitResult& fit) {
  out << "term,estimate,se,p\n";
  for (const auto& c : fit.coefficients) {
    out << c.term << ',' << num("%.10g", c.estimate) << ',' << num("%.10g", c.se) << ','
        << num("%.10g", c.p) << '\n';
  }
}

std::string format_fit_table(std::span<const FitResult> fits,
                             std::span<const std::string> column_labels) {
  std::vector<std::string> terms;
  for (const auto& f : fits) {
    for (const auto& c : f.coefficients) {
      if (std::find(terms.begin(), terms.end(), c.term) == terms.end()) {
        terms.push_back(c.term);
      }
    }
  }

  std::size_t label_w = 16;
  for (const auto& t : terms) label_w = std::max(label_w, t.size() + 2);
  std::size_t col_w = 14;
  for (const auto& l : column_labels) col_w = std::max(col_w, l.size() + 2);

  std::ostringstream os;
  const std::size_t width = label_w + col_w * fits.size();
  const std::string rule(width, '-');
  os << rule << '\n' << pad_right("", label_w);
  for (std::size_t k = 0; k < fits.size(); ++k) {
    os << pad_left("(" + std::to_string(k + 1) + ")", col_w);
  }
  os << '\n' << pad_right("", label_w);
  for (std::size_t k = 0; k < fits.size(); ++k) {
    os << pad_left(k < column_labels.size() ? column_labels[k] : std::string(), col_w);
  }
  os << '\n' << rule << '\n';

  for (const auto& t : terms) {
    os << pad_right(t, label_w);
    for (const auto& f : fits) {
      os << pad_left(f.has(t) ? num("%.3f", f.estimate(t)) + pad_right(stars(f.pvalue(t)), 3)
                              : std::string(),
                     col_w);
    }
    os << '\n' << pad_right("", label_w);
    for (const auto& f : fits) {
      os << pad_left(f.has(t) ? "(" + num("%.3f", f.se(t)) + ")   " : std::string(), col_w);
    }
    os << '\n';
  }
  auto footer = [&](const std::string& name, auto value) {
    os << pad_right(name, label_w);
    for (const auto& f : fits) os << pad_left(value(f), col_w);
    os << '\n';
  };
  footer("Observations", [](const FitResult& f) { return std::to_string(f.n_obs); });
  footer("N", [](const FitResult& f) { return std::to_string(f.n_units); });
  footer("Within R^2", [](const FitResult& f) { return num("%.3f", f.within_r2); });
  os << rule << '\n'
     << "Note: *p<0.1, **p<0.05, ***p<0.01; clustered standard errors in parentheses.\n";
  return os.str();
}

void write_tost_csv(std::ostream& out, const TostResult& tost) {
  out << "period,term,estimate,se,t_lower,t_upper,delta,alpha,pass\n";
  for (const auto& p : tost.periods) {
    out << p.period << ',' << p.term << ',' << num("%.10g", p.estimate) << ','
        << num("%.10g", p.se) << ',' << num("%.10g", p.t_lower) << ','
        << num("%.10g", p.t_upper) << ',' << num("%.10g", tost.delta) << ','
        << num("%.10g", tost.alpha) << ',' << (p.pass ? 1 : 0) << '\n';
  }
}

}  // namespace inflection
