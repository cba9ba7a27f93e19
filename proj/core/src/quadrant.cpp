#include "inflection/quadrant.hpp"

#include "inflection/errors.hpp"

namespace inflection {

std::string_view to_string(QuadrantLabel label) {
  switch (label) {
    case QuadrantLabel::ProdToProd:
      return "ProdToProd";
    case QuadrantLabel::ProdToDisp:
      return "ProdToDisp";
    case QuadrantLabel::DispToDisp:
      return "DispToDisp";
    case QuadrantLabel::DispToProd:
      return "DispToProd";
    case QuadrantLabel::Inconclusive:
      break;
  }
  return "Inconclusive";
}

QuadrantLabel classify_quadrant(double beta11, double p11, double beta12, double p12,
                                double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("classify_quadrant: alpha must lie in (0, 1)");
  }
  auto sign = [alpha](double beta, double p) {
    if (!(p < alpha) || beta == 0.0) return 0;
    return beta > 0.0 ? 1 : -1;
  };
  const int s1 = sign(beta11, p11);
  const int s2 = sign(beta12, p12);
  if (s1 == 0 || s2 == 0) return QuadrantLabel::Inconclusive;
  if (s1 > 0) return s2 > 0 ? QuadrantLabel::ProdToProd : QuadrantLabel::ProdToDisp;
  return s2 < 0 ? QuadrantLabel::DispToDisp : QuadrantLabel::DispToProd;
}

}  // namespace inflection
