#pragma once

#include <string_view>

namespace inflection {

/// Direction of the effect after each release: productivity (+) or
/// displacement (-).
enum class QuadrantLabel { ProdToProd, ProdToDisp, DispToDisp, DispToProd, Inconclusive };

std::string_view to_string(QuadrantLabel label);

/// Sign pattern of (beta11, beta12). A coefficient with p >= alpha counts as
/// zero, and any zero gives Inconclusive. Throws ValidationError unless
/// alpha lies in (0, 1).
QuadrantLabel classify_quadrant(double beta11, double p11, double beta12, double p12,
                                double alpha);

}  // namespace inflection
