#pragma once

#include <optional>
#include <vector>

#include "sesqui/pmf.hpp"

namespace sesqui {

struct RhoHatResult {
  std::optional<double> rho_hat;          // root of h_Y(x) = 1, if any
  std::vector<double> bracketed_roots;    // all sign-change roots found
  double residual = 0.0;                  // |h_Y(rho_hat) - 1|
  int iterations = 0;
};

struct SurvivalResult {
  std::optional<double> rho_hat;
  double rho_single = 0.0;   // single type-L ancestor survival, rho_Y
  double rho_process = 0.0;  // whole-process survival, rho_{Y0,Y}
  double residual = 0.0;     // |g_Y(1 - rho_single) - (1 - rho_single)|
};

/// h_Y(x) = (1 - g_Y(1 - x)) / x, with the removable singularity at 0 filled
/// by the series E Y - E C(Y,2) x + E C(Y,3) x^2 for |x| < 1e-6.
double h_y(const BivariatePMF& offspring, double x);

/// Root of h_Y(x) = 1 on [-0.3, 1), safeguarded Newton over bisection
/// brackets.  No root is a legal outcome (marker, not an error).
RhoHatResult solve_rho_hat(const BivariatePMF& offspring);

SurvivalResult survival(const ProcessSpec& spec);

/// 2 (E Y - 1) / E Y(Y-1), the first-order survival approximation.
double first_order_survival(const BivariatePMF& offspring);

}  // namespace sesqui
