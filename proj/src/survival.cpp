#include "sesqui/survival.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sesqui {

namespace {

constexpr double kSeriesSwitch = 1e-6;
constexpr double kRootLo = -0.3;
constexpr double kRootHi = 1.0 - 1e-9;
constexpr int kScanPoints = 1024;

struct MarginalY {
  std::vector<double> p;  // P(Y = k)
  double m1 = 0.0;        // E Y
  double c2 = 0.0;        // E C(Y, 2)
  double c3 = 0.0;        // E C(Y, 3)
};

MarginalY marginal(const BivariatePMF& pmf) {
  MarginalY out;
  out.p = pmf.marginal_y();
  for (int k = 0; k < static_cast<int>(out.p.size()); ++k) {
    const double w = out.p[k];
    out.m1 += k * w;
    out.c2 += 0.5 * k * (k - 1.0) * w;
    out.c3 += k * (k - 1.0) * (k - 2.0) / 6.0 * w;
  }
  return out;
}

double g_y(const MarginalY& m, double w) {
  double sum = 0.0, wk = 1.0;
  for (double pk : m.p) {
    sum += pk * wk;
    wk *= w;
  }
  return sum;
}

double g_y_prime(const MarginalY& m, double w) {
  double sum = 0.0, wk = 1.0;
  for (int k = 1; k < static_cast<int>(m.p.size()); ++k) {
    sum += k * m.p[k] * wk;
    wk *= w;
  }
  return sum;
}

double h_eval(const MarginalY& m, double x) {
  if (std::abs(x) < kSeriesSwitch) return m.m1 - m.c2 * x + m.c3 * x * x;
  return (1.0 - g_y(m, 1.0 - x)) / x;
}

double h_prime(const MarginalY& m, double x) {
  if (std::abs(x) < kSeriesSwitch) return -m.c2 + 2.0 * m.c3 * x;
  return (g_y_prime(m, 1.0 - x) - h_eval(m, x)) / x;
}

}  // namespace

double h_y(const BivariatePMF& offspring, double x) {
  return h_eval(marginal(offspring), x);
}

RhoHatResult solve_rho_hat(const BivariatePMF& offspring) {
  const MarginalY m = marginal(offspring);
  RhoHatResult out;

  // Bracket every sign change of h_Y - 1 on the scan grid.  g_Y is convex,
  // so h_Y is monotone and at most one root exists for genuine offspring
  // laws; extra brackets are still reported rather than discarded.
  double px = kRootLo;
  double pf = h_eval(m, px) - 1.0;
  for (int i = 1; i <= kScanPoints; ++i) {
    const double x = kRootLo + (kRootHi - kRootLo) * i / kScanPoints;
    const double f = h_eval(m, x) - 1.0;
    if (pf == 0.0) {
      out.bracketed_roots.push_back(px);
    } else if (pf * f < 0.0) {
      // Safeguarded Newton inside [px, x].
      double lo = px, hi = x, flo = pf;
      double r = 0.5 * (lo + hi);
      for (int it = 0; it < 100; ++it) {
        const double fr = h_eval(m, r) - 1.0;
        ++out.iterations;
        if (std::abs(fr) <= 1e-13) break;
        if (fr * flo < 0.0) {
          hi = r;
        } else {
          lo = r;
          flo = fr;
        }
        const double dr = h_prime(m, r);
        double next = dr != 0.0 ? r - fr / dr : 0.5 * (lo + hi);
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - r) < 1e-16) {
          r = next;
          break;
        }
        r = next;
      }
      out.bracketed_roots.push_back(r);
    }
    px = x;
    pf = f;
  }
  if (out.bracketed_roots.empty()) return out;

  // The admissible root is the one closest to the origin.
  double best = out.bracketed_roots.front();
  for (double r : out.bracketed_roots)
    if (std::abs(r) < std::abs(best)) best = r;
  const double sign_ey = m.m1 - 1.0;
  if (std::abs(best) > 1e-8 && best * sign_ey < 0.0)
    fail(ErrorCode::ClassViolation,
         "solve_rho_hat: root sign disagrees with sign(E Y - 1)");
  out.rho_hat = best;
  out.residual = std::abs(h_eval(m, best) - 1.0);
  return out;
}

SurvivalResult survival(const ProcessSpec& spec) {
  const MarginalY m = marginal(spec.offspring);
  SurvivalResult out;

  RhoHatResult hat;
  bool hat_ok = true;
  try {
    hat = solve_rho_hat(spec.offspring);
  } catch (const Error&) {
    hat_ok = false;
  }
  if (hat_ok) out.rho_hat = hat.rho_hat;

  if (m.m1 <= 1.0) {
    // Subcritical or critical: extinction is certain, no root required.
    out.rho_single = 0.0;
  } else {
    if (!hat_ok || !hat.rho_hat)
      fail(ErrorCode::NoConvergence,
           "survival: no root of h_Y(x) = 1 for a supercritical process");
    out.rho_single = std::max(*hat.rho_hat, 0.0);
  }
  // Type-S initial particles never reproduce, so the initial pgf is
  // evaluated at (1 - rho, 1).
  out.rho_process = 1.0 - pgf_real(spec.initial, 1.0 - out.rho_single, 1.0);
  out.rho_process = std::clamp(out.rho_process, 0.0, 1.0);
  out.residual =
      std::abs(g_y(m, 1.0 - out.rho_single) - (1.0 - out.rho_single));
  return out;
}

double first_order_survival(const BivariatePMF& offspring) {
  const MomentSummary mom = moments(offspring);
  if (!(mom.fact2_y > 0.0))
    fail(ErrorCode::DegenerateSecondMoment,
         "first_order_survival: E Y(Y-1) must be positive");
  return 2.0 * (mom.mean_y - 1.0) / mom.fact2_y;
}

}  // namespace sesqui
