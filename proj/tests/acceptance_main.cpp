// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.  Tolerances are pinned in code, next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "sesqui/exact.hpp"
#include "sesqui/family.hpp"
#include "sesqui/montecarlo.hpp"
#include "sesqui/saddle.hpp"
#include "sesqui/survival.hpp"

using namespace sesqui;

namespace {

struct Harness {
  int failures = 0;

  void run(int id, const std::string& name,
           const std::function<bool(std::string&)>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("%s criterion %2d: %s (%.1fs)%s%s\n",
                pass ? "PASS" : "FAIL", id, name.c_str(), secs,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

BivariatePMF unit_initial() { return pmf_from_entries({{1, 0, 1.0}}); }

ProcessSpec degenerate_spec() {
  return {pmf_from_entries({{0, 0, 1.0}}), unit_initial()};
}
ProcessSpec geometric_spec() {
  return {pmf_from_entries({{0, 0, 0.5}, {1, 0, 0.5}}), unit_initial()};
}
ProcessSpec parity_spec() {
  return {pmf_from_entries({{0, 1, 0.5}, {1, 1, 0.5}}), unit_initial()};
}
ProcessSpec poisson_spec(double mu = 0.95, double nu = 1.0) {
  return {pmf_from_product_poisson(mu, nu), unit_initial()};
}
ProcessSpec uniform01_spec() {
  return {pmf_from_entries(
              {{0, 0, 0.25}, {1, 0, 0.25}, {0, 1, 0.25}, {1, 1, 0.25}}),
          unit_initial()};
}

FamilySpec binomial_family() {
  const std::vector<double> c00 = {0.5, -0.5, 0.125};
  const std::vector<double> c10 = {0.0, 0.5, -0.25};
  const std::vector<double> c20 = {0.0, 0.0, 0.125};
  return FamilySpec::polynomial(0.2, 1.8,
                                {{0, 0, c00},
                                 {1, 0, c10},
                                 {2, 0, c20},
                                 {0, 1, c00},
                                 {1, 1, c10},
                                 {2, 1, c20}},
                                {{1, 0, {1.0}}});
}

FamilySpec poisson_family() {
  return FamilySpec::poisson_t(0.5, 1.5, 1.0, {{1, 0, {1.0}}});
}

std::string fmt(const char* pattern, double a, double b = 0.0,
                double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

double chain_rule_a1(const FamilySpec& family, double tc) {
  // 2 (d/dt E Y_t) / E Y(Y-1) at tc, slope by Richardson central diff.
  const auto mean = [&](double t) {
    return moments(family_eval(family, t).offspring).mean_y;
  };
  const double h = 1e-4;
  const double d1 = (mean(tc + h) - mean(tc - h)) / (2.0 * h);
  const double d2 = (mean(tc + h / 2) - mean(tc - h / 2)) / h;
  const double slope = (4.0 * d2 - d1) / 3.0;
  return 2.0 * slope / moments(family_eval(family, tc).offspring).fact2_y;
}

}  // namespace

int main() {
  Harness h;
  const auto t_suite = std::chrono::steady_clock::now();

  h.run(1, "dual-oracle equivalence at Nmax = 100", [](std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const ProcessSpec& spec : {degenerate_spec(), geometric_spec(),
                                    parity_spec(), poisson_spec()}) {
      const TotalProbTable a = total_prob_table(spec, 100);
      const TotalProbTable b = oracle_total_size(spec, 100);
      for (int N = 0; N <= 100; ++N)
        worst = std::max(worst, std::abs(a.q[N] - b.q[N]));
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    detail = fmt("max gap %.2e (tol 1e-10), %.1fs (limit 30s)", worst, secs);
    return worst <= 1e-10 && secs <= 30.0;
  });

  h.run(2, "contour integral equals coefficient extraction, n+m <= 40",
        [](std::string& detail) {
          const auto start = std::chrono::steady_clock::now();
          const ProcessSpec spec = poisson_spec();
          const PointProbTable exact = point_prob_table(spec, 40);
          double worst = 0.0;
          for (int n = 1; n <= 40; ++n)
            for (int m = 0; n + m <= 40; ++m) {
              const double p = exact.at(n, m);
              const double q = integral_point_prob(spec, n, m).value;
              worst = std::max(worst, std::abs(q - p) / p);
            }
          const double secs = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
          detail = fmt("max rel err %.2e (tol 1e-6), %.1fs (limit 60s)",
                       worst, secs);
          return worst <= 1e-6 && secs <= 60.0;
        });

  h.run(3, "q_N / (theta N^-3/2 e^-xi N) -> 1 with a 1/N trend",
        [](std::string& detail) {
          const auto start = std::chrono::steady_clock::now();
          const ProcessSpec spec = poisson_spec();
          const TotalProbTable exact = total_prob_table(spec, 400);
          const AsymptoticParams ap = asymptotic_params(spec);
          const auto ratio = [&](int N) {
            return exact.q[N] / asymp_total_prob(ap, N).value;
          };
          const double r100 = ratio(100), r400 = ratio(400);
          const double secs = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
          detail = fmt("|r400-1| = %.2e, |r100-1| = %.2e, %.1fs (limit 120s)",
                       std::abs(r400 - 1.0), std::abs(r100 - 1.0), secs);
          return std::abs(r400 - 1.0) <= 0.02 &&
                 std::abs(r400 - 1.0) <= 0.6 * std::abs(r100 - 1.0) &&
                 secs <= 120.0;
        });

  h.run(4, "decay rate scales quadratically in the mean offset",
        [](std::string& detail) {
          double lo = 1e300, hi = 0.0;
          for (double eps : {0.01, 0.02, 0.04, 0.08})
            for (double sign : {1.0, -1.0}) {
              const AsymptoticParams ap =
                  asymptotic_params(poisson_spec(1.0 + sign * eps, 1.0));
              const double r = ap.xi / (eps * eps);
              lo = std::min(lo, r);
              hi = std::max(hi, r);
            }
          const double xi0 = asymptotic_params(poisson_spec(1.0, 1.0)).xi;
          detail = fmt("xi/eps^2 in [%.4f, %.4f], xi(0) = %.1e", lo, hi, xi0);
          return hi / lo <= 2.0 && xi0 <= 1e-10;
        });

  h.run(5, "survival closed forms and subcritical zeros",
        [](std::string& detail) {
          const SurvivalResult binom = survival(
              {pmf_from_entries({{0, 0, 0.0625}, {1, 0, 0.375}, {2, 0, 0.5625}}),
               unit_initial()});
          const bool binom_ok =
              std::abs(binom.rho_single - 8.0 / 9.0) <= 1e-12;

          const SurvivalResult pois = survival(
              {pmf_from_product_poisson(1.2, 0.0), unit_initial()});
          // Independent bisection on 1 - rho = exp(-1.2 rho).
          double blo = 1e-12, bhi = 1.0 - 1e-12;
          for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (blo + bhi);
            if (1.0 - mid - std::exp(-1.2 * mid) > 0.0)
              blo = mid;
            else
              bhi = mid;
          }
          const double resid =
              std::abs(1.0 - pois.rho_single -
                       std::exp(-1.2 * pois.rho_single));
          const bool pois_ok = resid <= 1e-12 &&
                               std::abs(pois.rho_single - 0.5 * (blo + bhi)) <=
                                   1e-9;

          bool zeros_ok = true;
          for (const ProcessSpec& spec :
               {degenerate_spec(), geometric_spec(), parity_spec(),
                poisson_spec()})
            if (survival(spec).rho_single != 0.0) zeros_ok = false;
          detail = fmt("binomial gap %.1e, poisson residual %.1e",
                       std::abs(binom.rho_single - 8.0 / 9.0), resid);
          return binom_ok && pois_ok && zeros_ok;
        });

  h.run(6, "first-order survival within 5% at s = 0.01",
        [](std::string& detail) {
          const FamilySpec fam = binomial_family();
          const double tc = find_tc(fam);
          const ProcessSpec spec = family_eval(fam, tc + 0.01);
          const double rho = survival(spec).rho_single;
          const double first = first_order_survival(spec.offspring);
          detail = fmt("rho/first_order = %.6f", rho / first);
          return std::abs(rho / first - 1.0) <= 0.05;
        });

  h.run(7, "survival expansion: fitted a1 matches the chain rule",
        [](std::string& detail) {
          bool ok = true;
          std::string parts;
          for (const FamilySpec& fam : {binomial_family(), poisson_family()}) {
            const SurvivalExpansion ex = survival_expansion(fam, 4);
            const double target = chain_rule_a1(fam, ex.tc);
            const double rel = std::abs(ex.a[0] / target - 1.0);
            parts += fmt("a1 = %.5f vs %.5f (resid %.1e); ", ex.a[0], target,
                         ex.max_residual);
            if (!(ex.a[0] > 0.0) || rel > 0.01 || ex.max_residual > 1e-6)
              ok = false;
          }
          detail = parts;
          return ok;
        });

  h.run(8, "perturbation gap/bound ratios stay in a factor-4 band",
        [](std::string& detail) {
          const FamilySpec fam = poisson_family();
          const double tc = find_tc(fam);
          double xi_lo = 1e300, xi_hi = 0.0, rho_lo = 1e300, rho_hi = 0.0;
          for (double dt : {0.03, 0.06, 0.09, 0.12, 0.15})
            for (double frac : {0.02, 0.05, 0.08, 0.12, 0.16}) {
              const double t = tc + dt;
              // Per-t calibration of the (locally linear) eta-per-shift
              // rate; fractions stay under 0.2 with margin for the
              // residual nonlinearity.
              const double probe = 1e-3;
              const double eta_rate =
                  eta_distance(family_eval(fam, t),
                               family_eval(fam, t + probe), fam.class_R()) /
                  probe;
              const double shift = frac * dt / eta_rate;
              const PerturbationReport rep = perturbation_check(
                  fam, t, family_eval(fam, t + shift));
              if (rep.eta > 0.2 * dt) {
                detail = "eta exceeded 0.2 |t - tc|";
                return false;
              }
              xi_lo = std::min(xi_lo, rep.xi_gap / rep.bound_xi);
              xi_hi = std::max(xi_hi, rep.xi_gap / rep.bound_xi);
              rho_lo = std::min(rho_lo, rep.rho_gap / rep.eta);
              rho_hi = std::max(rho_hi, rep.rho_gap / rep.eta);
            }
          detail = fmt("xi band %.2f, rho band %.2f (limit 4)",
                       xi_hi / xi_lo, rho_hi / rho_lo);
          return xi_hi / xi_lo <= 4.0 && rho_hi / rho_lo <= 4.0;
        });

  h.run(9, "Monte Carlo 99% coverage and thread determinism",
        [](std::string& detail) {
          const auto start = std::chrono::steady_clock::now();
          const long long samples = 1000000;
          bool coverage_ok = true;
          std::string parts;
          for (const ProcessSpec& spec : {degenerate_spec(), geometric_spec(),
                                          parity_spec(), poisson_spec()}) {
            const TotalProbTable exact = total_prob_table(spec, 20);
            const PointProbEstimate est =
                estimate_point_probs(spec, samples, 20, 20240817);
            int inside = 0;
            for (int N = 1; N <= 20; ++N) {
              const EstimateRow wide =
                  wilson_row(N, est.rows[N].count, samples, kWilson99);
              if (exact.q[N] >= wide.ci_lo && exact.q[N] <= wide.ci_hi)
                ++inside;
            }
            parts += fmt("%.0f/20 ", static_cast<double>(inside));
            if (inside < 19) coverage_ok = false;
          }
          const PointProbEstimate a =
              estimate_point_probs(geometric_spec(), samples, 20, 99, 1);
          const PointProbEstimate b =
              estimate_point_probs(geometric_spec(), samples, 20, 99, 7);
          bool det_ok = a.exceeded == b.exceeded;
          for (std::size_t i = 0; i < a.rows.size(); ++i)
            if (a.rows[i].count != b.rows[i].count) det_ok = false;
          const double secs = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
          detail = "coverage " + parts +
                   (det_ok ? "deterministic" : "NON-DETERMINISTIC") +
                   fmt(", %.1fs (limit 180s)", secs);
          return coverage_ok && det_ok && secs <= 180.0;
        });

  h.run(10, "theta-sum deviation margin and odd-sum vanishing",
        [](std::string& detail) {
          double worst_excess = 0.0;
          double worst_a = 0.0, worst_y = 0.0, worst_dev = 0.0,
                 worst_margin = 0.0;
          for (double a : {0.1, 0.25, 0.5, 1.0})
            for (double y : {0.0, 0.3, 0.5}) {
              const double dev =
                  std::abs(theta_sum(a, y, 0).value - std::sqrt(M_PI / a));
              const double margin =
                  2.0 / std::sqrt(a) * std::exp(-M_PI * M_PI / a);
              if (dev / margin > worst_excess) {
                worst_excess = dev / margin;
                worst_a = a;
                worst_y = y;
                worst_dev = dev;
                worst_margin = margin;
              }
            }
          const double s1 = std::abs(theta_sum(0.5, 0.0, 1).value);
          detail = fmt("worst at a=%.2f y=%.1f: ", worst_a, worst_y) +
                   fmt("deviation %.2e vs margin %.2e", worst_dev,
                       worst_margin) +
                   fmt(", |S1| = %.1e", s1);
          // The stated margin is below both the true deviation (which
          // carries an extra sqrt(pi) factor at y = 0) and the double
          // precision floor at small a; see the unit suite for the bound
          // with the computed constant.
          return worst_excess <= 1.0 && s1 <= 1e-14;
        });

  h.run(11, "structural invariants on the class fixtures",
        [](std::string& detail) {
          bool ok = true;
          std::string why;
          const double box = 0.5 * std::log(2.0);
          for (const ProcessSpec& spec :
               {poisson_spec(0.95, 1.0), poisson_spec(1.0, 1.0),
                uniform01_spec()}) {
            const BivariatePMF& off = spec.offspring;
            // Hessian positive definite at 100 sampled in-box points.
            for (int i = 0; i < 100; ++i) {
              const double a =
                  box * (2.0 * std::fmod(0.6180339887 * i, 1.0) - 1.0);
              const double b =
                  box * (2.0 * std::fmod(0.7548776662 * i, 1.0) - 1.0);
              const LogMgfDerivs d = log_mgf_derivs(off, a, b);
              if (!(d.det_hess() > 0.0 && d.hess[0] + d.hess[3] > 0.0)) {
                ok = false;
                why = "hessian not positive definite";
              }
            }
            // Torus modulus bound on a 64 x 64 grid, strict off the origin.
            const double f0 = mgf_real(off, 0.0, 0.0);
            for (int iu = 0; iu < 64; ++iu)
              for (int iv = 0; iv < 64; ++iv) {
                const double u = -M_PI + 2.0 * M_PI * iu / 64;
                const double v = -M_PI + 2.0 * M_PI * iv / 64;
                const double mod = std::abs(mgf(off, {0.0, u}, {0.0, v}));
                if (mod > f0 * (1.0 + 1e-12) ||
                    ((u != 0.0 || v != 0.0) && mod >= f0)) {
                  ok = false;
                  why = "torus modulus bound violated";
                }
              }
            if (std::abs(psi_small(off, 0.0, 0.0)) > 1e-10) {
              ok = false;
              why = "psi(0,0) not zero";
            }
            // Gradient against central differences of phi; Hessian against
            // central differences of the gradient (step 1e-5 throughout).
            for (double a : {-0.2, 0.15})
              for (double b : {-0.15, 0.2}) {
                const LogMgfDerivs d = log_mgf_derivs(off, a, b);
                const double hstep = 1e-5;
                const auto phi = [&](double x, double y) {
                  return std::log(mgf_real(off, x, y));
                };
                const double g0 =
                    (phi(a + hstep, b) - phi(a - hstep, b)) / (2.0 * hstep);
                const double g1 =
                    (phi(a, b + hstep) - phi(a, b - hstep)) / (2.0 * hstep);
                const LogMgfDerivs dup = log_mgf_derivs(off, a + hstep, b);
                const LogMgfDerivs ddn = log_mgf_derivs(off, a - hstep, b);
                const LogMgfDerivs dvp = log_mgf_derivs(off, a, b + hstep);
                const LogMgfDerivs dvn = log_mgf_derivs(off, a, b - hstep);
                const double h00 =
                    (dup.grad[0] - ddn.grad[0]) / (2.0 * hstep);
                const double h01 =
                    (dvp.grad[0] - dvn.grad[0]) / (2.0 * hstep);
                const double h11 =
                    (dvp.grad[1] - dvn.grad[1]) / (2.0 * hstep);
                // Relative to the matrix scale, so exactly-zero cross
                // derivatives of product laws do not inflate the ratio.
                const double scale =
                    std::abs(d.hess[0]) + std::abs(d.hess[3]);
                const auto rel = [&](double got, double want) {
                  return std::abs(got - want) /
                         std::max(std::abs(want), 0.01 * scale);
                };
                if (rel(d.grad[0], g0) > 1e-6 || rel(d.grad[1], g1) > 1e-6 ||
                    rel(d.hess[0], h00) > 1e-6 || rel(d.hess[1], h01) > 1e-6 ||
                    rel(d.hess[3], h11) > 1e-6) {
                  ok = false;
                  why = "derivatives disagree with finite differences";
                }
              }
          }
          // h(x0) = (0,0) at criticality.
          const ProcessSpec crit = poisson_spec(1.0, 1.0);
          const SaddlePoint h0 = h_of_x(crit.offspring, 0.5);
          if (std::abs(h0.alpha) > 1e-10 || std::abs(h0.beta) > 1e-10) {
            ok = false;
            why = "h(x0) differs from the origin at criticality";
          }
          detail = ok ? fmt("h(x0) = (%.1e, %.1e)", h0.alpha, h0.beta) : why;
          return ok;
        });

  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_suite)
          .count();
  std::printf("%d of 11 criteria passed in %.1fs\n", 11 - h.failures, total);
  return h.failures;
}
