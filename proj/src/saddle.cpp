#include "sesqui/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace sesqui {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 6.283185307179586476925286766559;

double sup_residual(const LogMgfDerivs& d, const std::array<double, 2>& t) {
  return std::max(std::abs(d.grad[0] - t[0]), std::abs(d.grad[1] - t[1]));
}

struct NewtonResult {
  SaddlePoint point;
  bool converged = false;
};

// Damped Newton from the origin.  In clamped mode the iterates are projected
// into the box and the best point reached is returned without throwing;
// otherwise convergence outside the box reports LeftDomain.
NewtonResult newton_saddle(const BivariatePMF& pmf,
                           const std::array<double, 2>& target, double box,
                           double tol, int max_iter, bool clamped) {
  // Polish well past the acceptance tolerance: downstream finite
  // differences of Psi divide the residual by the step size.
  const double polish_tol = std::min(tol, 1e-15);
  const double runaway = std::max(4.0 * box, 25.0);
  double a = 0.0, b = 0.0;
  LogMgfDerivs d = log_mgf_derivs(pmf, a, b);
  double res = sup_residual(d, target);
  int it = 0;
  for (; it < max_iter && res > polish_tol; ++it) {
    const double det = d.det_hess();
    const double r1 = target[0] - d.grad[0];
    const double r2 = target[1] - d.grad[1];
    double sa, sb;
    if (std::abs(det) > 1e-300) {
      sa = (d.hess[3] * r1 - d.hess[1] * r2) / det;
      sb = (d.hess[0] * r2 - d.hess[2] * r1) / det;
    } else if (clamped) {
      // Degenerate direction (e.g. a constant coordinate): fall back to a
      // coordinate-wise Newton step; good enough for conditioning.
      sa = r1 / std::max(d.hess[0], 1e-8);
      sb = r2 / std::max(d.hess[3], 1e-8);
    } else {
      fail(ErrorCode::SingularHessian, "solve_saddle: singular Hessian");
    }

    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60 && !accepted; ++h) {
      double ca = a + lambda * sa;
      double cb = b + lambda * sb;
      if (clamped) {
        ca = std::clamp(ca, -box, box);
        cb = std::clamp(cb, -box, box);
      }
      const LogMgfDerivs cd = log_mgf_derivs(pmf, ca, cb);
      const double cres = sup_residual(cd, target);
      if (std::isfinite(cres) && cres < res) {
        a = ca;
        b = cb;
        d = cd;
        res = cres;
        accepted = true;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;  // stagnated at the attainable precision
    if (!clamped && (std::abs(a) > runaway || std::abs(b) > runaway))
      fail(ErrorCode::LeftDomain,
           "solve_saddle: iterate left the admissible domain");
  }
  NewtonResult out;
  out.point = SaddlePoint{a, b, res, it};
  out.converged = res <= tol;
  return out;
}

}  // namespace

SaddleOptions SaddleOptions::for_class(const ClassParams& cp) {
  SaddleOptions opts;
  opts.class_params = cp;
  opts.box_radius = 0.5 * std::log(cp.R);
  return opts;
}

SaddlePoint solve_saddle(const BivariatePMF& offspring,
                         std::array<double, 2> target,
                         const SaddleOptions& opts) {
  NewtonResult r = newton_saddle(offspring, target, opts.box_radius, opts.tol,
                                 opts.max_iter, /*clamped=*/false);
  if (!r.converged)
    fail(ErrorCode::NoConvergence,
         "solve_saddle: residual " + std::to_string(r.point.residual) +
             " after " + std::to_string(r.point.iterations) + " iterations");
  if (std::abs(r.point.alpha) > opts.box_radius ||
      std::abs(r.point.beta) > opts.box_radius)
    fail(ErrorCode::LeftDomain, "solve_saddle: solution outside the box");
  return r.point;
}

double psi_small(const BivariatePMF& offspring, double alpha, double beta) {
  const LogMgfDerivs d = log_mgf_derivs(offspring, alpha, beta);
  return d.phi - alpha * d.grad[0] - beta * d.grad[1];
}

SaddlePoint h_of_x(const BivariatePMF& offspring, double x,
                   const SaddleOptions& opts) {
  if (!(x > 0.0) || !(x < 1.0))
    fail(ErrorCode::InvalidParameter, "h_of_x: x must lie in (0, 1)");
  return solve_saddle(offspring, {1.0, (1.0 - x) / x}, opts);
}

double capital_psi(const BivariatePMF& offspring, double x,
                   const SaddleOptions& opts) {
  const SaddlePoint h = h_of_x(offspring, x, opts);
  return x * psi_small(offspring, h.alpha, h.beta);
}

double capital_phi(const ProcessSpec& spec, double x,
                   const SaddleOptions& opts) {
  const SaddlePoint h = h_of_x(spec.offspring, x, opts);
  const LogMgfDerivs d = log_mgf_derivs(spec.offspring, h.alpha, h.beta);
  const double det = d.det_hess();
  if (!(det > 0.0))
    fail(ErrorCode::SingularHessian,
         "capital_phi: non-positive Hessian determinant");
  return tilde_f0(spec.initial, h.alpha, h.beta) /
         (kTwoPi * x * x * std::sqrt(det));
}

namespace {

// Richardson-extrapolated central differences of Psi.
double psi_profile_d1(const BivariatePMF& pmf, double x, double h,
                      const SaddleOptions& opts) {
  const auto diff = [&](double step) {
    return (capital_psi(pmf, x + step, opts) -
            capital_psi(pmf, x - step, opts)) /
           (2.0 * step);
  };
  const double d1 = diff(h);
  const double d2 = diff(h / 2.0);
  return (4.0 * d2 - d1) / 3.0;
}

double psi_profile_d2(const BivariatePMF& pmf, double x, double h,
                      const SaddleOptions& opts) {
  const double c = capital_psi(pmf, x, opts);
  const auto diff = [&](double step) {
    return (capital_psi(pmf, x + step, opts) - 2.0 * c +
            capital_psi(pmf, x - step, opts)) /
           (step * step);
  };
  const double d1 = diff(h);
  const double d2 = diff(h / 2.0);
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

double find_xhat(const BivariatePMF& offspring, const SaddleOptions& opts) {
  const MomentSummary mom = moments(offspring);
  const double x0 = 1.0 / (1.0 + mom.mean_z);
  const double margin = 1e-6;

  const auto d1 = [&](double x) {
    return psi_profile_d1(offspring, x, opts.fd_step, opts);
  };

  // Expand around x0 until Psi' changes sign; stop a side when the saddle
  // solver leaves its domain.
  double lo = x0, hi = x0;
  double flo, fhi;
  flo = fhi = d1(x0);
  if (flo == 0.0) return x0;
  const int steps = 16;
  const double delta = opts.xhat_radius / steps;
  bool lo_alive = true, hi_alive = true;
  bool bracketed = false;
  for (int i = 1; i <= steps && !bracketed; ++i) {
    if (hi_alive) {
      const double x = std::min(x0 + i * delta, 1.0 - margin);
      if (x > hi) {
        try {
          const double f = d1(x);
          if (f == 0.0) return x;
          if (f * fhi < 0.0) {
            lo = hi;
            flo = fhi;
            hi = x;
            fhi = f;
            bracketed = true;
            break;
          }
          hi = x;
          fhi = f;
        } catch (const Error&) {
          hi_alive = false;
        }
      }
    }
    if (lo_alive) {
      const double x = std::max(x0 - i * delta, margin);
      if (x < lo) {
        try {
          const double f = d1(x);
          if (f == 0.0) return x;
          if (f * flo < 0.0) {
            hi = lo;
            fhi = flo;
            lo = x;
            flo = f;
            bracketed = true;
            break;
          }
          lo = x;
          flo = f;
        } catch (const Error&) {
          lo_alive = false;
        }
      }
    }
  }
  if (!bracketed)
    fail(ErrorCode::NoSignChange,
         "find_xhat: Psi' does not change sign within the search radius");

  // Safeguarded Newton on Psi' with bisection fallback.
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 80; ++it) {
    const double f = d1(x);
    if (std::abs(f) <= 1e-9) return x;
    if (f * flo < 0.0) {
      hi = x;
      fhi = f;
    } else {
      lo = x;
      flo = f;
    }
    const double fpp = psi_profile_d2(offspring, x, opts.fd_step, opts);
    double next = x - f / fpp;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-14 && std::abs(f) <= 1e-8) return next;
    x = next;
  }
  fail(ErrorCode::NoConvergence, "find_xhat: Psi' root refinement stalled");
}

AsymptoticParams asymptotic_params(const ProcessSpec& spec,
                                   const SaddleOptions& opts) {
  if (opts.enforce_class) {
    const ClassReport k0 = check_k0(spec.offspring, opts.class_params);
    if (!k0.passed)
      fail(ErrorCode::ClassViolation,
           "asymptotic_params: offspring fails the moment/mean condition "
           "(E R^(Y+Z) = " +
               std::to_string(k0.moment_r) + ", E Y = " +
               std::to_string(k0.mean_y) + ")");
    const ClassReport k1 = check_k1(spec.offspring, opts.class_params);
    if (!k1.passed)
      fail(ErrorCode::ClassViolation,
           "asymptotic_params: offspring fails the corner-support condition");
  }
  const MomentSummary mom = moments(spec.offspring);
  if (std::abs(mom.mean_y - 1.0) > opts.ey_window)
    fail(ErrorCode::InvalidParameter,
         "asymptotic_params: |E Y - 1| = " +
             std::to_string(std::abs(mom.mean_y - 1.0)) +
             " outside the near-critical window " +
             std::to_string(opts.ey_window));

  AsymptoticParams out;
  out.x0 = 1.0 / (1.0 + mom.mean_z);
  out.xhat = find_xhat(spec.offspring, opts);
  double xi = -capital_psi(spec.offspring, out.xhat, opts);
  if (std::abs(xi) <= 1e-12) xi = 0.0;
  if (xi < 0.0)
    fail(ErrorCode::NoConvergence,
         "asymptotic_params: negative decay rate " + std::to_string(xi));
  out.xi = xi;
  out.psi_pp = psi_profile_d2(spec.offspring, out.xhat, opts.fd_step, opts);
  if (!(out.psi_pp < 0.0))
    fail(ErrorCode::ClassViolation,
         "asymptotic_params: Psi'' is not negative at xhat");
  out.phi_at_xhat = capital_phi(spec, out.xhat, opts);
  out.theta = std::sqrt(kTwoPi / std::abs(out.psi_pp)) * out.phi_at_xhat;
  return out;
}

ProbValue asymp_point_prob(const ProcessSpec& spec, int n, int m,
                           const SaddleOptions& opts) {
  if (n < 1) fail(ErrorCode::InvalidIndex, "asymp_point_prob: n must be >= 1");
  if (m < 0) fail(ErrorCode::InvalidIndex, "asymp_point_prob: m must be >= 0");
  const SaddlePoint s = solve_saddle(
      spec.offspring, {1.0, static_cast<double>(m) / n}, opts);
  const LogMgfDerivs d = log_mgf_derivs(spec.offspring, s.alpha, s.beta);
  const double det = d.det_hess();
  if (!(det > 0.0))
    fail(ErrorCode::SingularHessian,
         "asymp_point_prob: non-positive Hessian determinant");
  const double psi = d.phi - s.alpha * d.grad[0] - s.beta * d.grad[1];
  const double f0t = tilde_f0(spec.initial, s.alpha, s.beta);
  ProbValue out;
  out.log_value = -2.0 * std::log(static_cast<double>(n)) + n * psi +
                  std::log(f0t) - std::log(kTwoPi) - 0.5 * std::log(det);
  out.value = std::exp(out.log_value);
  return out;
}

ProbValue asymp_total_prob(const AsymptoticParams& params, long long N) {
  if (N < 1) fail(ErrorCode::InvalidIndex, "asymp_total_prob: N must be >= 1");
  ProbValue out;
  out.log_value = std::log(params.theta) -
                  1.5 * std::log(static_cast<double>(N)) - params.xi * N;
  out.value = std::exp(out.log_value);
  return out;
}

namespace {

std::complex<double> pow_int(std::complex<double> base, int e) {
  std::complex<double> out = 1.0;
  while (e > 0) {
    if (e & 1) out *= base;
    base *= base;
    e >>= 1;
  }
  return out;
}

// One trapezoid/DFT evaluation of the contour integral on a G x G grid.
// Returns log p_{n,m}; the integrand is normalized by f(alpha,beta)^n so the
// accumulated sum stays O(G^2).
double integral_on_grid(const ProcessSpec& spec, int n, int m, double alpha,
                        double beta, int G) {
  const BivariatePMF& g = spec.offspring;
  const BivariatePMF& g0 = spec.initial;
  const int kmax = std::max(g.kmax(), g0.kmax());
  const double ea = std::exp(alpha);
  const double eb = std::exp(beta);
  const double log_f0 = std::log(mgf_real(g, alpha, beta));

  // Per-angle tables in the z direction: B[jv][k] collects the offspring
  // row pgfs, A[jv][k] the y-weighted initial rows.
  const int kb = g.kmax() + 1;
  const int ka = g0.kmax() + 1;
  std::vector<std::complex<double>> B(static_cast<std::size_t>(G) * kb);
  std::vector<std::complex<double>> A(static_cast<std::size_t>(G) * ka);
  std::vector<std::complex<double>> zpow(std::max(g.lmax(), g0.lmax()) + 1);
  std::vector<std::complex<double>> em(G), en(G);
  for (int jv = 0; jv < G; ++jv) {
    const double v = kTwoPi * jv / G;
    const std::complex<double> z = eb * std::polar(1.0, v);
    zpow[0] = 1.0;
    for (std::size_t l = 1; l < zpow.size(); ++l) zpow[l] = zpow[l - 1] * z;
    for (int k = 0; k <= g.kmax(); ++k) {
      std::complex<double> acc = 0.0;
      for (int l = 0; l <= g.lmax(); ++l) acc += g.prob(k, l) * zpow[l];
      B[static_cast<std::size_t>(jv) * kb + k] = acc;
    }
    for (int k = 0; k <= g0.kmax(); ++k) {
      std::complex<double> acc = 0.0;
      for (int l = 0; l <= g0.lmax(); ++l)
        acc += static_cast<double>(k) * g0.prob(k, l) * zpow[l];
      A[static_cast<std::size_t>(jv) * ka + k] = acc;
    }
    em[jv] = std::polar(1.0, -v * (m % G));
    en[jv] = std::polar(1.0, -v * (n % G));
  }

  const double inv_f0 = std::exp(-log_f0);
  std::vector<std::complex<double>> ypow(kmax + 1);
  std::complex<double> sum = 0.0;
  for (int ju = 0; ju < G; ++ju) {
    const double u = kTwoPi * ju / G;
    const std::complex<double> y = ea * std::polar(1.0, u);
    ypow[0] = 1.0;
    for (int k = 1; k <= kmax; ++k) ypow[k] = ypow[k - 1] * y;
    std::complex<double> row = 0.0;
    for (int jv = 0; jv < G; ++jv) {
      const std::complex<double>* brow = &B[static_cast<std::size_t>(jv) * kb];
      const std::complex<double>* arow = &A[static_cast<std::size_t>(jv) * ka];
      std::complex<double> f = 0.0;
      for (int k = 0; k < kb; ++k) f += ypow[k] * brow[k];
      std::complex<double> f0t = 0.0;
      for (int k = 0; k < ka; ++k) f0t += ypow[k] * arow[k];
      row += f0t * pow_int(f * inv_f0, n) * em[jv];
    }
    sum += row * en[ju];
  }
  const double mean = sum.real() / (static_cast<double>(G) * G);
  if (!(mean > 0.0)) return -kInf;
  return -n * alpha - m * beta + n * log_f0 + std::log(mean) -
         std::log(static_cast<double>(n));
}

}  // namespace

ProbValue integral_point_prob_at(const ProcessSpec& spec, int n, int m,
                                 double alpha, double beta,
                                 const SaddleOptions& opts) {
  if (n < 1)
    fail(ErrorCode::InvalidIndex, "integral_point_prob: n must be >= 1");
  if (m < 0)
    fail(ErrorCode::InvalidIndex, "integral_point_prob: m must be >= 0");
  const BivariatePMF& g = spec.offspring;
  const BivariatePMF& g0 = spec.initial;
  // Outside the coefficient support the integral is identically zero.
  if (static_cast<long long>(n) >
          static_cast<long long>(n) * g.kmax() + g0.kmax() ||
      static_cast<long long>(m) >
          static_cast<long long>(n) * g.lmax() + g0.lmax())
    return ProbValue{0.0, -kInf};

  // The integrand is a trigonometric polynomial, so the trapezoid rule is
  // exact once the grid resolves the full bandwidth.
  const long long exact_G =
      2 + std::max(static_cast<long long>(n) * g.kmax() + g0.kmax(),
                   static_cast<long long>(n) * g.lmax() + g0.lmax());

  double prev = kInf;
  for (int G = 64; G <= (1 << 14); G *= 2) {
    const double cur = integral_on_grid(spec, n, m, alpha, beta, G);
    const double pv = prev == kInf ? kInf : std::exp(prev);
    const double cv = cur == -kInf ? 0.0 : std::exp(cur);
    if (prev != kInf &&
        std::abs(cv - pv) <= 1e-8 * std::max(std::abs(cv), 1e-300))
      return ProbValue{cv, cur};
    if (G >= exact_G) return ProbValue{cv, cur};
    prev = cur;
  }
  fail(ErrorCode::NoConvergence,
       "integral_point_prob: grid refinement did not stabilize");
}

ProbValue integral_point_prob(const ProcessSpec& spec, int n, int m,
                              const SaddleOptions& opts) {
  if (n < 1)
    fail(ErrorCode::InvalidIndex, "integral_point_prob: n must be >= 1");
  if (m < 0)
    fail(ErrorCode::InvalidIndex, "integral_point_prob: m must be >= 0");
  // Best-effort saddle inside a wide box; any contour is exact, so a
  // boundary-clamped point is acceptable conditioning for extreme m/n.
  const NewtonResult r = newton_saddle(
      spec.offspring, {1.0, static_cast<double>(m) / n}, opts.integration_box,
      opts.tol, opts.max_iter, /*clamped=*/true);
  return integral_point_prob_at(spec, n, m, r.point.alpha, r.point.beta, opts);
}

ThetaSum theta_sum(double a, double y, int j) {
  if (!(a > 0.0) || a > 1.0)
    fail(ErrorCode::InvalidParameter, "theta_sum: a must lie in (0, 1]");
  if (j < 0 || j > 6)
    fail(ErrorCode::InvalidParameter, "theta_sum: j must lie in [0, 6]");
  const long long n0 = std::llround(y);
  const auto term = [&](long long n) {
    const double d = static_cast<double>(n) - y;
    return std::pow(d, j) * std::exp(-a * d * d);
  };
  // Symmetric pairing keeps odd sums at y = 0 exactly zero.
  double sum = term(n0);
  for (long long k = 1;; ++k) {
    const double tp = term(n0 + k);
    const double tm = term(n0 - k);
    sum += tp + tm;
    if (k > 3 && std::abs(tp) < 1e-300 && std::abs(tm) < 1e-300) break;
  }
  return ThetaSum{a, y, j, sum};
}

}  // namespace sesqui
