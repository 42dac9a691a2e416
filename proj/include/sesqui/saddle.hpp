#pragma once

#include <array>

#include "sesqui/pmf.hpp"

namespace sesqui {

struct SaddlePoint {
  double alpha = 0.0;
  double beta = 0.0;
  double residual = 0.0;  // sup norm of D phi - target
  int iterations = 0;
};

struct AsymptoticParams {
  double x0 = 0.0;           // 1 / (1 + E Z)
  double xhat = 0.0;         // maximizer of Psi
  double xi = 0.0;           // -Psi(xhat), clamped to 0 at criticality
  double theta = 0.0;        // sqrt(2 pi / |Psi''(xhat)|) * Phi(xhat)
  double psi_pp = 0.0;       // Psi''(xhat) < 0
  double phi_at_xhat = 0.0;  // Phi(xhat) > 0
};

struct ThetaSum {
  double a = 0.0;
  double y = 0.0;
  int j = 0;
  double value = 0.0;
};

struct ProbValue {
  double value = 0.0;
  double log_value = 0.0;
};

struct SaddleOptions {
  /// Working box |alpha|, |beta| <= box_radius for saddle solutions.
  /// Defaults to log(R)/2 for the default ClassParams{R = 2}.
  double box_radius = 0.34657359027997264;
  double tol = 1e-10;
  int max_iter = 50;
  /// Half width of the bracketing window around x0 for the Psi' root.
  double xhat_radius = 0.2;
  /// Admissible |E Y - 1| for asymptotic_params.
  double ey_window = 0.25;
  /// Base step for Richardson-extrapolated Psi' and Psi''.
  double fd_step = 1e-4;
  ClassParams class_params{};
  bool enforce_class = true;
  /// Saddle clamp for the contour integral.  Finite tables have entire
  /// moment generating functions, so the integral is valid at any radius;
  /// a wide box is used purely for conditioning.
  double integration_box = 20.0;

  static SaddleOptions for_class(const ClassParams& cp);
};

/// Damped Newton from (0,0) on D phi(alpha, beta) = target, exact Hessian.
SaddlePoint solve_saddle(const BivariatePMF& offspring,
                         std::array<double, 2> target,
                         const SaddleOptions& opts = {});

/// psi(alpha, beta) = phi - alpha D1 phi - beta D2 phi.
double psi_small(const BivariatePMF& offspring, double alpha, double beta);

/// Saddle along the constraint curve: D phi = (1, (1-x)/x).
SaddlePoint h_of_x(const BivariatePMF& offspring, double x,
                   const SaddleOptions& opts = {});

/// Psi(x) = x psi(h(x)).
double capital_psi(const BivariatePMF& offspring, double x,
                   const SaddleOptions& opts = {});

/// Phi(x) = (2 pi)^{-1} x^{-2} tilde_f0(h(x)) Det(D^2 phi(h(x)))^{-1/2}.
double capital_phi(const ProcessSpec& spec, double x,
                   const SaddleOptions& opts = {});

/// Root of Psi' near x0, located by bracketing plus safeguarded Newton.
double find_xhat(const BivariatePMF& offspring, const SaddleOptions& opts = {});

AsymptoticParams asymptotic_params(const ProcessSpec& spec,
                                   const SaddleOptions& opts = {});

/// Leading-order point probability n^{-2} e^{n psi} (2 pi)^{-1} tilde_f0
/// Det(D^2 phi)^{-1/2} at the (1, m/n) saddle.
ProbValue asymp_point_prob(const ProcessSpec& spec, int n, int m,
                           const SaddleOptions& opts = {});

/// theta N^{-3/2} e^{-N xi}.
ProbValue asymp_total_prob(const AsymptoticParams& params, long long N);

/// Exact p_{n,m} by tensor-product trapezoid quadrature of the double
/// contour integral; the grid is doubled until the value is stable.
ProbValue integral_point_prob(const ProcessSpec& spec, int n, int m,
                              const SaddleOptions& opts = {});
/// Same, with the integration contour supplied by the caller.  The value is
/// independent of the chosen (alpha, beta); the saddle only conditions it.
ProbValue integral_point_prob_at(const ProcessSpec& spec, int n, int m,
                                 double alpha, double beta,
                                 const SaddleOptions& opts = {});

/// S_j(a, y) = sum over integer n of (n-y)^j exp(-a (n-y)^2).
ThetaSum theta_sum(double a, double y, int j);

}  // namespace sesqui
