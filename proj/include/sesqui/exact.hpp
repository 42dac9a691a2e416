#pragma once

#include <vector>

#include "sesqui/pmf.hpp"

namespace sesqui {

/// Truncated bivariate coefficient table c[n][m] (n + m <= max_degree) with
/// a shared scale: the true coefficients are raw(n, m) * exp(log_scale).
/// Rescaling uses exact powers of two, so it never perturbs the mantissas.
class ScaledCoeffMatrix {
 public:
  explicit ScaledCoeffMatrix(int max_degree);

  int max_degree() const { return deg_; }
  double log_scale() const { return log_scale_; }

  double raw(int n, int m) const { return c_[index(n, m)]; }
  void set_raw(int n, int m, double v) { c_[index(n, m)] = v; }

  /// log of the true coefficient; -inf when the entry is zero.
  double log_coeff(int n, int m) const;
  /// true coefficient in linear scale; may underflow to zero.
  double coeff(int n, int m) const;

  /// Keeps the maximum raw entry inside [1e-100, 1e100].
  void rescale();

  /// Truncated product with a PMF-polynomial, followed by a rescale.
  void multiply_by_pmf(const BivariatePMF& pmf);

 private:
  std::size_t index(int n, int m) const {
    return static_cast<std::size_t>(n) * (deg_ + 1) + m;
  }

  int deg_;
  double log_scale_ = 0.0;
  std::vector<double> c_;
};

/// p[n][m] = P(|X^L| = n, |X^S| = m) for n + m <= nmax, with log-space copies.
struct PointProbTable {
  int nmax = 0;
  std::vector<double> p;
  std::vector<double> log_p;

  double at(int n, int m) const {
    return p[static_cast<std::size_t>(n) * (nmax + 1) + m];
  }
  double log_at(int n, int m) const {
    return log_p[static_cast<std::size_t>(n) * (nmax + 1) + m];
  }
};

/// q[N] = P(|X| = N) for 0 <= N <= nmax; q[0] = P(Y0 = 0, Z0 = 0) is stored
/// but reports normally start at N = 1.
struct TotalProbTable {
  int nmax = 0;
  std::vector<double> q;
  std::vector<double> log_q;
};

inline constexpr int kDefaultExactCapacity = 2000;

/// (n0/n) P(n0 + sum_{j<=n} Y_j = n, m0 + sum_{j<=n} Z_j = m), evaluated by
/// n-fold convolution of the offspring table.
double otter_dwass_conditional(const BivariatePMF& offspring, int n, int m,
                               int n0, int m0);

PointProbTable point_prob_table(const ProcessSpec& spec, int nmax,
                                int capacity = kDefaultExactCapacity);

TotalProbTable total_prob_from_points(const PointProbTable& table);

TotalProbTable total_prob_table(const ProcessSpec& spec, int nmax,
                                int capacity = kDefaultExactCapacity);

/// Independent total-size oracle: iterates the truncated power-series fixed
/// point G1 = y g(G1, z), composes with the initial pgf and reads
/// anti-diagonal coefficients.  Deliberately shares no code with
/// point_prob_table.
TotalProbTable oracle_total_size(const ProcessSpec& spec, int nmax,
                                 int capacity = kDefaultExactCapacity);

}  // namespace sesqui
