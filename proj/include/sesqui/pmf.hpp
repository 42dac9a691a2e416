#pragma once

#include <array>
#include <complex>
#include <vector>

#include "sesqui/errors.hpp"

namespace sesqui {

/// Dense joint law of a pair (Y, Z) of non-negative integer counts with
/// Y <= kmax, Z <= lmax.  tail_mass_bound is an upper bound on the
/// probability mass lost to truncation (0 for exactly finite support).
class BivariatePMF {
 public:
  BivariatePMF(int kmax, int lmax, std::vector<double> probs,
               double tail_mass_bound);

  int kmax() const { return kmax_; }
  int lmax() const { return lmax_; }
  double tail_mass_bound() const { return tail_; }

  double prob(int k, int l) const {
    if (k < 0 || l < 0 || k > kmax_ || l > lmax_) return 0.0;
    return p_[index(k, l)];
  }
  const std::vector<double>& probs() const { return p_; }
  double total_mass() const;

  /// Marginal law of Y (row sums).
  std::vector<double> marginal_y() const;

 private:
  std::size_t index(int k, int l) const {
    return static_cast<std::size_t>(k) * (lmax_ + 1) + l;
  }

  int kmax_;
  int lmax_;
  double tail_;
  std::vector<double> p_;
};

/// Offspring law of (Y, Z) plus first-generation law of (Y0, Z0); together
/// they determine the branching process completely.
struct ProcessSpec {
  BivariatePMF offspring;
  BivariatePMF initial;
};

struct ClassParams {
  double R = 2.0;
  double M = 10.0;
  int k1 = 0;
  int k2 = 0;
  double delta = 0.01;
};

struct MomentSummary {
  double mean_y = 0.0;   // E Y
  double mean_z = 0.0;   // E Z
  double fact2_y = 0.0;  // E Y(Y-1)
};

struct Entry {
  int k = 0;
  int l = 0;
  double prob = 0.0;
};

/// phi = log f at a real point, with exact gradient and Hessian computed by
/// weighted summation over the table (never by finite differences).
struct LogMgfDerivs {
  double phi = 0.0;
  std::array<double, 2> grad{};
  std::array<double, 4> hess{};  // row-major symmetric 2x2

  double det_hess() const { return hess[0] * hess[3] - hess[1] * hess[2]; }
};

struct ClassReport {
  bool passed = false;
  double moment_r = 0.0;  // computed E R^{Y+Z} with truncation folded in
  double mean_y = 0.0;
  std::array<double, 3> corner_probs{};  // pi(k1,k2), pi(k1+1,k2), pi(k1,k2+1)
};

BivariatePMF pmf_from_entries(const std::vector<Entry>& entries,
                              bool normalize = false);

/// Truncated table for independent Poisson(mu), Poisson(nu) components.
/// Truncation points are minimal with joint tail mass <= tail_tol.
BivariatePMF pmf_from_product_poisson(double mu, double nu,
                                      double tail_tol = 1e-15);

MomentSummary moments(const BivariatePMF& pmf);

std::complex<double> pgf(const BivariatePMF& pmf, std::complex<double> y,
                         std::complex<double> z);
double pgf_real(const BivariatePMF& pmf, double y, double z);

std::complex<double> mgf(const BivariatePMF& pmf, std::complex<double> y,
                         std::complex<double> z);
double mgf_real(const BivariatePMF& pmf, double alpha, double beta);

LogMgfDerivs log_mgf_derivs(const BivariatePMF& pmf, double alpha,
                            double beta);

/// E(Y0 e^{alpha Y0 + beta Z0}), the linear initial-generation weight.
double tilde_f0(const BivariatePMF& initial, double alpha, double beta);

ClassReport check_k0(const BivariatePMF& pmf, const ClassParams& params);
ClassReport check_k1(const BivariatePMF& pmf, const ClassParams& params);

}  // namespace sesqui
