#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sesqui/pmf.hpp"
#include "sesqui/saddle.hpp"

namespace sesqui {

/// One table entry whose probability is a polynomial in the family
/// parameter t: prob(t) = sum_i coeffs[i] t^i.
struct PolyEntry {
  int k = 0;
  int l = 0;
  std::vector<double> coeffs;
};

/// A t-parameterized curve of process specifications.  Polynomial entries
/// guarantee the analyticity hypothesis by construction; the poisson_t
/// builtin keeps the product-Poisson family exactly representable.
class FamilySpec {
 public:
  enum class Kind { Polynomial, PoissonT };

  static FamilySpec polynomial(double t_lo, double t_hi,
                               std::vector<PolyEntry> offspring,
                               std::vector<PolyEntry> initial,
                               double class_R = 2.0);
  /// Offspring = product Poisson(t, nu); initial from polynomial entries.
  static FamilySpec poisson_t(double t_lo, double t_hi, double nu,
                              std::vector<PolyEntry> initial,
                              double tail_tol = 1e-15, double class_R = 2.0);

  Kind kind() const { return kind_; }
  double t_lo() const { return t_lo_; }
  double t_hi() const { return t_hi_; }
  double class_R() const { return class_R_; }
  double nu() const { return nu_; }
  double tail_tol() const { return tail_tol_; }
  const std::vector<PolyEntry>& offspring_entries() const {
    return offspring_;
  }
  const std::vector<PolyEntry>& initial_entries() const { return initial_; }

 private:
  FamilySpec() = default;
  void validate() const;

  Kind kind_ = Kind::Polynomial;
  double t_lo_ = 0.0, t_hi_ = 0.0;
  double class_R_ = 2.0;
  double nu_ = 1.0;
  double tail_tol_ = 1e-15;
  std::vector<PolyEntry> offspring_, initial_;
};

struct SweepRow {
  double t = 0.0;
  double mean_y = 0.0;
  std::optional<double> xi, theta, xhat, rho_single, rho_process;
  std::string error;  // empty on success, short marker otherwise
};

struct PerturbationReport {
  double t = 0.0;
  double eta = 0.0;
  double xi_base = 0.0, xi_perturbed = 0.0, xi_gap = 0.0;
  double rho_base = 0.0, rho_perturbed = 0.0, rho_gap = 0.0;
  double bound_xi = 0.0;   // eta |t - tc| + eta^2
  double bound_rho = 0.0;  // eta
};

struct SurvivalExpansion {
  std::vector<double> a;  // a[0] = a_1, ...
  double max_residual = 0.0;
  double tc = 0.0;
};

struct MixturePathDerivs {
  double dxi_du = 0.0;
  double dtheta_du = 0.0;
  double drho_du = 0.0;
};

ProcessSpec family_eval(const FamilySpec& family, double t);

/// Root of E Y_t = 1, with a positive-criticality-slope check.
double find_tc(const FamilySpec& family);

std::vector<SweepRow> sweep(const FamilySpec& family,
                            const std::vector<double>& grid,
                            const SaddleOptions& opts = {}, int threads = 0);

/// Least-squares fit of rho(tc + eps) = sum_{i<=order} a_i eps^i (no
/// constant term) on a logarithmic eps grid in [1e-3, 5e-2].
SurvivalExpansion survival_expansion(const FamilySpec& family, int order);

/// Entrywise convex combination of two specifications (tables padded).
ProcessSpec mixture(const ProcessSpec& a, const ProcessSpec& b, double u);

/// Max pgf distance over torus grids |y| = |z| = r for r in
/// {R^(1/4), R^(1/2), R^(3/4), R}, refined until stable to 1e-10.
/// A grid estimate is a lower bound on the polydisk supremum.
double eta_distance(const ProcessSpec& a, const ProcessSpec& b, double R,
                    int samples = 64);

PerturbationReport perturbation_check(const FamilySpec& family, double t,
                                      const ProcessSpec& perturbed,
                                      const SaddleOptions& opts = {});

/// Central differences of xi, theta and rho_hat along the mixture path
/// u -> mixture(a, b, u).
MixturePathDerivs finite_diff_family_derivs(const ProcessSpec& a,
                                            const ProcessSpec& b, double u,
                                            double h,
                                            const SaddleOptions& opts = {});

}  // namespace sesqui
