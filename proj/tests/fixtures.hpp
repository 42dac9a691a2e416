#pragma once

#include <cmath>
#include <vector>

#include "sesqui/family.hpp"
#include "sesqui/pmf.hpp"

namespace fixtures {

using sesqui::BivariatePMF;
using sesqui::Entry;
using sesqui::FamilySpec;
using sesqui::PolyEntry;
using sesqui::ProcessSpec;

inline BivariatePMF atom(int k, int l) {
  return sesqui::pmf_from_entries({{k, l, 1.0}});
}

/// Offspring atom (0,0), initial atom (1,0): one deterministic particle.
inline ProcessSpec degenerate_spec() {
  return ProcessSpec{atom(0, 0), atom(1, 0)};
}

/// Y ~ Bernoulli(1/2), Z = 0: total size is geometric, q_N = 2^-N.
inline ProcessSpec geometric_spec() {
  return ProcessSpec{
      sesqui::pmf_from_entries({{0, 0, 0.5}, {1, 0, 0.5}}), atom(1, 0)};
}

/// Y ~ Bernoulli(p), Z = 1: every particle carries one barren child, so
/// the point mass sits on the diagonal n = m.
inline ProcessSpec parity_spec(double p = 0.5) {
  return ProcessSpec{
      sesqui::pmf_from_entries({{0, 1, 1.0 - p}, {1, 1, p}}), atom(1, 0)};
}

inline ProcessSpec poisson_spec(double mu = 0.95, double nu = 1.0) {
  return ProcessSpec{sesqui::pmf_from_product_poisson(mu, nu), atom(1, 0)};
}

/// Y ~ Binomial(2, p), Z = 0.
inline BivariatePMF binomial2_pmf(double p) {
  const double q = 1.0 - p;
  return sesqui::pmf_from_entries(
      {{0, 0, q * q}, {1, 0, 2.0 * p * q}, {2, 0, p * p}});
}

inline ProcessSpec binomial2_spec(double p, int initial_y = 1) {
  return ProcessSpec{binomial2_pmf(p), atom(initial_y, 0)};
}

/// Uniform on {0,1}^2; a convenient lattice-rich class member.
inline ProcessSpec uniform01_spec() {
  return ProcessSpec{
      sesqui::pmf_from_entries(
          {{0, 0, 0.25}, {1, 0, 0.25}, {0, 1, 0.25}, {1, 1, 0.25}}),
      atom(1, 0)};
}

/// Y ~ Binomial(2, t/2) independent of Z ~ Bernoulli(1/2); E Y_t = t with
/// criticality at t = 1, and the corner-support condition holds near tc.
inline FamilySpec binomial_family() {
  // (1 - t/2)^2 = 1 - t + t^2/4, 2 (t/2)(1 - t/2) = t - t^2/2, (t/2)^2.
  const std::vector<double> c00 = {0.5, -0.5, 0.125};
  const std::vector<double> c10 = {0.0, 0.5, -0.25};
  const std::vector<double> c20 = {0.0, 0.0, 0.125};
  std::vector<PolyEntry> offspring = {
      {0, 0, c00}, {1, 0, c10}, {2, 0, c20},
      {0, 1, c00}, {1, 1, c10}, {2, 1, c20}};
  std::vector<PolyEntry> initial = {{1, 0, {1.0}}};
  return FamilySpec::polynomial(0.2, 1.8, offspring, initial);
}

/// Product-Poisson(t, 1) offspring, initial (1, 0); tc = 1.
inline FamilySpec poisson_family(double nu = 1.0) {
  std::vector<PolyEntry> initial = {{1, 0, {1.0}}};
  return FamilySpec::poisson_t(0.5, 1.5, nu, initial);
}

/// log f evaluated in extended precision, so that second differences at
/// step 1e-5 keep headroom below the 1e-6 comparison tolerance.
inline long double phi_ld(const BivariatePMF& pmf, long double a,
                          long double b) {
  const long double ey = std::exp(a);
  const long double ez = std::exp(b);
  long double sum = 0.0L;
  long double yk = 1.0L;
  for (int k = 0; k <= pmf.kmax(); ++k) {
    long double row = 0.0L;
    long double zl = 1.0L;
    for (int l = 0; l <= pmf.lmax(); ++l) {
      row += static_cast<long double>(pmf.prob(k, l)) * zl;
      zl *= ez;
    }
    sum += yk * row;
    yk *= ey;
  }
  return std::log(sum);
}

/// Central-difference oracle for D phi (reserved for tests).
inline std::array<double, 2> fd_grad(const BivariatePMF& pmf, double a,
                                     double b, double h = 1e-5) {
  return {
      static_cast<double>((phi_ld(pmf, a + h, b) - phi_ld(pmf, a - h, b)) /
                          (2.0L * h)),
      static_cast<double>((phi_ld(pmf, a, b + h) - phi_ld(pmf, a, b - h)) /
                          (2.0L * h))};
}

inline std::array<double, 4> fd_hess(const BivariatePMF& pmf, double a,
                                     double b, double h = 1e-5) {
  const long double hl = h;
  const long double haa = (phi_ld(pmf, a + h, b) - 2.0L * phi_ld(pmf, a, b) +
                           phi_ld(pmf, a - h, b)) /
                          (hl * hl);
  const long double hbb = (phi_ld(pmf, a, b + h) - 2.0L * phi_ld(pmf, a, b) +
                           phi_ld(pmf, a, b - h)) /
                          (hl * hl);
  const long double hab =
      (phi_ld(pmf, a + h, b + h) - phi_ld(pmf, a + h, b - h) -
       phi_ld(pmf, a - h, b + h) + phi_ld(pmf, a - h, b - h)) /
      (4.0L * hl * hl);
  return {static_cast<double>(haa), static_cast<double>(hab),
          static_cast<double>(hab), static_cast<double>(hbb)};
}

}  // namespace fixtures
