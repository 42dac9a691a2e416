#include <cmath>
#include <complex>

#include "doctest.h"
#include "fixtures.hpp"
#include "sesqui/pmf.hpp"

using namespace sesqui;
using doctest::Approx;

namespace {
constexpr double kE2 = 0.1353352832366127;  // e^-2
}

TEST_CASE("pmf_from_entries basic construction") {
  const BivariatePMF single = pmf_from_entries({{0, 0, 1.0}});
  CHECK(single.kmax() == 0);
  CHECK(single.lmax() == 0);
  CHECK(single.prob(0, 0) == 1.0);
  CHECK(single.tail_mass_bound() == 0.0);

  const BivariatePMF two = pmf_from_entries({{0, 0, 0.5}, {1, 1, 0.5}});
  CHECK(two.prob(1, 1) == 0.5);
  CHECK(two.total_mass() == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("pmf_from_entries rejects bad input") {
  CHECK_THROWS_AS(pmf_from_entries({{0, 0, 0.5}, {1, 1, 0.6}}), Error);
  try {
    pmf_from_entries({{0, 0, 0.5}, {1, 1, 0.6}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MassNotOne);
  }
  try {
    pmf_from_entries({{0, 0, 0.5}, {0, 0, 0.5}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateIndex);
  }
  try {
    pmf_from_entries({{0, 0, 1.5}, {1, 0, -0.5}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeProbability);
  }
  // Normalization accepts off-one mass.
  const BivariatePMF norm =
      pmf_from_entries({{0, 0, 0.5}, {1, 1, 0.6}}, /*normalize=*/true);
  CHECK(norm.total_mass() == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("pmf_from_product_poisson") {
  const BivariatePMF degenerate = pmf_from_product_poisson(0.0, 0.0, 1e-15);
  CHECK(degenerate.kmax() == 0);
  CHECK(degenerate.lmax() == 0);
  CHECK(degenerate.prob(0, 0) == Approx(1.0).epsilon(1e-14));

  const BivariatePMF pp = pmf_from_product_poisson(1.0, 1.0, 1e-15);
  CHECK(pp.prob(0, 0) == Approx(kE2).epsilon(1e-13));
  CHECK(pp.tail_mass_bound() <= 1e-15);

  const BivariatePMF sub = pmf_from_product_poisson(0.95, 1.0, 1e-15);
  CHECK(moments(sub).mean_y == Approx(0.95).epsilon(1e-12));

  CHECK_THROWS_AS(pmf_from_product_poisson(1.0, 1.0, 1e-3), Error);
  CHECK_THROWS_AS(pmf_from_product_poisson(-1.0, 1.0, 1e-15), Error);
}

TEST_CASE("moments by direct summation") {
  const MomentSummary zero = moments(fixtures::atom(0, 0));
  CHECK(zero.mean_y == 0.0);
  CHECK(zero.mean_z == 0.0);
  CHECK(zero.fact2_y == 0.0);

  const MomentSummary half =
      moments(pmf_from_entries({{0, 0, 0.5}, {1, 1, 0.5}}));
  CHECK(half.mean_y == Approx(0.5).epsilon(1e-15));
  CHECK(half.mean_z == Approx(0.5).epsilon(1e-15));
  CHECK(half.fact2_y == 0.0);

  const MomentSummary binom = moments(fixtures::binomial2_pmf(0.75));
  CHECK(binom.mean_y == Approx(1.5).epsilon(1e-14));
  CHECK(binom.fact2_y == Approx(1.125).epsilon(1e-14));
}

TEST_CASE("pgf evaluation") {
  const BivariatePMF two = pmf_from_entries({{0, 0, 0.5}, {1, 1, 0.5}});
  CHECK(pgf(two, 2.0, 1.0).real() == Approx(1.5).epsilon(1e-15));
  const std::complex<double> at_i = pgf(two, {0.0, 1.0}, 1.0);
  CHECK(at_i.real() == Approx(0.5).epsilon(1e-15));
  CHECK(at_i.imag() == Approx(0.5).epsilon(1e-15));

  // pgf(1,1) = 1 up to the tail bound, for every fixture.
  for (const auto& pmf :
       {fixtures::atom(0, 0), fixtures::binomial2_pmf(0.3),
        pmf_from_product_poisson(0.95, 1.0), pmf_from_product_poisson(2.0, 0.5)}) {
    CHECK(std::abs(pgf(pmf, 1.0, 1.0) - 1.0) <=
          pmf.tail_mass_bound() + 1e-12);
  }
}

TEST_CASE("mgf evaluation") {
  const BivariatePMF two = pmf_from_entries({{0, 0, 0.5}, {1, 1, 0.5}});
  CHECK(mgf(two, 0.0, 0.0).real() == Approx(1.0).epsilon(1e-15));
  CHECK(mgf(two, std::log(2.0), 0.0).real() == Approx(1.5).epsilon(1e-14));

  // Product Poisson closed form exp(mu (e^a - 1) + nu (e^b - 1)).
  const BivariatePMF pp = pmf_from_product_poisson(0.7, 1.3);
  for (double a : {-0.3, 0.0, 0.25})
    for (double b : {-0.2, 0.1}) {
      const double expect =
          std::exp(0.7 * (std::exp(a) - 1.0) + 1.3 * (std::exp(b) - 1.0));
      CHECK(mgf_real(pp, a, b) == Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("log_mgf_derivs matches closed forms and finite differences") {
  const BivariatePMF pp = pmf_from_product_poisson(0.8, 1.1);
  const MomentSummary mom = moments(pp);

  const LogMgfDerivs at0 = log_mgf_derivs(pp, 0.0, 0.0);
  CHECK(at0.grad[0] == Approx(mom.mean_y).epsilon(1e-13));
  CHECK(at0.grad[1] == Approx(mom.mean_z).epsilon(1e-13));

  for (double a : {-0.3, 0.15})
    for (double b : {-0.25, 0.2}) {
      const LogMgfDerivs d = log_mgf_derivs(pp, a, b);
      CHECK(d.grad[0] == Approx(0.8 * std::exp(a)).epsilon(1e-11));
      CHECK(d.grad[1] == Approx(1.1 * std::exp(b)).epsilon(1e-11));
      CHECK(d.hess[1] == d.hess[2]);

      const auto fg = fixtures::fd_grad(pp, a, b);
      const auto fh = fixtures::fd_hess(pp, a, b);
      CHECK(d.grad[0] == Approx(fg[0]).epsilon(1e-6));
      CHECK(d.grad[1] == Approx(fg[1]).epsilon(1e-6));
      for (int i = 0; i < 4; ++i)
        CHECK(d.hess[i] == Approx(fh[i]).epsilon(1e-6));
    }

  // Lattice-rich tables as well, not just the Poisson closed form.
  const BivariatePMF uni = fixtures::uniform01_spec().offspring;
  const LogMgfDerivs d = log_mgf_derivs(uni, 0.2, -0.1);
  const auto fh = fixtures::fd_hess(uni, 0.2, -0.1);
  for (int i = 0; i < 4; ++i) CHECK(d.hess[i] == Approx(fh[i]).epsilon(1e-6));
}

TEST_CASE("tilde_f0") {
  const BivariatePMF one = fixtures::atom(1, 0);
  CHECK(tilde_f0(one, 0.0, 0.0) == Approx(1.0).epsilon(1e-15));
  CHECK(tilde_f0(one, 0.3, -0.7) == Approx(std::exp(0.3)).epsilon(1e-14));

  const BivariatePMF none = fixtures::atom(0, 3);
  CHECK(tilde_f0(none, 0.4, 0.2) == 0.0);

  const BivariatePMF mixed = pmf_from_entries({{0, 0, 0.25}, {2, 1, 0.75}});
  CHECK(tilde_f0(mixed, 0.0, 0.0) ==
        Approx(moments(mixed).mean_y).epsilon(1e-14));
}

TEST_CASE("check_k0") {
  const ClassParams loose{2.0, 3.0, 0, 0, 0.5};
  const ClassReport pass = check_k0(fixtures::atom(1, 0), loose);
  CHECK(pass.passed);
  CHECK(pass.moment_r == Approx(2.0).epsilon(1e-14));
  CHECK(pass.mean_y == Approx(1.0).epsilon(1e-15));

  const ClassParams tight{2.0, 1.5, 0, 0, 0.5};
  CHECK_FALSE(check_k0(fixtures::atom(1, 0), tight).passed);

  const ClassParams any{2.0, 100.0, 0, 0, 0.1};
  CHECK_FALSE(check_k0(fixtures::atom(0, 0), any).passed);  // E Y = 0
}

TEST_CASE("check_k1") {
  const ClassParams p{2.0, 10.0, 0, 0, 0.2};
  CHECK(check_k1(fixtures::uniform01_spec().offspring, p).passed);

  const ClassParams small{2.0, 10.0, 0, 0, 0.01};
  CHECK_FALSE(check_k1(fixtures::geometric_spec().offspring, small).passed);

  const ClassParams pois{2.0, 10.0, 0, 0, 0.1};
  const ClassReport rep =
      check_k1(pmf_from_product_poisson(1.0, 1.0), pois);
  CHECK(rep.passed);
  CHECK(rep.corner_probs[0] == Approx(kE2).epsilon(1e-12));
}

TEST_CASE("torus modulus bound |f(a+iu, b+iv)| <= f(a, b)") {
  // Weak bound for class members; strict off the lattice origin when the
  // corner-support condition holds.
  const ClassParams cp{};
  const double box = 0.5 * std::log(cp.R);
  for (const auto& pmf : {pmf_from_product_poisson(0.95, 1.0),
                          fixtures::uniform01_spec().offspring}) {
    REQUIRE(check_k1(pmf, ClassParams{2.0, 10.0, 0, 0, 0.01}).passed);
    for (double a : {-box, 0.0, box})
      for (double b : {-box, 0.0, box}) {
        const double f_real = mgf_real(pmf, a, b);
        const int G = 32;
        for (int iu = 0; iu < G; ++iu)
          for (int iv = 0; iv < G; ++iv) {
            const double u = -M_PI + 2.0 * M_PI * iu / G;
            const double v = -M_PI + 2.0 * M_PI * iv / G;
            const double mod = std::abs(mgf(pmf, {a, u}, {b, v}));
            CHECK(mod <= f_real * (1.0 + 1e-12));
            if (u != 0.0 || v != 0.0) CHECK(mod < f_real * (1.0 - 1e-9));
          }
      }
  }
}

TEST_CASE("hessian positive definite in the box for class members") {
  const double box = 0.5 * std::log(2.0);
  for (const auto& pmf : {pmf_from_product_poisson(0.95, 1.0),
                          pmf_from_product_poisson(1.0, 1.0),
                          fixtures::uniform01_spec().offspring}) {
    // Golden-ratio lattice over the box.
    for (int i = 0; i < 100; ++i) {
      const double a = box * (2.0 * std::fmod(0.6180339887 * i, 1.0) - 1.0);
      const double b = box * (2.0 * std::fmod(0.7548776662 * i, 1.0) - 1.0);
      const LogMgfDerivs d = log_mgf_derivs(pmf, a, b);
      const double tr = d.hess[0] + d.hess[3];
      const double det = d.det_hess();
      CHECK(det > 0.0);
      CHECK(tr > 0.0);
      const double min_eig = 0.5 * (tr - std::sqrt(tr * tr - 4.0 * det));
      CHECK(min_eig > 0.0);
    }
  }
}
