#include "sesqui/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace sesqui {

namespace {
constexpr double kMassTol = 1e-12;
constexpr int kMaxPoissonSupport = 2048;
}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeProbability: return "NegativeProbability";
    case ErrorCode::MassNotOne: return "MassNotOne";
    case ErrorCode::DuplicateIndex: return "DuplicateIndex";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidIndex: return "InvalidIndex";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::LeftDomain: return "LeftDomain";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::NonIncreasingAtRoot: return "NonIncreasingAtRoot";
    case ErrorCode::DegenerateSecondMoment: return "DegenerateSecondMoment";
    case ErrorCode::OutOfInterval: return "OutOfInterval";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::ClassViolation: return "ClassViolation";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

BivariatePMF::BivariatePMF(int kmax, int lmax, std::vector<double> probs,
                           double tail_mass_bound)
    : kmax_(kmax), lmax_(lmax), tail_(tail_mass_bound), p_(std::move(probs)) {
  if (kmax_ < 0 || lmax_ < 0)
    fail(ErrorCode::InvalidParameter, "BivariatePMF: negative support bound");
  if (tail_ < 0.0 || tail_ >= 1.0)
    fail(ErrorCode::InvalidParameter, "BivariatePMF: bad tail_mass_bound");
  const std::size_t want =
      static_cast<std::size_t>(kmax_ + 1) * static_cast<std::size_t>(lmax_ + 1);
  if (p_.size() != want)
    fail(ErrorCode::InvalidParameter, "BivariatePMF: table size mismatch");
  double mass = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0))
      fail(ErrorCode::NegativeProbability, "BivariatePMF: negative entry");
    mass += v;
  }
  if (mass < 1.0 - tail_ - kMassTol || mass > 1.0 + kMassTol)
    fail(ErrorCode::MassNotOne,
         "BivariatePMF: total mass " + std::to_string(mass) +
             " incompatible with tail bound " + std::to_string(tail_));
}

double BivariatePMF::total_mass() const {
  double mass = 0.0;
  for (double v : p_) mass += v;
  return mass;
}

std::vector<double> BivariatePMF::marginal_y() const {
  std::vector<double> out(kmax_ + 1, 0.0);
  for (int k = 0; k <= kmax_; ++k)
    for (int l = 0; l <= lmax_; ++l) out[k] += prob(k, l);
  return out;
}

BivariatePMF pmf_from_entries(const std::vector<Entry>& entries,
                              bool normalize) {
  if (entries.empty())
    fail(ErrorCode::InvalidParameter, "pmf_from_entries: empty entry list");
  int kmax = 0, lmax = 0;
  std::set<std::pair<int, int>> seen;
  double mass = 0.0;
  for (const Entry& e : entries) {
    if (e.k < 0 || e.l < 0)
      fail(ErrorCode::InvalidIndex, "pmf_from_entries: negative index");
    if (!(e.prob >= 0.0))
      fail(ErrorCode::NegativeProbability,
           "pmf_from_entries: negative probability");
    if (!seen.insert({e.k, e.l}).second)
      fail(ErrorCode::DuplicateIndex, "pmf_from_entries: duplicate (k, l)");
    kmax = std::max(kmax, e.k);
    lmax = std::max(lmax, e.l);
    mass += e.prob;
  }
  if (!normalize && std::abs(mass - 1.0) > kMassTol)
    fail(ErrorCode::MassNotOne,
         "pmf_from_entries: total mass " + std::to_string(mass));
  if (normalize && mass <= 0.0)
    fail(ErrorCode::InvalidParameter, "pmf_from_entries: zero total mass");
  std::vector<double> table(
      static_cast<std::size_t>(kmax + 1) * (lmax + 1), 0.0);
  const double scale = normalize ? 1.0 / mass : 1.0;
  for (const Entry& e : entries)
    table[static_cast<std::size_t>(e.k) * (lmax + 1) + e.l] = e.prob * scale;
  return BivariatePMF(kmax, lmax, std::move(table), 0.0);
}

namespace {

// Minimal truncation point with P(X > kmax) <= tol for Poisson(mu).
std::vector<double> poisson_weights(double mu, double tol) {
  std::vector<double> w;
  double term = std::exp(-mu);
  double cum = term;
  w.push_back(term);
  int k = 0;
  while (1.0 - cum > tol && k < kMaxPoissonSupport) {
    ++k;
    term *= mu / k;
    cum += term;
    w.push_back(term);
  }
  if (1.0 - cum > tol)
    fail(ErrorCode::CapacityExceeded,
         "pmf_from_product_poisson: support exceeds capacity");
  return w;
}

}  // namespace

BivariatePMF pmf_from_product_poisson(double mu, double nu, double tail_tol) {
  if (!(mu >= 0.0) || !(nu >= 0.0))
    fail(ErrorCode::InvalidParameter,
         "pmf_from_product_poisson: negative rate");
  if (!(tail_tol > 0.0) || tail_tol > 1e-6)
    fail(ErrorCode::InvalidParameter,
         "pmf_from_product_poisson: tail_tol outside (0, 1e-6]");
  const std::vector<double> wy = poisson_weights(mu, tail_tol / 2);
  const std::vector<double> wz = poisson_weights(nu, tail_tol / 2);
  const int kmax = static_cast<int>(wy.size()) - 1;
  const int lmax = static_cast<int>(wz.size()) - 1;
  std::vector<double> table(
      static_cast<std::size_t>(kmax + 1) * (lmax + 1));
  double mass = 0.0;
  for (int k = 0; k <= kmax; ++k)
    for (int l = 0; l <= lmax; ++l) {
      const double v = wy[k] * wz[l];
      table[static_cast<std::size_t>(k) * (lmax + 1) + l] = v;
      mass += v;
    }
  const double tail = std::max(0.0, 1.0 - mass);
  return BivariatePMF(kmax, lmax, std::move(table), tail);
}

MomentSummary moments(const BivariatePMF& pmf) {
  MomentSummary out;
  for (int k = 0; k <= pmf.kmax(); ++k)
    for (int l = 0; l <= pmf.lmax(); ++l) {
      const double p = pmf.prob(k, l);
      if (p == 0.0) continue;
      out.mean_y += k * p;
      out.mean_z += l * p;
      out.fact2_y += static_cast<double>(k) * (k - 1) * p;
    }
  return out;
}

std::complex<double> pgf(const BivariatePMF& pmf, std::complex<double> y,
                         std::complex<double> z) {
  std::complex<double> sum = 0.0;
  std::complex<double> yk = 1.0;
  for (int k = 0; k <= pmf.kmax(); ++k) {
    std::complex<double> row = 0.0;
    std::complex<double> zl = 1.0;
    for (int l = 0; l <= pmf.lmax(); ++l) {
      row += pmf.prob(k, l) * zl;
      zl *= z;
    }
    sum += yk * row;
    yk *= y;
  }
  return sum;
}

double pgf_real(const BivariatePMF& pmf, double y, double z) {
  double sum = 0.0;
  double yk = 1.0;
  for (int k = 0; k <= pmf.kmax(); ++k) {
    double row = 0.0;
    double zl = 1.0;
    for (int l = 0; l <= pmf.lmax(); ++l) {
      row += pmf.prob(k, l) * zl;
      zl *= z;
    }
    sum += yk * row;
    yk *= y;
  }
  return sum;
}

std::complex<double> mgf(const BivariatePMF& pmf, std::complex<double> y,
                         std::complex<double> z) {
  return pgf(pmf, std::exp(y), std::exp(z));
}

double mgf_real(const BivariatePMF& pmf, double alpha, double beta) {
  return pgf_real(pmf, std::exp(alpha), std::exp(beta));
}

LogMgfDerivs log_mgf_derivs(const BivariatePMF& pmf, double alpha,
                            double beta) {
  const double ey = std::exp(alpha);
  const double ez = std::exp(beta);
  double f = 0.0, fy = 0.0, fz = 0.0, fyy = 0.0, fyz = 0.0, fzz = 0.0;
  double yk = 1.0;
  for (int k = 0; k <= pmf.kmax(); ++k) {
    double r0 = 0.0, r1 = 0.0, r2 = 0.0;
    double zl = 1.0;
    for (int l = 0; l <= pmf.lmax(); ++l) {
      const double w = pmf.prob(k, l) * zl;
      r0 += w;
      r1 += l * w;
      r2 += static_cast<double>(l) * l * w;
      zl *= ez;
    }
    f += yk * r0;
    fy += k * yk * r0;
    fyy += static_cast<double>(k) * k * yk * r0;
    fz += yk * r1;
    fyz += k * yk * r1;
    fzz += yk * r2;
    yk *= ey;
  }
  LogMgfDerivs out;
  out.phi = std::log(f);
  const double gy = fy / f;
  const double gz = fz / f;
  out.grad = {gy, gz};
  out.hess = {fyy / f - gy * gy, fyz / f - gy * gz, fyz / f - gy * gz,
              fzz / f - gz * gz};
  return out;
}

double tilde_f0(const BivariatePMF& initial, double alpha, double beta) {
  const double ey = std::exp(alpha);
  const double ez = std::exp(beta);
  double sum = 0.0;
  double yk = 1.0;
  for (int k = 0; k <= initial.kmax(); ++k) {
    double row = 0.0;
    double zl = 1.0;
    for (int l = 0; l <= initial.lmax(); ++l) {
      row += initial.prob(k, l) * zl;
      zl *= ez;
    }
    sum += k * yk * row;
    yk *= ey;
  }
  return sum;
}

ClassReport check_k0(const BivariatePMF& pmf, const ClassParams& params) {
  if (!(params.R > 1.0) || !(params.M >= 1.0) || !(params.delta > 0.0))
    fail(ErrorCode::InvalidParameter, "check_k0: invalid class parameters");
  ClassReport rep;
  double moment = 0.0;
  for (int k = 0; k <= pmf.kmax(); ++k)
    for (int l = 0; l <= pmf.lmax(); ++l)
      moment += pmf.prob(k, l) * std::pow(params.R, k + l);
  // Truncated mass could sit anywhere beyond the table; charge it two
  // lattice shells past the stored corner.
  moment +=
      pmf.tail_mass_bound() * std::pow(params.R, pmf.kmax() + pmf.lmax() + 2);
  rep.moment_r = moment;
  rep.mean_y = moments(pmf).mean_y;
  rep.passed = moment <= params.M && rep.mean_y >= params.delta;
  return rep;
}

ClassReport check_k1(const BivariatePMF& pmf, const ClassParams& params) {
  if (!(params.delta > 0.0) || params.k1 < 0 || params.k2 < 0)
    fail(ErrorCode::InvalidParameter, "check_k1: invalid class parameters");
  ClassReport rep;
  rep.corner_probs = {pmf.prob(params.k1, params.k2),
                      pmf.prob(params.k1 + 1, params.k2),
                      pmf.prob(params.k1, params.k2 + 1)};
  rep.mean_y = moments(pmf).mean_y;
  rep.passed = rep.corner_probs[0] >= params.delta &&
               rep.corner_probs[1] >= params.delta &&
               rep.corner_probs[2] >= params.delta;
  return rep;
}

}  // namespace sesqui
