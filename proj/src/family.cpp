#include "sesqui/family.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <string>
#include <thread>

#include "sesqui/survival.hpp"

namespace sesqui {

namespace {

constexpr int kValidationGrid = 257;
constexpr double kEntryTol = 1e-12;
constexpr double kFamilyMassTol = 1e-10;

double poly_eval(const std::vector<double>& coeffs, double t) {
  double v = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * t + *it;
  return v;
}

BivariatePMF eval_entries(const std::vector<PolyEntry>& entries, double t,
                          const char* what) {
  std::vector<Entry> out;
  out.reserve(entries.size());
  double mass = 0.0;
  for (const PolyEntry& e : entries) {
    double p = poly_eval(e.coeffs, t);
    if (p < -kEntryTol)
      fail(ErrorCode::NegativeEntry,
           std::string(what) + ": entry (" + std::to_string(e.k) + ", " +
               std::to_string(e.l) + ") is " + std::to_string(p) + " at t = " +
               std::to_string(t));
    p = std::max(p, 0.0);
    mass += p;
    out.push_back({e.k, e.l, p});
  }
  if (std::abs(mass - 1.0) > kFamilyMassTol)
    fail(ErrorCode::MassNotOne, std::string(what) + ": total mass " +
                                    std::to_string(mass) + " at t = " +
                                    std::to_string(t));
  return pmf_from_entries(out, /*normalize=*/true);
}

}  // namespace

void FamilySpec::validate() const {
  if (!(t_lo_ < t_hi_))
    fail(ErrorCode::InvalidParameter, "FamilySpec: empty interval");
  if (!(class_R_ > 1.0))
    fail(ErrorCode::InvalidParameter, "FamilySpec: class_R must exceed 1");
  if (initial_.empty())
    fail(ErrorCode::InvalidParameter, "FamilySpec: no initial entries");
  if (kind_ == Kind::Polynomial && offspring_.empty())
    fail(ErrorCode::InvalidParameter, "FamilySpec: no offspring entries");
  if (kind_ == Kind::PoissonT && t_lo_ < 0.0)
    fail(ErrorCode::InvalidParameter,
         "FamilySpec: poisson_t requires a non-negative interval");
  for (int i = 0; i < kValidationGrid; ++i) {
    const double t = t_lo_ + (t_hi_ - t_lo_) * i / (kValidationGrid - 1);
    if (kind_ == Kind::Polynomial)
      eval_entries(offspring_, t, "FamilySpec offspring");
    eval_entries(initial_, t, "FamilySpec initial");
  }
}

FamilySpec FamilySpec::polynomial(double t_lo, double t_hi,
                                  std::vector<PolyEntry> offspring,
                                  std::vector<PolyEntry> initial,
                                  double class_R) {
  FamilySpec f;
  f.kind_ = Kind::Polynomial;
  f.t_lo_ = t_lo;
  f.t_hi_ = t_hi;
  f.offspring_ = std::move(offspring);
  f.initial_ = std::move(initial);
  f.class_R_ = class_R;
  f.validate();
  return f;
}

FamilySpec FamilySpec::poisson_t(double t_lo, double t_hi, double nu,
                                 std::vector<PolyEntry> initial,
                                 double tail_tol, double class_R) {
  FamilySpec f;
  f.kind_ = Kind::PoissonT;
  f.t_lo_ = t_lo;
  f.t_hi_ = t_hi;
  f.nu_ = nu;
  f.tail_tol_ = tail_tol;
  f.initial_ = std::move(initial);
  f.class_R_ = class_R;
  f.validate();
  return f;
}

ProcessSpec family_eval(const FamilySpec& family, double t) {
  if (t < family.t_lo() || t > family.t_hi())
    fail(ErrorCode::OutOfInterval,
         "family_eval: t = " + std::to_string(t) + " outside [" +
             std::to_string(family.t_lo()) + ", " +
             std::to_string(family.t_hi()) + "]");
  BivariatePMF initial =
      eval_entries(family.initial_entries(), t, "family_eval initial");
  if (family.kind() == FamilySpec::Kind::PoissonT)
    return ProcessSpec{
        pmf_from_product_poisson(t, family.nu(), family.tail_tol()),
        std::move(initial)};
  return ProcessSpec{
      eval_entries(family.offspring_entries(), t, "family_eval offspring"),
      std::move(initial)};
}

double find_tc(const FamilySpec& family) {
  const auto mean_minus_one = [&](double t) {
    return moments(family_eval(family, t).offspring).mean_y - 1.0;
  };
  const double lo0 = family.t_lo();
  const double hi0 = family.t_hi();

  const double dh = (hi0 - lo0) * 1e-7;
  const auto slope_at = [&](double t) {
    const double a = std::max(t - dh, lo0);
    const double b = std::min(t + dh, hi0);
    return (mean_minus_one(b) - mean_minus_one(a)) / (b - a);
  };
  const auto finish = [&](double t) {
    if (!(slope_at(t) > 0.0))
      fail(ErrorCode::NonIncreasingAtRoot,
           "find_tc: E Y_t is not increasing at the root");
    return t;
  };

  // Scan for a sign change, then refine with bisection-guarded Newton.
  const int scan = 64;
  double lo = lo0, hi = hi0;
  double flo = mean_minus_one(lo);
  if (std::abs(flo) <= 1e-12) return finish(lo);
  bool found = false;
  for (int i = 1; i <= scan; ++i) {
    const double t = lo0 + (hi0 - lo0) * i / scan;
    const double f = mean_minus_one(t);
    if (std::abs(f) <= 1e-12) return finish(t);
    if (flo * f < 0.0) {
      hi = t;
      found = true;
      break;
    }
    lo = t;
    flo = f;
  }
  if (!found)
    fail(ErrorCode::NoSignChange,
         "find_tc: E Y_t - 1 does not change sign on the interval");

  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = mean_minus_one(t);
    if (std::abs(f) <= 1e-12) return finish(t);
    if (flo * f < 0.0) {
      hi = t;
    } else {
      lo = t;
      flo = f;
    }
    const double df = slope_at(t);
    double next = df != 0.0 ? t - f / df : 0.5 * (lo + hi);
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  if (std::abs(mean_minus_one(t)) > 1e-12)
    fail(ErrorCode::NoConvergence, "find_tc: root refinement stalled");
  return finish(t);
}

namespace {

SweepRow sweep_one(const FamilySpec& family, double t,
                   const SaddleOptions& opts) {
  SweepRow row;
  row.t = t;
  try {
    const ProcessSpec spec = family_eval(family, t);
    row.mean_y = moments(spec.offspring).mean_y;
    try {
      const AsymptoticParams ap = asymptotic_params(spec, opts);
      row.xi = ap.xi;
      row.theta = ap.theta;
      row.xhat = ap.xhat;
    } catch (const Error& e) {
      row.error = std::string("asymptotic:") + to_string(e.code());
    }
    try {
      const SurvivalResult sr = survival(spec);
      row.rho_single = sr.rho_single;
      row.rho_process = sr.rho_process;
    } catch (const Error& e) {
      if (!row.error.empty()) row.error += ";";
      row.error += std::string("survival:") + to_string(e.code());
    }
  } catch (const Error& e) {
    row.error = std::string("eval:") + to_string(e.code());
  }
  return row;
}

}  // namespace

std::vector<SweepRow> sweep(const FamilySpec& family,
                            const std::vector<double>& grid,
                            const SaddleOptions& opts, int threads) {
  std::vector<SweepRow> rows(grid.size());
  int T = threads > 0 ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (T < 1) T = 1;
  if (static_cast<std::size_t>(T) > grid.size())
    T = static_cast<int>(grid.size());
  if (T <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i)
      rows[i] = sweep_one(family, grid[i], opts);
    return rows;
  }
  std::vector<std::future<void>> workers;
  workers.reserve(T);
  for (int w = 0; w < T; ++w)
    workers.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < grid.size(); i += T)
        rows[i] = sweep_one(family, grid[i], opts);
    }));
  for (auto& f : workers) f.get();
  return rows;
}

namespace {

// Least squares for a small column-scaled normal system.
std::vector<double> solve_normal_equations(
    const std::vector<std::vector<double>>& cols,
    const std::vector<double>& rhs) {
  const int n = static_cast<int>(cols.size());
  std::vector<double> scale(n, 1.0);
  for (int j = 0; j < n; ++j) {
    double mx = 0.0;
    for (double v : cols[j]) mx = std::max(mx, std::abs(v));
    scale[j] = mx > 0.0 ? 1.0 / mx : 1.0;
  }
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t r = 0; r < rhs.size(); ++r)
        dot += cols[i][r] * scale[i] * cols[j][r] * scale[j];
      A[i][j] = dot;
    }
    double dot = 0.0;
    for (std::size_t r = 0; r < rhs.size(); ++r)
      dot += cols[i][r] * scale[i] * rhs[r];
    A[i][n] = dot;
  }
  // Gaussian elimination with partial pivoting.
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    if (std::abs(A[c][c]) < 1e-300)
      fail(ErrorCode::NoConvergence,
           "survival_expansion: singular normal equations");
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = A[r][c] / A[c][c];
      for (int k = c; k <= n; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = A[i][n] / A[i][i] * scale[i];
  return x;
}

}  // namespace

SurvivalExpansion survival_expansion(const FamilySpec& family, int order) {
  if (order < 1 || order > 4)
    fail(ErrorCode::InvalidParameter,
         "survival_expansion: order must lie in [1, 4]");
  SurvivalExpansion out;
  out.tc = find_tc(family);

  const double eps_lo = 1e-3, eps_hi = 5e-2;
  const int points = 24;
  std::vector<double> eps, rho;
  for (int i = 0; i < points; ++i) {
    const double e =
        eps_lo * std::pow(eps_hi / eps_lo, static_cast<double>(i) / (points - 1));
    const double t = out.tc + e;
    if (t > family.t_hi()) continue;
    eps.push_back(e);
    rho.push_back(survival(family_eval(family, t)).rho_single);
  }
  if (static_cast<int>(eps.size()) < order + 3)
    fail(ErrorCode::OutOfInterval,
         "survival_expansion: interval too short above tc for the fit grid");

  std::vector<std::vector<double>> cols(order, std::vector<double>(eps.size()));
  for (int j = 0; j < order; ++j)
    for (std::size_t r = 0; r < eps.size(); ++r)
      cols[j][r] = std::pow(eps[r], j + 1);
  out.a = solve_normal_equations(cols, rho);

  for (std::size_t r = 0; r < eps.size(); ++r) {
    double fit = 0.0;
    for (int j = order - 1; j >= 0; --j) fit = (fit + out.a[j]) * eps[r];
    out.max_residual = std::max(out.max_residual, std::abs(fit - rho[r]));
  }
  return out;
}

ProcessSpec mixture(const ProcessSpec& a, const ProcessSpec& b, double u) {
  if (!(u >= 0.0 && u <= 1.0))
    fail(ErrorCode::InvalidParameter, "mixture: u must lie in [0, 1]");
  const auto mix = [u](const BivariatePMF& pa, const BivariatePMF& pb) {
    const int kmax = std::max(pa.kmax(), pb.kmax());
    const int lmax = std::max(pa.lmax(), pb.lmax());
    std::vector<double> table(
        static_cast<std::size_t>(kmax + 1) * (lmax + 1));
    for (int k = 0; k <= kmax; ++k)
      for (int l = 0; l <= lmax; ++l)
        table[static_cast<std::size_t>(k) * (lmax + 1) + l] =
            (1.0 - u) * pa.prob(k, l) + u * pb.prob(k, l);
    const double tail =
        (1.0 - u) * pa.tail_mass_bound() + u * pb.tail_mass_bound();
    return BivariatePMF(kmax, lmax, std::move(table), tail);
  };
  return ProcessSpec{mix(a.offspring, b.offspring), mix(a.initial, b.initial)};
}

namespace {

// Max |difference pgf| over a G x G torus grid at radius r.
double torus_max(const BivariatePMF& pa, const BivariatePMF& pb, double r,
                 int G) {
  const int kmax = std::max(pa.kmax(), pb.kmax());
  const int lmax = std::max(pa.lmax(), pb.lmax());
  std::vector<double> diff(static_cast<std::size_t>(kmax + 1) * (lmax + 1));
  for (int k = 0; k <= kmax; ++k)
    for (int l = 0; l <= lmax; ++l)
      diff[static_cast<std::size_t>(k) * (lmax + 1) + l] =
          pa.prob(k, l) - pb.prob(k, l);

  constexpr double kTwoPi = 6.283185307179586476925286766559;
  std::vector<std::complex<double>> zpow(lmax + 1);
  std::vector<std::complex<double>> row(G);  // row pgfs per z angle
  double best = 0.0;
  std::vector<std::complex<double>> colsum(
      static_cast<std::size_t>(G) * (kmax + 1));
  for (int jv = 0; jv < G; ++jv) {
    const std::complex<double> z = std::polar(r, kTwoPi * jv / G);
    zpow[0] = 1.0;
    for (int l = 1; l <= lmax; ++l) zpow[l] = zpow[l - 1] * z;
    for (int k = 0; k <= kmax; ++k) {
      std::complex<double> acc = 0.0;
      for (int l = 0; l <= lmax; ++l)
        acc += diff[static_cast<std::size_t>(k) * (lmax + 1) + l] * zpow[l];
      colsum[static_cast<std::size_t>(jv) * (kmax + 1) + k] = acc;
    }
  }
  std::vector<std::complex<double>> ypow(kmax + 1);
  for (int ju = 0; ju < G; ++ju) {
    const std::complex<double> y = std::polar(r, kTwoPi * ju / G);
    ypow[0] = 1.0;
    for (int k = 1; k <= kmax; ++k) ypow[k] = ypow[k - 1] * y;
    for (int jv = 0; jv < G; ++jv) {
      std::complex<double> acc = 0.0;
      const std::complex<double>* col =
          &colsum[static_cast<std::size_t>(jv) * (kmax + 1)];
      for (int k = 0; k <= kmax; ++k) acc += ypow[k] * col[k];
      best = std::max(best, std::abs(acc));
    }
  }
  return best;
}

}  // namespace

double eta_distance(const ProcessSpec& a, const ProcessSpec& b, double R,
                    int samples) {
  if (!(R > 1.0))
    fail(ErrorCode::InvalidParameter, "eta_distance: R must exceed 1");
  double eta = 0.0;
  for (double expo : {0.25, 0.5, 0.75, 1.0}) {
    const double r = std::pow(R, expo);
    for (int pair = 0; pair < 2; ++pair) {
      const BivariatePMF& pa = pair == 0 ? a.offspring : a.initial;
      const BivariatePMF& pb = pair == 0 ? b.offspring : b.initial;
      int G = std::max(samples, 16);
      double prev = torus_max(pa, pb, r, G);
      for (int step = 0; step < 8; ++step) {
        G *= 2;
        const double cur = torus_max(pa, pb, r, G);
        if (std::abs(cur - prev) <= 1e-10) {
          prev = cur;
          break;
        }
        prev = cur;
      }
      eta = std::max(eta, prev);
    }
  }
  return eta;
}

PerturbationReport perturbation_check(const FamilySpec& family, double t,
                                      const ProcessSpec& perturbed,
                                      const SaddleOptions& opts) {
  PerturbationReport rep;
  rep.t = t;
  const double tc = find_tc(family);
  const ProcessSpec base = family_eval(family, t);
  rep.eta = eta_distance(base, perturbed, family.class_R());
  rep.xi_base = asymptotic_params(base, opts).xi;
  rep.xi_perturbed = asymptotic_params(perturbed, opts).xi;
  rep.xi_gap = std::abs(rep.xi_perturbed - rep.xi_base);
  rep.rho_base = survival(base).rho_single;
  rep.rho_perturbed = survival(perturbed).rho_single;
  rep.rho_gap = std::abs(rep.rho_perturbed - rep.rho_base);
  rep.bound_xi = rep.eta * std::abs(t - tc) + rep.eta * rep.eta;
  rep.bound_rho = rep.eta;
  return rep;
}

MixturePathDerivs finite_diff_family_derivs(const ProcessSpec& a,
                                            const ProcessSpec& b, double u,
                                            double h,
                                            const SaddleOptions& opts) {
  if (!(h > 0.0) || u - h < 0.0 || u + h > 1.0)
    fail(ErrorCode::InvalidParameter,
         "finite_diff_family_derivs: u +/- h must stay inside [0, 1]");
  const ProcessSpec up = mixture(a, b, u + h);
  const ProcessSpec dn = mixture(a, b, u - h);
  const AsymptoticParams pu = asymptotic_params(up, opts);
  const AsymptoticParams pd = asymptotic_params(dn, opts);
  const RhoHatResult ru = solve_rho_hat(up.offspring);
  const RhoHatResult rd = solve_rho_hat(dn.offspring);
  if (!ru.rho_hat || !rd.rho_hat)
    fail(ErrorCode::NoConvergence,
         "finite_diff_family_derivs: rho_hat missing along the path");
  MixturePathDerivs out;
  out.dxi_du = (pu.xi - pd.xi) / (2.0 * h);
  out.dtheta_du = (pu.theta - pd.theta) / (2.0 * h);
  out.drho_du = (*ru.rho_hat - *rd.rho_hat) / (2.0 * h);
  return out;
}

}  // namespace sesqui
