#include "sesqui/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sesqui {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530941723212145818;

void check_capacity(int nmax, int capacity, const char* op) {
  if (nmax < 1)
    fail(ErrorCode::InvalidParameter, std::string(op) + ": nmax must be >= 1");
  if (nmax > capacity)
    fail(ErrorCode::CapacityExceeded,
         std::string(op) + ": nmax " + std::to_string(nmax) +
             " exceeds capacity " + std::to_string(capacity));
}
}  // namespace

ScaledCoeffMatrix::ScaledCoeffMatrix(int max_degree) : deg_(max_degree) {
  if (max_degree < 0)
    fail(ErrorCode::InvalidParameter, "ScaledCoeffMatrix: negative degree");
  c_.assign(static_cast<std::size_t>(deg_ + 1) * (deg_ + 1), 0.0);
}

double ScaledCoeffMatrix::log_coeff(int n, int m) const {
  const double v = raw(n, m);
  if (v <= 0.0) return -kInf;
  return std::log(v) + log_scale_;
}

double ScaledCoeffMatrix::coeff(int n, int m) const {
  const double lv = log_coeff(n, m);
  return lv == -kInf ? 0.0 : std::exp(lv);
}

void ScaledCoeffMatrix::rescale() {
  double mx = 0.0;
  for (double v : c_) mx = std::max(mx, v);
  if (mx == 0.0) return;
  if (mx >= 1e-100 && mx <= 1e100) return;
  // Exact power-of-two factor bringing the max into [1, 2).
  const int e = std::ilogb(mx);
  const double factor = std::ldexp(1.0, -e);
  for (double& v : c_) v *= factor;
  log_scale_ += e * kLn2;
}

void ScaledCoeffMatrix::multiply_by_pmf(const BivariatePMF& pmf) {
  const int D = deg_;
  std::vector<double> out(c_.size(), 0.0);
  for (int k = 0; k <= pmf.kmax(); ++k) {
    for (int l = 0; l <= pmf.lmax(); ++l) {
      const double w = pmf.prob(k, l);
      if (w == 0.0) continue;
      for (int n = k; n <= D; ++n) {
        const double* src = &c_[index(n - k, 0)];
        double* dst = &out[index(n, 0)];
        const int mhi = D - n;
        for (int m = l; m <= mhi; ++m) dst[m] += w * src[m - l];
      }
    }
  }
  c_.swap(out);
  rescale();
}

double otter_dwass_conditional(const BivariatePMF& offspring, int n, int m,
                               int n0, int m0) {
  if (n < 1)
    fail(ErrorCode::InvalidIndex, "otter_dwass_conditional: n must be >= 1");
  if (m < 0 || n0 < 0 || m0 < 0)
    fail(ErrorCode::InvalidIndex,
         "otter_dwass_conditional: negative m, n0 or m0");
  if (n0 == 0) return 0.0;
  const int ky = n - n0;
  const int kz = m - m0;
  if (ky < 0 || kz < 0) return 0.0;

  // n-fold convolution of the offspring table, truncated at (ky, kz).
  const auto idx = [kz](int a, int b) {
    return static_cast<std::size_t>(a) * (kz + 1) + b;
  };
  std::vector<double> conv(static_cast<std::size_t>(ky + 1) * (kz + 1), 0.0);
  conv[0] = 1.0;
  std::vector<double> next(conv.size());
  for (int step = 0; step < n; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int k = 0; k <= std::min(offspring.kmax(), ky); ++k)
      for (int l = 0; l <= std::min(offspring.lmax(), kz); ++l) {
        const double w = offspring.prob(k, l);
        if (w == 0.0) continue;
        for (int a = k; a <= ky; ++a)
          for (int b = l; b <= kz; ++b)
            next[idx(a, b)] += w * conv[idx(a - k, b - l)];
      }
    conv.swap(next);
  }
  return static_cast<double>(n0) / n * conv[idx(ky, kz)];
}

PointProbTable point_prob_table(const ProcessSpec& spec, int nmax,
                                int capacity) {
  check_capacity(nmax, capacity, "point_prob_table");
  const BivariatePMF& g = spec.offspring;
  const BivariatePMF& g0 = spec.initial;

  PointProbTable table;
  table.nmax = nmax;
  table.p.assign(static_cast<std::size_t>(nmax + 1) * (nmax + 1), 0.0);
  table.log_p.assign(table.p.size(), -kInf);
  const auto at = [nmax](int n, int m) {
    return static_cast<std::size_t>(n) * (nmax + 1) + m;
  };

  // n = 0 row: no type-L particles at all, so |X^S| = Z0 and Y0 = 0.
  for (int m = 0; m <= nmax; ++m) {
    const double v = g0.prob(0, m);
    table.p[at(0, m)] = v;
    table.log_p[at(0, m)] = v > 0.0 ? std::log(v) : -kInf;
  }

  // Running series g~0 * g^n; row n divided by n gives p[n][m].
  ScaledCoeffMatrix series(nmax);
  for (int k = 0; k <= g0.kmax() && k <= nmax; ++k)
    for (int l = 0; l <= g0.lmax() && k + l <= nmax; ++l)
      series.set_raw(k, l, k * g0.prob(k, l));
  series.rescale();

  for (int n = 1; n <= nmax; ++n) {
    series.multiply_by_pmf(g);
    const double log_n = std::log(static_cast<double>(n));
    for (int m = 0; m <= nmax - n; ++m) {
      const double lv = series.log_coeff(n, m);
      if (lv == -kInf) continue;
      table.log_p[at(n, m)] = lv - log_n;
      table.p[at(n, m)] = std::exp(lv - log_n);
    }
  }
  return table;
}

TotalProbTable total_prob_from_points(const PointProbTable& table) {
  TotalProbTable out;
  out.nmax = table.nmax;
  out.q.assign(table.nmax + 1, 0.0);
  out.log_q.assign(table.nmax + 1, -kInf);
  for (int N = 0; N <= table.nmax; ++N) {
    double sum = 0.0;
    double lmax = -kInf;
    for (int n = 0; n <= N; ++n) lmax = std::max(lmax, table.log_at(n, N - n));
    if (lmax == -kInf) continue;
    for (int n = 0; n <= N; ++n) {
      const double lv = table.log_at(n, N - n);
      if (lv != -kInf) sum += std::exp(lv - lmax);
    }
    out.log_q[N] = lmax + std::log(sum);
    out.q[N] = std::exp(out.log_q[N]);
  }
  return out;
}

TotalProbTable total_prob_table(const ProcessSpec& spec, int nmax,
                                int capacity) {
  return total_prob_from_points(point_prob_table(spec, nmax, capacity));
}

namespace {

// Plain-double triangular power series used only by the oracle path.
struct Poly2 {
  int deg = 0;
  std::vector<double> c;  // (deg+1)^2 row-major; only n + m <= deg used

  explicit Poly2(int d) : deg(d) {
    c.assign(static_cast<std::size_t>(d + 1) * (d + 1), 0.0);
  }
  double get(int n, int m) const {
    return c[static_cast<std::size_t>(n) * (deg + 1) + m];
  }
  void set(int n, int m, double v) {
    c[static_cast<std::size_t>(n) * (deg + 1) + m] = v;
  }
};

// A * B truncated to total degree d.
Poly2 mul_trunc(const Poly2& a, const Poly2& b, int d) {
  Poly2 out(a.deg);
  for (int n1 = 0; n1 <= std::min(a.deg, d); ++n1)
    for (int m1 = 0; n1 + m1 <= std::min(a.deg, d); ++m1) {
      const double v = a.get(n1, m1);
      if (v == 0.0) continue;
      const int rem = d - n1 - m1;
      for (int n2 = 0; n2 <= std::min(b.deg, rem); ++n2) {
        const double* src = &b.c[static_cast<std::size_t>(n2) * (b.deg + 1)];
        double* dst =
            &out.c[static_cast<std::size_t>(n1 + n2) * (out.deg + 1) + m1];
        const int mhi = std::min(b.deg - n2, rem - n2);
        for (int m2 = 0; m2 <= mhi; ++m2) dst[m2] += v * src[m2];
      }
    }
  return out;
}

// g(W(y,z), z) truncated to total degree d, Horner in the first argument.
Poly2 compose_pgf(const BivariatePMF& g, const Poly2& w, int d) {
  Poly2 h(w.deg);
  for (int l = 0; l <= std::min(g.lmax(), d); ++l)
    h.set(0, l, g.prob(g.kmax(), l));
  for (int k = g.kmax() - 1; k >= 0; --k) {
    h = mul_trunc(h, w, d);
    for (int l = 0; l <= std::min(g.lmax(), d); ++l)
      h.set(0, l, h.get(0, l) + g.prob(k, l));
  }
  return h;
}

}  // namespace

TotalProbTable oracle_total_size(const ProcessSpec& spec, int nmax,
                                 int capacity) {
  check_capacity(nmax, capacity, "oracle_total_size");
  const BivariatePMF& g = spec.offspring;
  const BivariatePMF& g0 = spec.initial;

  // G1 = y g(G1, z); each iteration raises the first incorrect total degree
  // by one, so iteration j only needs coefficients up to degree j.
  Poly2 g1(nmax);
  for (int j = 1; j <= nmax; ++j) {
    const int d = std::min(j, nmax);
    Poly2 h = compose_pgf(g, g1, d - 1);
    Poly2 next(nmax);
    for (int n = 1; n <= d; ++n)
      for (int m = 0; n + m <= d; ++m) next.set(n, m, h.get(n - 1, m));
    g1 = std::move(next);
  }

  Poly2 full = compose_pgf(g0, g1, nmax);
  TotalProbTable out;
  out.nmax = nmax;
  out.q.assign(nmax + 1, 0.0);
  out.log_q.assign(nmax + 1, -kInf);
  for (int N = 0; N <= nmax; ++N) {
    double sum = 0.0;
    for (int n = 0; n <= N; ++n) sum += full.get(n, N - n);
    out.q[N] = sum;
    out.log_q[N] = sum > 0.0 ? std::log(sum) : -kInf;
  }
  return out;
}

}  // namespace sesqui
