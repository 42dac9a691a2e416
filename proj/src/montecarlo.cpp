#include "sesqui/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <thread>

namespace sesqui {

namespace {

// SplittableRandom-style generator; cheap to construct per sample.
struct SplitMix64 {
  std::uint64_t state;

  std::uint64_t next() {
    std::uint64_t x = (state += 0x9E3779B97F4A7C15ULL);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t sample_seed(std::uint64_t master, long long index) {
  return mix64(master ^ mix64(static_cast<std::uint64_t>(index) +
                              0xD1B54A32D192ED03ULL));
}

// Inverse-CDF sampler over the flattened table.
struct TableSampler {
  std::vector<double> cum;
  std::vector<int> ks, ls;

  explicit TableSampler(const BivariatePMF& pmf) {
    double acc = 0.0;
    for (int k = 0; k <= pmf.kmax(); ++k)
      for (int l = 0; l <= pmf.lmax(); ++l) {
        const double p = pmf.prob(k, l);
        if (p == 0.0) continue;
        acc += p;
        cum.push_back(acc);
        ks.push_back(k);
        ls.push_back(l);
      }
  }

  std::pair<int, int> draw(SplitMix64& rng) const {
    const double u = rng.uniform();
    std::size_t i;
    if (cum.size() <= 32) {
      i = 0;
      while (i + 1 < cum.size() && u >= cum[i]) ++i;
    } else {
      i = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
      if (i >= cum.size()) i = cum.size() - 1;  // tail mass, clamp
    }
    return {ks[i], ls[i]};
  }
};

SimOutcome run_sample(const TableSampler& offspring,
                      const TableSampler& initial, SplitMix64& rng,
                      long long cap) {
  auto [y0, z0] = initial.draw(rng);
  long long created = y0 + z0;
  long long pending = y0;
  while (pending > 0) {
    if (created > cap) return {SimOutcome::Kind::Exceeded, created, cap};
    auto [y, z] = offspring.draw(rng);
    created += y + z;
    pending += y - 1;
  }
  if (created > cap) return {SimOutcome::Kind::Exceeded, created, cap};
  return {SimOutcome::Kind::Finite, created, cap};
}

template <typename PerSample>
void run_parallel(long long samples, int T, PerSample&& body) {
  if (T <= 1) {
    body(0, 0, samples);
    return;
  }
  std::vector<std::future<void>> workers;
  for (int w = 0; w < T; ++w) {
    const long long lo = samples * w / T;
    const long long hi = samples * (w + 1) / T;
    workers.push_back(std::async(std::launch::async,
                                 [&body, w, lo, hi] { body(w, lo, hi); }));
  }
  for (auto& f : workers) f.get();
}

}  // namespace

SimOutcome sample_total(const ProcessSpec& spec, std::uint64_t seed,
                        long long cap) {
  if (cap < 1) fail(ErrorCode::InvalidParameter, "sample_total: cap < 1");
  const TableSampler off(spec.offspring);
  const TableSampler init(spec.initial);
  SplitMix64 rng{mix64(seed)};
  return run_sample(off, init, rng, cap);
}

EstimateRow wilson_row(long long n, long long count, long long samples,
                       double z) {
  EstimateRow row;
  row.n = n;
  row.count = count;
  const double ns = static_cast<double>(samples);
  const double p = static_cast<double>(count) / ns;
  row.p_hat = p;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / ns;
  const double center = (p + z2 / (2.0 * ns)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / ns + z2 / (4.0 * ns * ns)) / denom;
  row.ci_lo = std::max(0.0, center - half);
  row.ci_hi = std::min(1.0, center + half);
  // Wilson intervals contain the point estimate; keep that exact under
  // rounding.
  row.ci_lo = std::min(row.ci_lo, p);
  row.ci_hi = std::max(row.ci_hi, p);
  return row;
}

PointProbEstimate estimate_point_probs(const ProcessSpec& spec,
                                       long long samples, int nmax,
                                       std::uint64_t master_seed,
                                       int threads) {
  if (samples < 1)
    fail(ErrorCode::InvalidParameter, "estimate_point_probs: samples < 1");
  if (nmax < 1)
    fail(ErrorCode::InvalidParameter, "estimate_point_probs: nmax < 1");
  const TableSampler off(spec.offspring);
  const TableSampler init(spec.initial);

  int T = threads > 0 ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (T < 1) T = 1;
  if (static_cast<long long>(T) > samples) T = static_cast<int>(samples);
  std::vector<std::vector<long long>> counts(
      T, std::vector<long long>(nmax + 2, 0));
  run_parallel(samples, T, [&](int chunk, long long lo, long long hi) {
    auto& local = counts[chunk];
    for (long long i = lo; i < hi; ++i) {
      SplitMix64 rng{sample_seed(master_seed, i)};
      const SimOutcome s = run_sample(off, init, rng, nmax);
      if (s.kind == SimOutcome::Kind::Finite)
        ++local[static_cast<std::size_t>(s.total)];
      else
        ++local[static_cast<std::size_t>(nmax) + 1];
    }
  });

  std::vector<long long> merged(nmax + 2, 0);
  for (const auto& local : counts)
    for (std::size_t i = 0; i < merged.size(); ++i) merged[i] += local[i];

  PointProbEstimate out;
  out.samples = samples;
  out.exceeded = merged[static_cast<std::size_t>(nmax) + 1];
  out.rows.reserve(nmax + 1);
  for (int N = 0; N <= nmax; ++N)
    out.rows.push_back(wilson_row(N, merged[N], samples, kWilson95));
  return out;
}

SurvivalEstimate estimate_survival(const ProcessSpec& spec, long long samples,
                                   long long cap, std::uint64_t master_seed,
                                   int threads) {
  if (samples < 1)
    fail(ErrorCode::InvalidParameter, "estimate_survival: samples < 1");
  if (cap < 1000)
    fail(ErrorCode::InvalidParameter, "estimate_survival: cap must be >= 1000");
  const TableSampler off(spec.offspring);
  const TableSampler init(spec.initial);

  int T = threads > 0 ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (T < 1) T = 1;
  if (static_cast<long long>(T) > samples) T = static_cast<int>(samples);
  std::vector<std::array<long long, 2>> counts(T, {0, 0});
  run_parallel(samples, T, [&](int chunk, long long lo, long long hi) {
    auto& local = counts[chunk];
    for (long long i = lo; i < hi; ++i) {
      SplitMix64 rng{sample_seed(master_seed, i)};
      const SimOutcome s = run_sample(off, init, rng, 4 * cap);
      const long long total = s.total;
      if (s.kind == SimOutcome::Kind::Exceeded) {
        ++local[0];
        ++local[1];
      } else if (total > cap) {
        ++local[0];
      }
    }
  });
  long long exceed_cap = 0, exceed_cap4 = 0;
  for (const auto& local : counts) {
    exceed_cap += local[0];
    exceed_cap4 += local[1];
  }
  SurvivalEstimate out;
  out.samples = samples;
  out.at_cap = wilson_row(cap, exceed_cap, samples, kWilson95);
  out.at_cap4 = wilson_row(4 * cap, exceed_cap4, samples, kWilson95);
  return out;
}

}  // namespace sesqui
