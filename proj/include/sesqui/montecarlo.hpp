#pragma once

#include <cstdint>
#include <vector>

#include "sesqui/pmf.hpp"

namespace sesqui {

struct SimOutcome {
  enum class Kind { Finite, Exceeded } kind = Kind::Finite;
  long long total = 0;  // total particles when Finite; created count otherwise
  long long cap = 0;
};

struct EstimateRow {
  long long n = 0;      // total size N this row estimates
  long long count = 0;  // observed occurrences
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct PointProbEstimate {
  std::vector<EstimateRow> rows;  // N = 0 .. nmax
  long long exceeded = 0;         // samples with total > nmax
  long long samples = 0;
};

/// Dual-cap survival bracket: the exceed fraction at cap overestimates the
/// exceed fraction at 4 cap, which still overestimates survival; the gap
/// between the two rows measures the finite-tree bias.
struct SurvivalEstimate {
  EstimateRow at_cap;
  EstimateRow at_cap4;
  long long samples = 0;
};

/// One breadth-first exploration of the process, stopping as soon as the
/// number of created particles exceeds cap.
SimOutcome sample_total(const ProcessSpec& spec, std::uint64_t seed,
                        long long cap);

/// Frequency estimates of P(|X| = N) for N <= nmax with Wilson 95%
/// intervals.  Per-sample seeds are derived from master_seed by counter, so
/// the result is identical for every thread count.
PointProbEstimate estimate_point_probs(const ProcessSpec& spec,
                                       long long samples, int nmax,
                                       std::uint64_t master_seed,
                                       int threads = 0);

SurvivalEstimate estimate_survival(const ProcessSpec& spec, long long samples,
                                   long long cap, std::uint64_t master_seed,
                                   int threads = 0);

/// Wilson score interval; z is the two-sided normal quantile.
EstimateRow wilson_row(long long n, long long count, long long samples,
                       double z);

inline constexpr double kWilson95 = 1.9599639845400545;
inline constexpr double kWilson99 = 2.5758293035489004;

}  // namespace sesqui
