#pragma once

// Significance machinery: standard error of binned statistics, Chebyshev
// confidence, split-sample homogeneity tests, and a drifting-device
// simulation in which per-run and pooled verdicts contradict each other.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "bell_lab/core.hpp"
#include "bell_lab/parallel.hpp"

namespace bell_lab {

/// One statistic per contiguous bin. Bins whose reducer had no data are
/// listed in undefined_bins and excluded from bin_values.
struct BinnedSample {
  std::vector<double> bin_values;
  std::vector<std::size_t> undefined_bins;
  std::size_t dropped_items = 0;

  std::size_t n_bins() const { return bin_values.size(); }
};

struct MeanSem {
  double mean = 0.0;
  double sd = 0.0;
  double sem = 0.0;
  std::size_t n = 0;
};

/// Mean and s / √n with the n - 1 sample standard deviation.
inline MeanSem sem(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("SEM needs at least two values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return MeanSem{mean, sd, sd / std::sqrt(n), values.size()};
}

inline MeanSem sem(const BinnedSample& sample) { return sem(std::span<const double>(sample.bin_values)); }

struct ChebyshevConfidence {
  double k = 0.0;       // |mean - bound| / sem; infinite when certain
  double level = 0.0;   // 1 - 1/k², floored at 0
  bool certain = false; // sem = 0 with mean != bound
};

/// P(|X - μ| >= kσ) <= 1/k² turned into a confidence level for rejecting
/// a null bound.
inline ChebyshevConfidence chebyshev_confidence(double mean, double sem_value, double null_bound) {
  if (!(sem_value >= 0.0)) throw std::invalid_argument("sem must be non-negative");
  const double gap = std::abs(mean - null_bound);
  if (sem_value == 0.0) {
    if (gap == 0.0) return {0.0, 0.0, false};
    return {std::numeric_limits<double>::infinity(), 1.0, true};
  }
  const double k = gap / sem_value;
  const double level = k > 0.0 ? std::max(0.0, 1.0 - 1.0 / (k * k)) : 0.0;
  return {k, level, false};
}

/// Splits items into n_bins contiguous bins of floor(n / n_bins) items each
/// (the remainder is dropped and recorded) and applies the reducer to each
/// bin. The reducer returns std::optional<double>; nullopt or an empty bin
/// marks the bin undefined.
template <class T, class Reducer>
BinnedSample bin_statistic(std::span<const T> items, std::size_t n_bins, Reducer&& reducer) {
  if (n_bins < 2) throw std::invalid_argument("binning needs at least two bins");
  BinnedSample out;
  const std::size_t per_bin = items.size() / n_bins;
  out.dropped_items = items.size() - per_bin * n_bins;
  for (std::size_t k = 0; k < n_bins; ++k) {
    std::optional<double> v;
    if (per_bin > 0) v = reducer(items.subspan(k * per_bin, per_bin));
    if (v) {
      out.bin_values.push_back(*v);
    } else {
      out.undefined_bins.push_back(k);
    }
  }
  return out;
}

/// Time-based binning: n_windows windows split into n_bins bins of
/// floor(n_windows / n_bins) windows; items in trailing windows are dropped.
template <class T, class WindowOf, class Reducer>
BinnedSample bin_statistic_by_window(std::span<const T> items, std::uint64_t n_windows, std::size_t n_bins,
                                     WindowOf&& window_of, Reducer&& reducer) {
  if (n_bins < 2) throw std::invalid_argument("binning needs at least two bins");
  const std::uint64_t width = n_windows / n_bins;
  if (width == 0) throw std::invalid_argument("fewer windows than bins");
  std::vector<std::vector<T>> bins(n_bins);
  BinnedSample out;
  for (const auto& item : items) {
    const std::uint64_t k = static_cast<std::uint64_t>(window_of(item)) / width;
    if (k >= n_bins) {
      ++out.dropped_items;
      continue;
    }
    bins[k].push_back(item);
  }
  for (std::size_t k = 0; k < n_bins; ++k) {
    std::optional<double> v;
    if (!bins[k].empty()) v = reducer(std::span<const T>(bins[k]));
    if (v) {
      out.bin_values.push_back(*v);
    } else {
      out.undefined_bins.push_back(k);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Homogeneity tests
// ---------------------------------------------------------------------------

enum class HomogeneityMethod { chi_square_splits, two_sample_ks, runs_test };

inline std::string_view to_string(HomogeneityMethod m) {
  switch (m) {
    case HomogeneityMethod::chi_square_splits:
      return "chi_square_splits";
    case HomogeneityMethod::two_sample_ks:
      return "two_sample_ks";
    case HomogeneityMethod::runs_test:
      return "runs_test";
  }
  return "unknown";
}

struct HomogeneityResult {
  HomogeneityMethod method = HomogeneityMethod::chi_square_splits;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t dof = 0;
};

/// Pearson chi-square test of homogeneity on an r x K table of counts
/// (rows = sample parts, columns = categories). Empty columns are dropped.
inline HomogeneityResult chi_square_contingency(const std::vector<std::vector<std::uint64_t>>& table) {
  if (table.size() < 2) throw std::invalid_argument("need at least two parts");
  const std::size_t k = table.front().size();
  std::vector<double> row_tot(table.size(), 0.0);
  std::vector<double> col_tot(k, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table[r].size() != k) throw std::invalid_argument("ragged contingency table");
    for (std::size_t c = 0; c < k; ++c) {
      const auto v = static_cast<double>(table[r][c]);
      row_tot[r] += v;
      col_tot[c] += v;
      total += v;
    }
    if (row_tot[r] == 0.0) throw std::invalid_argument("insufficient data: empty part");
  }
  HomogeneityResult res;
  res.method = HomogeneityMethod::chi_square_splits;
  std::size_t used_cols = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (col_tot[c] == 0.0) continue;
    ++used_cols;
    for (std::size_t r = 0; r < table.size(); ++r) {
      const double expected = row_tot[r] * col_tot[c] / total;
      const double d = static_cast<double>(table[r][c]) - expected;
      res.statistic += d * d / expected;
    }
  }
  if (used_cols < 2) {
    res.statistic = 0.0;
    res.p_value = 1.0;
    res.dof = 0;
    return res;
  }
  res.dof = (table.size() - 1) * (used_cols - 1);
  const boost::math::chi_squared dist(static_cast<double>(res.dof));
  res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
  return res;
}

/// Splits a symbol sequence into n_parts contiguous parts and tests equal
/// symbol frequencies across parts.
inline HomogeneityResult chi_square_splits(std::span<const int> symbols, std::size_t n_parts = 2) {
  if (n_parts < 2) throw std::invalid_argument("need at least two parts");
  const std::size_t per_part = symbols.size() / n_parts;
  if (per_part < 2) throw std::invalid_argument("insufficient data per part");
  std::map<int, std::size_t> column;
  for (int s : symbols) column.emplace(s, 0);
  std::size_t c = 0;
  for (auto& [sym, idx] : column) idx = c++;
  std::vector<std::vector<std::uint64_t>> table(n_parts, std::vector<std::uint64_t>(column.size(), 0));
  for (std::size_t r = 0; r < n_parts; ++r) {
    for (std::size_t i = r * per_part; i < (r + 1) * per_part; ++i) ++table[r][column.at(symbols[i])];
  }
  return chi_square_contingency(table);
}

/// Real-valued version: values are categorized by the pooled quartiles.
inline HomogeneityResult chi_square_splits(std::span<const double> values, std::size_t n_parts = 2) {
  if (n_parts < 2) throw std::invalid_argument("need at least two parts");
  if (values.size() / n_parts < 2) throw std::invalid_argument("insufficient data per part");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::array<double, 3> cuts{};
  for (std::size_t q = 0; q < 3; ++q) cuts[q] = sorted[(q + 1) * sorted.size() / 4];
  std::vector<int> symbols;
  symbols.reserve(values.size());
  for (double v : values) {
    symbols.push_back(static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin()));
  }
  return chi_square_splits(std::span<const int>(symbols), n_parts);
}

/// Limiting Kolmogorov distribution tail Q(λ) = 2 Σ (-1)^{k-1} exp(-2k²λ²).
inline double kolmogorov_tail(double lambda) {
  if (lambda < 1e-3) return 1.0;
  if (lambda < 0.3) {
    // Small-λ form: 1 - (√(2π)/λ) Σ exp(-(2k-1)²π²/(8λ²)), converges fast there.
    const double pi = std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 5; ++k) s += std::exp(-(2.0 * k - 1.0) * (2.0 * k - 1.0) * pi * pi / (8.0 * lambda * lambda));
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Two-sample Kolmogorov-Smirnov with the asymptotic p-value and Stephens'
/// small-sample correction λ = (√m + 0.12 + 0.11/√m) D, m = n1 n2 / (n1 + n2).
inline HomogeneityResult two_sample_ks(std::span<const double> first, std::span<const double> second) {
  if (first.size() < 2 || second.size() < 2) throw std::invalid_argument("insufficient data per part");
  std::vector<double> x(first.begin(), first.end());
  std::vector<double> y(second.begin(), second.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double m = std::sqrt(nx * ny / (nx + ny));
  HomogeneityResult res;
  res.method = HomogeneityMethod::two_sample_ks;
  res.statistic = d;
  res.p_value = kolmogorov_tail((m + 0.12 + 0.11 / m) * d);
  return res;
}

/// Wald-Wolfowitz runs test on the above/below-median sequence (values
/// equal to the median are skipped), normal approximation, two-sided.
inline HomogeneityResult runs_test(std::span<const double> values) {
  if (values.size() < 4) throw std::invalid_argument("insufficient data for runs test");
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  double median = sorted[sorted.size() / 2];
  if (sorted.size() % 2 == 0) {
    const double lower = *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2));
    median = 0.5 * (median + lower);
  }
  double n_above = 0.0;
  double n_below = 0.0;
  double runs = 0.0;
  int prev = 0;
  for (double v : values) {
    if (v == median) continue;
    const int side = v > median ? 1 : -1;
    (side > 0 ? n_above : n_below) += 1.0;
    if (side != prev) runs += 1.0;
    prev = side;
  }
  HomogeneityResult res;
  res.method = HomogeneityMethod::runs_test;
  if (n_above < 1.0 || n_below < 1.0) throw std::invalid_argument("insufficient data for runs test");
  const double n = n_above + n_below;
  const double mu = 2.0 * n_above * n_below / n + 1.0;
  const double var = (mu - 1.0) * (mu - 2.0) / (n - 1.0);
  if (!(var > 0.0)) throw std::invalid_argument("insufficient data for runs test");
  const double z = (runs - mu) / std::sqrt(var);
  res.statistic = z;
  res.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
  return res;
}

/// Dispatch for a real-valued sample: chi-square over n_parts contiguous
/// parts, KS between the two halves, or a runs test on the whole sequence.
inline HomogeneityResult homogeneity_test(std::span<const double> values, HomogeneityMethod method,
                                          std::size_t n_parts = 2) {
  switch (method) {
    case HomogeneityMethod::chi_square_splits:
      return chi_square_splits(values, n_parts);
    case HomogeneityMethod::two_sample_ks: {
      const std::size_t half = values.size() / 2;
      return two_sample_ks(values.first(half), values.subspan(half, half));
    }
    case HomogeneityMethod::runs_test:
      return runs_test(values);
  }
  throw std::invalid_argument("unknown homogeneity method");
}

/// Dispatch for a symbol sequence (KS and runs operate on symbol values).
inline HomogeneityResult homogeneity_test(std::span<const int> symbols, HomogeneityMethod method,
                                          std::size_t n_parts = 2) {
  if (method == HomogeneityMethod::chi_square_splits) return chi_square_splits(symbols, n_parts);
  std::vector<double> v(symbols.begin(), symbols.end());
  return homogeneity_test(std::span<const double>(v), method, n_parts);
}

inline HomogeneityResult homogeneity_test(const BinnedSample& sample, HomogeneityMethod method,
                                          std::size_t n_parts = 2) {
  return homogeneity_test(std::span<const double>(sample.bin_values), method, n_parts);
}

// ---------------------------------------------------------------------------
// Drifting device
// ---------------------------------------------------------------------------

/// Runs [first_run, last_run] (inclusive, zero-based) emit symbols from probabilities.
struct Regime {
  std::size_t first_run = 0;
  std::size_t last_run = 0;
  std::vector<double> probabilities;
};

/// Categorical device whose symbol law changes between runs. Each symbol s
/// carries the per-item value of 1 - B; a run's 1 - B is the frequency-weighted
/// sum of those values.
struct DriftingDeviceSpec {
  std::size_t n_symbols = 6;
  std::vector<double> symbol_values;  // per-item 1 - B, one per symbol
  std::vector<Regime> regimes;        // later regimes override earlier ones on overlap
  std::size_t runs = 100;
  std::size_t run_len = 100000;

  void validate() const {
    if (n_symbols < 2) throw std::invalid_argument("device needs at least two symbols");
    if (symbol_values.size() != n_symbols) throw std::invalid_argument("one value per symbol is required");
    if (runs == 0 || run_len < 2) throw std::invalid_argument("device needs runs >= 1 and run_len >= 2");
    for (const auto& r : regimes) {
      if (r.probabilities.size() != n_symbols) throw std::invalid_argument("regime law has wrong symbol count");
      if (r.first_run > r.last_run) throw std::invalid_argument("regime run range is reversed");
      double total = 0.0;
      for (double p : r.probabilities) {
        if (!(p >= 0.0)) throw std::invalid_argument("regime probabilities must be >= 0");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("regime probabilities must sum to 1");
    }
    for (std::size_t run = 0; run < runs; ++run) (void)regime_for(run);
  }

  const Regime& regime_for(std::size_t run) const {
    const Regime* found = nullptr;
    for (const auto& r : regimes) {
      if (run >= r.first_run && run <= r.last_run) found = &r;
    }
    if (!found) throw std::invalid_argument("regimes do not cover run " + std::to_string(run));
    return *found;
  }

  double regime_mean(const Regime& r) const {
    double m = 0.0;
    for (std::size_t s = 0; s < n_symbols; ++s) m += r.probabilities[s] * symbol_values[s];
    return m;
  }

  /// A baseline law for every run, with drifted runs 25, 50 and 75 (one-based)
  /// pulled strongly negative. The baseline is tilted so the expected pooled
  /// 1 - B is exactly zero.
  static DriftingDeviceSpec default_two_regime() {
    DriftingDeviceSpec spec;
    spec.symbol_values = {2.0, 1.0, 0.5, 0.0, -0.5, -2.0};
    const std::vector<double> drifted = {0.0, 0.0, 0.0, 0.25, 0.0, 0.75};
    const double drifted_mean = -1.5;
    const std::size_t n_drifted = 3;
    const double target = -drifted_mean * static_cast<double>(n_drifted) /
                          static_cast<double>(spec.runs - n_drifted);
    // Uniform law has mean 1/6; mixing in symbol 5 (value -2) with weight t gives
    // (1 - t)/6 - 2t. Solve for the target mean.
    const double t = (1.0 / 6.0 - target) / (1.0 / 6.0 + 2.0);
    std::vector<double> baseline(6, (1.0 - t) / 6.0);
    baseline[5] += t;
    spec.regimes.push_back({0, spec.runs - 1, baseline});
    for (std::size_t run : {24, 49, 74}) spec.regimes.push_back({run, run, drifted});
    return spec;
  }

  /// Every run uses the same law.
  static DriftingDeviceSpec homogeneous(std::vector<double> probabilities, std::size_t runs, std::size_t run_len) {
    DriftingDeviceSpec spec;
    spec.symbol_values = {2.0, 1.0, 0.5, 0.0, -0.5, -2.0};
    spec.runs = runs;
    spec.run_len = run_len;
    spec.regimes.push_back({0, runs - 1, std::move(probabilities)});
    return spec;
  }
};

struct RunVerdict {
  std::size_t run = 0;
  std::vector<std::uint64_t> symbol_counts;
  double mean = 0.0;  // 1 - B
  double sem = 0.0;
  double z = 0.0;     // mean / sem
  bool rejects = false;
};

struct BreakdownReport {
  std::vector<RunVerdict> runs;
  MeanSem pooled;
  double pooled_z = 0.0;
  bool pooled_rejects = false;
  std::size_t runs_rejecting = 0;
  HomogeneityResult homogeneity;
  /// Some run rejects H0: 1 - B >= 0 while the pooled sample does not.
  bool contradiction = false;
};

struct BreakdownThresholds {
  double run_sem = 100.0;    // per-run rejection at z < -run_sem
  double pooled_sem = 2.0;   // pooled rejection at z < -pooled_sem
  std::size_t homogeneity_parts = 2;
};

namespace detail {

inline MeanSem mean_sem_from_counts(std::span<const std::uint64_t> counts, std::span<const double> values) {
  double n = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const auto c = static_cast<double>(counts[k]);
    n += c;
    s1 += c * values[k];
    s2 += c * values[k] * values[k];
  }
  const double mean = s1 / n;
  const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
  const double sd = std::sqrt(var);
  return MeanSem{mean, sd, sd / std::sqrt(n), static_cast<std::size_t>(n)};
}

}  // namespace detail

/// Simulates the device (run r on rng.substream(r)), tests H0: 1 - B >= 0
/// per run and on the pooled sample, and tests the pooled symbols for
/// homogeneity across contiguous parts of whole runs.
inline BreakdownReport breakdown_demo(const DriftingDeviceSpec& spec, const SeededRng& rng,
                                      const BreakdownThresholds& thresholds = {}) {
  spec.validate();
  if (thresholds.homogeneity_parts < 2 || thresholds.homogeneity_parts > spec.runs) {
    throw std::invalid_argument("homogeneity parts must lie in [2, runs]");
  }
  BreakdownReport report;
  report.runs.resize(spec.runs);
  parallel_for(spec.runs, [&](std::size_t r) {
    const Regime& regime = spec.regime_for(r);
    std::vector<double> cdf(spec.n_symbols);
    std::partial_sum(regime.probabilities.begin(), regime.probabilities.end(), cdf.begin());
    SeededRng stream = rng.substream(r);
    RunVerdict& v = report.runs[r];
    v.run = r;
    v.symbol_counts.assign(spec.n_symbols, 0);
    for (std::size_t i = 0; i < spec.run_len; ++i) {
      const double u = stream.uniform();
      std::size_t s = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      if (s >= spec.n_symbols) s = spec.n_symbols - 1;
      ++v.symbol_counts[s];
    }
    const MeanSem ms = detail::mean_sem_from_counts(v.symbol_counts, spec.symbol_values);
    v.mean = ms.mean;
    v.sem = ms.sem;
    v.z = ms.sem > 0.0 ? ms.mean / ms.sem : (ms.mean < 0.0 ? -std::numeric_limits<double>::infinity() : 0.0);
    v.rejects = v.z < -thresholds.run_sem;
  });

  std::vector<std::uint64_t> pooled(spec.n_symbols, 0);
  std::vector<std::vector<std::uint64_t>> parts(thresholds.homogeneity_parts,
                                                std::vector<std::uint64_t>(spec.n_symbols, 0));
  const std::size_t runs_per_part = spec.runs / thresholds.homogeneity_parts;
  for (const auto& v : report.runs) {
    for (std::size_t s = 0; s < spec.n_symbols; ++s) pooled[s] += v.symbol_counts[s];
    const std::size_t part = std::min(v.run / runs_per_part, thresholds.homogeneity_parts - 1);
    for (std::size_t s = 0; s < spec.n_symbols; ++s) parts[part][s] += v.symbol_counts[s];
    report.runs_rejecting += v.rejects ? 1 : 0;
  }
  report.pooled = detail::mean_sem_from_counts(pooled, spec.symbol_values);
  report.pooled_z = report.pooled.sem > 0.0 ? report.pooled.mean / report.pooled.sem : 0.0;
  report.pooled_rejects = report.pooled_z < -thresholds.pooled_sem;
  report.homogeneity = chi_square_contingency(parts);
  report.contradiction = report.runs_rejecting > 0 && !report.pooled_rejects;
  return report;
}

}  // namespace bell_lab
