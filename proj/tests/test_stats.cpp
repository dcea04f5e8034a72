#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "bell_lab/estimators.hpp"
#include "bell_lab/sources.hpp"
#include "bell_lab/stats.hpp"

using namespace bell_lab;

namespace {

std::vector<double> normals(std::size_t n, SeededRng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// SEM and Chebyshev
// ---------------------------------------------------------------------------

TEST(Sem, Examples) {
  const std::vector<double> constant(10, 3.5);
  EXPECT_EQ(sem(constant).sem, 0.0);
  EXPECT_EQ(sem(constant).mean, 3.5);
  const std::vector<double> two = {-1.0, 1.0};
  const MeanSem m = sem(two);
  EXPECT_DOUBLE_EQ(m.mean, 0.0);
  EXPECT_DOUBLE_EQ(m.sd, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(m.sem, 1.0);
  const std::vector<double> one = {1.0};
  EXPECT_THROW(sem(one), std::invalid_argument);
}

TEST(Sem, ScaleEquivariant) {
  SeededRng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    auto v = normals(2 + rng.below(50), rng);
    const MeanSem base = sem(v);
    const double c = 0.1 + 10.0 * rng.uniform();
    for (auto& x : v) x *= c;
    const MeanSem scaled = sem(v);
    EXPECT_NEAR(scaled.mean, c * base.mean, 1e-12 * (1 + std::abs(c * base.mean)));
    EXPECT_NEAR(scaled.sem, c * base.sem, 1e-12 * (1 + c * base.sem));
  }
}

TEST(Sem, ThirtyNormalBinsConcentrateNearOneOverRootThirty) {
  SeededRng rng(2);
  const int reps = 10000;
  double mean_sem = 0.0;
  for (int r = 0; r < reps; ++r) mean_sem += sem(normals(30, rng)).sem;
  mean_sem /= reps;
  // E[s] = c4(30)·σ with c4(30) = 0.99142; the SEM average sits just below 1/√30.
  const double target = 0.991418 / std::sqrt(30.0);
  EXPECT_NEAR(mean_sem, target, 0.002);
  EXPECT_NEAR(mean_sem, 1.0 / std::sqrt(30.0), 0.005);
}

TEST(Chebyshev, Examples) {
  EXPECT_DOUBLE_EQ(chebyshev_confidence(2.0, 1.0, 0.0).level, 0.75);
  EXPECT_GE(chebyshev_confidence(44.73, 1.0, 0.0).level, 0.9995);
  EXPECT_EQ(chebyshev_confidence(1.0, 0.3, 1.0).level, 0.0);
  EXPECT_EQ(chebyshev_confidence(0.5, 1.0, 0.0).level, 0.0);
  const auto certain = chebyshev_confidence(1.0, 0.0, 0.0);
  EXPECT_TRUE(certain.certain);
  EXPECT_EQ(certain.level, 1.0);
  EXPECT_FALSE(chebyshev_confidence(0.0, 0.0, 0.0).certain);
  EXPECT_THROW(chebyshev_confidence(0.0, -1.0, 0.0), std::invalid_argument);
}

TEST(Chebyshev, Monotone) {
  double prev = -1.0;
  for (double gap = 0.0; gap < 50.0; gap += 0.25) {
    const double level = chebyshev_confidence(gap, 1.0, 0.0).level;
    EXPECT_GE(level, prev);
    prev = level;
  }
  prev = 2.0;
  for (double s = 0.01; s < 10.0; s *= 1.3) {
    const double level = chebyshev_confidence(3.0, s, 0.0).level;
    EXPECT_LE(level, prev);
    prev = level;
  }
}

// ---------------------------------------------------------------------------
// Binning
// ---------------------------------------------------------------------------

TEST(Binning, ThreeHundredWindowsInThirtyBins) {
  std::vector<std::uint64_t> windows(300);
  std::iota(windows.begin(), windows.end(), 0);
  const auto count = [](std::span<const std::uint64_t> bin) { return std::optional<double>(double(bin.size())); };
  const BinnedSample s = bin_statistic(std::span<const std::uint64_t>(windows), 30, count);
  ASSERT_EQ(s.n_bins(), 30u);
  for (double v : s.bin_values) EXPECT_EQ(v, 10.0);
  EXPECT_EQ(s.dropped_items, 0u);
  EXPECT_EQ(sem(s).sem, 0.0);

  const BinnedSample by_time = bin_statistic_by_window(
      std::span<const std::uint64_t>(windows), 300, 30, [](std::uint64_t w) { return w; }, count);
  EXPECT_EQ(by_time.bin_values, s.bin_values);
}

TEST(Binning, RemainderAndUndefinedBins) {
  std::vector<int> items(103, 1);
  const BinnedSample s = bin_statistic(std::span<const int>(items), 10,
                                       [](std::span<const int> b) { return std::optional<double>(double(b.size())); });
  EXPECT_EQ(s.dropped_items, 3u);

  std::vector<std::uint64_t> windows = {0, 1, 2, 7, 8, 9};
  const BinnedSample gaps = bin_statistic_by_window(
      std::span<const std::uint64_t>(windows), 10, 5, [](std::uint64_t w) { return w; },
      [](std::span<const std::uint64_t> b) { return std::optional<double>(double(b.size())); });
  EXPECT_EQ(gaps.undefined_bins, (std::vector<std::size_t>{2}));
  EXPECT_EQ(gaps.bin_values.size(), 4u);
  EXPECT_THROW(bin_statistic(std::span<const int>(items), 1, [](std::span<const int>) { return std::optional<double>(); }),
               std::invalid_argument);
}

TEST(Binning, BinnedJMatchesEnumeratedExpectation) {
  // Lossy singlet events at Eberhard-style settings, 30 bins of J.
  const double pi = std::numbers::pi;
  const double eff = 0.9;
  const double angles_a[] = {0.0, pi / 4.0};
  const double angles_b[] = {pi / 8.0, -pi / 8.0};
  const std::size_t per_setting_per_bin = 2000;
  const std::size_t bins = 30;
  SeededRng rng(3);
  std::vector<PairedTrial> trials;
  for (std::size_t k = 0; k < bins; ++k) {
    for (int x = 0; x < 2; ++x) {
      for (int y = 0; y < 2; ++y) {
        for (std::size_t i = 0; i < per_setting_per_bin; ++i) {
          const auto [a, b] = sample_lossy_singlet_pair(Angle(angles_a[x]), Angle(angles_b[y]), eff, rng);
          trials.push_back(PairedTrial{x, y, a, b});
        }
      }
    }
  }
  const BinnedSample s = bin_statistic(std::span<const PairedTrial>(trials), bins, [](std::span<const PairedTrial> b) {
    return std::optional<double>(double(eberhard_j(eberhard_counts(b))));
  });
  const MeanSem m = sem(s);

  // Oracle: expected J from the cell probabilities of the lossy singlet law.
  auto p_cell = [&](int x, int y, int a, int b) {
    const double c = std::cos(angles_a[x] - angles_b[y]);
    auto det = [&](int v) { return v == 0 ? 1.0 - eff : eff; };
    double p = det(a) * det(b);
    if (a != 0 && b != 0) p *= (1.0 - a * b * c) / 4.0;
    else if (a != 0 || b != 0) p *= 0.5;
    return p;
  };
  const double n = double(per_setting_per_bin);
  const double expected_j = n * (p_cell(0, 1, 1, -1) + p_cell(0, 1, 1, 0) + p_cell(1, 0, -1, 1) + p_cell(1, 0, 0, 1) +
                                 p_cell(1, 1, 1, 1) - p_cell(0, 0, 1, 1));
  EXPECT_NEAR(m.mean, expected_j, 3.0 * m.sem);
}

// ---------------------------------------------------------------------------
// Homogeneity
// ---------------------------------------------------------------------------

TEST(Homogeneity, DuplicatedHalvesGiveZeroChiSquare) {
  SeededRng rng(4);
  std::vector<int> half(500);
  for (auto& s : half) s = static_cast<int>(rng.below(5));
  std::vector<int> both = half;
  both.insert(both.end(), half.begin(), half.end());
  const auto r = chi_square_splits(std::span<const int>(both));
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.dof, 4u);
}

TEST(Homogeneity, ChiSquareMatchesHandComputation) {
  // 2x2 table {{10, 20}, {20, 10}}: every expected count is 15.
  const auto r = chi_square_contingency({{10, 20}, {20, 10}});
  EXPECT_NEAR(r.statistic, 4.0 * 25.0 / 15.0, 1e-12);
  EXPECT_EQ(r.dof, 1u);
  // Survival of chi-square(1) at x equals erfc(sqrt(x/2)).
  EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(r.statistic / 2.0)), 1e-12);
  EXPECT_THROW(chi_square_contingency({{1, 2}}), std::invalid_argument);
  EXPECT_THROW(chi_square_contingency({{1, 2}, {0, 0}}), std::invalid_argument);
}

TEST(Homogeneity, KolmogorovTailKnownValues) {
  EXPECT_NEAR(kolmogorov_tail(1.36), 0.0494, 5e-4);
  EXPECT_NEAR(kolmogorov_tail(1.63), 0.0098, 2e-4);
  EXPECT_NEAR(kolmogorov_tail(0.5), 0.9639, 5e-4);
  // The two series agree where they meet.
  EXPECT_NEAR(kolmogorov_tail(0.2999), kolmogorov_tail(0.3001), 1e-4);
  EXPECT_EQ(kolmogorov_tail(0.0), 1.0);
}

TEST(Homogeneity, KsDetectsShift) {
  SeededRng rng(5);
  auto a = normals(2000, rng);
  auto b = normals(2000, rng);
  for (auto& x : b) x += 0.3;
  EXPECT_LT(two_sample_ks(a, b).p_value, 1e-6);
  auto c = normals(2000, rng);
  EXPECT_GT(two_sample_ks(a, c).p_value, 1e-3);
}

TEST(Homogeneity, RunsTestDetectsTrend) {
  std::vector<double> trend(200);
  std::iota(trend.begin(), trend.end(), 0.0);
  const auto r = runs_test(trend);
  EXPECT_EQ(r.method, HomogeneityMethod::runs_test);
  EXPECT_LT(r.p_value, 1e-10);
  std::vector<double> alternating(200);
  for (std::size_t i = 0; i < alternating.size(); ++i) alternating[i] = i % 2 ? 1.0 : -1.0;
  EXPECT_LT(runs_test(alternating).p_value, 1e-10);
  EXPECT_GT(runs_test(alternating).statistic, 0.0);
}

TEST(Homogeneity, NullCalibration) {
  // i.i.d. samples of 10^4: each decile of p-values holds about 10% of reps.
  const int reps = 1000;
  for (HomogeneityMethod method :
       {HomogeneityMethod::chi_square_splits, HomogeneityMethod::two_sample_ks, HomogeneityMethod::runs_test}) {
    SeededRng rng(6 + static_cast<int>(method));
    std::array<int, 10> deciles{};
    for (int r = 0; r < reps; ++r) {
      const auto v = normals(10000, rng);
      const double p = homogeneity_test(std::span<const double>(v), method).p_value;
      ++deciles[std::min<std::size_t>(9, static_cast<std::size_t>(p * 10.0))];
    }
    for (int d : deciles) {
      EXPECT_NEAR(d / double(reps), 0.1, 0.1) << to_string(method);
      EXPECT_NEAR(d / double(reps), 0.1, 4.0 * std::sqrt(0.09 / reps)) << to_string(method);
    }
  }
}

TEST(Homogeneity, DifferentRegimesAreRejected) {
  const DriftingDeviceSpec spec = DriftingDeviceSpec::default_two_regime();
  SeededRng rng(9);
  std::vector<int> symbols;
  const std::size_t half = 50000;
  for (const Regime* r : {&spec.regimes[0], &spec.regimes[1]}) {
    std::vector<double> cdf(r->probabilities.size());
    std::partial_sum(r->probabilities.begin(), r->probabilities.end(), cdf.begin());
    for (std::size_t i = 0; i < half; ++i) {
      symbols.push_back(static_cast<int>(
          std::min<std::size_t>(cdf.size() - 1, std::upper_bound(cdf.begin(), cdf.end(), rng.uniform()) - cdf.begin())));
    }
  }
  EXPECT_LT(homogeneity_test(std::span<const int>(symbols), HomogeneityMethod::chi_square_splits).p_value, 1e-3);
}

TEST(Homogeneity, InsufficientData) {
  const std::vector<double> tiny = {1.0, 2.0, 3.0};
  EXPECT_THROW(homogeneity_test(std::span<const double>(tiny), HomogeneityMethod::two_sample_ks),
               std::invalid_argument);
  EXPECT_THROW(homogeneity_test(std::span<const double>(tiny), HomogeneityMethod::runs_test), std::invalid_argument);
  EXPECT_THROW(homogeneity_test(std::span<const double>(tiny), HomogeneityMethod::chi_square_splits),
               std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Drifting device
// ---------------------------------------------------------------------------

TEST(DriftingDevice, DefaultSpecPoolsToZero) {
  const DriftingDeviceSpec spec = DriftingDeviceSpec::default_two_regime();
  EXPECT_NO_THROW(spec.validate());
  double pooled = 0.0;
  for (std::size_t r = 0; r < spec.runs; ++r) pooled += spec.regime_mean(spec.regime_for(r));
  EXPECT_NEAR(pooled / static_cast<double>(spec.runs), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(spec.regime_mean(spec.regime_for(24)), -1.5);
  EXPECT_GT(spec.regime_mean(spec.regime_for(0)), 0.0);
}

TEST(DriftingDevice, BreakdownOnDefaultSpec) {
  const BreakdownReport report = breakdown_demo(DriftingDeviceSpec::default_two_regime(), SeededRng(10));
  EXPECT_GE(report.runs_rejecting, 3u);
  for (std::size_t r : {24u, 49u, 74u}) {
    EXPECT_TRUE(report.runs[r].rejects);
    EXPECT_LT(report.runs[r].z, -100.0);
  }
  EXPECT_LT(std::abs(report.pooled_z), 2.0);
  EXPECT_FALSE(report.pooled_rejects);
  EXPECT_TRUE(report.contradiction);
  EXPECT_LT(report.homogeneity.p_value, 1e-6);
}

TEST(DriftingDevice, HomogeneousSpecNeverContradicts) {
  const std::vector<double> probs = {0.2, 0.2, 0.2, 0.2, 0.1, 0.1};
  const auto spec = DriftingDeviceSpec::homogeneous(probs, 20, 2000);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const BreakdownReport report = breakdown_demo(spec, SeededRng(seed));
    ASSERT_FALSE(report.contradiction) << seed;
    ASSERT_EQ(report.runs_rejecting, 0u);
    ASSERT_FALSE(report.pooled_rejects);
  }
}

TEST(DriftingDevice, ValidationErrors) {
  auto spec = DriftingDeviceSpec::default_two_regime();
  spec.regimes.erase(spec.regimes.begin());
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  auto bad_sum = DriftingDeviceSpec::homogeneous({0.5, 0.5, 0.5, 0, 0, 0}, 4, 10);
  EXPECT_THROW(bad_sum.validate(), std::invalid_argument);
  EXPECT_THROW(breakdown_demo(DriftingDeviceSpec::homogeneous({1, 0, 0, 0, 0, 0}, 4, 10), SeededRng(1), {100, 2, 5}),
               std::invalid_argument);
}

TEST(DriftingDevice, ReplaysWithSameSeed) {
  const auto spec = DriftingDeviceSpec::homogeneous({0.1, 0.1, 0.2, 0.2, 0.2, 0.2}, 10, 1000);
  const auto a = breakdown_demo(spec, SeededRng(11));
  const auto b = breakdown_demo(spec, SeededRng(11));
  for (std::size_t r = 0; r < a.runs.size(); ++r) EXPECT_EQ(a.runs[r].symbol_counts, b.runs[r].symbol_counts);
  EXPECT_EQ(a.pooled.mean, b.pooled.mean);
}
