#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <vector>

#include "bell_lab/core.hpp"
#include "bell_lab/parallel.hpp"

using namespace bell_lab;

TEST(Outcome, AcceptsOnlyTernaryValues) {
  EXPECT_EQ(Outcome::from_int(1), Outcome::up());
  EXPECT_EQ(Outcome::from_int(-1), Outcome::down());
  EXPECT_EQ(Outcome::from_int(0), Outcome::none());
  EXPECT_THROW(Outcome::from_int(2), std::invalid_argument);
  EXPECT_THROW(Outcome::from_int(-2), std::invalid_argument);
}

TEST(Outcome, BitRoundTrip) {
  for (int bit : {0, 1}) EXPECT_EQ(Outcome::from_bit(bit).bit(), bit);
  EXPECT_EQ(Outcome::up().flipped(), Outcome::down());
  EXPECT_FALSE(Outcome::none().detected());
  EXPECT_EQ(Outcome::none().flipped(), Outcome::none());
}

TEST(Angle, NormalizesIntoHalfOpenCircle) {
  const double two_pi = 2.0 * std::numbers::pi;
  for (double r : {-7.0, -two_pi, -0.1, 0.0, 1.0, two_pi, 3.0 * two_pi + 0.5, 100.0}) {
    const double x = Angle(r).radians();
    EXPECT_GE(x, 0.0) << r;
    EXPECT_LT(x, two_pi) << r;
    EXPECT_NEAR(std::cos(x), std::cos(r), 1e-12);
    EXPECT_NEAR(std::sin(x), std::sin(r), 1e-12);
  }
  EXPECT_DOUBLE_EQ(Angle(two_pi).radians(), 0.0);
  EXPECT_DOUBLE_EQ(Angle::eighths(3).radians(), 3.0 * std::numbers::pi / 8.0);
}

TEST(PairedTrial, CoincidenceNeedsBothCounts) {
  EXPECT_TRUE((PairedTrial{0, 0, Outcome::up(), Outcome::down()}).coincident());
  EXPECT_FALSE((PairedTrial{0, 0, Outcome::up(), Outcome::none()}).coincident());
  EXPECT_EQ((PairedTrial{0, 0, Outcome::up(), Outcome::down()}).product(), -1);
}

TEST(SeededRng, SameSeedAndStreamReplays) {
  SeededRng a(42, 7);
  SeededRng b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(SeededRng, StreamsAndSeedsDiffer) {
  SeededRng a(42, 0);
  SeededRng b(42, 1);
  SeededRng c(43, 0);
  int same_ab = 0;
  int same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    same_ab += x == b() ? 1 : 0;
    same_ac += x == c() ? 1 : 0;
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(SeededRng, SubstreamIsPureFunctionOfParentIdentity) {
  const SeededRng parent(9, 3);
  SeededRng used = parent;
  for (int i = 0; i < 50; ++i) (void)used();
  SeededRng x = parent.substream(5);
  SeededRng y = used.substream(5);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(x(), y());

  std::set<std::uint64_t> ids;
  for (std::uint64_t k = 0; k < 1000; ++k) ids.insert(parent.substream(k).stream_id());
  EXPECT_EQ(ids.size(), 1000u);
}

TEST(SeededRng, SubstreamsAreUncorrelated) {
  // Pearson correlation of paired uniforms from neighbouring substreams.
  const SeededRng parent(1);
  SeededRng s0 = parent.substream(0);
  SeededRng s1 = parent.substream(1);
  const int n = 100000;
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s0.uniform();
    const double y = s1.uniform();
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double r = cov / std::sqrt((sxx / n - (sx / n) * (sx / n)) * (syy / n - (sy / n) * (sy / n)));
  EXPECT_LT(std::abs(r), 4.0 / std::sqrt(n));
}

TEST(SeededRng, UniformRangeAndMean) {
  SeededRng rng(5);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(SeededRng, BelowIsUnbiasedOverSmallRange) {
  SeededRng rng(11);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[rng.below(6)];
  const double p = 1.0 / 6.0;
  for (int c : counts) EXPECT_NEAR(c / double(n), p, 4.0 * std::sqrt(p * (1 - p) / n));
  EXPECT_THROW(rng.below(0), std::invalid_argument);
  EXPECT_EQ(rng.below(1), 0u);
}

TEST(Tabulate, EmptyInputGivesZeroCounts) {
  const CountTable t = tabulate({});
  EXPECT_EQ(t.total(), 0u);
  EXPECT_EQ(t.count(0, 0, Outcome::up(), Outcome::up()), 0u);
}

TEST(Tabulate, IdenticalTrialsLandInOneCell) {
  const std::vector<PairedTrial> trials(3, PairedTrial{1, 1, Outcome::up(), Outcome::down()});
  const CountTable t = tabulate(trials);
  EXPECT_EQ(t.count(1, 1, Outcome::up(), Outcome::down()), 3u);
  EXPECT_EQ(t.count(1, 1, Outcome::up(), Outcome::up()), 0u);
  EXPECT_EQ(t.cells().size(), 1u);
}

TEST(Tabulate, ConservesTrialCount) {
  SeededRng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<PairedTrial> trials(rng.below(500));
    for (auto& t : trials) {
      t = PairedTrial{static_cast<int>(rng.below(4)), static_cast<int>(rng.below(4)),
                      Outcome::from_int(static_cast<int>(rng.below(3)) - 1),
                      Outcome::from_int(static_cast<int>(rng.below(3)) - 1)};
    }
    const CountTable table = tabulate(trials);
    std::uint64_t sum = 0;
    for (const auto& [key, n] : table.cells()) sum += n;
    EXPECT_EQ(sum, trials.size());
    EXPECT_EQ(table.total(), trials.size());
  }
}

TEST(ParallelFor, ResultIndependentOfThreadCount) {
  auto fill = [](std::size_t threads) {
    std::vector<std::uint64_t> out(257);
    const SeededRng rng(77);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = rng.substream(i)(); }, threads);
    return out;
  };
  EXPECT_EQ(fill(1), fill(8));
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(
                   100,
                   [](std::size_t i) {
                     if (i == 37) throw std::runtime_error("boom");
                   },
                   4),
               std::runtime_error);
}
