#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "bell_lab/pairing.hpp"

using namespace bell_lab;

namespace {

/// a_i = -1, +1, -1, ... and b_i = +1, -1, +1, ...
std::vector<StationEvent> alternating(std::size_t n, bool start_negative) {
  std::vector<StationEvent> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool neg = (i % 2 == 0) == start_negative;
    out[i] = StationEvent{i, 0, neg ? Outcome::down() : Outcome::up()};
  }
  return out;
}

std::vector<StationEvent> stream(const std::vector<std::uint64_t>& windows, int label, int value) {
  std::vector<StationEvent> out;
  for (auto w : windows) out.push_back(StationEvent{w, label, Outcome::from_int(value)});
  return out;
}

/// Quadratic reference matcher: visit events in time order (A first on
/// ties); each unused event takes the earliest unused partner in range.
std::vector<PairedTrial> brute_force_window(const std::vector<StationEvent>& ea, const std::vector<StationEvent>& eb,
                                            std::uint64_t width) {
  struct Ref {
    std::uint64_t w;
    int station;
    std::size_t idx;
  };
  std::vector<Ref> order;
  for (std::size_t i = 0; i < ea.size(); ++i) order.push_back({ea[i].window_index, 0, i});
  for (std::size_t j = 0; j < eb.size(); ++j) order.push_back({eb[j].window_index, 1, j});
  std::sort(order.begin(), order.end(),
            [](const Ref& x, const Ref& y) { return std::tie(x.w, x.station) < std::tie(y.w, y.station); });
  std::vector<bool> used_a(ea.size(), false);
  std::vector<bool> used_b(eb.size(), false);
  std::vector<PairedTrial> out;
  for (const Ref& r : order) {
    const auto& self = r.station == 0 ? ea : eb;
    auto& used_self = r.station == 0 ? used_a : used_b;
    const auto& other = r.station == 0 ? eb : ea;
    auto& used_other = r.station == 0 ? used_b : used_a;
    if (used_self[r.idx]) continue;
    used_self[r.idx] = true;
    bool matched = false;
    for (std::size_t k = 0; k < other.size(); ++k) {
      if (used_other[k]) continue;
      const std::uint64_t w1 = self[r.idx].window_index;
      const std::uint64_t w2 = other[k].window_index;
      if ((w1 > w2 ? w1 - w2 : w2 - w1) < width) {
        used_other[k] = true;
        const StationEvent& a = r.station == 0 ? self[r.idx] : other[k];
        const StationEvent& b = r.station == 0 ? other[k] : self[r.idx];
        out.push_back(PairedTrial{a.setting_label, b.setting_label, a.outcome, b.outcome});
        matched = true;
        break;
      }
    }
    if (!matched) {
      const StationEvent& e = self[r.idx];
      out.push_back(r.station == 0 ? PairedTrial{e.setting_label, kNoSetting, e.outcome, Outcome::none()}
                                   : PairedTrial{kNoSetting, e.setting_label, Outcome::none(), e.outcome});
    }
  }
  return out;
}

/// Windows with geometric gaps of the given mean, strictly increasing.
std::vector<StationEvent> poisson_stream(std::size_t n, double mean_gap, SeededRng& rng) {
  std::vector<StationEvent> out;
  std::uint64_t w = 0;
  for (std::size_t i = 0; i < n; ++i) {
    w += 1 + static_cast<std::uint64_t>(-std::log(1.0 - rng.uniform()) * (mean_gap - 1.0));
    out.push_back(StationEvent{w, static_cast<int>(rng.below(2)), rng.uniform() < 0.5 ? Outcome::up() : Outcome::down()});
  }
  return out;
}

std::size_t coincidences(const std::vector<PairedTrial>& trials) {
  return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const PairedTrial& t) { return t.coincident(); }));
}

}  // namespace

TEST(Systematic, OddOffsetsAnticorrelateEvenOffsetsCorrelate) {
  const auto sa = alternating(1000, true);
  const auto sb = alternating(1012, false);
  for (std::size_t k = 1; k <= 12; ++k) {
    const auto trials = pair_systematic(sa, sb, k);
    const auto cov = covariance(trials, false);
    ASSERT_TRUE(cov.has_value());
    EXPECT_EQ(*cov, k % 2 == 1 ? -1.0 : 1.0) << "k=" << k;
  }
}

TEST(Systematic, OutputLength) {
  const auto s = alternating(5, true);
  EXPECT_EQ(pair_systematic(s, s, 3).size(), 3u);
  EXPECT_EQ(pair_systematic(s, s, 1).size(), 5u);
  EXPECT_EQ(pair_systematic(s, s, 6).size(), 0u);
  EXPECT_EQ(pair_systematic(alternating(2, true), s, 2).size(), 2u);
  EXPECT_THROW(pair_systematic(s, s, 0), std::invalid_argument);
  EXPECT_THROW(pair_systematic({}, s, 1), std::invalid_argument);
}

TEST(Systematic, StreamsAreUntouched) {
  const auto sa = alternating(50, true);
  const auto sb = alternating(50, false);
  const auto copy_a = sa;
  const auto copy_b = sb;
  SeededRng rng(1);
  for (const PairingScheme& scheme :
       {PairingScheme{SystematicPairing{3}}, PairingScheme{RandomPairing{100}}, PairingScheme{TimeWindowPairing{2}}}) {
    (void)apply_pairing(scheme, sa, sb, rng);
  }
  EXPECT_EQ(sa, copy_a);
  EXPECT_EQ(sb, copy_b);
}

TEST(Random, AlternatingStreamsDecorrelate) {
  const auto sa = alternating(1000, true);
  const auto sb = alternating(1012, false);
  SeededRng rng(2);
  const std::size_t m = 100000;
  const auto trials = pair_random(sa, sb, m, rng);
  ASSERT_EQ(trials.size(), m);
  EXPECT_LE(std::abs(*covariance(trials, false)), 4.0 / std::sqrt(double(m)));
}

TEST(Random, IndependentFairStreams) {
  SeededRng gen(3);
  std::vector<StationEvent> sa(500), sb(500);
  for (std::size_t i = 0; i < 500; ++i) {
    sa[i] = StationEvent{i, 0, gen.uniform() < 0.5 ? Outcome::up() : Outcome::down()};
    sb[i] = StationEvent{i, 0, gen.uniform() < 0.5 ? Outcome::up() : Outcome::down()};
  }
  SeededRng rng(4);
  const std::size_t m = 10000;
  EXPECT_LE(std::abs(*covariance(pair_random(sa, sb, m, rng), false)), 4.0 / std::sqrt(double(m)));
}

TEST(Random, ConstantStationStaysConstant) {
  const auto sa = stream({1, 2, 3, 4}, 0, 1);
  const auto sb = alternating(9, true);
  SeededRng rng(5);
  for (const auto& t : pair_random(sa, sb, 500, rng)) EXPECT_EQ(t.a, Outcome::up());
}

TEST(Random, IndicesRespectOrdering) {
  // Tag each event with its index so s <= t is observable.
  std::vector<StationEvent> sa(20), sb(20);
  for (std::size_t i = 0; i < 20; ++i) {
    sa[i] = StationEvent{i, static_cast<int>(i), Outcome::up()};
    sb[i] = StationEvent{i, static_cast<int>(i), Outcome::up()};
  }
  SeededRng rng(6);
  for (const auto& t : pair_random(sa, sb, 5000, rng)) ASSERT_LE(t.setting_a, t.setting_b);
}

TEST(Random, ReplaysWithSameRng) {
  const auto sa = alternating(100, true);
  const auto sb = alternating(100, false);
  SeededRng r1(7), r2(7);
  EXPECT_EQ(pair_random(sa, sb, 1000, r1), pair_random(sa, sb, 1000, r2));
}

TEST(TimeWindow, IdenticalWindowsEqualSystematicOne) {
  const auto sa = alternating(40, true);
  const auto sb = alternating(40, false);
  EXPECT_EQ(pair_time_window(sa, sb, 1), pair_systematic(sa, sb, 1));
}

TEST(TimeWindow, ShiftedStreamGivesOnlySingles) {
  const auto sa = stream({0, 10, 20, 30}, 0, 1);
  const auto sb = stream({2, 12, 22, 32}, 1, -1);
  const auto trials = pair_time_window(sa, sb, 1);
  EXPECT_EQ(trials.size(), 8u);
  EXPECT_EQ(coincidences(trials), 0u);
  for (const auto& t : trials) EXPECT_TRUE(t.setting_a == kNoSetting || t.setting_b == kNoSetting);
  EXPECT_EQ(coincidences(pair_time_window(sa, sb, 3)), 4u);
}

TEST(TimeWindow, EachEventUsedOnce) {
  const auto sa = stream({5}, 0, 1);
  const auto sb = stream({4, 5, 6}, 0, -1);
  const auto trials = pair_time_window(sa, sb, 3);
  EXPECT_EQ(coincidences(trials), 1u);
  EXPECT_EQ(trials.size(), 3u);
}

TEST(TimeWindow, MatchesBruteForceOracle) {
  SeededRng rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    const auto ea = poisson_stream(300 + rng.below(200), 4.0, rng);
    const auto eb = poisson_stream(300 + rng.below(200), 4.0, rng);
    const std::uint64_t width = 1 + rng.below(4);
    auto fast = pair_time_window(ea, eb, width);
    auto slow = brute_force_window(ea, eb, width);
    EXPECT_EQ(coincidences(fast), coincidences(slow)) << "rep " << rep;
    auto key = [](const PairedTrial& t) { return std::tuple(t.setting_a, t.setting_b, t.a.value(), t.b.value()); };
    auto by_key = [&](const PairedTrial& x, const PairedTrial& y) { return key(x) < key(y); };
    std::sort(fast.begin(), fast.end(), by_key);
    std::sort(slow.begin(), slow.end(), by_key);
    EXPECT_EQ(fast, slow) << "rep " << rep;
  }
}

TEST(TimeWindow, RejectsUnorderedStreamsAndZeroWidth) {
  const auto good = stream({1, 2}, 0, 1);
  const auto bad = stream({2, 2}, 0, 1);
  EXPECT_THROW(pair_time_window(bad, good, 1), std::invalid_argument);
  EXPECT_THROW(pair_time_window(good, good, 0), std::invalid_argument);
}

TEST(Covariance, UndefinedBelowTwoTrials) {
  const std::vector<PairedTrial> one = {PairedTrial{0, 0, Outcome::up(), Outcome::up()}};
  EXPECT_FALSE(covariance(one, false).has_value());
  const std::vector<PairedTrial> with_zero = {PairedTrial{0, 0, Outcome::up(), Outcome::up()},
                                              PairedTrial{0, 0, Outcome::up(), Outcome::none()}};
  EXPECT_TRUE(covariance(with_zero, false).has_value());
  EXPECT_FALSE(covariance(with_zero, true).has_value());
}
