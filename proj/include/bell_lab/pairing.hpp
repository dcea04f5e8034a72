#pragma once

// Coincidence construction from two station streams. The same pair of
// streams yields different correlations under different pairings.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "bell_lab/core.hpp"

namespace bell_lab {

struct SystematicPairing {
  std::size_t k = 1;
};
struct RandomPairing {
  std::size_t m = 1;
};
struct TimeWindowPairing {
  std::uint64_t width = 1;
};

using PairingScheme = std::variant<SystematicPairing, RandomPairing, TimeWindowPairing>;

/// S_AB(1k): trial i pairs sa[i] with sb[i + k - 1].
inline std::vector<PairedTrial> pair_systematic(std::span<const StationEvent> sa, std::span<const StationEvent> sb,
                                                std::size_t k) {
  if (k == 0) throw std::invalid_argument("systematic pairing offset k must be >= 1");
  if (sa.empty() || sb.empty()) throw std::invalid_argument("pairing needs two non-empty streams");
  std::vector<PairedTrial> out;
  if (sb.size() < k) return out;
  const std::size_t n = std::min(sa.size(), sb.size() - k + 1);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ea = sa[i];
    const auto& eb = sb[i + k - 1];
    out.push_back(PairedTrial{ea.setting_label, eb.setting_label, ea.outcome, eb.outcome});
  }
  return out;
}

/// S_AB(R): m pairs (sa[s], sb[t]) with (s, t) uniform over {s <= t}, drawn
/// with replacement (rejection of s > t).
inline std::vector<PairedTrial> pair_random(std::span<const StationEvent> sa, std::span<const StationEvent> sb,
                                            std::size_t m, SeededRng& rng) {
  if (m == 0) throw std::invalid_argument("random pairing sample size must be >= 1");
  if (sa.empty() || sb.empty()) throw std::invalid_argument("pairing needs two non-empty streams");
  std::vector<PairedTrial> out;
  out.reserve(m);
  while (out.size() < m) {
    const std::uint64_t s = rng.below(sa.size());
    const std::uint64_t t = rng.below(sb.size());
    if (s > t) continue;
    out.push_back(PairedTrial{sa[s].setting_label, sb[t].setting_label, sa[s].outcome, sb[t].outcome});
  }
  return out;
}

/// Greedy one-use matching in time order: the earliest unprocessed event
/// (station A first on ties) pairs with the earliest unused partner whose
/// window differs by less than `width`. Unmatched events become single-count
/// trials with a no-count partner labelled kNoSetting. Both streams must
/// have strictly increasing window indices.
inline std::vector<PairedTrial> pair_time_window(std::span<const StationEvent> ea, std::span<const StationEvent> eb,
                                                 std::uint64_t width) {
  if (width == 0) throw std::invalid_argument("coincidence window width must be > 0");
  auto check_order = [](std::span<const StationEvent> s) {
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i].window_index <= s[i - 1].window_index) {
        throw std::invalid_argument("window indices must be strictly increasing within a stream");
      }
    }
  };
  check_order(ea);
  check_order(eb);

  auto single_a = [](const StationEvent& e) {
    return PairedTrial{e.setting_label, kNoSetting, e.outcome, Outcome::none()};
  };
  auto single_b = [](const StationEvent& e) {
    return PairedTrial{kNoSetting, e.setting_label, Outcome::none(), e.outcome};
  };

  std::vector<PairedTrial> out;
  out.reserve(ea.size() + eb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ea.size() && j < eb.size()) {
    const std::uint64_t wa = ea[i].window_index;
    const std::uint64_t wb = eb[j].window_index;
    const std::uint64_t gap = wa > wb ? wa - wb : wb - wa;
    if (gap < width) {
      out.push_back(PairedTrial{ea[i].setting_label, eb[j].setting_label, ea[i].outcome, eb[j].outcome});
      ++i;
      ++j;
    } else if (wa <= wb) {
      out.push_back(single_a(ea[i++]));
    } else {
      out.push_back(single_b(eb[j++]));
    }
  }
  for (; i < ea.size(); ++i) out.push_back(single_a(ea[i]));
  for (; j < eb.size(); ++j) out.push_back(single_b(eb[j]));
  return out;
}

inline std::vector<PairedTrial> apply_pairing(const PairingScheme& scheme, std::span<const StationEvent> sa,
                                              std::span<const StationEvent> sb, SeededRng& rng) {
  struct Visitor {
    std::span<const StationEvent> sa, sb;
    SeededRng& rng;
    std::vector<PairedTrial> operator()(const SystematicPairing& p) const { return pair_systematic(sa, sb, p.k); }
    std::vector<PairedTrial> operator()(const RandomPairing& p) const { return pair_random(sa, sb, p.m, rng); }
    std::vector<PairedTrial> operator()(const TimeWindowPairing& p) const {
      return pair_time_window(sa, sb, p.width);
    }
  };
  return std::visit(Visitor{sa, sb, rng}, scheme);
}

/// Covariance of the station outcomes A and B across trials, normalized by
/// n: (Σab - ΣaΣb/n) / n. Sums are accumulated exactly as integers, so the
/// alternating-stream example gives exactly ±1. With coincident_only, trials
/// containing a no-count are dropped first. Returns nullopt when fewer than
/// two trials are usable.
inline std::optional<double> covariance(std::span<const PairedTrial> trials, bool coincident_only) {
  std::int64_t n = 0;
  std::int64_t sum_a = 0;
  std::int64_t sum_b = 0;
  std::int64_t sum_ab = 0;
  for (const auto& t : trials) {
    if (coincident_only && !t.coincident()) continue;
    ++n;
    sum_a += t.a.value();
    sum_b += t.b.value();
    sum_ab += t.product();
  }
  if (n < 2) return std::nullopt;
  const double dn = static_cast<double>(n);
  return (static_cast<double>(sum_ab) - static_cast<double>(sum_a) * static_cast<double>(sum_b) / dn) / dn;
}

}  // namespace bell_lab
