#pragma once

// Domain types shared by every bell_lab module: ternary outcomes, analyzer
// angles, station events, paired coincidence records, the seeded random
// stream and the coincidence count table.

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>

namespace bell_lab {

inline constexpr std::string_view kVersion = "0.1.0";

/// Detection result at one station in one time window: +1, -1, or 0 (no count).
class Outcome {
 public:
  constexpr Outcome() = default;

  static constexpr Outcome up() { return Outcome(1); }
  static constexpr Outcome down() { return Outcome(-1); }
  static constexpr Outcome none() { return Outcome(0); }

  /// Throws std::invalid_argument for anything outside {+1, -1, 0}.
  static Outcome from_int(int value) {
    if (value < -1 || value > 1) {
      throw std::invalid_argument("outcome must be +1, -1 or 0, got " + std::to_string(value));
    }
    return Outcome(value);
  }

  /// Binary instruction bit to a detected outcome: 1 -> +1, 0 -> -1.
  static constexpr Outcome from_bit(int bit) { return bit != 0 ? up() : down(); }

  static constexpr Outcome from_sign(double x) { return x >= 0.0 ? up() : down(); }

  constexpr int value() const { return value_; }
  constexpr bool detected() const { return value_ != 0; }
  /// Inverse of from_bit. Only meaningful for detected outcomes.
  constexpr int bit() const { return value_ > 0 ? 1 : 0; }
  constexpr Outcome flipped() const { return Outcome(-value_); }

  friend constexpr auto operator<=>(Outcome, Outcome) = default;

 private:
  explicit constexpr Outcome(int value) : value_(static_cast<std::int8_t>(value)) {}

  std::int8_t value_ = 0;
};

/// Analyzer direction, normalized into [0, 2π).
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double radians) : radians_(normalize(radians)) {}

  /// Vongher-style angle k·π/8.
  static Angle eighths(int k) { return Angle(k * std::numbers::pi / 8.0); }

  double radians() const { return radians_; }

  friend bool operator==(Angle, Angle) = default;

 private:
  static double normalize(double r) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double x = std::fmod(r, two_pi);
    if (x < 0.0) x += two_pi;
    if (x >= two_pi) x = 0.0;
    return x;
  }

  double radians_ = 0.0;
};

/// Setting label used for the missing partner of a single-count trial.
inline constexpr int kNoSetting = -1;

struct StationEvent {
  std::uint64_t window_index = 0;
  int setting_label = 0;
  Outcome outcome;

  friend bool operator==(const StationEvent&, const StationEvent&) = default;
};

struct PairedTrial {
  int setting_a = 0;
  int setting_b = 0;
  Outcome a;
  Outcome b;

  bool coincident() const { return a.detected() && b.detected(); }
  int product() const { return a.value() * b.value(); }

  friend bool operator==(const PairedTrial&, const PairedTrial&) = default;
};

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Reproducible random stream identified by (seed, stream_id).
///
/// Identical (seed, stream_id) pairs replay identical sequences. Parallel
/// work takes disjoint substreams; a stream is never shared between threads.
/// Uniform and integer draws are computed from raw engine bits so they are
/// identical across standard libraries; normal draws go through
/// std::normal_distribution and are reproducible within one toolchain.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Independent child stream; substream(i) is a pure function of (seed, stream_id, i).
  SeededRng substream(std::uint64_t index) const {
    return SeededRng(seed_, detail::splitmix64(stream_id_ ^ detail::splitmix64(index + 0x5851F42D4C957F2DULL)));
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    __extension__ using u128 = unsigned __int128;
    if (n == 0) throw std::invalid_argument("SeededRng::below requires n > 0");
    // Lemire's multiply-shift with rejection of the biased low region.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = engine_();
      const u128 m = static_cast<u128>(x) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  double normal() { return normal_(engine_); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Counts keyed by (setting_a, setting_b, a, b). Absent keys read as zero.
class CountTable {
 public:
  using Key = std::tuple<int, int, int, int>;

  void add(const PairedTrial& t, std::uint64_t n = 1) {
    counts_[Key{t.setting_a, t.setting_b, t.a.value(), t.b.value()}] += n;
    total_ += n;
  }

  std::uint64_t count(int setting_a, int setting_b, Outcome a, Outcome b) const {
    auto it = counts_.find(Key{setting_a, setting_b, a.value(), b.value()});
    return it == counts_.end() ? 0 : it->second;
  }

  std::uint64_t total() const { return total_; }
  const std::map<Key, std::uint64_t>& cells() const { return counts_; }

 private:
  std::map<Key, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

inline CountTable tabulate(std::span<const PairedTrial> trials) {
  CountTable table;
  for (const auto& t : trials) table.add(t);
  return table;
}

}  // namespace bell_lab
