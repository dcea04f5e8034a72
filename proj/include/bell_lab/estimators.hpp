#pragma once

// Finite-sample inequality statistics: coincidence correlations, CHSH,
// the tennis-ball counter inequality and Eberhard's J.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bell_lab/core.hpp"
#include "bell_lab/sources.hpp"

namespace bell_lab {

/// Mean of a·b over coincident trials; nullopt when there are none.
inline std::optional<double> correlation(std::span<const PairedTrial> trials) {
  std::int64_t n = 0;
  std::int64_t sum = 0;
  for (const auto& t : trials) {
    if (!t.coincident()) continue;
    ++n;
    sum += t.product();
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(sum) / static_cast<double>(n);
}

/// Running sum of products for one setting pair.
struct CorrelationAccumulator {
  std::int64_t sum = 0;
  std::size_t n = 0;

  void add(int product) {
    sum += product;
    ++n;
  }
  std::optional<double> mean() const {
    if (n == 0) return std::nullopt;
    return static_cast<double>(sum) / static_cast<double>(n);
  }
};

/// ⟨AB⟩ + ⟨AB'⟩ + ⟨A'B⟩ - ⟨A'B'⟩ with per-term sample sizes. Term order is
/// (A,B), (A,B'), (A',B), (A',B'), i.e. setting labels (0,0), (0,1), (1,0), (1,1).
struct ChshEstimate {
  std::array<std::optional<double>, 4> terms{};
  std::array<std::size_t, 4> sizes{};
  std::optional<double> s_value;

  const std::optional<double>& e_ab() const { return terms[0]; }
  const std::optional<double>& e_abp() const { return terms[1]; }
  const std::optional<double>& e_apb() const { return terms[2]; }
  const std::optional<double>& e_apbp() const { return terms[3]; }

  bool defined() const { return s_value.has_value(); }
  /// Strict violation s > 2 (undefined never violates).
  bool violates() const { return s_value && *s_value > 2.0; }

  static ChshEstimate from_accumulators(const std::array<CorrelationAccumulator, 4>& acc) {
    ChshEstimate e;
    bool all = true;
    for (std::size_t k = 0; k < 4; ++k) {
      e.terms[k] = acc[k].mean();
      e.sizes[k] = acc[k].n;
      all = all && e.terms[k].has_value();
    }
    if (all) e.s_value = *e.terms[0] + *e.terms[1] + *e.terms[2] - *e.terms[3];
    return e;
  }
};

inline constexpr std::size_t chsh_term_index(int setting_a, int setting_b) {
  return static_cast<std::size_t>(setting_a * 2 + setting_b);
}

/// CHSH from trials labelled 0 (unprimed) / 1 (primed) on each side. Trials
/// with other labels or without a coincidence are ignored.
inline ChshEstimate chsh(std::span<const PairedTrial> trials) {
  std::array<CorrelationAccumulator, 4> acc{};
  for (const auto& t : trials) {
    if (t.setting_a < 0 || t.setting_a > 1 || t.setting_b < 0 || t.setting_b > 1) continue;
    if (!t.coincident()) continue;
    acc[chsh_term_index(t.setting_a, t.setting_b)].add(t.product());
  }
  return ChshEstimate::from_accumulators(acc);
}

/// CHSH over the full counterfactual table: every row feeds all four terms.
/// The four terms share one denominator, so s_value is formed from the
/// integer sum of row combinations and cannot round past 2.
inline ChshEstimate chsh_full_table(const Spreadsheet4& sheet) {
  std::array<CorrelationAccumulator, 4> acc{};
  std::int64_t combined = 0;
  for (const auto& r : sheet.rows) {
    acc[0].add(r.a * r.b);
    acc[1].add(r.a * r.b_prime);
    acc[2].add(r.a_prime * r.b);
    acc[3].add(r.a_prime * r.b_prime);
    combined += r.chsh_combination();
  }
  ChshEstimate e = ChshEstimate::from_accumulators(acc);
  if (e.s_value) e.s_value = static_cast<double>(combined) / static_cast<double>(sheet.rows.size());
  return e;
}

// ---------------------------------------------------------------------------
// Tennis-ball counters
// ---------------------------------------------------------------------------

/// Counters N_d(E) and N_d(U) for setting distance d = |b - a| ∈ {0, 1, 2, 3}.
struct CounterSet {
  std::array<std::uint64_t, 4> n_e{};
  std::array<std::uint64_t, 4> n_u{};

  std::uint64_t pairs_at(std::size_t d) const { return n_e[d] + n_u[d]; }

  friend bool operator==(const CounterSet&, const CounterSet&) = default;
};

inline bool is_vongher_setting(int a, int b) { return (a == 0 || a == 3) && (b == 0 || b == 2); }

inline std::size_t vongher_distance(int a, int b) { return static_cast<std::size_t>(a > b ? a - b : b - a); }

/// Counts coincident trials at Vongher settings (a ∈ {0,3}, b ∈ {0,2}).
/// No-count pairs are skipped.
inline CounterSet vongher_counters(std::span<const PairedTrial> trials) {
  CounterSet c;
  for (const auto& t : trials) {
    if (!t.coincident()) continue;
    if (!is_vongher_setting(t.setting_a, t.setting_b)) {
      throw std::invalid_argument("trial settings are not Vongher settings a ∈ {0,3}, b ∈ {0,2}");
    }
    const std::size_t d = vongher_distance(t.setting_a, t.setting_b);
    if (t.a == t.b) {
      ++c.n_e[d];
    } else {
      ++c.n_u[d];
    }
  }
  return c;
}

/// Counts every prepared ball pair at all four settings.
inline CounterSet counterfactual_counters(std::span<const BallPair> balls) {
  CounterSet c;
  for (const auto& p : balls) {
    if (!p.prepared) continue;
    for (int a : {0, 3}) {
      for (int b : {0, 2}) {
        const std::size_t d = vongher_distance(a, b);
        if (p.alice_bit(a) == p.bob_bit(b)) {
          ++c.n_e[d];
        } else {
          ++c.n_u[d];
        }
      }
    }
  }
  return c;
}

struct BellCounterResult {
  std::uint64_t lhs = 0;  // N_1(U)
  std::uint64_t rhs = 0;  // N_2(E) + N_3(U)
  bool violated = false;
};

/// N_1(U) <= N_2(E) + N_3(U); violated iff strictly greater.
inline BellCounterResult bell_counter_test(const CounterSet& c) {
  BellCounterResult r;
  r.lhs = c.n_u[1];
  r.rhs = c.n_e[2] + c.n_u[3];
  r.violated = r.lhs > r.rhs;
  return r;
}

/// CHSH orientation matching the counter inequality under d = 0
/// anti-correlation: S = -E_0 - E_1 - E_2 + E_3. Mapped onto the standard
/// terms with A = (a=0), A' = (a=3), B = (b=2), B' = (b=0) and Bob's outcome
/// negated, so S <= 2 is equivalent to N_1(U) <= N_2(E) + N_3(U) when E_0 = -1.
inline ChshEstimate vongher_chsh(std::span<const PairedTrial> trials) {
  std::array<CorrelationAccumulator, 4> acc{};
  for (const auto& t : trials) {
    if (!t.coincident()) continue;
    if (!is_vongher_setting(t.setting_a, t.setting_b)) {
      throw std::invalid_argument("trial settings are not Vongher settings a ∈ {0,3}, b ∈ {0,2}");
    }
    const int sa = t.setting_a == 0 ? 0 : 1;
    const int sb = t.setting_b == 2 ? 0 : 1;
    acc[chsh_term_index(sa, sb)].add(-t.product());
  }
  return ChshEstimate::from_accumulators(acc);
}

// ---------------------------------------------------------------------------
// Eberhard J
// ---------------------------------------------------------------------------

/// The six J ingredients. o = +1 beam, e = -1 beam, u = undetected;
/// subscripts are (Alice setting, Bob setting) with label 0 ≙ 1 and 1 ≙ 2.
struct EberhardCounts {
  std::uint64_t n_oo_11 = 0;
  std::uint64_t n_oe_12 = 0;
  std::uint64_t n_ou_12 = 0;
  std::uint64_t n_eo_21 = 0;
  std::uint64_t n_uo_21 = 0;
  std::uint64_t n_oo_22 = 0;

  EberhardCounts& operator+=(const EberhardCounts& o) {
    n_oo_11 += o.n_oo_11;
    n_oe_12 += o.n_oe_12;
    n_ou_12 += o.n_ou_12;
    n_eo_21 += o.n_eo_21;
    n_uo_21 += o.n_uo_21;
    n_oo_22 += o.n_oo_22;
    return *this;
  }

  friend bool operator==(const EberhardCounts&, const EberhardCounts&) = default;
};

/// J = n_oe(12) + n_ou(12) + n_eo(21) + n_uo(21) + n_oo(22) - n_oo(11).
inline std::int64_t eberhard_j(const EberhardCounts& c) {
  const auto s = [](std::uint64_t x) { return static_cast<std::int64_t>(x); };
  return s(c.n_oe_12) + s(c.n_ou_12) + s(c.n_eo_21) + s(c.n_uo_21) + s(c.n_oo_22) - s(c.n_oo_11);
}

/// Adds one trial measured at (setting_a, setting_b) ∈ {0,1}² to the counts.
inline void accumulate_eberhard(EberhardCounts& c, int setting_a, int setting_b, Outcome a, Outcome b) {
  const bool ao = a == Outcome::up();
  const bool bo = b == Outcome::up();
  if (setting_a == 0 && setting_b == 0) {
    if (ao && bo) ++c.n_oo_11;
  } else if (setting_a == 0 && setting_b == 1) {
    if (ao && b == Outcome::down()) ++c.n_oe_12;
    if (ao && !b.detected()) ++c.n_ou_12;
  } else if (setting_a == 1 && setting_b == 0) {
    if (a == Outcome::down() && bo) ++c.n_eo_21;
    if (!a.detected() && bo) ++c.n_uo_21;
  } else if (setting_a == 1 && setting_b == 1) {
    if (ao && bo) ++c.n_oo_22;
  }
}

inline EberhardCounts eberhard_counts(std::span<const PairedTrial> trials) {
  EberhardCounts c;
  for (const auto& t : trials) accumulate_eberhard(c, t.setting_a, t.setting_b, t.a, t.b);
  return c;
}

/// Predetermined outcome-and-detection record: what each station would
/// report at either of its two settings (0 = no detection).
struct TernaryRow {
  Outcome a1;
  Outcome a2;
  Outcome b1;
  Outcome b2;
};

/// Counterfactual counting: every row contributes at all four setting pairs.
inline EberhardCounts counterfactual_eberhard_counts(std::span<const TernaryRow> rows) {
  EberhardCounts c;
  for (const auto& r : rows) {
    accumulate_eberhard(c, 0, 0, r.a1, r.b1);
    accumulate_eberhard(c, 0, 1, r.a1, r.b2);
    accumulate_eberhard(c, 1, 0, r.a2, r.b1);
    accumulate_eberhard(c, 1, 1, r.a2, r.b2);
  }
  return c;
}

}  // namespace bell_lab
