#pragma once

// Quantum Randi Challenge protocols: coin-toss subsampling of a 4N x 4
// counterfactual spreadsheet, and repeated tennis-ball runs scored with the
// counter inequality and CHSH.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "bell_lab/core.hpp"
#include "bell_lab/estimators.hpp"
#include "bell_lab/parallel.hpp"
#include "bell_lab/sources.hpp"

namespace bell_lab {

struct RunStatistics {
  std::size_t run = 0;
  ChshEstimate chsh;
  std::optional<CounterSet> counters;
  std::optional<BellCounterResult> bell;
  bool bell_violated = false;
  bool chsh_violated = false;
};

struct CampaignReport {
  std::size_t runs = 0;
  std::optional<double> bell_violation_rate;  // absent for protocols without counters
  double chsh_violation_rate = 0.0;
  std::vector<RunStatistics> per_run;

  /// Rate exceeds 1/2 by more than three binomial standard errors.
  static bool significantly_above_half(double rate, std::size_t runs) {
    return rate > 0.5 + 3.0 * std::sqrt(0.25 / static_cast<double>(runs));
  }
  bool qrc_won() const { return significantly_above_half(chsh_violation_rate, runs); }
};

/// One coin per station per row selects A or A' and B or B'; each row
/// contributes exactly one product to exactly one of the four subsamples.
inline ChshEstimate gill_subsample(const Spreadsheet4& sheet, SeededRng& rng) {
  if (sheet.rows.empty()) throw std::invalid_argument("spreadsheet is empty");
  std::array<CorrelationAccumulator, 4> acc{};
  for (const auto& r : sheet.rows) {
    const bool primed_a = rng.uniform() < 0.5;
    const bool primed_b = rng.uniform() < 0.5;
    const int a = primed_a ? r.a_prime : r.a;
    const int b = primed_b ? r.b_prime : r.b;
    acc[chsh_term_index(primed_a ? 1 : 0, primed_b ? 1 : 0)].add(a * b);
  }
  return ChshEstimate::from_accumulators(acc);
}

namespace detail {

inline CampaignReport summarize(std::vector<RunStatistics> per_run, bool with_bell) {
  CampaignReport report;
  report.runs = per_run.size();
  std::size_t bell = 0;
  std::size_t chsh = 0;
  for (const auto& r : per_run) {
    bell += r.bell_violated ? 1 : 0;
    chsh += r.chsh_violated ? 1 : 0;
  }
  const double n = static_cast<double>(report.runs);
  report.chsh_violation_rate = static_cast<double>(chsh) / n;
  if (with_bell) report.bell_violation_rate = static_cast<double>(bell) / n;
  report.per_run = std::move(per_run);
  return report;
}

}  // namespace detail

/// Run r draws a fresh sheet and its coin tosses from rng.substream(r).
inline CampaignReport gill_campaign(const InstructionDistribution& generator, std::size_t sheet_rows,
                                    std::size_t runs, const SeededRng& rng) {
  if (runs == 0) throw std::invalid_argument("campaign needs at least one run");
  if (sheet_rows == 0) throw std::invalid_argument("spreadsheet needs at least one row");
  std::vector<RunStatistics> per_run(runs);
  parallel_for(runs, [&](std::size_t r) {
    SeededRng stream = rng.substream(r);
    const Spreadsheet4 sheet = generate_cfd_spreadsheet(sheet_rows, generator, stream);
    RunStatistics& out = per_run[r];
    out.run = r;
    out.chsh = gill_subsample(sheet, stream);
    out.chsh_violated = out.chsh.violates();
  });
  return detail::summarize(std::move(per_run), false);
}

/// Singlet-law balls measured at Vongher angles α = aπ/8, β = bπ/8.
struct QuantumPairs {};

using VongherSource = std::variant<BallVariant, QuantumPairs>;

struct VongherRun {
  std::vector<PairedTrial> trials;
  CounterSet counters;
  BellCounterResult bell;
  ChshEstimate chsh;
  bool bell_violated = false;
  bool chsh_violated = false;
};

/// Each pair gets a ∈ {0,3} and b ∈ {0,2} by independent fair coins; only
/// the addressed instruction bits are read.
inline VongherRun vongher_run(const VongherSource& source, std::size_t n_pairs, SeededRng& rng) {
  if (n_pairs == 0) throw std::invalid_argument("need at least one ball pair");
  VongherRun run;
  run.trials.reserve(n_pairs);
  if (const auto* variant = std::get_if<BallVariant>(&source)) {
    const auto balls = generate_tennis_balls(n_pairs, *variant, rng);
    for (const auto& pair : balls) {
      const int a = rng.uniform() < 0.5 ? 0 : 3;
      const int b = rng.uniform() < 0.5 ? 0 : 2;
      run.trials.push_back(measure_balls(pair, a, b));
    }
  } else {
    for (std::size_t n = 0; n < n_pairs; ++n) {
      const int a = rng.uniform() < 0.5 ? 0 : 3;
      const int b = rng.uniform() < 0.5 ? 0 : 2;
      const auto [oa, ob] = sample_singlet_pair(Angle::eighths(a), Angle::eighths(b), rng);
      run.trials.push_back(PairedTrial{a, b, oa, ob});
    }
  }
  run.counters = vongher_counters(run.trials);
  run.bell = bell_counter_test(run.counters);
  run.chsh = vongher_chsh(run.trials);
  run.bell_violated = run.bell.violated;
  run.chsh_violated = run.chsh.violates();
  return run;
}

inline CampaignReport vongher_campaign(const VongherSource& source, std::size_t n_pairs, std::size_t runs,
                                       const SeededRng& rng) {
  if (runs == 0) throw std::invalid_argument("campaign needs at least one run");
  std::vector<RunStatistics> per_run(runs);
  parallel_for(runs, [&](std::size_t r) {
    SeededRng stream = rng.substream(r);
    const VongherRun run = vongher_run(source, n_pairs, stream);
    RunStatistics& out = per_run[r];
    out.run = r;
    out.chsh = run.chsh;
    out.counters = run.counters;
    out.bell = run.bell;
    out.bell_violated = run.bell_violated;
    out.chsh_violated = run.chsh_violated;
  });
  return detail::summarize(std::move(per_run), true);
}

}  // namespace bell_lab
