#include "criteria.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/core.h>

namespace bell_lab::criteria {

namespace {

constexpr double pi = std::numbers::pi;

Check check(std::string label, bool pass, std::string detail) { return Check{std::move(label), pass, std::move(detail)}; }

std::vector<StationEvent> alternating_stream(std::size_t n, int first) {
  std::vector<StationEvent> s;
  s.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back(StationEvent{i, 0, Outcome::from_int(i % 2 == 0 ? first : -first)});
  }
  return s;
}

/// E(AB) for the smeared law by nested adaptive Gauss-Kronrod quadrature.
double smeared_expectation_quadrature(double center_a, double center_b, double w) {
  using boost::math::quadrature::gauss_kronrod;
  auto inner = [&](double t1) {
    return gauss_kronrod<double, 31>::integrate([&](double t2) { return -std::cos(t1 - t2); }, center_b - w,
                                                center_b + w, 8, 1e-13);
  };
  const double total = gauss_kronrod<double, 31>::integrate(inner, center_a - w, center_a + w, 8, 1e-13);
  return total / (4.0 * w * w);
}

// Per-outcome counts for one station at one setting pair, indexed by value + 1.
struct Marginals {
  std::array<std::uint64_t, 3> a{};
  std::array<std::uint64_t, 3> b{};
  std::uint64_t n = 0;
};

using TrialFn = std::function<PairedTrial(int x, int y, SeededRng& rng)>;

struct NoSignalingOutcome {
  bool pass = true;
  double worst_ratio = 0.0;  // max |Δp| / σ over all comparisons
  std::size_t comparisons = 0;
};

/// Compares P(a = v | x, y) with P(a = v | x, y') and P(b = v | x, y) with
/// P(b = v | x', y) for v ∈ {+1, 0}. σ is the standard error of the
/// difference of two independent proportions with the pooled p.
NoSignalingOutcome check_no_signaling(const TrialFn& trial, std::size_t n, const SeededRng& rng) {
  std::array<Marginals, 4> m{};
  parallel_for(4, [&](std::size_t cell) {
    SeededRng stream = rng.substream(cell);
    const int x = static_cast<int>(cell / 2);
    const int y = static_cast<int>(cell % 2);
    for (std::size_t i = 0; i < n; ++i) {
      const PairedTrial t = trial(x, y, stream);
      ++m[cell].a[static_cast<std::size_t>(t.a.value() + 1)];
      ++m[cell].b[static_cast<std::size_t>(t.b.value() + 1)];
      ++m[cell].n;
    }
  });
  NoSignalingOutcome out;
  auto compare = [&](std::uint64_t c1, std::uint64_t n1, std::uint64_t c2, std::uint64_t n2) {
    const double p1 = static_cast<double>(c1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(c2) / static_cast<double>(n2);
    const double pooled = static_cast<double>(c1 + c2) / static_cast<double>(n1 + n2);
    const double sigma = std::sqrt(pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
    const double diff = std::abs(p1 - p2);
    ++out.comparisons;
    if (sigma == 0.0) {
      if (diff != 0.0) out.pass = false;
      return;
    }
    out.worst_ratio = std::max(out.worst_ratio, diff / sigma);
    if (diff > 4.0 * sigma) out.pass = false;
  };
  for (std::size_t v : {2U, 1U}) {
    for (int x = 0; x <= 1; ++x) {
      const auto c0 = static_cast<std::size_t>(x * 2);
      compare(m[c0].a[v], m[c0].n, m[c0 + 1].a[v], m[c0 + 1].n);
    }
    for (int y = 0; y <= 1; ++y) {
      const auto c0 = static_cast<std::size_t>(y);
      compare(m[c0].b[v], m[c0].n, m[c0 + 2].b[v], m[c0 + 2].n);
    }
  }
  return out;
}

TrialFn singlet_trials(double efficiency) {
  return [efficiency](int x, int y, SeededRng& rng) {
    const Angle ta(x == 0 ? 0.0 : pi / 2.0);
    const Angle tb(y == 0 ? pi / 4.0 : 3.0 * pi / 4.0);
    const auto [a, b] = efficiency < 1.0 ? sample_lossy_singlet_pair(ta, tb, efficiency, rng)
                                         : sample_singlet_pair(ta, tb, rng);
    return PairedTrial{x, y, a, b};
  };
}

TrialFn smeared_trials(double w) {
  return [w](int x, int y, SeededRng& rng) {
    const AngleJitter ja{Angle(x == 0 ? 0.0 : pi / 2.0), w};
    const AngleJitter jb{Angle(y == 0 ? pi / 4.0 : 3.0 * pi / 4.0), w};
    const auto [a, b] = sample_smeared_pair(ja, jb, rng);
    return PairedTrial{x, y, a, b};
  };
}

TrialFn spreadsheet_trials(InstructionDistribution dist) {
  return [dist](int x, int y, SeededRng& rng) {
    const SpreadsheetRow r = dist.draw(rng);
    return PairedTrial{x, y, Outcome::from_int(x == 0 ? r.a : r.a_prime), Outcome::from_int(y == 0 ? r.b : r.b_prime)};
  };
}

TrialFn ball_trials(BallVariant variant) {
  return [variant](int x, int y, SeededRng& rng) {
    const BallPair p = generate_tennis_balls(1, variant, rng).front();
    PairedTrial t = measure_balls(p, x == 0 ? 0 : 3, y == 0 ? 0 : 2);
    t.setting_a = x;
    t.setting_b = y;
    return t;
  };
}

TrialFn game_trials(Strategy strategy) {
  return [strategy](int x, int y, SeededRng& rng) {
    BellGame game(strategy);
    const Round r = game.play_round(x, y, rng);
    return PairedTrial{x, y, Outcome::from_bit(r.a), Outcome::from_bit(r.b)};
  };
}

std::string fmt_rate(double r) { return fmt::format("{:.1f}%", 100.0 * r); }

}  // namespace

bool Result::pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string Result::summary_line() const {
  std::string line = fmt::format("{} [{}] {}:", pass() ? "PASS" : "FAIL", id, title);
  for (std::size_t i = 0; i < checks.size(); ++i) {
    line += fmt::format("{} {}{} {}", i == 0 ? "" : ";", checks[i].pass ? "" : "(failed) ", checks[i].label,
                        checks[i].detail);
  }
  return line;
}

Result singlet_law(std::uint64_t seed) {
  Result res{1, "singlet law E(AB) = -cos(delta)", {}, {}};
  constexpr std::size_t n = 100000;
  const double tol = 4.0 / std::sqrt(static_cast<double>(n));
  const SeededRng rng(seed, 1);
  std::array<double, 8> empirical{};
  parallel_for(8, [&](std::size_t k) {
    SeededRng stream = rng.substream(k);
    std::vector<PairedTrial> trials;
    trials.reserve(n);
    const Angle tb(static_cast<double>(k) * pi / 8.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto [a, b] = sample_singlet_pair(Angle(0.0), tb, stream);
      trials.push_back(PairedTrial{0, 0, a, b});
    }
    empirical[k] = *correlation(trials);
  });
  double worst = 0.0;
  report::json rows = report::json::array();
  for (std::size_t k = 0; k < 8; ++k) {
    const double expected = -std::cos(static_cast<double>(k) * pi / 8.0);
    worst = std::max(worst, std::abs(empirical[k] - expected));
    rows.push_back({{"delta", static_cast<double>(k) * pi / 8.0}, {"empirical", empirical[k]}, {"expected", expected}, {"n", n}});
  }
  res.checks.push_back(check("8 angle differences", worst <= tol, fmt::format("max dev {:.5f} <= {:.5f}", worst, tol)));
  res.data = {{"seed", seed}, {"tolerance", tol}, {"rows", rows}};
  return res;
}

Result smeared_law(std::uint64_t seed) {
  Result res{2, "smeared law with uniform jitter pi/8", {}, {}};
  constexpr std::size_t n = 100000;
  const double w = pi / 8.0;
  const double tol = 4.0 / std::sqrt(static_cast<double>(n));
  const double closed = -std::pow(std::sin(w) / w, 2);
  const double quad = smeared_expectation_quadrature(0.0, 0.0, w);
  SeededRng rng(seed, 2);
  const AngleJitter j{Angle(0.0), w};
  std::vector<PairedTrial> trials;
  trials.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b] = sample_smeared_pair(j, j, rng);
    trials.push_back(PairedTrial{0, 0, a, b});
  }
  const double e = *correlation(trials);
  res.checks.push_back(check("empirical vs quadrature", std::abs(e - quad) <= tol,
                             fmt::format("E={:.5f} oracle={:.5f} tol {:.5f}", e, quad, tol)));
  res.checks.push_back(check("quadrature vs closed form", std::abs(quad - closed) < 1e-10,
                             fmt::format("|{:.10f} - {:.10f}|", quad, closed)));
  res.data = {{"seed", seed}, {"n", n}, {"empirical", e}, {"quadrature", quad}, {"closed_form", closed}, {"tolerance", tol}};
  return res;
}

Result pairing_triple(std::uint64_t seed) {
  Result res{3, "pairing dependence on alternating streams", {}, {}};
  // sb is longer than sa so every offset yields the same even number of trials.
  const auto sa = alternating_stream(1000, -1);
  const auto sb = alternating_stream(1012, 1);
  bool odd_ok = true;
  bool even_ok = true;
  report::json sys = report::json::array();
  for (std::size_t k = 1; k <= 12; ++k) {
    const auto trials = pair_systematic(sa, sb, k);
    const double cov = *covariance(trials, false);
    sys.push_back({{"k", k}, {"covariance", cov}, {"n", trials.size()}});
    if (k % 2 == 1) odd_ok = odd_ok && cov == -1.0;
    if (k % 2 == 0) even_ok = even_ok && cov == 1.0;
  }
  res.checks.push_back(check("odd k", odd_ok, "Cov == -1 exactly for k = 1,3,...,11"));
  res.checks.push_back(check("even k", even_ok, "Cov == +1 exactly for k = 2,4,...,12"));

  constexpr std::size_t m = 100000;
  SeededRng rng(seed, 3);
  const auto long_a = alternating_stream(m, -1);
  const auto long_b = alternating_stream(m, 1);
  const auto random_trials = pair_random(long_a, long_b, m, rng);
  const double cov = *covariance(random_trials, false);
  const double tol = 4.0 / std::sqrt(static_cast<double>(m));
  res.checks.push_back(check("random m=1e5", std::abs(cov) <= tol, fmt::format("|Cov|={:.5f} <= {:.5f}", std::abs(cov), tol)));
  res.data = {{"seed", seed}, {"systematic", sys}, {"random", {{"m", m}, {"covariance", cov}, {"tolerance", tol}}}};
  return res;
}

Result deterministic_bounds(std::uint64_t seed) {
  Result res{4, "deterministic bounds on counterfactual tables", {}, {}};
  constexpr std::size_t instances = 10000;
  const SeededRng base(seed, 4);

  std::size_t bad_rows = 0;
  std::size_t bad_chsh = 0;
  double max_s = -4.0;
  {
    SeededRng rng = base.substream(0);
    for (std::size_t inst = 0; inst < instances; ++inst) {
      std::array<double, 16> w{};
      for (auto& x : w) x = rng.bernoulli(0.5) ? rng.uniform() : 0.0;
      w[rng.below(16)] += 1.0;
      const auto dist = InstructionDistribution::from_index_weights(w);
      const auto sheet = generate_cfd_spreadsheet(1 + rng.below(64), dist, rng);
      for (const auto& r : sheet.rows) {
        const int c = r.chsh_combination();
        if (c != 2 && c != -2) ++bad_rows;
      }
      const double s = *chsh_full_table(sheet).s_value;
      max_s = std::max(max_s, s);
      if (s > 2.0) ++bad_chsh;
    }
  }
  res.checks.push_back(check("row combination in {+2,-2}", bad_rows == 0, fmt::format("{} bad rows", bad_rows)));
  res.checks.push_back(check("full-table CHSH <= 2", bad_chsh == 0, fmt::format("max S {:.4f}", max_s)));

  std::size_t bell_violations = 0;
  {
    SeededRng rng = base.substream(1);
    for (std::size_t inst = 0; inst < instances; ++inst) {
      StrictBallWeights w{};
      for (auto& x : w) x = rng.bernoulli(0.5) ? rng.uniform() : 0.0;
      w[rng.below(8)] += 1.0;
      const BallVariant v = rng.bernoulli(0.5) ? BallVariant::strict(w) : BallVariant::missing_pairs(rng.uniform(), w);
      const auto balls = generate_tennis_balls(1 + rng.below(64), v, rng);
      if (bell_counter_test(counterfactual_counters(balls)).violated) ++bell_violations;
    }
  }
  res.checks.push_back(check("counterfactual counter inequality", bell_violations == 0,
                             fmt::format("{} violations", bell_violations)));

  std::size_t negative_j = 0;
  std::int64_t min_j = 0;
  {
    SeededRng rng = base.substream(2);
    auto ternary = [&] { return Outcome::from_int(static_cast<int>(rng.below(3)) - 1); };
    for (std::size_t inst = 0; inst < instances; ++inst) {
      std::vector<TernaryRow> rows(1 + rng.below(64));
      for (auto& r : rows) r = TernaryRow{ternary(), ternary(), ternary(), ternary()};
      const std::int64_t j = eberhard_j(counterfactual_eberhard_counts(rows));
      if (inst == 0) min_j = j;
      min_j = std::min(min_j, j);
      if (j < 0) ++negative_j;
    }
  }
  res.checks.push_back(check("counterfactual J >= 0", negative_j == 0, fmt::format("min J {}", min_j)));
  res.data = {{"seed", seed}, {"instances_per_property", instances}, {"max_full_table_s", max_s}, {"min_j", min_j}};
  return res;
}

Result gill_bound(std::uint64_t seed) {
  Result res{5, "coin-toss QRC bound", {}, {}};
  constexpr std::size_t runs = 1000;
  constexpr std::size_t rows = 3200;
  const double threshold = 0.5 + 3.0 * std::sqrt(0.25 / runs);
  const auto uniform = gill_campaign(InstructionDistribution::uniform(), rows, runs, SeededRng(seed, 5));
  const auto adversarial = gill_campaign(InstructionDistribution::chsh_maximizing(), rows, runs, SeededRng(seed, 6));
  res.checks.push_back(check("uniform generator", uniform.chsh_violation_rate <= threshold,
                             fmt::format("rate {} <= {}", fmt_rate(uniform.chsh_violation_rate), fmt_rate(threshold))));
  res.checks.push_back(check("+2-row generator", adversarial.chsh_violation_rate <= threshold,
                             fmt::format("rate {} <= {}", fmt_rate(adversarial.chsh_violation_rate), fmt_rate(threshold))));
  res.data = {{"seed", seed}, {"rows", rows}, {"threshold", threshold},
              {"uniform", report::to_json(uniform)}, {"adversarial", report::to_json(adversarial)}};
  return res;
}

Result vongher(std::uint64_t seed, std::string_view which) {
  Result res{6, "tennis-ball campaigns", {}, {}};
  constexpr std::size_t runs = 1000;
  constexpr std::size_t pairs = 800;
  const bool all = which == "all";
  res.data = {{"seed", seed}, {"runs", runs}, {"pairs", pairs}};
  if (all || which == "strict") {
    const auto r = vongher_campaign(BallVariant::strict(), pairs, runs, SeededRng(seed, 7));
    const double bell = *r.bell_violation_rate;
    res.checks.push_back(check("strict", bell == 0.0 && r.chsh_violation_rate == 0.0,
                               fmt::format("Bell {} CHSH {} (target: none)", fmt_rate(bell), fmt_rate(r.chsh_violation_rate))));
    res.data["strict"] = report::to_json(r);
  }
  if (all || which == "quantum") {
    const auto r = vongher_campaign(QuantumPairs{}, pairs, runs, SeededRng(seed, 8));
    const double bell = *r.bell_violation_rate;
    const bool ok = std::abs(bell - 0.91) <= 0.05 && std::abs(r.chsh_violation_rate - 0.99) <= 0.03;
    res.checks.push_back(check("quantum", ok,
                               fmt::format("Bell {} (target 91% +-5) CHSH {} (target 99% +-3)", fmt_rate(bell),
                                           fmt_rate(r.chsh_violation_rate))));
    res.data["quantum"] = report::to_json(r);
  }
  if (all || which == "partial") {
    const auto r = vongher_campaign(BallVariant::partial_anticorr(0.87), pairs, runs, SeededRng(seed, 9));
    const double bell = *r.bell_violation_rate;
    res.checks.push_back(check("partial_anticorr(0.87)", std::abs(bell - 0.87) <= 0.05,
                               fmt::format("Bell {} (target 87% +-5) CHSH {}", fmt_rate(bell), fmt_rate(r.chsh_violation_rate))));
    res.data["partial_anticorr"] = report::to_json(r);
  }
  if (which == "missing") {
    const auto r = vongher_campaign(BallVariant::missing_pairs(0.1), pairs, runs, SeededRng(seed, 10));
    const double bell = *r.bell_violation_rate;
    res.checks.push_back(check("missing_pairs(0.1)", r.chsh_violation_rate <= 0.5 + 3.0 * std::sqrt(0.25 / runs),
                               fmt::format("Bell {} CHSH {} (reported ~50%/50%)", fmt_rate(bell), fmt_rate(r.chsh_violation_rate))));
    res.data["missing_pairs"] = report::to_json(r);
  }
  if (res.checks.empty()) throw std::invalid_argument("unknown tennis-ball target");
  return res;
}

Result bell_game(std::uint64_t seed) {
  Result res{7, "Bell game scores", {}, {}};
  const auto table = counterfactual_table();
  int max_s = 0;
  bool only_1_3 = true;
  for (const auto& row : table) {
    max_s = std::max(max_s, row.score);
    only_1_3 = only_1_3 && (row.score == 1 || row.score == 3);
  }
  res.checks.push_back(check("table", max_s == 3 && only_1_3 && table.size() == 16,
                             fmt::format("16 rows, max S={}, all S in {{1,3}}: {}", max_s, only_1_3)));

  SeededRng script_rng(seed, 11);
  const auto scripted = play_game(ScriptedPrograms::four_minute_example(), 4, script_rng);
  res.checks.push_back(check("scripted minutes", scripted.points == 4, fmt::format("{}/4 points", scripted.points)));

  constexpr std::size_t rounds = 100000;
  SeededRng random_rng(seed, 12);
  const auto random = play_game(RandomPrograms{}, rounds, random_rng);
  res.checks.push_back(check("random programs", std::abs(random.avg_score - 2.0) <= 0.02,
                             fmt::format("<S>={:.4f} (2 +- 0.02)", random.avg_score)));
  SeededRng quantum_rng(seed, 13);
  const auto quantum = play_game(QuantumBoxes{}, rounds, quantum_rng);
  const double target = 2.0 + std::numbers::sqrt2;
  res.checks.push_back(check("quantum boxes", std::abs(quantum.avg_score - target) <= 0.02,
                             fmt::format("<S>={:.4f} ({:.4f} +- 0.02)", quantum.avg_score, target)));
  res.data = {{"seed", seed}, {"rounds", rounds}, {"max_table_score", max_s}, {"scripted_points", scripted.points},
              {"random_avg_score", random.avg_score}, {"quantum_avg_score", quantum.avg_score}};
  return res;
}

Result no_signaling(std::uint64_t seed) {
  Result res{8, "no-signaling marginals", {}, {}};
  constexpr std::size_t n = 100000;
  const std::vector<std::pair<std::string, TrialFn>> models = {
      {"singlet", singlet_trials(1.0)},
      {"lossy_singlet", singlet_trials(0.8)},
      {"smeared", smeared_trials(pi / 8.0)},
      {"contextual", [p = ContextualParams::tuned()](int x, int y, SeededRng& rng) { return contextual_trial(x, y, p, rng); }},
      {"spreadsheet_uniform", spreadsheet_trials(InstructionDistribution::uniform())},
      {"spreadsheet_plus2", spreadsheet_trials(InstructionDistribution::chsh_maximizing())},
      {"balls_strict", ball_trials(BallVariant::strict())},
      {"balls_missing_pairs", ball_trials(BallVariant::missing_pairs(0.1))},
      {"balls_partial_anticorr", ball_trials(BallVariant::partial_anticorr(0.87))},
      {"game_random_programs", game_trials(RandomPrograms{})},
      {"game_quantum", game_trials(QuantumBoxes{})},
  };
  const SeededRng base(seed, 14);
  bool all_ok = true;
  double worst = 0.0;
  std::string worst_model;
  std::size_t comparisons = 0;
  res.data = {{"seed", seed}, {"n_per_setting_pair", n}, {"models", report::json::object()}};
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto out = check_no_signaling(models[k].second, n, base.substream(k));
    all_ok = all_ok && out.pass;
    comparisons += out.comparisons;
    if (out.worst_ratio > worst) {
      worst = out.worst_ratio;
      worst_model = models[k].first;
    }
    res.data["models"][models[k].first] = {{"pass", out.pass}, {"max_sigma", out.worst_ratio}};
  }
  res.checks.push_back(check(fmt::format("{} models", models.size()), all_ok,
                             fmt::format("{} comparisons, max |dp| = {:.2f} sigma ({}) <= 4", comparisons, worst, worst_model)));
  return res;
}

Result contextual(std::uint64_t seed) {
  Result res{9, "contextual model", {}, {}};
  const ContextualParams params = ContextualParams::tuned();
  const SeededRng base(seed, 15);

  std::size_t changed = 0;
  constexpr std::size_t replays = 20000;
  for (std::size_t i = 0; i < replays; ++i) {
    const SeededRng r = base.substream(i);
    const int x = static_cast<int>(i % 2);
    const int y = static_cast<int>((i / 2) % 2);
    SeededRng r1 = r;
    SeededRng r2 = r;
    SeededRng r3 = r;
    const PairedTrial t = contextual_trial(x, y, params, r1);
    if (contextual_trial(x, 1 - y, params, r2).a != t.a) ++changed;
    if (contextual_trial(1 - x, y, params, r3).b != t.b) ++changed;

    SeededRng g1 = r;
    SeededRng g2 = r;
    SeededRng g3 = r;
    BellGame game1(ContextualPrograms{});
    BellGame game2(ContextualPrograms{});
    BellGame game3(ContextualPrograms{});
    const Round round = game1.play_round(x, y, g1);
    if (game2.play_round(x, 1 - y, g2).a != round.a) ++changed;
    if (game3.play_round(1 - x, y, g3).b != round.b) ++changed;
  }
  res.checks.push_back(check("locality replay", changed == 0, fmt::format("{} replays, {} changed near outcomes", replays, changed)));

  constexpr std::size_t n = 1000000;
  constexpr std::size_t chunks = 16;
  std::vector<std::array<CorrelationAccumulator, 4>> partial(chunks);
  std::vector<std::uint64_t> coincidences(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    SeededRng rng = base.substream(1000000 + c);
    for (std::size_t i = 0; i < n / chunks; ++i) {
      const int x = static_cast<int>(rng.below(2));
      const int y = static_cast<int>(rng.below(2));
      const PairedTrial t = contextual_trial(x, y, params, rng);
      if (!t.coincident()) continue;
      ++coincidences[c];
      partial[c][chsh_term_index(x, y)].add(t.product());
    }
  });
  std::array<CorrelationAccumulator, 4> acc{};
  std::uint64_t coinc = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    coinc += coincidences[c];
    for (std::size_t k = 0; k < 4; ++k) {
      acc[k].sum += partial[c][k].sum;
      acc[k].n += partial[c][k].n;
    }
  }
  const ChshEstimate e = ChshEstimate::from_accumulators(acc);
  const double s = e.s_value.value_or(0.0);
  res.checks.push_back(check("post-selected CHSH at N=1e6", e.defined() && s >= 2.2,
                             fmt::format("S={:.4f} >= 2.2, coincidence fraction {:.3f}", s,
                                         static_cast<double>(coinc) / static_cast<double>(n))));
  res.data = {{"seed", seed}, {"n", n}, {"chsh", report::to_json(e)}, {"coincidences", coinc}};
  return res;
}

Result stats(std::uint64_t seed) {
  Result res{10, "significance and homogeneity", {}, {}};
  const auto c2 = chebyshev_confidence(2.0, 1.0, 0.0);
  res.checks.push_back(check("Chebyshev k=2", c2.level == 0.75, fmt::format("{}", c2.level)));
  // 1 - 1/k^2 reaches 0.9995 at k = sqrt(2000) = 44.72; k = 44.70 gives 0.99949950.
  const auto c447 = chebyshev_confidence(44.73, 1.0, 0.0);
  const auto c4470 = chebyshev_confidence(44.70, 1.0, 0.0);
  res.checks.push_back(check("Chebyshev k=44.73", c447.level >= 0.9995,
                             fmt::format("{:.8f} >= 0.9995 (k=44.70 gives {:.8f})", c447.level, c4470.level)));

  constexpr std::size_t reps = 1000;
  constexpr std::size_t sample = 10000;
  const SeededRng base(seed, 16);
  std::vector<std::array<double, 3>> p(reps);
  parallel_for(reps, [&](std::size_t r) {
    SeededRng rng = base.substream(r);
    std::vector<int> symbols(sample);
    for (auto& s : symbols) s = static_cast<int>(rng.below(6));
    std::vector<double> values(sample);
    for (auto& v : values) v = rng.normal();
    p[r][0] = homogeneity_test(std::span<const int>(symbols), HomogeneityMethod::chi_square_splits).p_value;
    p[r][1] = homogeneity_test(std::span<const double>(values), HomogeneityMethod::two_sample_ks).p_value;
    p[r][2] = homogeneity_test(std::span<const double>(values), HomogeneityMethod::runs_test).p_value;
  });
  const std::array<std::string, 3> names = {"chi_square_splits", "two_sample_ks", "runs_test"};
  bool within_10 = true;
  bool within_4sigma = true;
  double worst_dev = 0.0;
  report::json deciles = report::json::object();
  for (std::size_t m = 0; m < 3; ++m) {
    std::array<std::uint64_t, 10> counts{};
    for (const auto& row : p) ++counts[std::min<std::size_t>(9, static_cast<std::size_t>(row[m] * 10.0))];
    for (auto c : counts) {
      const double freq = static_cast<double>(c) / reps;
      worst_dev = std::max(worst_dev, std::abs(freq - 0.1));
      within_10 = within_10 && std::abs(freq - 0.1) <= 0.10;
      within_4sigma = within_4sigma && std::abs(static_cast<double>(c) - 100.0) <= 38.0;
    }
    deciles[names[m]] = counts;
  }
  res.checks.push_back(check("p-value calibration", within_10 && within_4sigma,
                             fmt::format("3 methods x 10 deciles, max |freq-0.1| = {:.3f}", worst_dev)));

  const auto report = breakdown_demo(DriftingDeviceSpec::default_two_regime(), SeededRng(seed, 17));
  std::size_t huge = 0;
  double most_negative = 0.0;
  for (const auto& v : report.runs) {
    if (v.z < -100.0) ++huge;
    most_negative = std::min(most_negative, v.z);
  }
  res.checks.push_back(check("breakdown runs", huge >= 3, fmt::format("{} runs beyond 100 SEM (min z {:.0f})", huge, most_negative)));
  res.checks.push_back(check("breakdown pooled", std::abs(report.pooled_z) < 2.0,
                             fmt::format("pooled (1-B)/SEM = {:+.2f}", report.pooled_z)));
  res.checks.push_back(check("breakdown homogeneity", report.homogeneity.p_value < 1e-6,
                             fmt::format("chi2={:.0f} p={:.3g}", report.homogeneity.statistic, report.homogeneity.p_value)));
  res.data = {{"seed", seed}, {"calibration_deciles", deciles}, {"breakdown_runs_beyond_100_sem", huge},
              {"breakdown_pooled_z", report.pooled_z}, {"breakdown_homogeneity", report::to_json(report.homogeneity)}};
  return res;
}

std::vector<Result> run_all(std::uint64_t seed) {
  return {singlet_law(seed), smeared_law(seed),  pairing_triple(seed), deterministic_bounds(seed),
          gill_bound(seed),  vongher(seed),      bell_game(seed),      no_signaling(seed),
          contextual(seed),  stats(seed)};
}

const std::vector<std::string>& targets() {
  static const std::vector<std::string> names = {
      "all",           "singlet",         "smeared",         "pairing",        "bounds",
      "gill",          "vongher",         "vongher-strict",  "vongher-quantum", "vongher-partial",
      "vongher-missing", "bellgame",      "no-signaling",    "contextual",     "stats"};
  return names;
}

std::vector<Result> run_target(std::string_view target, std::uint64_t seed) {
  if (target == "all") return run_all(seed);
  if (target == "singlet") return {singlet_law(seed)};
  if (target == "smeared") return {smeared_law(seed)};
  if (target == "pairing") return {pairing_triple(seed)};
  if (target == "bounds") return {deterministic_bounds(seed)};
  if (target == "gill") return {gill_bound(seed)};
  if (target == "vongher") return {vongher(seed, "all")};
  if (target == "vongher-strict") return {vongher(seed, "strict")};
  if (target == "vongher-quantum") return {vongher(seed, "quantum")};
  if (target == "vongher-partial") return {vongher(seed, "partial")};
  if (target == "vongher-missing") return {vongher(seed, "missing")};
  if (target == "bellgame") return {bell_game(seed)};
  if (target == "no-signaling") return {no_signaling(seed)};
  if (target == "contextual") return {contextual(seed)};
  if (target == "stats") return {stats(seed)};
  throw std::invalid_argument("unknown reproduce target '" + std::string(target) + "'");
}

}  // namespace bell_lab::criteria
