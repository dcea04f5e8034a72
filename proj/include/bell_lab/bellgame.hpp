#pragma once

// Two-box Bell game: a point is scored when (a + b) mod 2 = x·y.

#include <array>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "bell_lab/core.hpp"
#include "bell_lab/sources.hpp"

namespace bell_lab {

/// Local program i ∈ {1,2,3,4}: constant 0, constant 1, copy x, negate x.
struct LocalProgram {
  int id = 1;

  int output(int setting) const {
    switch (id) {
      case 1:
        return 0;
      case 2:
        return 1;
      case 3:
        return setting;
      case 4:
        return 1 - setting;
      default:
        throw std::invalid_argument("local program id must be 1..4");
    }
  }
};

inline int scores_point(int x, int y, int a, int b) { return ((a + b) % 2) == x * y ? 1 : 0; }

/// One minute of play. i and j are 0 when the outcome was not produced by
/// a local program (quantum boxes).
struct Round {
  int i = 0;
  int j = 0;
  int x = 0;
  int y = 0;
  int a = 0;
  int b = 0;
  int point = 0;

  friend bool operator==(const Round&, const Round&) = default;
};

struct CounterfactualRow {
  int i = 0;
  int j = 0;
  std::array<std::array<int, 2>, 4> outcomes{};  // (a, b) for settings (0,0), (0,1), (1,0), (1,1)
  int score = 0;
};

/// All 16 program pairs evaluated at all four settings.
inline std::vector<CounterfactualRow> counterfactual_table() {
  std::vector<CounterfactualRow> table;
  table.reserve(16);
  for (int i = 1; i <= 4; ++i) {
    for (int j = 1; j <= 4; ++j) {
      CounterfactualRow row{i, j, {}, 0};
      std::size_t k = 0;
      for (int x = 0; x <= 1; ++x) {
        for (int y = 0; y <= 1; ++y) {
          const int a = LocalProgram{i}.output(x);
          const int b = LocalProgram{j}.output(y);
          row.outcomes[k++] = {a, b};
          row.score += scores_point(x, y, a, b);
        }
      }
      table.push_back(row);
    }
  }
  return table;
}

struct FixedPrograms {
  int i = 1;
  int j = 1;
};

struct RandomPrograms {};

struct ScriptStep {
  int i = 1;
  int j = 1;
  int x = 0;
  int y = 0;
};

/// Replays (i, j, x, y) minute by minute, cycling when exhausted.
struct ScriptedPrograms {
  std::vector<ScriptStep> steps;

  /// The four consecutive minutes that score 4 out of 4.
  static ScriptedPrograms four_minute_example() {
    return ScriptedPrograms{{{1, 1, 0, 0}, {2, 2, 0, 1}, {4, 3, 1, 1}, {3, 4, 1, 0}}};
  }
};

/// Programs chosen locally from correlated signals and setting-dependent
/// device states: i = f(λ1, λx), j = g(λ2, λy). The station response of the
/// contextual model (±1 or no count) selects constant-1, constant-0 or the
/// copy program respectively.
struct ContextualPrograms {
  ContextualParams params = ContextualParams::tuned();
};

/// Singlet-law boxes at analyzer angles x: {0, π/2}, y: {π/4, -π/4} with
/// a = [A = +1], b = [B = -1]; the point probability is cos²(π/8) for
/// every setting pair.
struct QuantumBoxes {};

using Strategy = std::variant<FixedPrograms, RandomPrograms, ScriptedPrograms, ContextualPrograms, QuantumBoxes>;

inline bool is_scripted(const Strategy& s) { return std::holds_alternative<ScriptedPrograms>(s); }

/// Stateful player; scripted strategies advance one step per round.
class BellGame {
 public:
  explicit BellGame(Strategy strategy) : strategy_(std::move(strategy)) {
    if (const auto* s = std::get_if<ScriptedPrograms>(&strategy_); s && s->steps.empty()) {
      throw std::invalid_argument("scripted strategy needs at least one step");
    }
    if (const auto* c = std::get_if<ContextualPrograms>(&strategy_)) {
      c->params.validate();
      if (c->params.settings_a() < 2 || c->params.settings_b() < 2) {
        throw std::invalid_argument("contextual programs need two settings per station");
      }
    }
  }

  const Strategy& strategy() const { return strategy_; }

  /// Settings the script prescribes for the next round.
  ScriptStep next_script_step() const {
    const auto& s = std::get<ScriptedPrograms>(strategy_);
    return s.steps[step_ % s.steps.size()];
  }

  Round play_round(int x, int y, SeededRng& rng) {
    if ((x != 0 && x != 1) || (y != 0 && y != 1)) throw std::invalid_argument("settings must be 0 or 1");
    Round r{0, 0, x, y, 0, 0, 0};
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, FixedPrograms>) {
            r.i = s.i;
            r.j = s.j;
          } else if constexpr (std::is_same_v<S, RandomPrograms>) {
            r.i = 1 + static_cast<int>(rng.below(4));
            r.j = 1 + static_cast<int>(rng.below(4));
          } else if constexpr (std::is_same_v<S, ScriptedPrograms>) {
            const auto& step = s.steps[step_ % s.steps.size()];
            ++step_;
            r.i = step.i;
            r.j = step.j;
          } else if constexpr (std::is_same_v<S, ContextualPrograms>) {
            const PairedTrial t = contextual_trial(x, y, s.params, rng);
            r.i = program_for(t.a.value());
            r.j = program_for(t.b.value());
          } else {
            const double pi = std::numbers::pi;
            const Angle ta(x == 0 ? 0.0 : pi / 2.0);
            const Angle tb(y == 0 ? pi / 4.0 : -pi / 4.0);
            const auto [oa, ob] = sample_singlet_pair(ta, tb, rng);
            r.a = oa == Outcome::up() ? 1 : 0;
            r.b = ob == Outcome::down() ? 1 : 0;
          }
        },
        strategy_);
    if (r.i != 0) {
      r.a = LocalProgram{r.i}.output(x);
      r.b = LocalProgram{r.j}.output(y);
    }
    r.point = scores_point(x, y, r.a, r.b);
    return r;
  }

 private:
  static int program_for(int response) {
    if (response > 0) return 2;
    if (response < 0) return 1;
    return 3;
  }

  Strategy strategy_;
  std::size_t step_ = 0;
};

struct GameSummary {
  std::size_t rounds = 0;
  std::size_t points = 0;
  /// 4 x point rate, the per-four-settings scale of the counterfactual table.
  double avg_score = 0.0;
  std::vector<Round> log;
};

/// Settings are uniform fair coins per round, except scripted strategies,
/// which play their own settings.
inline GameSummary play_game(const Strategy& strategy, std::size_t rounds, SeededRng& rng, bool keep_log = false) {
  if (rounds == 0) throw std::invalid_argument("game needs at least one round");
  BellGame game(strategy);
  GameSummary summary;
  summary.rounds = rounds;
  if (keep_log) summary.log.reserve(rounds);
  for (std::size_t n = 0; n < rounds; ++n) {
    int x = 0;
    int y = 0;
    if (is_scripted(strategy)) {
      const ScriptStep step = game.next_script_step();
      x = step.x;
      y = step.y;
    } else {
      x = rng.uniform() < 0.5 ? 0 : 1;
      y = rng.uniform() < 0.5 ? 0 : 1;
    }
    const Round r = game.play_round(x, y, rng);
    summary.points += static_cast<std::size_t>(r.point);
    if (keep_log) summary.log.push_back(r);
  }
  summary.avg_score = 4.0 * static_cast<double>(summary.points) / static_cast<double>(rounds);
  return summary;
}

}  // namespace bell_lab
