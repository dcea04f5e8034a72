#pragma once

// Acceptance criteria as reusable computations. The acceptance test binary
// and the `reproduce` subcommand share these.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "report.hpp"

namespace bell_lab::criteria {

struct Check {
  std::string label;
  bool pass = false;
  std::string detail;
};

struct Result {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  report::json data;

  bool pass() const;
  /// "PASS [n] title: check; check; ..." on one line.
  std::string summary_line() const;
};

inline constexpr std::uint64_t kDefaultSeed = 20160829;

Result singlet_law(std::uint64_t seed);
Result smeared_law(std::uint64_t seed);
Result pairing_triple(std::uint64_t seed);
Result deterministic_bounds(std::uint64_t seed);
Result gill_bound(std::uint64_t seed);
Result vongher(std::uint64_t seed, std::string_view which = "all");
Result bell_game(std::uint64_t seed);
Result no_signaling(std::uint64_t seed);
Result contextual(std::uint64_t seed);
Result stats(std::uint64_t seed);

/// All ten criteria in order.
std::vector<Result> run_all(std::uint64_t seed);

/// Target names accepted by `reproduce --target`.
const std::vector<std::string>& targets();

/// Runs one named target (or "all"); throws std::invalid_argument on an unknown name.
std::vector<Result> run_target(std::string_view target, std::uint64_t seed);

}  // namespace bell_lab::criteria
