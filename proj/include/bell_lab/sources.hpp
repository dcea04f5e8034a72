#pragma once

// Outcome generators: the quantum singlet law and its smeared-analyzer
// variant, counterfactual ±1 spreadsheets, tennis-ball instruction sets and
// the local contextual model with setting-dependent device parameters.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bell_lab/core.hpp"

namespace bell_lab {

// ---------------------------------------------------------------------------
// Singlet law
// ---------------------------------------------------------------------------

/// Draws (a, b) from P(a, b) = (1 - a·b·cos(θa - θb)) / 4.
///
/// a is a fair ±1 coin; b = -a with probability (1 + cos Δ) / 2. The result
/// has uniform marginals and E(AB) = -cos Δ. Exactly two uniforms are
/// consumed per call.
inline std::pair<Outcome, Outcome> sample_singlet_pair(Angle theta_a, Angle theta_b, SeededRng& rng) {
  const Outcome a = rng.uniform() < 0.5 ? Outcome::up() : Outcome::down();
  const double p_anti = 0.5 * (1.0 + std::cos(theta_a.radians() - theta_b.radians()));
  const Outcome b = rng.bernoulli(p_anti) ? a.flipped() : a;
  return {a, b};
}

/// Singlet pair followed by independent per-station detection with the given
/// efficiency; undetected stations report Outcome::none().
inline std::pair<Outcome, Outcome> sample_lossy_singlet_pair(Angle theta_a, Angle theta_b, double efficiency,
                                                             SeededRng& rng) {
  if (efficiency < 0.0 || efficiency > 1.0) throw std::invalid_argument("efficiency must lie in [0, 1]");
  auto [a, b] = sample_singlet_pair(theta_a, theta_b, rng);
  if (!rng.bernoulli(efficiency)) a = Outcome::none();
  if (!rng.bernoulli(efficiency)) b = Outcome::none();
  return {a, b};
}

enum class JitterDensity { uniform, truncated_gaussian };

/// Analyzer direction spread over [center - half_width, center + half_width].
struct AngleJitter {
  Angle center;
  double half_width = 0.0;
  JitterDensity density = JitterDensity::uniform;
  /// Standard deviation for truncated_gaussian; 0 means half_width / 2.
  double sigma = 0.0;

  void validate() const {
    if (!(half_width >= 0.0) || half_width >= std::numbers::pi / 2.0) {
      throw std::invalid_argument("jitter half_width must lie in [0, π/2)");
    }
    if (sigma < 0.0) throw std::invalid_argument("jitter sigma must be non-negative");
  }

  /// A zero half-width draws nothing from rng.
  Angle draw(SeededRng& rng) const {
    if (half_width == 0.0) return center;
    double offset = 0.0;
    switch (density) {
      case JitterDensity::uniform:
        offset = rng.uniform(-half_width, half_width);
        break;
      case JitterDensity::truncated_gaussian: {
        const double s = sigma > 0.0 ? sigma : half_width / 2.0;
        do {
          offset = s * rng.normal();
        } while (std::abs(offset) > half_width);
        break;
      }
    }
    return Angle(center.radians() + offset);
  }
};

inline std::pair<Outcome, Outcome> sample_smeared_pair(const AngleJitter& jitter_a, const AngleJitter& jitter_b,
                                                       SeededRng& rng) {
  jitter_a.validate();
  jitter_b.validate();
  const Angle theta_a = jitter_a.draw(rng);
  const Angle theta_b = jitter_b.draw(rng);
  return sample_singlet_pair(theta_a, theta_b, rng);
}

// ---------------------------------------------------------------------------
// Counterfactual spreadsheets
// ---------------------------------------------------------------------------

/// One row of predetermined outcomes for A, A', B, B' (each ±1).
struct SpreadsheetRow {
  int a = 1;
  int a_prime = 1;
  int b = 1;
  int b_prime = 1;

  /// A·B + A·B' + A'·B - A'·B', always ±2.
  int chsh_combination() const { return a * b + a * b_prime + a_prime * b - a_prime * b_prime; }

  friend bool operator==(const SpreadsheetRow&, const SpreadsheetRow&) = default;
};

struct Spreadsheet4 {
  std::vector<SpreadsheetRow> rows;
};

/// Probability law over the 16 rows {+1, -1}^4.
class InstructionDistribution {
 public:
  using Atom = std::array<int, 4>;  // A, A', B, B'

  static constexpr std::size_t kAtoms = 16;

  /// Bit k of the index is set when entry k equals +1.
  static std::size_t index_of(const Atom& atom) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      if (atom[k] != 1 && atom[k] != -1) throw std::invalid_argument("instruction entries must be ±1");
      if (atom[k] == 1) idx |= std::size_t{1} << k;
    }
    return idx;
  }

  static Atom atom_of(std::size_t index) {
    Atom atom{};
    for (std::size_t k = 0; k < 4; ++k) atom[k] = (index >> k) & 1U ? 1 : -1;
    return atom;
  }

  static SpreadsheetRow row_of(std::size_t index) {
    const Atom x = atom_of(index);
    return SpreadsheetRow{x[0], x[1], x[2], x[3]};
  }

  /// Rejects atoms with entries outside {+1, -1}, negative weights and zero total mass.
  static InstructionDistribution from_weights(std::span<const std::pair<Atom, double>> weighted) {
    std::array<double, kAtoms> w{};
    for (const auto& [atom, weight] : weighted) {
      if (!(weight >= 0.0) || !std::isfinite(weight)) throw std::invalid_argument("weights must be finite and >= 0");
      w[index_of(atom)] += weight;
    }
    return InstructionDistribution(w);
  }

  static InstructionDistribution from_index_weights(const std::array<double, kAtoms>& w) {
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("weights must be finite and >= 0");
    }
    return InstructionDistribution(w);
  }

  static InstructionDistribution uniform() {
    std::array<double, kAtoms> w{};
    w.fill(1.0);
    return InstructionDistribution(w);
  }

  static InstructionDistribution point_mass(const Atom& atom) {
    std::array<double, kAtoms> w{};
    w[index_of(atom)] = 1.0;
    return InstructionDistribution(w);
  }

  /// Uniform over the atoms whose row combination is +2.
  static InstructionDistribution chsh_maximizing() {
    std::array<double, kAtoms> w{};
    for (std::size_t i = 0; i < kAtoms; ++i) w[i] = row_of(i).chsh_combination() == 2 ? 1.0 : 0.0;
    return InstructionDistribution(w);
  }

  const std::array<double, kAtoms>& probabilities() const { return p_; }

  SpreadsheetRow draw(SeededRng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf_.begin());
    if (idx >= kAtoms) idx = last_positive_;
    return row_of(idx);
  }

 private:
  explicit InstructionDistribution(const std::array<double, kAtoms>& w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0.0)) throw std::invalid_argument("instruction distribution has no mass");
    double acc = 0.0;
    for (std::size_t i = 0; i < kAtoms; ++i) {
      p_[i] = w[i] / total;
      acc += p_[i];
      cdf_[i] = acc;
      if (p_[i] > 0.0) last_positive_ = i;
    }
  }

  std::array<double, kAtoms> p_{};
  std::array<double, kAtoms> cdf_{};
  std::size_t last_positive_ = 0;
};

inline Spreadsheet4 generate_cfd_spreadsheet(std::size_t n_rows, const InstructionDistribution& dist,
                                             SeededRng& rng) {
  if (n_rows == 0) throw std::invalid_argument("spreadsheet needs at least one row");
  Spreadsheet4 sheet;
  sheet.rows.reserve(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) sheet.rows.push_back(dist.draw(rng));
  return sheet;
}

// ---------------------------------------------------------------------------
// Tennis balls
// ---------------------------------------------------------------------------

/// Instruction bits carried by one pair of balls: Alice's (A0, A3) for
/// a ∈ {0, 3}, Bob's (B0, B2) for b ∈ {0, 2}.
struct BallPair {
  int a0 = 0;
  int a3 = 0;
  int b0 = 1;
  int b2 = 0;
  bool prepared = true;

  int alice_bit(int a) const { return a == 0 ? a0 : a3; }
  int bob_bit(int b) const { return b == 0 ? b0 : b2; }

  friend bool operator==(const BallPair&, const BallPair&) = default;
};

/// Weights over the 8 strict-anticorrelation atoms, indexed (A3 << 2) | (B0 << 1) | B2
/// with A0 = 1 - B0.
using StrictBallWeights = std::array<double, 8>;

namespace ball_weights {

inline constexpr std::size_t index(int a3, int b0, int b2) {
  return (static_cast<std::size_t>(a3) << 2) | (static_cast<std::size_t>(b0) << 1) | static_cast<std::size_t>(b2);
}

/// N1(U) - N2(E) - N3(U) for a single ball counted at all four settings.
inline int bell_slack(const BallPair& p) {
  return static_cast<int>(p.a3 != p.b2) - static_cast<int>(p.a0 == p.b2) - static_cast<int>(p.a3 != p.b0);
}

inline BallPair strict_atom(std::size_t idx) {
  const int a3 = static_cast<int>((idx >> 2) & 1U);
  const int b0 = static_cast<int>((idx >> 1) & 1U);
  const int b2 = static_cast<int>(idx & 1U);
  return BallPair{1 - b0, a3, b0, b2, true};
}

inline StrictBallWeights uniform() { return {1, 1, 1, 1, 1, 1, 1, 1}; }

/// Uniform over the six atoms that meet the counter inequality with equality.
inline StrictBallWeights boundary() {
  StrictBallWeights w{};
  for (std::size_t i = 0; i < 8; ++i) w[i] = bell_slack(strict_atom(i)) == 0 ? 1.0 : 0.0;
  return w;
}

/// Each side answers identically at both of its settings: A3 = A0, B2 = B0 = 1 - A0.
inline StrictBallWeights aligned() {
  StrictBallWeights w{};
  w[index(0, 1, 1)] = 1.0;
  w[index(1, 0, 0)] = 1.0;
  return w;
}

}  // namespace ball_weights

enum class BallVariantKind { strict, missing_pairs, partial_anticorr };

struct BallVariant {
  BallVariantKind kind = BallVariantKind::strict;
  double p_drop = 0.0;  // missing_pairs
  double q = 1.0;       // partial_anticorr: probability that A0 != B0
  StrictBallWeights weights = ball_weights::uniform();

  static BallVariant strict(StrictBallWeights w = ball_weights::uniform()) {
    return BallVariant{BallVariantKind::strict, 0.0, 1.0, w};
  }
  static BallVariant missing_pairs(double p_drop, StrictBallWeights w = ball_weights::boundary()) {
    return BallVariant{BallVariantKind::missing_pairs, p_drop, 1.0, w};
  }
  static BallVariant partial_anticorr(double q, StrictBallWeights w = ball_weights::aligned()) {
    return BallVariant{BallVariantKind::partial_anticorr, 0.0, q, w};
  }

  void validate() const {
    if (!(p_drop >= 0.0 && p_drop <= 1.0)) throw std::invalid_argument("p_drop must lie in [0, 1]");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
    double total = 0.0;
    for (double x : weights) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("ball weights must be finite and >= 0");
      total += x;
    }
    if (!(total > 0.0)) throw std::invalid_argument("ball weights have no mass");
  }
};

/// Each pair consumes exactly two uniforms: one selects the strict atom, one
/// drives the variant's drop/break coin. partial_anticorr(1) therefore
/// replays strict bit for bit.
inline std::vector<BallPair> generate_tennis_balls(std::size_t n_pairs, const BallVariant& variant,
                                                   SeededRng& rng) {
  if (n_pairs == 0) throw std::invalid_argument("need at least one ball pair");
  variant.validate();
  std::array<double, 8> cdf{};
  const double total = std::accumulate(variant.weights.begin(), variant.weights.end(), 0.0);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    acc += variant.weights[i] / total;
    cdf[i] = acc;
    if (variant.weights[i] > 0.0) last = i;
  }

  std::vector<BallPair> balls;
  balls.reserve(n_pairs);
  for (std::size_t n = 0; n < n_pairs; ++n) {
    const double u = rng.uniform();
    std::size_t idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (idx >= 8) idx = last;
    BallPair pair = ball_weights::strict_atom(idx);
    const double coin = rng.uniform();
    switch (variant.kind) {
      case BallVariantKind::strict:
        break;
      case BallVariantKind::missing_pairs:
        pair.prepared = !(coin < variant.p_drop);
        break;
      case BallVariantKind::partial_anticorr:
        if (coin >= variant.q) pair.b0 = pair.a0;
        break;
    }
    balls.push_back(pair);
  }
  return balls;
}

/// Reads the addressed instruction bits; unprepared pairs give no count on
/// either side.
inline PairedTrial measure_balls(const BallPair& pair, int a, int b) {
  if (!pair.prepared) return PairedTrial{a, b, Outcome::none(), Outcome::none()};
  return PairedTrial{a, b, Outcome::from_bit(pair.alice_bit(a)), Outcome::from_bit(pair.bob_bit(b))};
}

// ---------------------------------------------------------------------------
// Contextual model
// ---------------------------------------------------------------------------

struct UniformInterval {
  double lo = 0.0;
  double hi = 0.0;

  double draw(SeededRng& rng) const { return rng.uniform(lo, hi); }
};

enum class SourceKind {
  shared_angle,        // λ1 = λ2 uniform on [0, 2π)
  independent_angles,  // λ1, λ2 independent uniform on [0, 2π)
};

enum class ResponseKind { threshold_detection, constant, custom };

/// Local response A_x(λ1, λx) or B_y(λ2, λy). `angle` is the analyzer
/// direction attached to the station's own setting label.
using ResponseFn = std::function<int(double lambda_signal, double lambda_device, double angle)>;

/// Parameters of the local deterministic model a = A_x(λ1, λx), b = B_y(λ2, λy).
///
/// The threshold_detection response reads
///   A_x = sign c  if |c| >= τ0 + λx, else 0,   c = cos 2(λ1 - θx)
///   B_y = -sign c if |c| >= τ0 + λy, else 0,   c = cos 2(λ2 - θy)
/// with λx drawn from device_a[x] and λy from device_b[y].
struct ContextualParams {
  SourceKind source = SourceKind::shared_angle;
  std::vector<double> angles_a;
  std::vector<double> angles_b;
  std::vector<UniformInterval> device_a;
  std::vector<UniformInterval> device_b;
  ResponseKind response = ResponseKind::threshold_detection;
  double threshold = 0.0;
  int constant_a = 1;
  int constant_b = 1;
  ResponseFn custom_a;
  ResponseFn custom_b;

  std::size_t settings_a() const { return angles_a.size(); }
  std::size_t settings_b() const { return angles_b.size(); }

  void validate() const {
    if (angles_a.empty() || angles_b.empty()) throw std::invalid_argument("contextual model needs settings");
    if (device_a.size() != angles_a.size() || device_b.size() != angles_b.size()) {
      throw std::invalid_argument("one device law per setting is required");
    }
    for (const auto* devs : {&device_a, &device_b}) {
      for (const auto& d : *devs) {
        if (!(d.hi >= d.lo)) throw std::invalid_argument("device interval must have hi >= lo");
      }
    }
    if (response == ResponseKind::custom && (!custom_a || !custom_b)) {
      throw std::invalid_argument("custom response needs both station functions");
    }
  }

  /// Detection-threshold point chosen by numerical integration of the
  /// post-selected correlations: CHSH ≈ +2.47 with ~80% coincidences.
  /// Labels: A = π/4, A' = 0, B = 5π/8, B' = 7π/8. Bob's angles sit a
  /// quarter turn past π/8 and 3π/8, which flips every b and makes S positive.
  static ContextualParams tuned() {
    constexpr double pi = std::numbers::pi;
    ContextualParams p;
    p.angles_a = {pi / 4.0, 0.0};
    p.angles_b = {5.0 * pi / 8.0, 7.0 * pi / 8.0};
    p.device_a = {{-0.10, 0.10}, {-0.08, 0.12}};
    p.device_b = {{-0.12, 0.08}, {-0.10, 0.10}};
    p.threshold = 0.15;
    return p;
  }
};

namespace detail {

inline int threshold_response(double lambda_signal, double lambda_device, double angle, double tau0, int sign) {
  const double c = std::cos(2.0 * (lambda_signal - angle));
  if (std::abs(c) < tau0 + lambda_device) return 0;
  return c >= 0.0 ? sign : -sign;
}

}  // namespace detail

/// One trial of the contextual model. Four uniforms are consumed in fixed
/// order (λ1, λ2, λx, λy) regardless of the settings, so with a replayed rng
/// a never depends on y and b never depends on x.
inline PairedTrial contextual_trial(int x, int y, const ContextualParams& params, SeededRng& rng) {
  if (x < 0 || static_cast<std::size_t>(x) >= params.settings_a() || y < 0 ||
      static_cast<std::size_t>(y) >= params.settings_b()) {
    throw std::invalid_argument("setting label out of range for contextual model");
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double lambda1 = rng.uniform(0.0, two_pi);
  const double other = rng.uniform(0.0, two_pi);
  const double lambda2 = params.source == SourceKind::shared_angle ? lambda1 : other;
  const auto ux = static_cast<std::size_t>(x);
  const auto uy = static_cast<std::size_t>(y);
  const double lambda_x = params.device_a[ux].draw(rng);
  const double lambda_y = params.device_b[uy].draw(rng);

  int a = 0;
  int b = 0;
  switch (params.response) {
    case ResponseKind::threshold_detection:
      a = detail::threshold_response(lambda1, lambda_x, params.angles_a[ux], params.threshold, +1);
      b = detail::threshold_response(lambda2, lambda_y, params.angles_b[uy], params.threshold, -1);
      break;
    case ResponseKind::constant:
      a = params.constant_a;
      b = params.constant_b;
      break;
    case ResponseKind::custom:
      a = params.custom_a(lambda1, lambda_x, params.angles_a[ux]);
      b = params.custom_b(lambda2, lambda_y, params.angles_b[uy]);
      break;
  }
  return PairedTrial{x, y, Outcome::from_int(a), Outcome::from_int(b)};
}

}  // namespace bell_lab
