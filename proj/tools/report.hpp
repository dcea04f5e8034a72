#pragma once

// JSON views of library results for CLI summaries.

#include <optional>

#include <json.hpp>

#include "bell_lab.hpp"

namespace bell_lab::report {

using json = nlohmann::ordered_json;

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const ChshEstimate& e) {
  json terms = json::array();
  for (const auto& t : e.terms) terms.push_back(optional_number(t));
  return json{{"terms", {{"ab", terms[0]}, {"ab_prime", terms[1]}, {"a_prime_b", terms[2]}, {"a_prime_b_prime", terms[3]}}},
              {"sample_sizes", e.sizes},
              {"s_value", optional_number(e.s_value)},
              {"defined", e.defined()},
              {"violated", e.violates()}};
}

inline json to_json(const CounterSet& c) {
  return json{{"n_e", c.n_e}, {"n_u", c.n_u}, {"pairs_at_distance", {c.pairs_at(0), c.pairs_at(1), c.pairs_at(2), c.pairs_at(3)}}};
}

inline json to_json(const BellCounterResult& r) {
  return json{{"lhs_n1_u", r.lhs}, {"rhs_n2_e_plus_n3_u", r.rhs}, {"violated", r.violated}};
}

inline json to_json(const EberhardCounts& c) {
  return json{{"n_oo_11", c.n_oo_11}, {"n_oe_12", c.n_oe_12}, {"n_ou_12", c.n_ou_12}, {"n_eo_21", c.n_eo_21},
              {"n_uo_21", c.n_uo_21}, {"n_oo_22", c.n_oo_22}, {"j", eberhard_j(c)}};
}

inline json to_json(const CampaignReport& r) {
  json out{{"runs", r.runs}, {"chsh_violation_rate", r.chsh_violation_rate}};
  out["bell_violation_rate"] = optional_number(r.bell_violation_rate);
  out["qrc_threshold"] = 0.5 + 3.0 * std::sqrt(0.25 / static_cast<double>(r.runs));
  out["qrc_won"] = r.qrc_won();
  if (r.bell_violation_rate) {
    out["bell_significantly_above_half"] = CampaignReport::significantly_above_half(*r.bell_violation_rate, r.runs);
  }
  return out;
}

inline json to_json(const MeanSem& m) { return json{{"mean", m.mean}, {"sd", m.sd}, {"sem", m.sem}, {"n", m.n}}; }

inline json to_json(const HomogeneityResult& h) {
  json out{{"method", std::string(to_string(h.method))}, {"statistic", h.statistic}, {"p_value", h.p_value}};
  if (h.method == HomogeneityMethod::chi_square_splits) out["dof"] = h.dof;
  return out;
}

inline json to_json(const ChebyshevConfidence& c) {
  return json{{"k", c.certain ? json(nullptr) : json(c.k)}, {"level", c.level}, {"certain", c.certain}};
}

}  // namespace bell_lab::report
