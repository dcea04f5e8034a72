#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "criteria.hpp"
#include "report.hpp"

namespace bell_lab::cli {

namespace {

using json = report::json;
namespace fs = std::filesystem;

/// Bad flags, unreadable inputs and invalid parameter combinations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string summary = "summary.json";
  bool strict = false;
  std::string config;
};

struct Context {
  const CLI::App* sub = nullptr;
  Common common;
  std::uint64_t seed = 0;
  bool seed_generated = false;
  bool seeded = true;
  std::ostream* out = nullptr;
};

// ---------------------------------------------------------------------------
// Plumbing
// ---------------------------------------------------------------------------

const std::vector<std::string> kUnechoed = {"help", "config", "out-dir", "summary", "seed"};

json typed_value(const std::string& text) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(text, &used);
    if (used == text.size()) return i;
    const double d = std::stod(text, &used);
    if (used == text.size()) return d;
  } catch (const std::exception&) {
  }
  return text;
}

/// Every option of the subcommand with its effective value (given or
/// default). The top-level seed field carries the seed.
json config_echo(const CLI::App& sub) {
  json echo = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || std::find(kUnechoed.begin(), kUnechoed.end(), name) != kUnechoed.end()) continue;
    if (opt->get_expected_max() == 0) {
      echo[name] = opt->count() > 0 && opt->as<bool>();
    } else if (opt->count() > 0) {
      std::vector<std::string> values;
      for (const auto& r : opt->results()) {
        std::stringstream ss(r);
        std::string cell;
        while (std::getline(ss, cell, ',')) values.push_back(cell);
      }
      if (values.size() == 1 && opt->get_items_expected_max() <= 1) {
        echo[name] = typed_value(values.front());
      } else {
        json arr = json::array();
        for (const auto& v : values) arr.push_back(typed_value(v));
        echo[name] = arr;
      }
    } else if (opt->get_default_str().empty()) {
      echo[name] = nullptr;
    } else {
      const std::string text = opt->get_default_str();
      if (text.size() >= 2 && text.front() == '[' && text.back() == ']') {
        json arr = json::array();
        std::stringstream ss(text.substr(1, text.size() - 2));
        std::string cell;
        while (std::getline(ss, cell, ',')) arr.push_back(typed_value(cell));
        echo[name] = arr;
      } else {
        echo[name] = typed_value(text);
      }
    }
  }
  return echo;
}

/// Real-valued option whose recorded default round-trips exactly.
CLI::Option* add_real(CLI::App* sub, const std::string& name, double& value, const std::string& description) {
  return sub->add_option(name, value, description)->default_str(fmt::format("{}", value));
}

/// Merges a flat key = value file into the subcommand's options. Values
/// already given on the command line win.
void apply_config(CLI::App& sub, const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("cannot read config file '" + path + "'");
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::Error& e) {
    throw ConfigError("malformed config file '" + path + "': " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty()) throw ConfigError("config sections are not supported: '" + item.fullname() + "'");
    CLI::Option* opt = sub.get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config" || item.name == "help") {
      throw ConfigError("unknown config key '" + item.name + "' for " + sub.get_name());
    }
    if (opt->count() > 0) continue;
    try {
      for (const auto& v : item.inputs) opt->add_result(v);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ConfigError("bad config value for '" + item.name + "': " + e.what());
    }
  }
}

void require_option(const CLI::App& sub, const std::string& name) {
  if (sub.get_option(name)->count() == 0) throw ConfigError(name + " is required");
}

fs::path output_path(const Context& ctx, const std::string& name) { return fs::path(ctx.common.out_dir) / name; }

/// Writes through a temporary file and renames it into place.
void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write output file " + tmp.string());
    body(f);
    f.flush();
    if (!f) throw ConfigError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read input file '" + path + "'");
  return f;
}

/// Writes the JSON summary and echoes it on `out`.
void emit_summary(const Context& ctx, json result) {
  json doc = json::object();
  doc["tool"] = "bell_lab";
  doc["version"] = std::string(kVersion);
  doc["subcommand"] = ctx.sub->get_name();
  doc["seed"] = ctx.seeded ? json(ctx.seed) : json(nullptr);
  doc["seed_generated"] = ctx.seed_generated;
  doc["config"] = config_echo(*ctx.sub);
  doc["result"] = std::move(result);
  const std::string text = doc.dump(2) + "\n";
  write_atomic(output_path(ctx, ctx.common.summary), [&](std::ostream& o) { o << text; });
  *ctx.out << text;
}

void add_common(CLI::App* sub, Common& c, bool with_seed = true) {
  if (with_seed) sub->add_option("--seed", c.seed, "64-bit seed; generated and recorded when omitted");
  sub->add_option("--out-dir", c.out_dir, "Directory for CSV and JSON outputs")->capture_default_str();
  sub->add_option("--summary", c.summary, "File name of the JSON summary inside --out-dir")->capture_default_str();
  sub->add_flag("--strict", c.strict, "Exit with code 3 when a requested statistic is undefined");
  sub->add_option("--config", c.config, "Flat key = value file; command-line flags take precedence");
}

std::string csv_number(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string(); }

bool has_labels_01(std::span<const PairedTrial> trials) {
  return std::any_of(trials.begin(), trials.end(), [](const PairedTrial& t) {
    return t.setting_a >= 0 && t.setting_a <= 1 && t.setting_b >= 0 && t.setting_b <= 1;
  });
}

/// Trials whose labels are all Vongher settings and use a = 3 or b = 2 somewhere.
bool looks_vongher(std::span<const PairedTrial> trials) {
  bool wide = false;
  for (const auto& t : trials) {
    if (!is_vongher_setting(t.setting_a, t.setting_b)) return false;
    wide = wide || t.setting_a == 3 || t.setting_b == 2;
  }
  return wide;
}

json trial_overview(std::span<const PairedTrial> trials) {
  std::uint64_t coincident = 0;
  std::uint64_t single = 0;
  for (const auto& t : trials) {
    if (t.coincident()) {
      ++coincident;
    } else if (t.a.detected() || t.b.detected()) {
      ++single;
    }
  }
  return json{{"trials", trials.size()}, {"coincidences", coincident}, {"single_counts", single}};
}

struct Estimates {
  json block = json::object();
  bool undefined = false;
};

/// The requested statistics over a trial list. "all" picks the Vongher
/// orientation for CHSH when the labels are Vongher settings.
Estimates estimate_block(std::span<const PairedTrial> trials, const std::string& which) {
  Estimates e;
  const bool vongher = looks_vongher(trials);
  const bool all = which == "all";
  if (all || which == "correlation") {
    const auto c = correlation(trials);
    e.block["correlation"] = report::optional_number(c);
    e.undefined = e.undefined || !c;
  }
  if ((all && !vongher) || which == "chsh") {
    const auto s = chsh(trials);
    e.block["chsh"] = report::to_json(s);
    e.undefined = e.undefined || !s.defined();
  }
  if ((all && vongher) || which == "vongher") {
    if (!vongher && which == "vongher") throw ConfigError("trials do not carry Vongher settings a in {0,3}, b in {0,2}");
    const auto counters = vongher_counters(trials);
    const auto s = vongher_chsh(trials);
    e.block["vongher"] = {{"counters", report::to_json(counters)},
                          {"bell", report::to_json(bell_counter_test(counters))},
                          {"chsh", report::to_json(s)}};
    e.undefined = e.undefined || !s.defined();
  }
  if (all || which == "eberhard") {
    e.block["eberhard"] = report::to_json(eberhard_counts(trials));
  }
  if (e.block.empty()) throw ConfigError("unknown statistic '" + which + "'");
  return e;
}

int finish(const Context& ctx, bool undefined) { return ctx.common.strict && undefined ? kExitUndefined : kExitOk; }

std::vector<StationEvent> events_of(std::span<const PairedTrial> trials, bool station_a) {
  std::vector<StationEvent> events;
  events.reserve(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& t = trials[i];
    events.push_back(StationEvent{i, station_a ? t.setting_a : t.setting_b, station_a ? t.a : t.b});
  }
  return events;
}

BallVariant parse_variant(const std::string& name, double p_drop, double q) {
  if (name == "strict") return BallVariant::strict();
  if (name == "missing_pairs") return BallVariant::missing_pairs(p_drop);
  if (name == "partial_anticorr") return BallVariant::partial_anticorr(q);
  throw ConfigError("unknown ball variant '" + name + "'");
}

InstructionDistribution parse_generator(const std::string& name) {
  if (name == "uniform") return InstructionDistribution::uniform();
  if (name == "plus2") return InstructionDistribution::chsh_maximizing();
  throw ConfigError("unknown generator '" + name + "' (uniform, plus2)");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
  std::string model = "singlet";
  std::vector<double> angles{0.0, 0.0};
  std::size_t n = 1000;
  double efficiency = 0.8;
  double jitter = std::numbers::pi / 8.0;
  std::string density = "uniform";
  std::string generator = "uniform";
  std::string variant = "strict";
  double p_drop = 0.1;
  double q = 0.87;
  double threshold = 0.15;
  std::string source = "shared";
};

void register_simulate(CLI::App& app, SimulateOpts& o, Common& c) {
  auto* sub = app.add_subcommand("simulate", "Generate paired trials and station event streams from a source model");
  sub->add_option("--model", o.model, "singlet, lossy, smeared, contextual, spreadsheet or balls")
      ->check(CLI::IsMember({"singlet", "lossy", "smeared", "contextual", "spreadsheet", "balls"}));
  sub->add_option("--angles", o.angles, "Analyzer angles in radians: 'a,b' or 'a,a_prime,b,b_prime'")->delimiter(',');
  sub->add_option("--n", o.n, "Number of trials")->check(CLI::PositiveNumber);
  add_real(sub, "--efficiency", o.efficiency, "Detection efficiency per station (lossy)")->check(CLI::Range(0.0, 1.0));
  add_real(sub, "--jitter", o.jitter, "Jitter half-width in radians (smeared)");
  sub->add_option("--density", o.density, "Jitter density (smeared)")
      ->check(CLI::IsMember({"uniform", "truncated_gaussian"}));
  sub->add_option("--generator", o.generator, "Spreadsheet generator: uniform or plus2");
  sub->add_option("--variant", o.variant, "Ball variant: strict, missing_pairs or partial_anticorr");
  add_real(sub, "--p-drop", o.p_drop, "Unprepared-pair probability (missing_pairs)")->check(CLI::Range(0.0, 1.0));
  add_real(sub, "--q", o.q, "Anti-correlation probability (partial_anticorr)")->check(CLI::Range(0.0, 1.0));
  add_real(sub, "--threshold", o.threshold, "Detection threshold tau0 (contextual)");
  sub->add_option("--source", o.source, "Hidden-state source (contextual)")->check(CLI::IsMember({"shared", "independent"}));
  for (auto* opt : sub->get_options()) {
    if (opt->get_default_str().empty()) opt->capture_default_str();
  }
  add_common(sub, c);
}

int run_simulate(const Context& ctx, const SimulateOpts& o) {
  SeededRng rng(ctx.seed, 0);
  std::vector<PairedTrial> trials;
  trials.reserve(o.n);
  json model = {{"name", o.model}};
  const fs::path dir(ctx.common.out_dir);

  if (o.model == "singlet" || o.model == "lossy" || o.model == "smeared") {
    if (o.angles.size() != 2 && o.angles.size() != 4) throw ConfigError("--angles takes 2 or 4 values");
    const bool four = o.angles.size() == 4;
    const AngleJitter base{Angle(0.0), o.model == "smeared" ? o.jitter : 0.0,
                           o.density == "uniform" ? JitterDensity::uniform : JitterDensity::truncated_gaussian};
    base.validate();
    for (std::size_t i = 0; i < o.n; ++i) {
      const int x = four ? static_cast<int>(rng.below(2)) : 0;
      const int y = four ? static_cast<int>(rng.below(2)) : 0;
      const Angle ta(o.angles[static_cast<std::size_t>(x)]);
      const Angle tb(o.angles[static_cast<std::size_t>(four ? 2 + y : 1)]);
      std::pair<Outcome, Outcome> ab;
      if (o.model == "singlet") {
        ab = sample_singlet_pair(ta, tb, rng);
      } else if (o.model == "lossy") {
        ab = sample_lossy_singlet_pair(ta, tb, o.efficiency, rng);
      } else {
        AngleJitter ja = base;
        AngleJitter jb = base;
        ja.center = ta;
        jb.center = tb;
        ab = sample_smeared_pair(ja, jb, rng);
      }
      trials.push_back(PairedTrial{x, y, ab.first, ab.second});
    }
    model["angles"] = o.angles;
  } else if (o.model == "contextual") {
    ContextualParams params = ContextualParams::tuned();
    params.threshold = o.threshold;
    params.source = o.source == "shared" ? SourceKind::shared_angle : SourceKind::independent_angles;
    params.validate();
    for (std::size_t i = 0; i < o.n; ++i) {
      const int x = static_cast<int>(rng.below(2));
      const int y = static_cast<int>(rng.below(2));
      trials.push_back(contextual_trial(x, y, params, rng));
    }
    model["angles_a"] = params.angles_a;
    model["angles_b"] = params.angles_b;
    model["threshold"] = params.threshold;
  } else if (o.model == "spreadsheet") {
    const Spreadsheet4 sheet = generate_cfd_spreadsheet(o.n, parse_generator(o.generator), rng);
    for (const auto& r : sheet.rows) {
      const int x = static_cast<int>(rng.below(2));
      const int y = static_cast<int>(rng.below(2));
      trials.push_back(PairedTrial{x, y, Outcome::from_int(x == 0 ? r.a : r.a_prime),
                                   Outcome::from_int(y == 0 ? r.b : r.b_prime)});
    }
    model["full_table_chsh"] = report::to_json(chsh_full_table(sheet));
    write_atomic(dir / "spreadsheet.csv", [&](std::ostream& f) { io::write_spreadsheet(f, sheet); });
  } else {
    const BallVariant variant = parse_variant(o.variant, o.p_drop, o.q);
    const auto balls = generate_tennis_balls(o.n, variant, rng);
    for (const auto& p : balls) {
      const int a = rng.uniform() < 0.5 ? 0 : 3;
      const int b = rng.uniform() < 0.5 ? 0 : 2;
      trials.push_back(measure_balls(p, a, b));
    }
    model["counterfactual_counters"] = report::to_json(counterfactual_counters(balls));
    write_atomic(dir / "balls.csv", [&](std::ostream& f) { io::write_balls(f, balls); });
  }

  write_atomic(dir / "trials.csv", [&](std::ostream& f) { io::write_trials(f, trials); });
  write_atomic(dir / "events_a.csv", [&](std::ostream& f) { io::write_events(f, events_of(trials, true)); });
  write_atomic(dir / "events_b.csv", [&](std::ostream& f) { io::write_events(f, events_of(trials, false)); });

  const Estimates est = estimate_block(trials, "all");
  json result = trial_overview(trials);
  result["model"] = model;
  result["estimates"] = est.block;
  emit_summary(ctx, result);
  return finish(ctx, est.undefined);
}

// ---------------------------------------------------------------------------
// pair / estimate
// ---------------------------------------------------------------------------

struct PairOpts {
  std::string events_a;
  std::string events_b;
  std::string pairing = "systematic:1";
};

PairingScheme parse_pairing(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("--pairing must read systematic:k, random:m or window:w");
  const std::string kind = text.substr(0, colon);
  std::uint64_t value = 0;
  try {
    std::size_t used = 0;
    const std::string number = text.substr(colon + 1);
    const long long v = std::stoll(number, &used);
    if (used != number.size() || v <= 0) throw std::invalid_argument(number);
    value = static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("--pairing parameter must be a positive integer: '" + text + "'");
  }
  if (kind == "systematic") return SystematicPairing{value};
  if (kind == "random") return RandomPairing{value};
  if (kind == "window") return TimeWindowPairing{value};
  throw ConfigError("unknown pairing scheme '" + kind + "'");
}

void register_pair(CLI::App& app, PairOpts& o, Common& c) {
  auto* sub = app.add_subcommand("pair", "Pair two station event streams into trials");
  sub->add_option("--events-a", o.events_a, "Station A events CSV")->option_text("PATH (required)");
  sub->add_option("--events-b", o.events_b, "Station B events CSV")->option_text("PATH (required)");
  sub->add_option("--pairing", o.pairing, "systematic:k, random:m or window:w")->capture_default_str();
  add_common(sub, c);
}

int run_pair(const Context& ctx, const PairOpts& o) {
  auto fa = open_input(o.events_a);
  auto fb = open_input(o.events_b);
  const auto ea = io::read_events(fa);
  const auto eb = io::read_events(fb);
  const PairingScheme scheme = parse_pairing(o.pairing);
  SeededRng rng(ctx.seed, 0);
  const auto trials = apply_pairing(scheme, ea, eb, rng);
  write_atomic(output_path(ctx, "trials.csv"), [&](std::ostream& f) { io::write_trials(f, trials); });

  json result = trial_overview(trials);
  result["events_a"] = ea.size();
  result["events_b"] = eb.size();
  const auto cov_all = covariance(trials, false);
  const auto cov_coinc = covariance(trials, true);
  result["covariance"] = report::optional_number(cov_all);
  result["covariance_coincident_only"] = report::optional_number(cov_coinc);
  result["correlation"] = report::optional_number(correlation(trials));
  bool undefined = !cov_all || !cov_coinc;
  if (has_labels_01(trials)) {
    const auto s = chsh(trials);
    result["chsh"] = report::to_json(s);
  }
  emit_summary(ctx, result);
  return finish(ctx, undefined);
}

struct EstimateOpts {
  std::string input;
  std::string statistic = "all";
};

void register_estimate(CLI::App& app, EstimateOpts& o, Common& c) {
  auto* sub = app.add_subcommand("estimate", "Compute inequality statistics from a trials CSV");
  sub->add_option("--input", o.input, "Trials CSV")->option_text("PATH (required)");
  sub->add_option("--statistic", o.statistic, "all, correlation, chsh, vongher or eberhard")
      ->check(CLI::IsMember({"all", "correlation", "chsh", "vongher", "eberhard"}))
      ->capture_default_str();
  add_common(sub, c, false);
}

int run_estimate(const Context& ctx, const EstimateOpts& o) {
  auto f = open_input(o.input);
  const auto trials = io::read_trials(f);
  const Estimates est = estimate_block(trials, o.statistic);
  json result = trial_overview(trials);
  result["estimates"] = est.block;
  result["undefined"] = est.undefined;
  emit_summary(ctx, result);
  return finish(ctx, est.undefined);
}

// ---------------------------------------------------------------------------
// Campaigns
// ---------------------------------------------------------------------------

struct GillOpts {
  std::size_t rows = 3200;
  std::size_t runs = 1000;
  std::string generator = "uniform";
};

void register_gill(CLI::App& app, GillOpts& o, Common& c) {
  auto* sub = app.add_subcommand("qrc-gill", "Coin-toss subsampling campaign over counterfactual spreadsheets");
  sub->add_option("--rows", o.rows, "Rows per spreadsheet (4N)")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--runs", o.runs, "Number of runs")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--generator", o.generator, "uniform or plus2")->capture_default_str();
  add_common(sub, c);
}

void write_chsh_cells(std::ostream& f, const ChshEstimate& e) {
  f << csv_number(e.s_value);
  for (const auto& t : e.terms) f << ',' << csv_number(t);
  for (auto n : e.sizes) f << ',' << n;
  f << ',' << (e.violates() ? 1 : 0);
}

int run_gill(const Context& ctx, const GillOpts& o) {
  const auto report = gill_campaign(parse_generator(o.generator), o.rows, o.runs, SeededRng(ctx.seed, 0));
  bool undefined = false;
  write_atomic(output_path(ctx, "runs.csv"), [&](std::ostream& f) {
    f << "run,s_value,e_ab,e_abp,e_apb,e_apbp,n_ab,n_abp,n_apb,n_apbp,chsh_violated\n";
    for (const auto& r : report.per_run) {
      f << r.run << ',';
      write_chsh_cells(f, r.chsh);
      f << '\n';
      undefined = undefined || !r.chsh.defined();
    }
  });
  json result = report::to_json(report);
  result["rows"] = o.rows;
  emit_summary(ctx, result);
  return finish(ctx, undefined);
}

struct VongherOpts {
  std::string variant = "strict";
  double p_drop = 0.1;
  double q = 0.87;
  std::size_t pairs = 800;
  std::size_t runs = 1000;
};

void register_vongher(CLI::App& app, VongherOpts& o, Common& c) {
  auto* sub = app.add_subcommand("qrc-vongher", "Repeated tennis-ball runs scored by the counter inequality and CHSH");
  sub->add_option("--variant", o.variant, "strict, missing_pairs, partial_anticorr or quantum")
      ->check(CLI::IsMember({"strict", "missing_pairs", "partial_anticorr", "quantum"}));
  add_real(sub, "--p-drop", o.p_drop, "Unprepared-pair probability (missing_pairs)")->check(CLI::Range(0.0, 1.0));
  add_real(sub, "--q", o.q, "Anti-correlation probability (partial_anticorr)")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--pairs", o.pairs, "Ball pairs per run")->check(CLI::PositiveNumber);
  sub->add_option("--runs", o.runs, "Number of runs")->check(CLI::PositiveNumber);
  for (auto* opt : sub->get_options()) {
    if (opt->get_default_str().empty()) opt->capture_default_str();
  }
  add_common(sub, c);
}

int run_vongher(const Context& ctx, const VongherOpts& o) {
  const VongherSource source =
      o.variant == "quantum" ? VongherSource{QuantumPairs{}} : VongherSource{parse_variant(o.variant, o.p_drop, o.q)};
  const auto report = vongher_campaign(source, o.pairs, o.runs, SeededRng(ctx.seed, 0));
  bool undefined = false;
  write_atomic(output_path(ctx, "runs.csv"), [&](std::ostream& f) {
    f << "run,n0_e,n0_u,n1_e,n1_u,n2_e,n2_u,n3_e,n3_u,bell_lhs,bell_rhs,bell_violated,"
         "s_value,e_ab,e_abp,e_apb,e_apbp,n_ab,n_abp,n_apb,n_apbp,chsh_violated\n";
    for (const auto& r : report.per_run) {
      f << r.run;
      for (std::size_t d = 0; d < 4; ++d) f << ',' << r.counters->n_e[d] << ',' << r.counters->n_u[d];
      f << ',' << r.bell->lhs << ',' << r.bell->rhs << ',' << (r.bell_violated ? 1 : 0) << ',';
      write_chsh_cells(f, r.chsh);
      f << '\n';
      undefined = undefined || !r.chsh.defined();
    }
  });
  json result = report::to_json(report);
  result["pairs"] = o.pairs;
  emit_summary(ctx, result);
  return finish(ctx, undefined);
}

// ---------------------------------------------------------------------------
// bellgame
// ---------------------------------------------------------------------------

struct GameOpts {
  std::string strategy = "random";
  std::size_t rounds = 100000;
};

Strategy parse_strategy(const std::string& text) {
  if (text == "random") return RandomPrograms{};
  if (text == "scripted") return ScriptedPrograms::four_minute_example();
  if (text == "contextual") return ContextualPrograms{};
  if (text == "quantum") return QuantumBoxes{};
  if (text.rfind("fixed:", 0) == 0) {
    const std::string rest = text.substr(6);
    const auto comma = rest.find(',');
    if (comma != std::string::npos && comma == 1 && rest.size() == 3) {
      const int i = rest[0] - '0';
      const int j = rest[2] - '0';
      if (i >= 1 && i <= 4 && j >= 1 && j <= 4) return FixedPrograms{i, j};
    }
    throw ConfigError("fixed strategy must read fixed:i,j with i, j in 1..4");
  }
  throw ConfigError("unknown strategy '" + text + "' (random, fixed:i,j, scripted, contextual, quantum)");
}

void register_game(CLI::App& app, GameOpts& o, Common& c) {
  auto* sub = app.add_subcommand("bellgame", "Play the two-box Bell game");
  sub->add_option("--strategy", o.strategy, "random, fixed:i,j, scripted, contextual or quantum")->capture_default_str();
  sub->add_option("--rounds", o.rounds, "Number of rounds (minutes)")->check(CLI::PositiveNumber)->capture_default_str();
  add_common(sub, c);
}

int run_game(const Context& ctx, const GameOpts& o) {
  SeededRng rng(ctx.seed, 0);
  const auto summary = play_game(parse_strategy(o.strategy), o.rounds, rng, true);
  write_atomic(output_path(ctx, "rounds.csv"), [&](std::ostream& f) { io::write_rounds(f, summary.log); });
  std::array<std::array<std::uint64_t, 2>, 4> by_setting{};  // (points, rounds) per (x, y)
  for (const auto& r : summary.log) {
    auto& cell = by_setting[static_cast<std::size_t>(r.x * 2 + r.y)];
    cell[0] += static_cast<std::uint64_t>(r.point);
    ++cell[1];
  }
  json settings = json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    settings.push_back({{"x", k / 2}, {"y", k % 2}, {"points", by_setting[k][0]}, {"rounds", by_setting[k][1]}});
  }
  json result{{"strategy", o.strategy},
              {"rounds", summary.rounds},
              {"points", summary.points},
              {"point_rate", static_cast<double>(summary.points) / static_cast<double>(summary.rounds)},
              {"avg_score", summary.avg_score},
              {"by_setting", settings}};
  emit_summary(ctx, result);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// homogeneity / breakdown
// ---------------------------------------------------------------------------

struct HomogeneityOpts {
  std::string input;
  std::size_t bins = 30;
  std::string method = "all";
  std::size_t parts = 2;
  std::string statistic = "auto";
  double null_bound = 0.0;
};

void register_homogeneity(CLI::App& app, HomogeneityOpts& o, Common& c) {
  auto* sub = app.add_subcommand("homogeneity", "Bin a recorded sample and test it for homogeneity");
  sub->add_option("--input", o.input, "Events CSV or trials CSV")->option_text("PATH (required)");
  sub->add_option("--bins", o.bins, "Number of contiguous bins")->check(CLI::Range(2, 1000000));
  sub->add_option("--method", o.method, "all, chi_square_splits, two_sample_ks or runs_test")
      ->check(CLI::IsMember({"all", "chi_square_splits", "two_sample_ks", "runs_test"}));
  sub->add_option("--parts", o.parts, "Contiguous parts for chi_square_splits")->check(CLI::Range(2, 1000));
  sub->add_option("--statistic", o.statistic,
                  "Per-bin statistic: events use mean or detection_rate; trials use j, correlation or chsh")
      ->check(CLI::IsMember({"auto", "mean", "detection_rate", "j", "correlation", "chsh"}));
  add_real(sub, "--null-bound", o.null_bound, "Bound of H0 for the Chebyshev confidence");
  for (auto* opt : sub->get_options()) {
    if (opt->get_default_str().empty()) opt->capture_default_str();
  }
  add_common(sub, c, false);
}

int run_homogeneity(const Context& ctx, const HomogeneityOpts& o) {
  auto f = open_input(o.input);
  const std::string header = io::peek_header(f);
  BinnedSample binned;
  std::vector<int> symbols;
  std::string statistic = o.statistic;
  std::string kind;
  if (header == io::kEventsHeader) {
    kind = "events";
    if (statistic == "auto") statistic = "mean";
    if (statistic != "mean" && statistic != "detection_rate") throw ConfigError("events support mean or detection_rate");
    const auto events = io::read_events(f);
    if (events.empty()) throw ConfigError("input has no events");
    for (const auto& e : events) symbols.push_back(e.outcome.value());
    const bool rate = statistic == "detection_rate";
    binned = bin_statistic_by_window(
        std::span<const StationEvent>(events), events.back().window_index + 1, o.bins,
        [](const StationEvent& e) { return e.window_index; },
        [rate](std::span<const StationEvent> bin) -> std::optional<double> {
          double sum = 0.0;
          double detected = 0.0;
          for (const auto& e : bin) {
            sum += e.outcome.value();
            detected += e.outcome.detected() ? 1.0 : 0.0;
          }
          if (rate) return detected / static_cast<double>(bin.size());
          if (detected == 0.0) return std::nullopt;
          return sum / detected;
        });
  } else if (header == io::kTrialsHeader) {
    kind = "trials";
    if (statistic == "auto") statistic = "j";
    if (statistic != "j" && statistic != "correlation" && statistic != "chsh") {
      throw ConfigError("trials support j, correlation or chsh");
    }
    const auto trials = io::read_trials(f);
    for (const auto& t : trials) {
      symbols.push_back(t.setting_a * 1000 + t.setting_b * 100 + (t.a.value() + 1) * 10 + (t.b.value() + 1));
    }
    binned = bin_statistic(std::span<const PairedTrial>(trials), o.bins,
                           [&statistic](std::span<const PairedTrial> bin) -> std::optional<double> {
                             if (statistic == "j") return static_cast<double>(eberhard_j(eberhard_counts(bin)));
                             if (statistic == "correlation") return correlation(bin);
                             return chsh(bin).s_value;
                           });
  } else {
    throw io::FormatError("unrecognized CSV header '" + header + "'");
  }

  bool undefined = false;
  json result{{"input_kind", kind}, {"statistic", statistic}, {"items", symbols.size()}};
  result["bins"] = {{"requested", o.bins},
                    {"values", binned.bin_values},
                    {"undefined_bins", binned.undefined_bins},
                    {"dropped_items", binned.dropped_items}};
  if (binned.bin_values.size() >= 2) {
    const MeanSem ms = sem(binned);
    result["sem"] = report::to_json(ms);
    result["chebyshev"] = report::to_json(chebyshev_confidence(ms.mean, ms.sem, o.null_bound));
    result["chebyshev"]["null_bound"] = o.null_bound;
  } else {
    result["sem"] = nullptr;
    undefined = true;
  }

  json tests = json::array();
  auto attempt = [&](HomogeneityMethod m, const std::function<HomogeneityResult()>& fn) {
    if (o.method != "all" && o.method != to_string(m)) return;
    try {
      tests.push_back(report::to_json(fn()));
    } catch (const std::invalid_argument& e) {
      tests.push_back({{"method", std::string(to_string(m))}, {"statistic", nullptr}, {"p_value", nullptr}, {"error", e.what()}});
      undefined = true;
    }
  };
  attempt(HomogeneityMethod::chi_square_splits,
          [&] { return homogeneity_test(std::span<const int>(symbols), HomogeneityMethod::chi_square_splits, o.parts); });
  attempt(HomogeneityMethod::two_sample_ks, [&] { return homogeneity_test(binned, HomogeneityMethod::two_sample_ks); });
  attempt(HomogeneityMethod::runs_test, [&] { return homogeneity_test(binned, HomogeneityMethod::runs_test); });
  result["tests"] = tests;
  result["notes"] = "chi_square_splits uses raw symbols across contiguous parts; KS and runs tests use bin values";
  emit_summary(ctx, result);
  return finish(ctx, undefined);
}

struct BreakdownOpts {
  std::string spec;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> run_len;
  double run_sem = 100.0;
  double pooled_sem = 2.0;
  std::size_t parts = 2;
};

void register_breakdown(CLI::App& app, BreakdownOpts& o, Common& c) {
  auto* sub = app.add_subcommand("breakdown", "Drifting-device demonstration of per-run vs pooled significance");
  sub->add_option("--spec", o.spec, "Device spec file; the built-in two-regime device when omitted");
  sub->add_option("--runs", o.runs, "Override the number of runs")->check(CLI::PositiveNumber);
  sub->add_option("--run-len", o.run_len, "Override items per run")->check(CLI::Range(2, 1000000000));
  add_real(sub, "--run-sem", o.run_sem, "Per-run rejection threshold in SEM");
  add_real(sub, "--pooled-sem", o.pooled_sem, "Pooled rejection threshold in SEM");
  sub->add_option("--parts", o.parts, "Contiguous run groups for the homogeneity test")->capture_default_str();
  add_common(sub, c);
}

int run_breakdown(const Context& ctx, const BreakdownOpts& o) {
  DriftingDeviceSpec spec = DriftingDeviceSpec::default_two_regime();
  if (!o.spec.empty()) {
    auto f = open_input(o.spec);
    spec = io::read_drifting_spec(f);
  }
  if (o.runs) spec.runs = *o.runs;
  if (o.run_len) spec.run_len = *o.run_len;
  const BreakdownThresholds thresholds{o.run_sem, o.pooled_sem, o.parts};
  const auto report = breakdown_demo(spec, SeededRng(ctx.seed, 0), thresholds);

  write_atomic(output_path(ctx, "runs.csv"), [&](std::ostream& f) {
    f << "run";
    for (std::size_t s = 0; s < spec.n_symbols; ++s) f << ",count_" << s;
    f << ",mean,sem,z,rejects\n";
    for (const auto& v : report.runs) {
      f << v.run + 1;
      for (auto c : v.symbol_counts) f << ',' << c;
      f << fmt::format(",{:.17g},{:.17g},{:.17g},{}\n", v.mean, v.sem, v.z, v.rejects ? 1 : 0);
    }
  });

  std::ostringstream spec_text;
  io::write_drifting_spec(spec_text, spec);
  json rejecting = json::array();
  for (const auto& v : report.runs) {
    if (v.rejects) rejecting.push_back({{"run", v.run + 1}, {"mean", v.mean}, {"sem", v.sem}, {"z", v.z}});
  }
  json result{{"spec", spec_text.str()},
              {"runs", spec.runs},
              {"run_len", spec.run_len},
              {"thresholds", {{"run_sem", o.run_sem}, {"pooled_sem", o.pooled_sem}, {"parts", o.parts}}},
              {"runs_rejecting", report.runs_rejecting},
              {"rejecting_runs", rejecting},
              {"pooled", report::to_json(report.pooled)},
              {"pooled_z", report.pooled_z},
              {"pooled_rejects", report.pooled_rejects},
              {"homogeneity", report::to_json(report.homogeneity)},
              {"contradiction", report.contradiction}};
  emit_summary(ctx, result);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

struct ReproduceOpts {
  std::string target = "all";
};

void register_reproduce(CLI::App& app, ReproduceOpts& o, Common& c) {
  auto* sub = app.add_subcommand("reproduce", "Run the acceptance computations and print them next to their targets");
  sub->add_option("--target", o.target, "all or one of the named targets")
      ->check(CLI::IsMember(criteria::targets()))
      ->capture_default_str();
  add_common(sub, c);
}

int run_reproduce(const Context& ctx, const ReproduceOpts& o) {
  const auto results = criteria::run_target(o.target, ctx.seed);
  json out = json::array();
  for (const auto& r : results) {
    *ctx.out << r.summary_line() << '\n';
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back({{"label", c.label}, {"pass", c.pass}, {"detail", c.detail}});
    out.push_back({{"criterion", r.id}, {"title", r.title}, {"pass", r.pass()}, {"checks", checks}, {"data", r.data}});
  }
  json doc = json::object();
  doc["tool"] = "bell_lab";
  doc["version"] = std::string(kVersion);
  doc["subcommand"] = "reproduce";
  doc["seed"] = ctx.seeded ? json(ctx.seed) : json(nullptr);
  doc["seed_generated"] = ctx.seed_generated;
  doc["config"] = config_echo(*ctx.sub);
  doc["result"] = out;
  const std::string text = doc.dump(2) + "\n";
  write_atomic(output_path(ctx, ctx.common.summary), [&](std::ostream& f) { f << text; });
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bell-test simulation laboratory", "bell_lab"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common common;
  SimulateOpts simulate;
  PairOpts pair;
  EstimateOpts estimate;
  GillOpts gill;
  VongherOpts vongher;
  GameOpts game;
  HomogeneityOpts homogeneity;
  BreakdownOpts breakdown;
  ReproduceOpts reproduce;
  register_simulate(app, simulate, common);
  register_pair(app, pair, common);
  register_estimate(app, estimate, common);
  register_gill(app, gill, common);
  register_vongher(app, vongher, common);
  register_game(app, game, common);
  register_homogeneity(app, homogeneity, common);
  register_breakdown(app, breakdown, common);
  register_reproduce(app, reproduce, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  Context ctx;
  ctx.sub = sub;
  ctx.out = &out;

  try {
    if (!common.config.empty()) apply_config(*sub, common.config);
    for (const char* name : {"--events-a", "--events-b", "--input"}) {
      if (sub->get_option_no_throw(name) != nullptr) require_option(*sub, name);
    }
    ctx.common = common;
    if (sub->get_option_no_throw("--seed") == nullptr) {
      ctx.seeded = false;
    } else if (common.seed) {
      ctx.seed = *common.seed;
    } else if (sub->get_name() == "reproduce") {
      ctx.seed = criteria::kDefaultSeed;
    } else {
      std::random_device rd;
      ctx.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      ctx.seed_generated = true;
    }

    const std::string name = sub->get_name();
    if (name == "simulate") return run_simulate(ctx, simulate);
    if (name == "pair") return run_pair(ctx, pair);
    if (name == "estimate") return run_estimate(ctx, estimate);
    if (name == "qrc-gill") return run_gill(ctx, gill);
    if (name == "qrc-vongher") return run_vongher(ctx, vongher);
    if (name == "bellgame") return run_game(ctx, game);
    if (name == "homogeneity") return run_homogeneity(ctx, homogeneity);
    if (name == "breakdown") return run_breakdown(ctx, breakdown);
    if (name == "reproduce") return run_reproduce(ctx, reproduce);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const io::FormatError& e) {
    err << "error: malformed input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace bell_lab::cli
