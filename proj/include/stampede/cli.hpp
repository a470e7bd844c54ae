#pragma once

// stampede-lab command line: ingest, regress, simulate, mine, risk, report.
//
// Configuration layers, later wins:
//   built-in defaults < STAMPEDE_DATA_DIR < --config FILE < scenario "params"
//   < --set key=value < dedicated flags (--seed, --agents, ...)
//
// Exit codes: 0 ok, 1 internal error, 2 input or validation error. Errors are
// written to stderr as one JSON object {"error": kind, "message": text}.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "stampede/crowdsim.hpp"
#include "stampede/dataset.hpp"
#include "stampede/io.hpp"
#include "stampede/regression.hpp"
#include "stampede/risk.hpp"
#include "stampede/textmine.hpp"

namespace stampede::cli {

using io::Json;

#ifdef STAMPEDE_DEFAULT_DATA_DIR
inline constexpr const char* kDefaultDataDir = STAMPEDE_DEFAULT_DATA_DIR;
#else
inline constexpr const char* kDefaultDataDir = "data";
#endif

enum class Format { Json, Csv };

struct RegressConfig {
  std::string response = "fatalities";
  std::vector<std::string> predictors = {"density", "admin_score"};
  bool normalize = false;
  std::string trend;  // series name; empty = full model
};

struct SimulateConfig {
  int agents = 200;
  double duration = 120.0;
  bool vip_closure = true;
  int threads = 0;  // 0 = hardware concurrency
  std::uint64_t trajectory_stride = 10;
  crowdsim::RitualSchedule ritual;
};

struct MineConfig {
  std::size_t ngram = 2;
  std::size_t top_k = 5;
  std::string stopwords;  // file; empty = built-in list
  bool stem = true;
};

struct RiskConfig {
  risk::CriWeights weights;
  double velocity_multiplier = 1.58;
  double choke_threshold = 4.0;  // m
};

struct RunConfig {
  std::string subcommand;
  std::string data_dir = kDefaultDataDir;
  std::string output;  // empty = stdout
  std::uint64_t seed = 42;
  Format format = Format::Json;
  crowdsim::SimParams params;
  RegressConfig regress;
  SimulateConfig simulate;
  MineConfig mine;
  RiskConfig risk;
};

/// Every recognized configuration key with its default value.
inline Json default_config_json() {
  const RunConfig d;
  return Json{{"data_dir", d.data_dir},
              {"seed", d.seed},
              {"format", "json"},
              {"params", [&] {
                 Json p = io::params_json(d.params);
                 p.erase("seed");
                 return p;
               }()},
              {"regress",
               Json{{"response", d.regress.response},
                    {"predictors", d.regress.predictors},
                    {"normalize", d.regress.normalize},
                    {"trend", d.regress.trend}}},
              {"simulate",
               Json{{"agents", d.simulate.agents},
                    {"duration_s", d.simulate.duration},
                    {"vip_closure", d.simulate.vip_closure},
                    {"threads", d.simulate.threads},
                    {"trajectory_stride", d.simulate.trajectory_stride},
                    {"ritual_windows", Json::array()}}},
              {"mine",
               Json{{"ngram", d.mine.ngram}, {"top_k", d.mine.top_k}, {"stopwords", d.mine.stopwords}, {"stem", d.mine.stem}}},
              {"risk",
               Json{{"weights",
                     Json{{"density", d.risk.weights.density},
                          {"choke", d.risk.weights.choke},
                          {"velocity", d.risk.weights.velocity},
                          {"admin", d.risk.weights.admin}}},
                    {"velocity_multiplier", d.risk.velocity_multiplier},
                    {"choke_threshold_m", d.risk.choke_threshold}}}};
}

namespace detail {

/// Rejects keys of `layer` that have no counterpart in `schema`.
inline void check_layer(const Json& layer, const Json& schema, const std::string& where) {
  if (!layer.is_object()) throw Error(ErrorKind::InvalidConfig, (where.empty() ? "config" : where) + " must be an object");
  for (const auto& [key, value] : layer.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!schema.contains(key)) throw Error(ErrorKind::InvalidConfig, "unknown config key '" + path + "'");
    if (path == "params") {
      if (value.is_object() && value.contains("seed")) {
        throw Error(ErrorKind::InvalidConfig, "set the seed with the top-level 'seed' key");
      }
      crowdsim::SimParams scratch;
      io::apply_params(scratch, value);
    } else if (schema[key].is_object()) {
      check_layer(value, schema[key], path);
    }
  }
}

inline void merge(Json& base, const Json& layer) {
  for (const auto& [key, value] : layer.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object()) {
      merge(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

/// Applies "a.b.c=value". Bare simulation parameter names resolve to
/// params.NAME. The value is read as JSON when it parses, else as a string.
inline void apply_set(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::InvalidConfig, "--set expects key=value, got '" + assignment + "'");
  }
  std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  if (key.find('.') == std::string::npos && !config.contains(key)) key = "params." + key;
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json layer = Json::object();
  Json* node = &layer;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
  check_layer(layer, default_config_json(), "");
  merge(config, layer);
}

template <class T>
T get(const Json& j, const char* path) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::InvalidConfig, std::string("config key '") + path + "' has the wrong type");
  }
}

inline RunConfig typed_config(const Json& j) {
  RunConfig c;
  c.data_dir = get<std::string>(j["data_dir"], "data_dir");
  const auto seed = j["seed"];
  if (!seed.is_number_unsigned()) throw Error(ErrorKind::InvalidConfig, "seed must be a non-negative integer");
  c.seed = seed.get<std::uint64_t>();
  const auto format = get<std::string>(j["format"], "format");
  if (format == "json") {
    c.format = Format::Json;
  } else if (format == "csv") {
    c.format = Format::Csv;
  } else {
    throw Error(ErrorKind::InvalidConfig, "format must be json or csv, got '" + format + "'");
  }
  io::apply_params(c.params, j["params"]);
  c.params.seed = c.seed;

  const auto& r = j["regress"];
  c.regress.response = get<std::string>(r["response"], "regress.response");
  c.regress.predictors = get<std::vector<std::string>>(r["predictors"], "regress.predictors");
  c.regress.normalize = get<bool>(r["normalize"], "regress.normalize");
  c.regress.trend = get<std::string>(r["trend"], "regress.trend");

  const auto& s = j["simulate"];
  c.simulate.agents = get<int>(s["agents"], "simulate.agents");
  c.simulate.duration = get<double>(s["duration_s"], "simulate.duration_s");
  c.simulate.vip_closure = get<bool>(s["vip_closure"], "simulate.vip_closure");
  c.simulate.threads = get<int>(s["threads"], "simulate.threads");
  c.simulate.trajectory_stride = get<std::uint64_t>(s["trajectory_stride"], "simulate.trajectory_stride");
  c.simulate.ritual = io::ritual_from_json(s["ritual_windows"]);
  if (c.simulate.agents < 0) throw Error(ErrorKind::InvalidConfig, "simulate.agents must be >= 0");
  if (c.simulate.threads < 0) throw Error(ErrorKind::InvalidConfig, "simulate.threads must be >= 0");

  const auto& m = j["mine"];
  c.mine.ngram = get<std::size_t>(m["ngram"], "mine.ngram");
  c.mine.top_k = get<std::size_t>(m["top_k"], "mine.top_k");
  c.mine.stopwords = get<std::string>(m["stopwords"], "mine.stopwords");
  c.mine.stem = get<bool>(m["stem"], "mine.stem");

  const auto& k = j["risk"];
  const auto& w = k["weights"];
  c.risk.weights = {get<double>(w["density"], "risk.weights.density"), get<double>(w["choke"], "risk.weights.choke"),
                    get<double>(w["velocity"], "risk.weights.velocity"), get<double>(w["admin"], "risk.weights.admin")};
  risk::validate(c.risk.weights);
  c.risk.velocity_multiplier = get<double>(k["velocity_multiplier"], "risk.velocity_multiplier");
  c.risk.choke_threshold = get<double>(k["choke_threshold_m"], "risk.choke_threshold_m");
  return c;
}

inline Json read_json_file(const std::string& path) {
  const std::string text = csv::read_file(path);
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::InvalidConfig, path + ": not valid JSON");
  return j;
}

inline risk::CriWeights parse_weights(const std::string& text) {
  std::vector<double> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto v = csv::parse_real(item);
    if (!v) throw Error(ErrorKind::BadWeights, "--weights expects four numbers, got '" + text + "'");
    parts.push_back(*v);
  }
  if (parts.size() != 4) throw Error(ErrorKind::BadWeights, "--weights expects four comma-separated numbers");
  return {parts[0], parts[1], parts[2], parts[3]};
}

/// Numeric panel column by name.
inline std::vector<double> panel_column(const dataset::JoinedPanel& panel, const std::string& name) {
  std::vector<double> out;
  for (const auto& r : panel.rows) {
    if (name == "fatalities") {
      out.push_back(static_cast<double>(r.incident.fatalities));
    } else if (name == "injuries") {
      out.push_back(static_cast<double>(r.incident.injuries));
    } else if (name == "density") {
      out.push_back(r.incident.density);
    } else if (name == "admin_score") {
      out.push_back(r.inquiry.effectiveness_score);
    } else if (name == "chokepoint_width") {
      out.push_back(r.venue.chokepoint_width);
    } else if (name == "exits") {
      out.push_back(r.venue.exits);
    } else if (name == "vip_routes") {
      out.push_back(r.venue.vip_routes);
    } else if (name == "year") {
      out.push_back(r.year);
    } else {
      throw Error(ErrorKind::InvalidConfig,
                  "unknown panel column '" + name +
                      "' (expected fatalities, injuries, density, admin_score, chokepoint_width, exits, vip_routes, year)");
    }
  }
  return out;
}

inline unsigned thread_count(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands. Each returns the artifact text written to stdout (or --output).

inline dataset::BundledData load_panel(const RunConfig& c) { return dataset::load_data_dir(c.data_dir); }

inline std::string cmd_ingest(const RunConfig& c, std::ostream& err) {
  const auto data = load_panel(c);
  const auto warnings = data.all_warnings();
  err << data.panel.size() << " years joined, " << warnings.size() << (warnings.size() == 1 ? " warning" : " warnings")
      << "\n";
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  if (c.format == Format::Csv) return io::panel_csv(data.panel);
  return io::dump(io::panel_json(data.panel, warnings));
}

inline regression::RegressionFit fit_panel(const dataset::JoinedPanel& panel, const RegressConfig& r) {
  std::vector<std::vector<double>> columns;
  for (const auto& name : r.predictors) {
    auto col = detail::panel_column(panel, name);
    if (r.normalize) col = dataset::minmax_normalize(col).values;
    columns.push_back(std::move(col));
  }
  const auto x = regression::DesignMatrix::from_columns(r.predictors, columns, true);
  return regression::fit_ols(x, detail::panel_column(panel, r.response));
}

inline regression::TrendFit trend_panel(const dataset::JoinedPanel& panel, const std::string& series) {
  std::vector<int> years;
  for (const auto& row : panel.rows) years.push_back(row.year);
  return regression::fit_trend(years, detail::panel_column(panel, series));
}

inline std::string cmd_regress(const RunConfig& c) {
  const auto data = load_panel(c);
  if (!c.regress.trend.empty()) {
    const auto fit = trend_panel(data.panel, c.regress.trend);
    return c.format == Format::Csv ? io::trend_csv(fit, c.regress.trend) : io::dump(io::trend_json(fit, c.regress.trend));
  }
  const auto fit = fit_panel(data.panel, c.regress);
  if (c.format == Format::Csv) return io::fit_csv(fit);
  Json j = io::fit_json(fit, c.regress.response);
  j["normalized"] = c.regress.normalize;
  return io::dump(j);
}

struct SimulateRequest {
  std::optional<int> preset;
  std::string scenario_path;
  std::string trajectory_path;
};

inline crowdsim::Scenario preset_scenario(const RunConfig& c, int year, const std::vector<dataset::VenueGeometry>& venues) {
  return crowdsim::build_preset(year, venues, {c.simulate.agents, c.simulate.duration, c.simulate.vip_closure});
}

inline Json scenario_summary(const crowdsim::Scenario& s) {
  Json j{{"preset_year", s.preset_year ? Json(*s.preset_year) : Json(nullptr)},
         {"chokepoint_width_m", io::round6(s.chokepoint_width)},
         {"exits", s.exits.size()},
         {"open_exits", s.open_exit_count()},
         {"agents", s.agent_count},
         {"duration_s", io::round6(s.duration)}};
  return j;
}

inline crowdsim::SimOutcome simulate(const RunConfig& c, const crowdsim::Scenario& scenario,
                                     const crowdsim::Simulator::Observer& observer = {}) {
  crowdsim::Simulator sim(scenario, c.params, c.simulate.ritual, detail::thread_count(c.simulate.threads));
  return sim.run(sim.initial_state(), observer);
}

/// Builds the scenario named by the request: a preset year (venues.csv from
/// the data directory) or a scenario file whose agents and duration have
/// already been folded into `c.simulate`.
inline crowdsim::Scenario request_scenario(const RunConfig& c, const SimulateRequest& req) {
  if (req.preset) {
    const auto venues = dataset::load_venues(c.data_dir + "/venues.csv").records;
    return preset_scenario(c, *req.preset, venues);
  }
  if (req.scenario_path.empty()) throw Error(ErrorKind::InvalidConfig, "simulate needs --preset YEAR or --scenario FILE");
  auto s = io::scenario_from_json(detail::read_json_file(req.scenario_path));
  s.agent_count = c.simulate.agents;
  s.duration = c.simulate.duration;
  if (s.agent_count < 0 || s.duration < 0.0) throw Error(ErrorKind::InvalidConfig, "agents and duration must be >= 0");
  return s;
}

inline std::string cmd_simulate(const RunConfig& c, const SimulateRequest& req) {
  const auto scenario = request_scenario(c, req);
  crowdsim::SimOutcome outcome;
  if (!req.trajectory_path.empty()) {
    std::ofstream traj(req.trajectory_path, std::ios::binary);
    if (!traj) throw Error(ErrorKind::FileNotFound, "cannot write " + req.trajectory_path);
    io::TrajectoryWriter writer(traj, c.simulate.trajectory_stride);
    outcome = simulate(c, scenario, std::ref(writer));
  } else {
    outcome = simulate(c, scenario);
  }
  if (c.format == Format::Csv) return io::outcome_csv(outcome);
  Json j = io::outcome_json(outcome);
  j["scenario"] = scenario_summary(scenario);
  j["ritual_windows"] = io::ritual_json(c.simulate.ritual);
  j["params"] = io::params_json(c.params);
  return io::dump(j);
}

inline textmine::Normalizer normalizer(const MineConfig& m) {
  textmine::Normalizer norm;
  norm.stemming = m.stem;
  if (!m.stopwords.empty()) norm.stoplist = textmine::StopList::from_file(m.stopwords);
  return norm;
}

inline std::string cmd_mine(const RunConfig& c, const std::string& corpus_path) {
  const auto corpus = textmine::load_corpus(corpus_path.empty() ? c.data_dir + "/inquiries.csv" : corpus_path);
  const auto norm = normalizer(c.mine);
  const auto model = textmine::tfidf(corpus, norm);
  if (c.format == Format::Csv) return io::model_csv(model);
  Json top = Json::array();
  for (std::size_t d = 0; d < model.years.size(); ++d) {
    Json terms = Json::array();
    for (const auto& [term, w] : textmine::top_terms(model, d, c.mine.top_k)) {
      terms.push_back(Json{{"term", term}, {"weight", io::round6(w)}});
    }
    top.push_back(Json{{"year", model.years[d]}, {"terms", terms}});
  }
  const auto phrases = textmine::recurring_phrases(corpus, c.mine.ngram, norm);
  return io::dump(Json{{"model", io::model_json(model)},
                       {"top_terms", top},
                       {"recurring_phrases", Json{{"n", c.mine.ngram}, {"phrases", io::phrases_json(phrases)}}}});
}

inline std::string cmd_risk(const RunConfig& c) {
  const auto data = load_panel(c);
  const auto timeline = risk::cri_timeline(data.panel, c.risk.weights, {}, c.risk.velocity_multiplier);
  if (c.format == Format::Csv) return io::cri_csv(timeline);
  const double fraction = risk::choke_fraction(data.venues.records, c.risk.choke_threshold);
  return io::dump(Json{{"timeline", io::cri_json(timeline)},
                       {"choke_fraction",
                        Json{{"threshold_m", io::round6(c.risk.choke_threshold)}, {"fraction", io::round6(fraction)}}}});
}

// ---------------------------------------------------------------------------
// Report

namespace detail {

inline std::string cell(const std::optional<double>& v) { return v ? io::fixed6(*v) : "not reached"; }

}  // namespace detail

/// Markdown summary of the whole pipeline on the data directory: panel,
/// regression, CRI timeline, one simulated preset per panel year, density
/// breaches, recurring phrases and dominant terms.
inline std::string cmd_report(const RunConfig& c) {
  using io::fixed6;
  const auto data = load_panel(c);
  const auto& panel = data.panel;
  const auto warnings = data.all_warnings();
  std::ostringstream md;

  std::vector<std::string> years;
  for (const auto& r : panel.rows) years.push_back(std::to_string(r.year));
  md << "# Stampede risk report\n\n";
  md << "- data: " << panel.size() << " years joined (" << detail::join(years, ", ") << "), " << warnings.size()
     << " warnings\n";
  md << "- seed: " << c.seed << "\n";
  md << "- simulation: " << c.simulate.agents << " agents per preset, " << fixed6(c.simulate.duration)
     << " s horizon, VIP closure " << (c.simulate.vip_closure ? "on" : "off") << ", dt " << fixed6(c.params.dt)
     << " s\n\n";

  md << "## Regression\n\n";
  const auto fit = fit_panel(panel, c.regress);
  md << "Model: " << c.regress.response << " ~ " << detail::join(fit.names, " + ") << " (n = " << panel.size()
     << ", dof = " << fit.dof << ", R^2 = " << fixed6(fit.r_squared) << (c.regress.normalize ? ", min-max scaled" : "")
     << ")\n\n";
  md << "| term | coefficient | std error | t | p |\n|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    md << "| " << fit.names[i] << " | " << fixed6(fit.coefficients[i]) << " | ";
    if (fit.diagnostics) {
      md << fixed6(fit.diagnostics->std_errors[i]) << " | " << fixed6(fit.diagnostics->t_stats[i]) << " | "
         << fixed6(fit.diagnostics->p_values[i]) << " |\n";
    } else {
      md << "n/a | n/a | n/a |\n";
    }
  }
  const auto trend = trend_panel(panel, c.regress.response);
  md << "\nTrend: " << c.regress.response << " changes by " << fixed6(trend.slope) << " per year (R^2 = "
     << fixed6(trend.r_squared) << ").\n\n";

  md << "## Crowd Risk Index\n\n";
  const auto timeline = risk::cri_timeline(panel, c.risk.weights, {}, c.risk.velocity_multiplier);
  md << "Weights: density " << fixed6(c.risk.weights.density) << ", choke " << fixed6(c.risk.weights.choke)
     << ", velocity " << fixed6(c.risk.weights.velocity) << ", admin " << fixed6(c.risk.weights.admin)
     << "; velocity multiplier " << fixed6(c.risk.velocity_multiplier) << ".\n\n";
  md << "| year | CRI | density | choke | velocity | admin | recorded density level |\n|---|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < timeline.size(); ++i) {
    const auto& b = timeline[i].breakdown;
    md << "| " << timeline[i].year << " | " << fixed6(b.cri) << " | " << fixed6(b.density) << " | " << fixed6(b.choke)
       << " | " << fixed6(b.velocity) << " | " << fixed6(b.admin) << " | "
       << risk::to_string(risk::classify_density(panel.rows[i].incident.density)) << " |\n";
  }
  md << "\nChoke fraction (width < " << fixed6(c.risk.choke_threshold)
     << " m): " << fixed6(risk::choke_fraction(data.venues.records, c.risk.choke_threshold)) << "\n\n";

  md << "## Simulated presets\n\n";
  md << "| year | chokepoint m | open exits | exited | incapacitated | active | peak density | 90% exit s | breach events |\n"
     << "|---|---|---|---|---|---|---|---|---|\n";
  std::vector<std::pair<int, crowdsim::SimOutcome>> outcomes;
  for (const auto& row : panel.rows) {
    const auto scenario = crowdsim::build_preset(row.venue, {c.simulate.agents, c.simulate.duration, c.simulate.vip_closure});
    const auto o = simulate(c, scenario);
    md << "| " << row.year << " | " << fixed6(scenario.chokepoint_width) << " | " << scenario.open_exit_count() << "/"
       << scenario.exits.size() << " | " << o.exited << " | " << o.incapacitated << " | " << o.active << " | "
       << fixed6(o.peak_density) << " | " << detail::cell(o.time_to_90pct_exit) << " | " << o.breach_events.size()
       << " |\n";
    outcomes.emplace_back(row.year, o);
  }

  md << "\n## Density breaches\n\n";
  const risk::RiskThresholds thresholds;
  bool any = false;
  for (const auto& [year, o] : outcomes) {
    if (o.breach_events.empty()) continue;
    any = true;
    std::size_t critical = 0;
    for (const auto& b : o.breach_events) critical += b.level == risk::DensityLevel::Critical ? 1 : 0;
    const auto& first = o.breach_events.front();
    md << "- " << year << ": " << o.breach_events.size() << " onsets (" << critical << " critical), first at t = "
       << fixed6(first.time) << " s in cell (" << first.ix << ", " << first.iy << ") at " << fixed6(first.density)
       << " persons/m^2\n";
  }
  if (!any) {
    double peak = 0.0;
    for (const auto& [year, o] : outcomes) peak = std::max(peak, o.peak_density);
    md << "No density breaches: the highest simulated cell density was " << fixed6(peak)
       << " persons/m^2, below the elevated threshold of " << fixed6(thresholds.elevated) << ".\n";
  }

  md << "\n## Recurring phrases\n\n";
  const auto corpus = textmine::corpus_from_inquiries(data.inquiries.records);
  const auto norm = normalizer(c.mine);
  const auto phrases = textmine::recurring_phrases(corpus, c.mine.ngram, norm);
  if (phrases.empty()) {
    md << "no recurring phrases (n = " << c.mine.ngram << ")\n";
  } else {
    for (const auto& p : phrases) {
      std::vector<std::string> ys;
      for (int y : p.years) ys.push_back(std::to_string(y));
      md << "- " << p.ngram << ": " << detail::join(ys, ", ") << "\n";
    }
  }

  md << "\n## Dominant terms\n\n| year | terms |\n|---|---|\n";
  const auto model = textmine::tfidf(corpus, norm);
  for (std::size_t d = 0; d < model.years.size(); ++d) {
    std::vector<std::string> terms;
    for (const auto& [term, w] : textmine::top_terms(model, d, c.mine.top_k)) {
      if (w > 0.0) terms.push_back(term + " " + fixed6(w));
    }
    md << "| " << model.years[d] << " | " << detail::join(terms, ", ") << " |\n";
  }
  return md.str();
}

// ---------------------------------------------------------------------------
// Entry point

inline std::string error_json(std::string_view kind, const std::string& message) {
  return Json{{"error", kind}, {"message", message}}.dump() + "\n";
}

/// Runs one invocation. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Crowd-disaster analysis toolkit", "stampede-lab"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string data_dir;
  std::string format;
  std::string config_path;
  std::string output;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  app.add_option("--data-dir", data_dir, "Directory holding incidents.csv, inquiries.csv, venues.csv");
  app.add_option("--format", format, "Output format: json or csv");
  app.add_option("--seed", seed, "Random seed (default 42)");
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--set", sets, "Override a config key: key=value (repeatable)");
  app.add_option("-o,--output", output, "Write the artifact to FILE instead of stdout");

  auto* ingest = app.add_subcommand("ingest", "Load, validate and join the three tables");

  auto* regress = app.add_subcommand("regress", "OLS fit or trend on the joined panel");
  std::string predictors;
  std::string response;
  bool normalize = false;
  std::string trend;
  regress->add_option("--predictors", predictors, "Comma-separated predictor columns");
  regress->add_option("--response", response, "Response column");
  regress->add_flag("--normalize", normalize, "Min-max scale predictors");
  regress->add_option("--trend", trend, "Fit SERIES against calendar year instead");

  auto* sim = app.add_subcommand("simulate", "Run the crowd simulator");
  std::optional<int> preset;
  std::string scenario_path;
  std::optional<int> agents;
  std::optional<double> duration;
  bool no_vip = false;
  std::vector<std::string> rituals;
  std::optional<int> threads;
  std::string trajectory;
  std::optional<std::uint64_t> stride;
  auto* preset_opt = sim->add_option("--preset", preset, "Preset venue year");
  auto* scenario_opt = sim->add_option("--scenario", scenario_path, "Scenario JSON file");
  preset_opt->excludes(scenario_opt);
  sim->add_option("--agents", agents, "Agent count");
  sim->add_option("--duration", duration, "Simulated seconds");
  sim->add_flag("--no-vip-closure", no_vip, "Keep every preset exit open");
  sim->add_option("--ritual", rituals, "Ritual window start:end:multiplier (repeatable)");
  sim->add_option("--trajectory", trajectory, "Write a trajectory CSV");
  sim->add_option("--stride", stride, "Trajectory sampling stride in steps");

  auto* mine = app.add_subcommand("mine", "TF-IDF and recurring phrases over inquiry text");
  std::string corpus;
  std::optional<std::size_t> ngram;
  std::optional<std::size_t> top_k;
  std::string stopwords;
  bool no_stem = false;
  mine->add_option("--corpus", corpus, "inquiries CSV or directory of YEAR.txt files");
  mine->add_option("--ngram", ngram, "Recurring phrase length");
  mine->add_option("--top-k", top_k, "Dominant terms per document");
  mine->add_option("--stopwords", stopwords, "Stopword file, one word per line");
  mine->add_flag("--no-stem", no_stem, "Skip stemming");

  auto* risk_cmd = app.add_subcommand("risk", "Crowd Risk Index timeline");
  std::string weights;
  std::optional<double> multiplier;
  risk_cmd->add_option("--weights", weights, "density,choke,velocity,admin");
  risk_cmd->add_option("--multiplier", multiplier, "Velocity multiplier applied to every year");

  auto* report = app.add_subcommand("report", "Markdown report over the full pipeline");
  for (auto* sub : {sim, report}) sub->add_option("--threads", threads, "Simulator threads (0 = all cores)");
  report->add_option("--agents", agents, "Agent count per preset");
  report->add_option("--duration", duration, "Simulated seconds per preset");
  report->add_flag("--no-vip-closure", no_vip, "Keep every preset exit open");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("UsageError", e.what());
    return 2;
  }

  try {
    RunConfig config;
    Json layered = default_config_json();
    if (const char* env = std::getenv("STAMPEDE_DATA_DIR"); env && *env) layered["data_dir"] = env;
    if (!config_path.empty()) {
      const Json file = detail::read_json_file(config_path);
      detail::check_layer(file, default_config_json(), "");
      detail::merge(layered, file);
    }
    if (sim->parsed() && !scenario_path.empty()) {
      const Json file = detail::read_json_file(scenario_path);
      Json layer = Json::object();
      if (file.contains("agents")) layer["simulate"]["agents"] = file["agents"];
      if (file.contains("duration_s")) layer["simulate"]["duration_s"] = file["duration_s"];
      if (file.contains("ritual_windows")) layer["simulate"]["ritual_windows"] = file["ritual_windows"];
      if (file.contains("params")) {
        Json params = file["params"];
        if (params.is_object() && params.contains("seed")) {
          layer["seed"] = params["seed"];
          params.erase("seed");
        }
        layer["params"] = params;
      }
      detail::check_layer(layer, default_config_json(), "");
      detail::merge(layered, layer);
    }
    for (const auto& s : sets) detail::apply_set(layered, s);

    if (!data_dir.empty()) layered["data_dir"] = data_dir;
    if (!format.empty()) layered["format"] = format;
    if (seed) layered["seed"] = *seed;
    if (!predictors.empty()) {
      std::vector<std::string> names;
      std::stringstream in(predictors);
      std::string item;
      while (std::getline(in, item, ',')) names.emplace_back(csv::trim(item));
      layered["regress"]["predictors"] = names;
    }
    if (!response.empty()) layered["regress"]["response"] = response;
    if (normalize) layered["regress"]["normalize"] = true;
    if (!trend.empty()) layered["regress"]["trend"] = trend;
    if (agents) layered["simulate"]["agents"] = *agents;
    if (duration) layered["simulate"]["duration_s"] = *duration;
    if (no_vip) layered["simulate"]["vip_closure"] = false;
    if (threads) layered["simulate"]["threads"] = *threads;
    if (stride) layered["simulate"]["trajectory_stride"] = *stride;
    if (!rituals.empty()) {
      crowdsim::RitualSchedule schedule;
      for (const auto& r : rituals) schedule.windows.push_back(io::parse_ritual_window(r));
      layered["simulate"]["ritual_windows"] = io::ritual_json(schedule);
    }
    if (ngram) layered["mine"]["ngram"] = *ngram;
    if (top_k) layered["mine"]["top_k"] = *top_k;
    if (!stopwords.empty()) layered["mine"]["stopwords"] = stopwords;
    if (no_stem) layered["mine"]["stem"] = false;
    if (!weights.empty()) {
      const auto w = detail::parse_weights(weights);
      layered["risk"]["weights"] = Json{{"density", w.density}, {"choke", w.choke}, {"velocity", w.velocity}, {"admin", w.admin}};
    }
    if (multiplier) layered["risk"]["velocity_multiplier"] = *multiplier;

    config = detail::typed_config(layered);
    config.output = output;

    std::string artifact;
    if (ingest->parsed()) {
      config.subcommand = "ingest";
      artifact = cmd_ingest(config, err);
    } else if (regress->parsed()) {
      config.subcommand = "regress";
      artifact = cmd_regress(config);
    } else if (sim->parsed()) {
      config.subcommand = "simulate";
      artifact = cmd_simulate(config, {preset, scenario_path, trajectory});
    } else if (mine->parsed()) {
      config.subcommand = "mine";
      artifact = cmd_mine(config, corpus);
    } else if (risk_cmd->parsed()) {
      config.subcommand = "risk";
      artifact = cmd_risk(config);
    } else {
      config.subcommand = "report";
      artifact = cmd_report(config);
    }

    if (config.output.empty()) {
      out << artifact;
    } else {
      std::ofstream file(config.output, std::ios::binary);
      if (!file) throw Error(ErrorKind::FileNotFound, "cannot write " + config.output);
      file << artifact;
    }
    return 0;
  } catch (const Error& e) {
    err << error_json(to_string(e.kind()), e.detail());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << error_json("InvalidConfig", e.what());
    return 2;
  } catch (const std::exception& e) {
    err << error_json("InternalError", e.what());
    return 1;
  }
}

}  // namespace stampede::cli
