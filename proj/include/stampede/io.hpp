#pragma once

// JSON and CSV serialization of every artifact the CLI emits, plus scenario
// and parameter parsing. Floating-point fields are rounded to 6 decimals;
// object keys keep insertion order.

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "stampede/crowdsim.hpp"
#include "stampede/dataset.hpp"
#include "stampede/error.hpp"
#include "stampede/regression.hpp"
#include "stampede/risk.hpp"
#include "stampede/textmine.hpp"

namespace stampede::io {

using Json = nlohmann::ordered_json;

/// Rounds to 6 decimals. Non-finite values become null; -0 becomes 0.
inline Json round6(double v) {
  if (!std::isfinite(v)) return nullptr;
  double r = std::round(v * 1e6) / 1e6;
  if (r == 0.0) r = 0.0;
  return r;
}

/// Fixed 6-decimal text, used by CSV and markdown output.
inline std::string fixed6(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  double r = std::round(v * 1e6) / 1e6;
  if (r == 0.0) r = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", r);
  return buf;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Dataset

inline Json panel_row_json(const dataset::PanelRow& row) {
  Json phrases = Json::array();
  for (const auto& p : row.inquiry.key_phrases) phrases.push_back(p);
  return Json{{"year", row.year},
              {"fatalities", row.incident.fatalities},
              {"injuries", row.incident.injuries},
              {"density_ppm2", round6(row.incident.density)},
              {"trigger", std::string(dataset::display_name(row.incident.trigger))},
              {"admin_response", row.incident.admin_response},
              {"key_phrases", phrases},
              {"effectiveness_score", row.inquiry.effectiveness_score},
              {"chokepoint_width_m", round6(row.venue.chokepoint_width)},
              {"exits", row.venue.exits},
              {"vip_routes", row.venue.vip_routes}};
}

inline Json panel_json(const dataset::JoinedPanel& panel, const std::vector<std::string>& warnings) {
  Json rows = Json::array();
  for (const auto& r : panel.rows) rows.push_back(panel_row_json(r));
  return Json{{"years", panel.rows.size()},
              {"rows", rows},
              {"missing_years", panel.missing_years},
              {"warnings", warnings}};
}

inline std::string panel_csv(const dataset::JoinedPanel& panel) {
  std::string out =
      "year,fatalities,injuries,density_ppm2,trigger,admin_response,key_phrases,effectiveness_score,"
      "chokepoint_width_m,exits,vip_routes\n";
  for (const auto& r : panel.rows) {
    std::string phrases;
    for (std::size_t i = 0; i < r.inquiry.key_phrases.size(); ++i) {
      if (i) phrases.push_back(';');
      phrases += r.inquiry.key_phrases[i];
    }
    out += csv::join_row({std::to_string(r.year), std::to_string(r.incident.fatalities),
                          std::to_string(r.incident.injuries), csv::format_number(r.incident.density),
                          std::string(dataset::display_name(r.incident.trigger)), r.incident.admin_response, phrases,
                          std::to_string(r.inquiry.effectiveness_score),
                          csv::format_decimal(r.venue.chokepoint_width), std::to_string(r.venue.exits),
                          std::to_string(r.venue.vip_routes)});
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Regression

inline Json fit_json(const regression::RegressionFit& fit, const std::string& response) {
  Json coef = Json::object();
  Json se = Json::object();
  Json t = Json::object();
  Json p = Json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    coef[fit.names[i]] = round6(fit.coefficients[i]);
    if (fit.diagnostics) {
      se[fit.names[i]] = round6(fit.diagnostics->std_errors[i]);
      t[fit.names[i]] = round6(fit.diagnostics->t_stats[i]);
      p[fit.names[i]] = round6(fit.diagnostics->p_values[i]);
    } else {
      se[fit.names[i]] = nullptr;
      t[fit.names[i]] = nullptr;
      p[fit.names[i]] = nullptr;
    }
  }
  Json fitted = Json::array();
  for (double v : fit.fitted) fitted.push_back(round6(v));
  Json residuals = Json::array();
  for (double v : fit.residuals) residuals.push_back(round6(v));
  return Json{{"response", response},   {"coefficients", coef}, {"r_squared", round6(fit.r_squared)},
              {"p_values", p},          {"dof", fit.dof},       {"std_errors", se},
              {"t_stats", t},           {"fitted", fitted},     {"residuals", residuals}};
}

inline std::string fit_csv(const regression::RegressionFit& fit) {
  std::string out = "term,coefficient,std_error,t_stat,p_value\n";
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    out += fit.names[i] + "," + fixed6(fit.coefficients[i]);
    if (fit.diagnostics) {
      out += "," + fixed6(fit.diagnostics->std_errors[i]) + "," + fixed6(fit.diagnostics->t_stats[i]) + "," +
             fixed6(fit.diagnostics->p_values[i]);
    } else {
      out += ",,,";
    }
    out += "\n";
  }
  return out;
}

inline Json trend_json(const regression::TrendFit& fit, const std::string& series) {
  return Json{{"series", series},
              {"slope", round6(fit.slope)},
              {"intercept", round6(fit.intercept)},
              {"r_squared", round6(fit.r_squared)}};
}

inline std::string trend_csv(const regression::TrendFit& fit, const std::string& series) {
  return "series,slope,intercept,r_squared\n" + series + "," + fixed6(fit.slope) + "," + fixed6(fit.intercept) + "," +
         fixed6(fit.r_squared) + "\n";
}

// ---------------------------------------------------------------------------
// Risk

inline Json cri_json(const std::vector<risk::CriPoint>& timeline) {
  Json rows = Json::array();
  for (const auto& p : timeline) {
    rows.push_back(Json{{"year", p.year},
                        {"cri", round6(p.breakdown.cri)},
                        {"components",
                         Json{{"density", round6(p.breakdown.density)},
                              {"choke", round6(p.breakdown.choke)},
                              {"velocity", round6(p.breakdown.velocity)},
                              {"admin", round6(p.breakdown.admin)}}}});
  }
  return rows;
}

inline std::string cri_csv(const std::vector<risk::CriPoint>& timeline) {
  std::string out = "year,cri,density,choke,velocity,admin\n";
  for (const auto& p : timeline) {
    out += std::to_string(p.year) + "," + fixed6(p.breakdown.cri) + "," + fixed6(p.breakdown.density) + "," +
           fixed6(p.breakdown.choke) + "," + fixed6(p.breakdown.velocity) + "," + fixed6(p.breakdown.admin) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text mining

inline Json model_json(const textmine::TfIdfModel& model) {
  Json df = Json::object();
  for (const auto& term : model.vocabulary) df[term] = model.doc_freq.at(term);
  Json weights = Json::array();
  for (std::size_t d = 0; d < model.weights.size(); ++d) {
    for (std::size_t t = 0; t < model.vocabulary.size(); ++t) {
      if (model.counts[d][t] == 0) continue;
      weights.push_back(Json{{"year", model.years[d]}, {"term", model.vocabulary[t]}, {"weight", round6(model.weights[d][t])}});
    }
  }
  return Json{{"n_docs", model.n_docs}, {"doc_freq", df}, {"weights", weights}};
}

inline Json phrases_json(const std::vector<textmine::RecurringPhrase>& phrases) {
  Json out = Json::array();
  for (const auto& p : phrases) out.push_back(Json{{"ngram", p.ngram}, {"years", p.years}});
  return out;
}

inline std::string model_csv(const textmine::TfIdfModel& model) {
  std::string out = "year,term,count,weight\n";
  for (std::size_t d = 0; d < model.weights.size(); ++d) {
    for (std::size_t t = 0; t < model.vocabulary.size(); ++t) {
      if (model.counts[d][t] == 0) continue;
      out += std::to_string(model.years[d]) + "," + model.vocabulary[t] + "," + std::to_string(model.counts[d][t]) +
             "," + fixed6(model.weights[d][t]) + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation

namespace detail {

inline double number(const Json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorKind::InvalidConfig, std::string(what) + " must be a number");
  return j.get<double>();
}

inline crowdsim::Segment segment(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorKind::InvalidConfig, std::string(what) + " must be [x1, y1, x2, y2]");
  }
  return crowdsim::Segment{{number(j[0], what), number(j[1], what)}, {number(j[2], what), number(j[3], what)}};
}

inline Json segment_json(const crowdsim::Segment& s) {
  return Json::array({round6(s.a.x), round6(s.a.y), round6(s.b.x), round6(s.b.y)});
}

inline void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorKind::InvalidConfig, where + ": unknown key '" + key + "'");
  }
}

}  // namespace detail

inline crowdsim::RitualSchedule ritual_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidConfig, "ritual_windows must be an array");
  crowdsim::RitualSchedule s;
  for (const auto& w : j) {
    if (!w.is_object()) throw Error(ErrorKind::InvalidConfig, "ritual window must be an object");
    detail::check_keys(w, {"start_s", "end_s", "multiplier"}, "ritual window");
    if (!w.contains("start_s") || !w.contains("end_s") || !w.contains("multiplier")) {
      throw Error(ErrorKind::InvalidConfig, "ritual window needs start_s, end_s and multiplier");
    }
    s.windows.push_back({detail::number(w["start_s"], "start_s"), detail::number(w["end_s"], "end_s"),
                         detail::number(w["multiplier"], "multiplier")});
  }
  crowdsim::validate(s);
  return s;
}

inline Json ritual_json(const crowdsim::RitualSchedule& s) {
  Json out = Json::array();
  for (const auto& w : s.windows) {
    out.push_back(Json{{"start_s", round6(w.start)}, {"end_s", round6(w.end)}, {"multiplier", round6(w.speed_multiplier)}});
  }
  return out;
}

/// Parses "start:end:multiplier", e.g. "10:40:1.58".
inline crowdsim::RitualWindow parse_ritual_window(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos) throw Error(ErrorKind::InvalidConfig, "ritual window '" + text + "' is not start:end:multiplier");
  const auto start = csv::parse_real(text.substr(0, a));
  const auto end = csv::parse_real(text.substr(a + 1, b - a - 1));
  const auto mult = csv::parse_real(text.substr(b + 1));
  if (!start || !end || !mult) throw Error(ErrorKind::InvalidConfig, "ritual window '" + text + "' is not numeric");
  return {*start, *end, *mult};
}

// SimParams fields in declaration order; shared by parsing, --set and output.
inline const std::vector<std::pair<const char*, double crowdsim::SimParams::*>>& param_fields() {
  using P = crowdsim::SimParams;
  static const std::vector<std::pair<const char*, double P::*>> fields = {
      {"mass", &P::mass},
      {"relaxation_time", &P::relaxation_time},
      {"repulsion_strength", &P::repulsion_strength},
      {"repulsion_range", &P::repulsion_range},
      {"body_stiffness", &P::body_stiffness},
      {"sliding_friction", &P::sliding_friction},
      {"radius_min", &P::radius_min},
      {"radius_max", &P::radius_max},
      {"base_desired_speed", &P::base_desired_speed},
      {"panic_desired_speed", &P::panic_desired_speed},
      {"urgency_ratio", &P::urgency_ratio},
      {"crush_pressure_threshold", &P::crush_pressure_threshold},
      {"crush_duration", &P::crush_duration},
      {"interaction_range", &P::interaction_range},
      {"dt", &P::dt},
  };
  return fields;
}

/// Overlays the keys of `j` onto `p`. Unknown keys are rejected.
inline void apply_params(crowdsim::SimParams& p, const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "params must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      if (!value.is_number_integer() || value.get<long long>() < 0) {
        throw Error(ErrorKind::InvalidConfig, "seed must be a non-negative integer");
      }
      p.seed = value.get<std::uint64_t>();
      continue;
    }
    bool found = false;
    for (const auto& [name, field] : param_fields()) {
      if (key == name) {
        p.*field = detail::number(value, name);
        found = true;
      }
    }
    if (!found) throw Error(ErrorKind::InvalidConfig, "unknown simulation parameter '" + key + "'");
  }
}

inline Json params_json(const crowdsim::SimParams& p) {
  Json j = Json::object();
  for (const auto& [name, field] : param_fields()) j[name] = round6(p.*field);
  j["seed"] = p.seed;
  return j;
}

/// Scenario from the JSON schema
/// {walls, exits:[{segment, open}], spawn:{x_min, y_min, x_max, y_max}, agents,
///  duration_s, preset_year?, gates?, chokepoint_width_m?}.
/// The result is passed through crowdsim::finalize.
inline crowdsim::Scenario scenario_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "scenario must be a JSON object");
  detail::check_keys(j,
                     {"walls", "exits", "gates", "spawn", "agents", "duration_s", "preset_year", "chokepoint_width_m",
                      "ritual_windows", "params"},
                     "scenario");
  for (const char* key : {"walls", "exits", "spawn"}) {
    if (!j.contains(key)) throw Error(ErrorKind::InvalidConfig, std::string("scenario: missing '") + key + "'");
  }
  crowdsim::Scenario s;
  for (const auto& w : j["walls"]) s.walls.push_back(detail::segment(w, "wall"));
  for (const auto& e : j["exits"]) {
    if (!e.is_object() || !e.contains("segment")) throw Error(ErrorKind::InvalidConfig, "exit needs a segment");
    detail::check_keys(e, {"segment", "open"}, "exit");
    crowdsim::Exit exit{detail::segment(e["segment"], "exit segment"), true};
    if (e.contains("open")) {
      if (!e["open"].is_boolean()) throw Error(ErrorKind::InvalidConfig, "exit 'open' must be a boolean");
      exit.open = e["open"].get<bool>();
    }
    s.exits.push_back(exit);
  }
  if (j.contains("gates")) {
    for (const auto& g : j["gates"]) s.gates.push_back({detail::segment(g, "gate"), 0});
  }
  const auto& sp = j["spawn"];
  if (!sp.is_object()) throw Error(ErrorKind::InvalidConfig, "spawn must be an object");
  detail::check_keys(sp, {"x_min", "y_min", "x_max", "y_max"}, "spawn");
  for (const char* key : {"x_min", "y_min", "x_max", "y_max"}) {
    if (!sp.contains(key)) throw Error(ErrorKind::InvalidConfig, std::string("spawn: missing '") + key + "'");
  }
  s.spawn = {detail::number(sp["x_min"], "x_min"), detail::number(sp["y_min"], "y_min"),
             detail::number(sp["x_max"], "x_max"), detail::number(sp["y_max"], "y_max")};
  if (j.contains("agents")) {
    if (!j["agents"].is_number_integer()) throw Error(ErrorKind::InvalidConfig, "agents must be an integer");
    s.agent_count = j["agents"].get<int>();
  }
  if (j.contains("duration_s")) s.duration = detail::number(j["duration_s"], "duration_s");
  if (j.contains("preset_year")) {
    if (!j["preset_year"].is_number_integer()) throw Error(ErrorKind::InvalidConfig, "preset_year must be an integer");
    s.preset_year = j["preset_year"].get<int>();
  }
  if (j.contains("chokepoint_width_m")) s.chokepoint_width = detail::number(j["chokepoint_width_m"], "chokepoint_width_m");
  return crowdsim::finalize(std::move(s));
}

inline Json scenario_json(const crowdsim::Scenario& s) {
  Json walls = Json::array();
  for (const auto& w : s.walls) walls.push_back(detail::segment_json(w));
  Json exits = Json::array();
  for (const auto& e : s.exits) exits.push_back(Json{{"segment", detail::segment_json(e.segment)}, {"open", e.open}});
  Json gates = Json::array();
  for (const auto& g : s.gates) gates.push_back(detail::segment_json(g.segment));
  Json j{{"walls", walls},
         {"exits", exits},
         {"gates", gates},
         {"spawn", Json{{"x_min", round6(s.spawn.x_min)},
                        {"y_min", round6(s.spawn.y_min)},
                        {"x_max", round6(s.spawn.x_max)},
                        {"y_max", round6(s.spawn.y_max)}}},
         {"agents", s.agent_count},
         {"duration_s", round6(s.duration)},
         {"chokepoint_width_m", round6(s.chokepoint_width)}};
  if (s.preset_year) j["preset_year"] = *s.preset_year;
  return j;
}

inline Json outcome_json(const crowdsim::SimOutcome& o) {
  Json breaches = Json::array();
  for (const auto& b : o.breach_events) {
    breaches.push_back(Json{{"time_s", round6(b.time)},
                            {"cell", Json::array({b.ix, b.iy})},
                            {"density", round6(b.density)},
                            {"level", std::string(risk::to_string(b.level))}});
  }
  return Json{{"agent_count", o.agent_count},
              {"exited", o.exited},
              {"incapacitated", o.incapacitated},
              {"active", o.active},
              {"peak_density", round6(o.peak_density)},
              {"time_to_90pct_exit", o.time_to_90pct_exit ? round6(*o.time_to_90pct_exit) : Json(nullptr)},
              {"throughput_series", o.throughput_series},
              {"breach_events", breaches},
              {"simulated_time", round6(o.simulated_time)},
              {"steps", o.steps}};
}

inline std::string outcome_csv(const crowdsim::SimOutcome& o) {
  std::string out =
      "agent_count,exited,incapacitated,active,peak_density,time_to_90pct_exit,breach_events,simulated_time,steps\n";
  out += std::to_string(o.agent_count) + "," + std::to_string(o.exited) + "," + std::to_string(o.incapacitated) + "," +
         std::to_string(o.active) + "," + fixed6(o.peak_density) + "," +
         (o.time_to_90pct_exit ? fixed6(*o.time_to_90pct_exit) : std::string()) + "," +
         std::to_string(o.breach_events.size()) + "," + fixed6(o.simulated_time) + "," + std::to_string(o.steps) + "\n";
  return out;
}

/// Writes `t,agent_id,x,y,vx,vy,status` rows every `stride` steps (the
/// initial state included). Exited and incapacitated agents are written once,
/// at the step their status changes.
class TrajectoryWriter {
 public:
  TrajectoryWriter(std::ostream& out, std::uint64_t stride) : out_(out), stride_(stride == 0 ? 1 : stride) {
    out_ << "t,agent_id,x,y,vx,vy,status\n";
  }

  void operator()(const crowdsim::SimState& s) {
    if (last_.size() != s.agents.size()) last_.assign(s.agents.size(), crowdsim::AgentStatus::Active);
    const bool sample = s.steps % stride_ == 0;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      const auto& a = s.agents[i];
      const bool changed = a.status != last_[i];
      last_[i] = a.status;
      if (a.status == crowdsim::AgentStatus::Active ? !sample : !changed) continue;
      out_ << fixed6(s.time) << ',' << i << ',' << fixed6(a.position.x) << ',' << fixed6(a.position.y) << ','
           << fixed6(a.velocity.x) << ',' << fixed6(a.velocity.y) << ',' << crowdsim::to_string(a.status) << '\n';
    }
  }

 private:
  std::ostream& out_;
  std::uint64_t stride_;
  std::vector<crowdsim::AgentStatus> last_;
};

}  // namespace stampede::io
