#pragma once

// Historical incident, inquiry and venue tables: typed records, CSV ingestion,
// validation, the year-keyed join, and the preprocessing transforms applied
// before regression (min-max scaling, reference-coded indicators).
//
// Column schemas (header names are matched by name; order is free and unknown
// columns are reported as warnings):
//
//   incidents.csv  year,fatalities,injuries,density_ppm2,trigger,admin_response
//   inquiries.csv  year,key_phrases,effectiveness_score   (phrases ';'-separated)
//   venues.csv     year,chokepoint_width_m,exits,vip_routes
//
// The source incident table labels its death-count column "Facilities"; the
// values (700 in 1954, 48 in 2025) are fatality counts, so the column is named
// `fatalities` here.

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "stampede/csv.hpp"
#include "stampede/error.hpp"

namespace stampede::dataset {

enum class Trigger { Overcrowding, NarrowPathways, PanicPropagation, RailwayStampede, BarricadeBreach };

inline constexpr std::array<Trigger, 5> kAllTriggers = {Trigger::Overcrowding, Trigger::NarrowPathways,
                                                        Trigger::PanicPropagation, Trigger::RailwayStampede,
                                                        Trigger::BarricadeBreach};

constexpr std::string_view display_name(Trigger t) noexcept {
  switch (t) {
    case Trigger::Overcrowding: return "Overcrowding";
    case Trigger::NarrowPathways: return "Narrow Pathways";
    case Trigger::PanicPropagation: return "Panic Propagation";
    case Trigger::RailwayStampede: return "Railway Stampede";
    case Trigger::BarricadeBreach: return "Barricade Breach";
  }
  return "";
}

/// Accepts the display name or its compact form, case-insensitively
/// ("Narrow Pathways", "NarrowPathways", "narrow_pathways").
inline std::optional<Trigger> parse_trigger(std::string_view text) {
  const auto fold = [](std::string_view s) {
    std::string out;
    for (char c : s) {
      if (c == ' ' || c == '_' || c == '-' || c == '\t') continue;
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
  };
  const std::string key = fold(text);
  for (Trigger t : kAllTriggers) {
    if (fold(display_name(t)) == key) return t;
  }
  return std::nullopt;
}

struct IncidentRecord {
  int year = 0;
  long fatalities = 0;
  long injuries = 0;
  double density = 0.0;  // persons/m²
  Trigger trigger = Trigger::Overcrowding;
  std::string admin_response;

  friend bool operator==(const IncidentRecord&, const IncidentRecord&) = default;
};

struct InquiryRecord {
  int year = 0;
  std::vector<std::string> key_phrases;
  int effectiveness_score = 0;  // 1..10

  friend bool operator==(const InquiryRecord&, const InquiryRecord&) = default;
};

struct VenueGeometry {
  int year = 0;
  double chokepoint_width = 0.0;  // m
  int exits = 0;
  int vip_routes = 0;

  friend bool operator==(const VenueGeometry&, const VenueGeometry&) = default;
};

template <class Record>
struct LoadResult {
  std::vector<Record> records;
  std::vector<std::string> warnings;
};

inline constexpr std::array<std::string_view, 6> kIncidentColumns = {
    "year", "fatalities", "injuries", "density_ppm2", "trigger", "admin_response"};
inline constexpr std::array<std::string_view, 3> kInquiryColumns = {"year", "key_phrases", "effectiveness_score"};
inline constexpr std::array<std::string_view, 4> kVenueColumns = {"year", "chokepoint_width_m", "exits",
                                                                  "vip_routes"};

namespace detail {

template <std::size_t N>
struct ColumnMap {
  std::array<std::size_t, N> index{};
  std::size_t width = 0;
};

template <std::size_t N>
ColumnMap<N> map_columns(const csv::Row& header, const std::array<std::string_view, N>& required,
                         std::string_view source, std::vector<std::string>& warnings) {
  ColumnMap<N> map;
  map.width = header.size();
  for (std::size_t r = 0; r < N; ++r) {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](const std::string& h) { return csv::trim(h) == required[r]; });
    if (it == header.end()) {
      throw Error(ErrorKind::MissingColumn, std::string(source) + ": missing column '" + std::string(required[r]) + "'");
    }
    map.index[r] = static_cast<std::size_t>(it - header.begin());
  }
  for (const auto& h : header) {
    if (std::find(required.begin(), required.end(), csv::trim(h)) == required.end()) {
      warnings.push_back(std::string(source) + ": ignoring unknown column '" + std::string(csv::trim(h)) + "'");
    }
  }
  return map;
}

inline std::string cell_ref(std::string_view source, std::size_t line, std::string_view column) {
  return std::string(source) + " line " + std::to_string(line) + " column '" + std::string(column) + "'";
}

template <class Int>
Int require_integer(const std::string& cell, std::string_view source, std::size_t line, std::string_view column) {
  auto v = csv::parse_integer<Int>(cell);
  if (!v) throw Error(ErrorKind::NonNumericField, cell_ref(source, line, column) + ": '" + cell + "' is not an integer");
  return *v;
}

inline double require_real(const std::string& cell, std::string_view source, std::size_t line,
                           std::string_view column) {
  auto v = csv::parse_real(cell);
  if (!v) throw Error(ErrorKind::NonNumericField, cell_ref(source, line, column) + ": '" + cell + "' is not a number");
  return *v;
}

inline void require_row_width(const csv::Row& row, std::size_t width, std::string_view source, std::size_t line) {
  if (row.size() < width) {
    throw Error(ErrorKind::MissingColumn, std::string(source) + " line " + std::to_string(line) + ": expected " +
                                              std::to_string(width) + " fields, found " + std::to_string(row.size()));
  }
}

inline void check_year(int year, std::string_view source, std::size_t line) {
  if (year < 1900 || year > 2100) {
    throw Error(ErrorKind::InvariantViolation,
                cell_ref(source, line, "year") + ": " + std::to_string(year) + " outside [1900, 2100]");
  }
}

}  // namespace detail

inline LoadResult<IncidentRecord> parse_incidents(std::string_view text, std::string_view source = "incidents.csv") {
  LoadResult<IncidentRecord> out;
  const csv::Table table = csv::parse(text);
  if (table.header.empty()) throw Error(ErrorKind::MissingColumn, std::string(source) + ": empty file, no header");
  const auto cols = detail::map_columns(table.header, kIncidentColumns, source, out.warnings);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    detail::require_row_width(row, cols.width, source, line);
    IncidentRecord rec;
    rec.year = detail::require_integer<int>(row[cols.index[0]], source, line, kIncidentColumns[0]);
    detail::check_year(rec.year, source, line);
    rec.fatalities = detail::require_integer<long>(row[cols.index[1]], source, line, kIncidentColumns[1]);
    rec.injuries = detail::require_integer<long>(row[cols.index[2]], source, line, kIncidentColumns[2]);
    if (rec.fatalities < 0 || rec.injuries < 0) {
      throw Error(ErrorKind::InvariantViolation, detail::cell_ref(source, line, "fatalities/injuries") + ": negative count");
    }
    rec.density = detail::require_real(row[cols.index[3]], source, line, kIncidentColumns[3]);
    if (!(rec.density > 0.0)) {
      throw Error(ErrorKind::InvariantViolation, detail::cell_ref(source, line, kIncidentColumns[3]) + ": density must be > 0");
    }
    const std::string& trig = row[cols.index[4]];
    auto t = parse_trigger(csv::trim(trig));
    if (!t) {
      throw Error(ErrorKind::BadEnumValue,
                  detail::cell_ref(source, line, kIncidentColumns[4]) + ": unknown trigger '" + trig + "'");
    }
    rec.trigger = *t;
    rec.admin_response = std::string(csv::trim(row[cols.index[5]]));
    out.records.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<std::string> split_phrases(std::string_view cell) {
  std::vector<std::string> phrases;
  std::size_t start = 0;
  while (start <= cell.size()) {
    const std::size_t end = std::min(cell.find(';', start), cell.size());
    auto piece = csv::trim(cell.substr(start, end - start));
    if (!piece.empty()) phrases.emplace_back(piece);
    start = end + 1;
  }
  return phrases;
}

inline LoadResult<InquiryRecord> parse_inquiries(std::string_view text, std::string_view source = "inquiries.csv") {
  LoadResult<InquiryRecord> out;
  const csv::Table table = csv::parse(text);
  if (table.header.empty()) throw Error(ErrorKind::MissingColumn, std::string(source) + ": empty file, no header");
  const auto cols = detail::map_columns(table.header, kInquiryColumns, source, out.warnings);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    detail::require_row_width(row, cols.width, source, line);
    InquiryRecord rec;
    rec.year = detail::require_integer<int>(row[cols.index[0]], source, line, kInquiryColumns[0]);
    detail::check_year(rec.year, source, line);
    rec.key_phrases = split_phrases(row[cols.index[1]]);
    if (rec.key_phrases.empty()) {
      throw Error(ErrorKind::InvariantViolation, detail::cell_ref(source, line, kInquiryColumns[1]) + ": no key phrases");
    }
    rec.effectiveness_score = detail::require_integer<int>(row[cols.index[2]], source, line, kInquiryColumns[2]);
    if (rec.effectiveness_score < 1 || rec.effectiveness_score > 10) {
      throw Error(ErrorKind::ScoreOutOfRange, detail::cell_ref(source, line, kInquiryColumns[2]) + ": " +
                                                  std::to_string(rec.effectiveness_score) + " outside [1, 10]");
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

inline LoadResult<VenueGeometry> parse_venues(std::string_view text, std::string_view source = "venues.csv") {
  LoadResult<VenueGeometry> out;
  const csv::Table table = csv::parse(text);
  if (table.header.empty()) throw Error(ErrorKind::MissingColumn, std::string(source) + ": empty file, no header");
  const auto cols = detail::map_columns(table.header, kVenueColumns, source, out.warnings);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    detail::require_row_width(row, cols.width, source, line);
    VenueGeometry rec;
    rec.year = detail::require_integer<int>(row[cols.index[0]], source, line, kVenueColumns[0]);
    detail::check_year(rec.year, source, line);
    rec.chokepoint_width = detail::require_real(row[cols.index[1]], source, line, kVenueColumns[1]);
    rec.exits = detail::require_integer<int>(row[cols.index[2]], source, line, kVenueColumns[2]);
    rec.vip_routes = detail::require_integer<int>(row[cols.index[3]], source, line, kVenueColumns[3]);
    if (!(rec.chokepoint_width > 0.0)) {
      throw Error(ErrorKind::InvariantViolation, detail::cell_ref(source, line, kVenueColumns[1]) + ": width must be > 0");
    }
    if (rec.exits < 1) {
      throw Error(ErrorKind::InvariantViolation, detail::cell_ref(source, line, kVenueColumns[2]) + ": exits must be positive");
    }
    if (rec.vip_routes < 0 || rec.vip_routes >= rec.exits) {
      throw Error(ErrorKind::InvariantViolation, detail::cell_ref(source, line, kVenueColumns[3]) +
                                                     ": vip_routes must be in [0, exits)");
    }
    out.records.push_back(rec);
  }
  return out;
}

inline LoadResult<IncidentRecord> load_incidents(const std::string& path) {
  return parse_incidents(csv::read_file(path), path);
}
inline LoadResult<InquiryRecord> load_inquiries(const std::string& path) {
  return parse_inquiries(csv::read_file(path), path);
}
inline LoadResult<VenueGeometry> load_venues(const std::string& path) { return parse_venues(csv::read_file(path), path); }

// Serializers emit the canonical schema; load -> serialize reproduces a
// canonical source file byte-for-byte.

inline std::string serialize_incidents(const std::vector<IncidentRecord>& records) {
  std::string out = csv::join_row({kIncidentColumns.begin(), kIncidentColumns.end()}) + "\n";
  for (const auto& r : records) {
    out += csv::join_row({std::to_string(r.year), std::to_string(r.fatalities), std::to_string(r.injuries),
                          csv::format_number(r.density), std::string(display_name(r.trigger)), r.admin_response});
    out += "\n";
  }
  return out;
}

inline std::string serialize_inquiries(const std::vector<InquiryRecord>& records) {
  std::string out = csv::join_row({kInquiryColumns.begin(), kInquiryColumns.end()}) + "\n";
  for (const auto& r : records) {
    std::string phrases;
    for (std::size_t i = 0; i < r.key_phrases.size(); ++i) {
      if (i) phrases.push_back(';');
      phrases += r.key_phrases[i];
    }
    out += csv::join_row({std::to_string(r.year), phrases, std::to_string(r.effectiveness_score)});
    out += "\n";
  }
  return out;
}

inline std::string serialize_venues(const std::vector<VenueGeometry>& records) {
  std::string out = csv::join_row({kVenueColumns.begin(), kVenueColumns.end()}) + "\n";
  for (const auto& r : records) {
    out += csv::join_row({std::to_string(r.year), csv::format_decimal(r.chokepoint_width), std::to_string(r.exits),
                          std::to_string(r.vip_routes)});
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Join

struct PanelRow {
  int year = 0;
  IncidentRecord incident;
  InquiryRecord inquiry;
  VenueGeometry venue;
};

struct JoinedPanel {
  std::vector<PanelRow> rows;         // strictly increasing year
  std::vector<int> missing_years;     // years present in some but not all sources
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
};

namespace detail {

template <class Record>
std::map<int, const Record*> index_by_year(const std::vector<Record>& records, std::string_view source) {
  std::map<int, const Record*> index;
  for (const auto& r : records) {
    if (!index.emplace(r.year, &r).second) {
      throw Error(ErrorKind::DuplicateYear, std::string(source) + ": year " + std::to_string(r.year) + " appears twice");
    }
  }
  return index;
}

}  // namespace detail

/// Inner join on year. Years missing from any source are listed in
/// `missing_years` with one warning per (year, source) gap.
inline JoinedPanel join_panel(const std::vector<IncidentRecord>& incidents, const std::vector<InquiryRecord>& inquiries,
                              const std::vector<VenueGeometry>& venues) {
  const auto inc = detail::index_by_year(incidents, "incidents");
  const auto inq = detail::index_by_year(inquiries, "inquiries");
  const auto ven = detail::index_by_year(venues, "venues");

  std::set<int> all_years;
  for (const auto& [y, _] : inc) all_years.insert(y);
  for (const auto& [y, _] : inq) all_years.insert(y);
  for (const auto& [y, _] : ven) all_years.insert(y);

  JoinedPanel panel;
  for (int year : all_years) {
    const auto a = inc.find(year);
    const auto b = inq.find(year);
    const auto c = ven.find(year);
    if (a != inc.end() && b != inq.end() && c != ven.end()) {
      panel.rows.push_back({year, *a->second, *b->second, *c->second});
      continue;
    }
    panel.missing_years.push_back(year);
    if (a == inc.end()) panel.warnings.push_back("year " + std::to_string(year) + " missing from incidents");
    if (b == inq.end()) panel.warnings.push_back("year " + std::to_string(year) + " missing from inquiries");
    if (c == ven.end()) panel.warnings.push_back("year " + std::to_string(year) + " missing from venues");
  }
  if (panel.rows.empty()) throw Error(ErrorKind::EmptyJoin, "no year is present in all three sources");
  return panel;
}

struct BundledData {
  LoadResult<IncidentRecord> incidents;
  LoadResult<InquiryRecord> inquiries;
  LoadResult<VenueGeometry> venues;
  JoinedPanel panel;

  std::vector<std::string> all_warnings() const {
    std::vector<std::string> out = incidents.warnings;
    out.insert(out.end(), inquiries.warnings.begin(), inquiries.warnings.end());
    out.insert(out.end(), venues.warnings.begin(), venues.warnings.end());
    out.insert(out.end(), panel.warnings.begin(), panel.warnings.end());
    return out;
  }
};

/// Loads incidents.csv, inquiries.csv and venues.csv from `dir` and joins them.
inline BundledData load_data_dir(const std::string& dir) {
  BundledData data;
  data.incidents = load_incidents(dir + "/incidents.csv");
  data.inquiries = load_inquiries(dir + "/inquiries.csv");
  data.venues = load_venues(dir + "/venues.csv");
  data.panel = join_panel(data.incidents.records, data.inquiries.records, data.venues.records);
  return data;
}

// ---------------------------------------------------------------------------
// Preprocessing

struct Normalized {
  std::vector<double> values;
  bool degenerate = false;  // constant input, mapped to all zeros
};

/// (v - min) / (max - min). A constant column maps to zeros and sets
/// `degenerate` instead of failing.
inline Normalized minmax_normalize(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "minmax_normalize: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Normalized out;
  out.values.resize(values.size(), 0.0);
  if (!(hi > lo)) {
    out.degenerate = true;
    return out;
  }
  const double span = hi - lo;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.values[i] = values[i] == hi ? 1.0 : (values[i] - lo) / span;
  }
  return out;
}

/// Reference-coded indicator columns. `levels` holds every distinct level in
/// sorted order; levels[0] is the dropped reference and column c of `matrix`
/// indicates levels[c + 1].
template <class T>
struct CategoricalEncoding {
  std::vector<T> levels;
  std::vector<std::vector<double>> matrix;  // rows x (levels.size() - 1)

  std::size_t columns() const noexcept { return levels.empty() ? 0 : levels.size() - 1; }
};

template <class T>
CategoricalEncoding<T> encode_categorical(const std::vector<T>& values) {
  CategoricalEncoding<T> enc;
  enc.levels = values;
  std::sort(enc.levels.begin(), enc.levels.end());
  enc.levels.erase(std::unique(enc.levels.begin(), enc.levels.end()), enc.levels.end());
  const std::size_t cols = enc.columns();
  enc.matrix.assign(values.size(), std::vector<double>(cols, 0.0));
  for (std::size_t r = 0; r < values.size(); ++r) {
    const auto pos = static_cast<std::size_t>(std::lower_bound(enc.levels.begin(), enc.levels.end(), values[r]) -
                                              enc.levels.begin());
    if (pos > 0) enc.matrix[r][pos - 1] = 1.0;
  }
  return enc;
}

/// Triggers are encoded by display name so the reference level is the
/// alphabetically first trigger present.
inline CategoricalEncoding<std::string> encode_triggers(const std::vector<IncidentRecord>& incidents) {
  std::vector<std::string> names;
  names.reserve(incidents.size());
  for (const auto& r : incidents) names.emplace_back(display_name(r.trigger));
  return encode_categorical(names);
}

}  // namespace stampede::dataset
