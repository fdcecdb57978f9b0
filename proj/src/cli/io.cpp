#include "cli/io.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crc/error.hpp"

namespace crc::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line, const std::string& column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("line " + std::to_string(line) + ": column '" + column + "' is not a number: '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s, std::size_t line, const std::string& column) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("line " + std::to_string(line) + ": column '" + column + "' is not an integer: '" + s + "'");
  }
  return v;
}

std::vector<std::size_t> locate(const CsvTable& t, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    std::size_t k = 0;
    while (k < t.header.size() && t.header[k] != n) ++k;
    if (k == t.header.size()) throw InputError("missing CSV column '" + n + "'");
    idx.push_back(k);
  }
  return idx;
}

bool has_columns(const CsvTable& t, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    if (std::find(t.header.begin(), t.header.end(), n) == t.header.end()) return false;
  }
  return true;
}

DifferencedSample differenced_from_table(const CsvTable& t) {
  const auto c = locate(t, {"id", "y", "x"});
  DifferencedSample s;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    s.ids.push_back(row[c[0]]);
    s.y.push_back(parse_double(row[c[1]], r + 2, "y"));
    s.x.push_back(parse_double(row[c[2]], r + 2, "x"));
  }
  s.validate();
  return s;
}

StackedSample stacked_from_table(const CsvTable& t) {
  const auto c = locate(t, {"id", "y1", "y2", "x1", "x2"});
  StackedSample s;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    s.ids.push_back(row[c[0]]);
    s.y1.push_back(parse_double(row[c[1]], r + 2, "y1"));
    s.y2.push_back(parse_double(row[c[2]], r + 2, "y2"));
    s.x1.push_back(parse_double(row[c[3]], r + 2, "x1"));
    s.x2.push_back(parse_double(row[c[4]], r + 2, "x2"));
  }
  s.validate();
  return s;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                       " fields, found " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw InputError("input file '" + path + "' is empty");
  return t;
}

PanelDataset panel_from_table(const CsvTable& t) {
  const auto c = locate(t, {"unit_id", "period", "outcome", "regressor"});
  std::vector<PanelRecord> records;
  records.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    records.push_back({row[c[0]], parse_int(row[c[1]], r + 2, "period"), parse_double(row[c[2]], r + 2, "outcome"),
                       parse_double(row[c[3]], r + 2, "regressor")});
  }
  return PanelDataset(std::move(records));
}

LoadedInput load_input(const RunConfig& config) {
  if (config.input.empty()) throw InputError("no input file given (set \"input\" or pass --input)");
  const CsvTable t = read_csv(config.input);
  LoadedInput out;
  if (has_columns(t, {"unit_id", "period", "outcome", "regressor"})) {
    out.format = "long";
    const PanelDataset panel = panel_from_table(t);
    const std::vector<int> periods = panel.periods();
    if (config.design == Design::kIrregular) {
      if (periods.size() < 2) throw InputError("long panel needs at least two periods");
      const int from = config.period_from.value_or(periods[0]);
      const int to = config.period_to.value_or(config.period_from ? from + 1 : periods[1]);
      DifferenceReport rep = first_difference(panel, from, to);
      out.differenced = std::move(rep.sample);
      out.dropped_units = rep.dropped_units;
    } else {
      StackReport rep = config.start_period ? stack_two_periods(panel, *config.start_period) : stack_two_periods(panel);
      out.stacked = std::move(rep.sample);
      out.dropped_units = rep.dropped_missing + rep.dropped_static;
    }
  } else if (has_columns(t, {"id", "y1", "y2", "x1", "x2"})) {
    out.format = "stacked";
    if (config.design != Design::kRegular) throw InputError("stacked input (id,y1,y2,x1,x2) requires --design regular");
    out.stacked = stacked_from_table(t);
  } else if (has_columns(t, {"id", "y", "x"})) {
    out.format = "differenced";
    if (config.design != Design::kIrregular) throw InputError("differenced input (id,y,x) requires --design irregular");
    out.differenced = differenced_from_table(t);
  } else {
    throw InputError("unrecognized CSV header in '" + config.input +
                     "' (expected unit_id,period,outcome,regressor or id,y,x or id,y1,y2,x1,x2)");
  }
  return out;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_columns(const std::string& path, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw InputError("write_columns: name/column count mismatch");
  const std::size_t n = columns.empty() ? 0 : columns[0].size();
  std::string text;
  for (std::size_t c = 0; c < names.size(); ++c) text += (c ? "," : "") + names[c];
  text += "\n";
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) text += ",";
      text += format_double(columns[c].at(r));
    }
    text += "\n";
  }
  write_text(path, text);
}

void write_panel_csv(const std::string& path, const PanelDataset& panel) {
  std::string text = "unit_id,period,outcome,regressor\n";
  for (const auto& r : panel.records()) {
    text += r.unit_id + "," + std::to_string(r.period) + "," + format_double(r.outcome) + "," +
            format_double(r.regressor) + "\n";
  }
  write_text(path, text);
}

}  // namespace crc::cli
