#pragma once

// CSV ingestion and output helpers.

#include <string>
#include <vector>

#include <json.hpp>

#include "cli/config.hpp"
#include "crc/panel.hpp"

namespace crc::cli {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comma-separated with a header row; blank lines are skipped, cells are trimmed.
CsvTable read_csv(const std::string& path);

PanelDataset panel_from_table(const CsvTable& table);

struct LoadedInput {
  std::string format;  // long | differenced | stacked
  DifferencedSample differenced;
  StackedSample stacked;
  std::size_t dropped_units = 0;
};

/// Reads config.input and converts it to the sample type the design needs.
LoadedInput load_input(const RunConfig& config);

void ensure_directory(const std::string& dir);
void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const nlohmann::json& j);

/// Writes columns of equal length as CSV.
void write_columns(const std::string& path, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns);

std::string format_double(double v);

void write_panel_csv(const std::string& path, const PanelDataset& panel);

}  // namespace crc::cli
