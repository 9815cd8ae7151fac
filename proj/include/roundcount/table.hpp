#pragma once

// Tabular output shared by the CLI and the experiment runner.
//
// CSV layout: `# key=value` comment lines carrying the resolved configuration,
// one header row, then data rows. LF line endings; reals use 17 significant
// digits so every value re-parses to the same double.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace roundcount {

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  /// Ordered key/value pairs echoed as comment lines.
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws std::invalid_argument when the row width does not match.
  void add_row(std::vector<Cell> row);
};

std::string format_real(double value);
std::string format_cell(const Cell& cell);

void write_csv(const Table& table, std::ostream& out);
nlohmann::ordered_json to_json(const Table& table);
void write_json(const Table& table, std::ostream& out);

/// A parsed CSV file; cells are kept as text so callers decide the types.
struct CsvDocument {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column; throws std::out_of_range if absent.
  std::size_t column(const std::string& name) const;
};

CsvDocument parse_csv(std::istream& in);

double parse_real(const std::string& text);
std::int64_t parse_int(const std::string& text);

}  // namespace roundcount
