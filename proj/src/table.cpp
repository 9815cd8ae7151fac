#include "roundcount/table.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace roundcount {

namespace {

bool needs_quotes(const std::string& text) {
  return text.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote(const std::string& text) {
  if (!needs_quotes(text)) return text;
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("row has " + std::to_string(row.size()) + " cells, expected " +
                                std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_cell(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) return format_real(*d);
  return std::get<std::string>(cell);
}

void write_csv(const Table& table, std::ostream& out) {
  for (const auto& [key, value] : table.config) out << "# " << key << '=' << value << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << quote(table.columns[c]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << quote(format_cell(row[c]));
    out << '\n';
  }
}

nlohmann::ordered_json to_json(const Table& table) {
  nlohmann::ordered_json doc;
  doc["config"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : table.config) doc["config"][key] = value;
  doc["columns"] = table.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json record;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) {
              // JSON has no NaN or infinity.
              if (std::isfinite(v))
                record[table.columns[c]] = v;
              else
                record[table.columns[c]] = format_real(v);
            } else {
              record[table.columns[c]] = v;
            }
          },
          row[c]);
    }
    rows.push_back(std::move(record));
  }
  doc["rows"] = std::move(rows);
  return doc;
}

void write_json(const Table& table, std::ostream& out) { out << to_json(table).dump(2) << '\n'; }

std::size_t CsvDocument::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == name) return c;
  throw std::out_of_range("no column named '" + name + "'");
}

CsvDocument parse_csv(std::istream& in) {
  CsvDocument doc;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header && line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        doc.config.emplace_back(line.substr(2), "");
      else
        doc.config.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_record(line);
    if (!have_header) {
      doc.columns = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != doc.columns.size())
      throw std::invalid_argument("CSV row width " + std::to_string(fields.size()) +
                                  " does not match header width " + std::to_string(doc.columns.size()));
    doc.rows.push_back(std::move(fields));
  }
  return doc;
}

double parse_real(const std::string& text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  // strtod rather than stod: subnormals must parse, not throw.
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) throw std::invalid_argument("not a real number: '" + text + "'");
  return value;
}

std::int64_t parse_int(const std::string& text) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument("not an integer: '" + text + "'");
  return value;
}

}  // namespace roundcount
