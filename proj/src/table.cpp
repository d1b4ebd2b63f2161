#include "cohstat/table.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace cohstat {

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace {

std::string render(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(const std::string& v) const { return v; }
  };
  std::string text = std::visit(Visitor{}, cell);
  if (text.find_first_of(",\n\r") != std::string::npos)
    throw std::logic_error("Table: cell would need quoting: " + text);
  return text;
}

} // namespace

Table::Table(std::vector<std::string> columns_) : columns(std::move(columns_)) {
  if (columns.empty()) throw std::invalid_argument("Table: no columns");
}

void Table::push_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("Table: row length mismatches header");
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out << ',';
    out << render(Cell(columns[i]));
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << render(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

Table Table::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(s);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!s.empty() && s.back() == ',') fields.emplace_back();
    return fields;
  };
  if (!std::getline(in, line))
    throw std::invalid_argument("Table::from_csv: missing header");
  Table table(split(line));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<Cell> row;
    for (auto& field : split(line)) row.emplace_back(std::move(field));
    table.push_row(std::move(row));
  }
  return table;
}

} // namespace cohstat
