#include "dialect_audit/tsv.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "dialect_audit/error.hpp"

namespace dialect_audit::tsv {

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::require_column(std::string_view name, std::string_view context) const {
  if (auto idx = column(name)) return *idx;
  throw Error(ErrorKind::format,
              std::string(context) + ": missing required column '" + std::string(name) + "'");
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

Table read(std::istream& in, std::string_view source_name) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line.empty()) continue;
      table.header = split(line);
      std::set<std::string> seen;
      for (const auto& name : table.header) {
        if (name.empty()) {
          throw Error(ErrorKind::format, std::string(source_name) + ": empty column name in header");
        }
        if (!seen.insert(name).second) {
          throw Error(ErrorKind::format,
                      std::string(source_name) + ": duplicate column name '" + name + "'");
        }
      }
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() > table.header.size()) {
      throw Error(ErrorKind::format, std::string(source_name) + ":" + std::to_string(line_no) +
                                         ": row has " + std::to_string(fields.size()) +
                                         " fields, header has " +
                                         std::to_string(table.header.size()));
    }
    fields.resize(table.header.size());
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) {
    throw Error(ErrorKind::format, std::string(source_name) + ": missing header row");
  }
  return table;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return read(in, path.string());
}

void check_cell(std::string_view cell, std::string_view context) {
  if (cell.find_first_of("\t\n\r") != std::string_view::npos) {
    throw Error(ErrorKind::format, std::string(context) + ": cell contains a tab or newline");
  }
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << '\t';
    out << fields[i];
  }
  out << '\n';
}

void write(std::ostream& out, const Table& table) {
  write_row(out, table.header);
  for (const auto& row : table.rows) write_row(out, row);
}

}  // namespace dialect_audit::tsv
