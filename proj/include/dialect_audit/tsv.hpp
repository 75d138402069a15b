#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dialect_audit::tsv {

// Header-first, tab-separated, no quoting. CR before LF is tolerated on
// input; output always uses LF.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name, std::string_view context) const;
};

/// Throws Error(format) for a missing header, duplicate column names or a
/// row with more fields than the header. Short rows are padded with empty
/// cells.
Table read(std::istream& in, std::string_view source_name);
Table read_file(const std::filesystem::path& path);

void write_row(std::ostream& out, const std::vector<std::string>& fields);
void write(std::ostream& out, const Table& table);

std::vector<std::string> split(std::string_view line, char sep = '\t');

/// Rejects tabs and newlines, which cannot be represented in a cell.
void check_cell(std::string_view cell, std::string_view context);

}  // namespace dialect_audit::tsv
