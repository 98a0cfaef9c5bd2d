#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rulebench {

std::string read_file(const std::filesystem::path& path);

// Writes via a sibling temporary file and rename, so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);
// Fixed-point formatting with the given number of decimals.
std::string format_fixed(double value, int decimals);

double parse_double(std::string_view text, std::string_view context);
long long parse_int(std::string_view text, std::string_view context);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view line, char delimiter);

// One parsed row of a delimiter-separated file; `line` is 1-based.
struct TableRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<TableRow> rows;

  // Index of a header column; -1 when absent.
  int column(std::string_view name) const;
};

// Parses comma- or tab-separated text with a header row. Blank lines and
// lines starting with '#' are skipped. The delimiter is detected from the
// header.
Table parse_table(std::string_view text, const std::string& source);

}  // namespace rulebench
