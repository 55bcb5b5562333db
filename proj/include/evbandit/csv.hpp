#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace evbandit::io {

struct CsvRow {
  std::size_t line;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

/// Reads a plain comma-separated file (no quoting). Blank lines are skipped.
/// Throws ParseError on a missing header or a row with the wrong arity, and
/// IoError when the file cannot be opened.
CsvTable read_csv(const std::filesystem::path& path);

/// Throws ParseError unless the header matches `expected` exactly.
void expect_header(const CsvTable& table, const std::vector<std::string>& expected);

double parse_double(const CsvTable& table, const CsvRow& row, std::size_t column);
std::int64_t parse_int(const CsvTable& table, const CsvRow& row, std::size_t column);

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace evbandit::io
