#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace nk {

// Minimal CSV support for the formats this project emits and consumes
// (documented in docs/formats.md). Cells never contain commas or quotes, so
// no quoting layer is needed. Numbers are written with std::to_chars
// (shortest round-trip form) and parsed with std::from_chars, which keeps
// text files bit-exact under write/read cycles and independent of locale.

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws SchemaViolation
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Numeric cell helpers.
std::string format_double(double v);
double parse_double(const std::string& cell);  // throws CorruptData
long parse_long(const std::string& cell);      // throws CorruptData

}  // namespace nk
