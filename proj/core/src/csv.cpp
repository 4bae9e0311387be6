#include "neurokinect/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "neurokinect/errors.hpp"

namespace nk {

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorKind::SchemaViolation, "missing CSV column '" + name + "'");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "cannot open " + path.string());
  }
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != table.header.size()) {
        throw Error(ErrorKind::CorruptData,
                    path.string() + ": row has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(cells));
    }
  }
  if (first) {
    throw Error(ErrorKind::CorruptData, path.string() + ": empty CSV");
  }
  return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write " + path.string());
  }
  std::ostringstream buf;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) buf << ',';
    buf << table.header[i];
  }
  buf << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) buf << ',';
      buf << row[i];
    }
    buf << '\n';
  }
  out << buf.str();
  if (!out) {
    throw Error(ErrorKind::IoError, "short write to " + path.string());
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell) {
  double v = 0.0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
    throw Error(ErrorKind::CorruptData, "bad numeric cell '" + cell + "'");
  }
  return v;
}

long parse_long(const std::string& cell) {
  long v = 0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
    throw Error(ErrorKind::CorruptData, "bad integer cell '" + cell + "'");
  }
  return v;
}

}  // namespace nk
