#include "coopsim/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "coopsim/errors.hpp"

namespace coopsim {

std::string csv_number(double value) {
  if (std::isfinite(value) && std::abs(value) < 9.007199254740992e15 &&
      value == std::nearbyint(value)) {
    return csv_int(static_cast<long long>(value));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

std::string csv_int(long long value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", value);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw InputError("CsvTable: row width does not match header");
  }
  rows_.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
  std::string out;
  auto append_line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  append_line(header_);
  for (const auto& row : rows_) append_line(row);
  return out;
}

void CsvTable::write(const std::string& path) const {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open for writing: " + path);
  const std::string body = to_string();
  file.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!file) throw IoError("write failed: " + path);
}

}  // namespace coopsim
