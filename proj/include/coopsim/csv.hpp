#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace coopsim {

// Six significant digits; values that are exact integers print without an
// exponent or decimal point so counts never degrade to "1e+06".
std::string csv_number(double value);
std::string csv_int(long long value);

// Minimal deterministic CSV assembly: header row plus data rows, '\n' line
// endings, no quoting (fields never contain commas here).
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);  // throws InputError on width mismatch
  std::string to_string() const;
  void write(const std::string& path) const;  // throws IoError

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace coopsim
