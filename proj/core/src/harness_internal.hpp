#pragma once

#include <string>
#include <vector>

#include "robustbf/harness.hpp"

namespace robustbf::detail {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;
  const std::string& at(size_t row, const std::string& name) const;
};

/// Plain comma-separated text without quoting, as written by rows_to_csv.
CsvTable parse_csv(const std::string& text);

/// Each row's metric over its eps = 0 reference for the same seed and gamma; NaN without one.
std::vector<double> normalized(const std::vector<ResultRow>& rows, const std::string& metric);

}  // namespace robustbf::detail
