#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kolmo {

/// Numeric CSV table with a single header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws Format if absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;
};

/// Values are written in the shortest form that round-trips exactly.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace kolmo
