#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "catpool/stat_tests.hpp"

namespace catpool::cli {

// Shortest round-trip decimal; infinities print as inf / -inf.
std::string format_number(double value);
// Inverse of format_number; throws SchemaError on malformed text.
double parse_number(const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws SchemaError when the column is absent.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  const std::string& text(std::size_t row, const std::string& name) const;
};

// Every row must have as many fields as the header.
CsvTable read_csv(const std::string& path);

// Comma-separated output with LF line endings.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> header);
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::string path_;
  std::size_t width_;
  std::ofstream out_;
};

// Golden table of simulated RV critical values with the settings that
// produced it. Text format: one key=value per line, '#' comments.
struct RvGolden {
  RvCriticalSettings settings;
  std::map<double, double> values;  // significance -> critical value
};

void write_rv_golden(const std::string& path, const RvGolden& golden);
RvGolden read_rv_golden(const std::string& path);

}  // namespace catpool::cli
