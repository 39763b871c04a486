#include "catpool/cli/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "catpool/errors.hpp"
#include "catpool/ingest.hpp"

namespace catpool::cli {

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_number(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw SchemaError("malformed number '" + text + "'");
  return v;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw SchemaError("missing column '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& name) const { return parse_number(rows.at(row)[column(name)]); }

const std::string& CsvTable::text(std::size_t row, const std::string& name) const { return rows.at(row)[column(name)]; }

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  CsvReader reader(in);
  CsvTable table;
  if (!reader.next(table.header)) throw SchemaError("'" + path + "' has no header");
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != table.header.size())
      throw SchemaError("'" + path + "' row " + std::to_string(table.rows.size() + 1) + " has " +
                        std::to_string(fields.size()) + " fields, header has " + std::to_string(table.header.size()));
    table.rows.push_back(fields);
  }
  return table;
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> header)
    : path_(path), width_(header.size()), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot open '" + path + "' for writing");
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) throw DomainError("row width does not match the header of '" + path_ + "'");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      out_ << f;
    } else {
      out_ << '"';
      for (char c : f) {
        if (c == '"') out_ << '"';
        out_ << c;
      }
      out_ << '"';
    }
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw IoError("write to '" + path_ + "' failed");
}

void write_rv_golden(const std::string& path, const RvGolden& golden) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "# Simulated upper quantiles of the regular-variation test limit.\n"
      << "# Regenerate with: catpool rv-critical\n"
      << "seed=" << golden.settings.seed << '\n'
      << "grid=" << golden.settings.grid << '\n'
      << "replications=" << golden.settings.replications << '\n';
  for (auto it = golden.values.rbegin(); it != golden.values.rend(); ++it)
    out << "level_" << format_number(it->first) << '=' << format_number(it->second) << '\n';
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

RvGolden read_rv_golden(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  RvGolden golden;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw SchemaError("malformed line '" + line + "' in '" + path + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "seed") golden.settings.seed = static_cast<std::uint64_t>(parse_number(value));
    else if (key == "grid") golden.settings.grid = static_cast<std::size_t>(parse_number(value));
    else if (key == "replications") golden.settings.replications = static_cast<std::size_t>(parse_number(value));
    else if (key.rfind("level_", 0) == 0) golden.values[parse_number(key.substr(6))] = parse_number(value);
    else throw SchemaError("unknown key '" + key + "' in '" + path + "'");
  }
  if (golden.values.empty()) throw SchemaError("'" + path + "' holds no critical values");
  return golden;
}

}  // namespace catpool::cli
