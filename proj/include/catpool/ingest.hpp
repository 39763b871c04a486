#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <set>
#include <string>
#include <vector>

namespace catpool {

struct YearMonth {
  int year = 0;
  int month = 0;  // 1..12

  int index() const noexcept { return year * 12 + (month - 1); }
  static YearMonth from_index(int index) noexcept { return {index / 12, index % 12 + 1}; }
  auto operator<=>(const YearMonth&) const = default;
};

// Inclusive month range.
struct MonthWindow {
  YearMonth start;
  YearMonth end;

  int months() const noexcept { return end.index() - start.index() + 1; }
  bool contains(YearMonth ym) const noexcept { return start <= ym && ym <= end; }
};

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  YearMonth year_month() const noexcept { return {year, month}; }
};

// Accepts YYYY-MM-DD with an optional time suffix, and M/D/YYYY.
// Throws DomainError on anything else.
Date parse_date(const std::string& text);

// Decimal money amount in integer cents, rounded half away from zero.
// Empty text is 0. Throws DomainError on malformed text.
std::int64_t parse_cents(const std::string& text);

struct ClaimRecord {
  std::size_t row = 0;  // 1-based data row in the source file
  Date date_of_loss;
  std::string state;
  std::int64_t building_cents = 0;
  std::int64_t contents_cents = 0;

  std::int64_t total_cents() const noexcept { return building_cents + contents_cents; }
};

struct ClaimSchema {
  std::string date_column = "dateOfLoss";
  std::string state_column = "state";
  std::string building_column = "buildingDamageAmount";
  std::string contents_column = "contentsDamageAmount";
  char delimiter = ',';
};

struct RejectedRow {
  std::size_t row = 0;  // 1-based data row, header excluded
  std::string reason;
};

struct ParseSummary {
  std::size_t rows = 0;
  std::size_t accepted = 0;
  std::vector<RejectedRow> rejects;
};

// Splits delimited text with RFC 4180 quoting; quoted fields may span lines.
class CsvReader {
 public:
  CsvReader(std::istream& in, char delimiter = ',') : in_(in), delimiter_(delimiter) {}
  // False at end of input.
  bool next(std::vector<std::string>& fields);

 private:
  std::istream& in_;
  char delimiter_;
};

// Streams accepted records to `sink`. Unparseable dates, malformed or
// negative amounts and short rows are rejected with their row number.
// Throws SchemaError naming a missing column, IoError when unreadable.
ParseSummary for_each_claim(std::istream& in, const ClaimSchema& schema,
                            const std::function<void(const ClaimRecord&)>& sink);
ParseSummary for_each_claim(const std::string& path, const ClaimSchema& schema,
                            const std::function<void(const ClaimRecord&)>& sink);

std::vector<ClaimRecord> parse_claims(const std::string& path, const ClaimSchema& schema,
                                      ParseSummary* summary = nullptr);

// Monthly building + contents totals for one state, zero-filled.
struct LossSeries {
  std::string state;
  YearMonth start;
  std::vector<std::int64_t> cents;

  std::vector<double> values() const;  // dollars
  bool operator==(const LossSeries&) const = default;
};

// Incremental aggregation; records of other states are ignored, records of
// selected states outside the window are rejected.
class MonthlyAggregator {
 public:
  MonthlyAggregator(std::set<std::string> states, MonthWindow window);

  // False when the record was rejected for lying outside the window.
  bool add(const ClaimRecord& record);

  std::vector<LossSeries> series() const;  // sorted by state
  std::int64_t accepted_total_cents() const noexcept { return accepted_total_; }
  std::size_t out_of_window() const noexcept { return out_of_window_; }

 private:
  std::set<std::string> states_;
  MonthWindow window_;
  std::vector<std::vector<std::int64_t>> cells_;
  std::int64_t accepted_total_ = 0;
  std::size_t out_of_window_ = 0;
};

std::vector<LossSeries> aggregate_monthly(const std::vector<ClaimRecord>& records, const std::set<std::string>& states,
                                          MonthWindow window);

// Canonical format: header state,year,month,loss_cents; rows sorted by
// (state, year, month); LF line endings.
void persist_series(const std::vector<LossSeries>& series, const std::string& path);
void write_series(const std::vector<LossSeries>& series, std::ostream& out);
std::vector<LossSeries> read_series(const std::string& path);
std::vector<LossSeries> read_series(std::istream& in);

}  // namespace catpool
