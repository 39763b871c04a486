#include "catpool/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "catpool/errors.hpp"

namespace catpool {
namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DomainError("not an integer: '" + std::string(s) + "'");
  return v;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && leap(y) ? 29 : days[m - 1];
}

Date checked_date(int y, int m, int d, const std::string& text) {
  if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) throw DomainError("invalid calendar date '" + text + "'");
  return {y, m, d};
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError("missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

Date parse_date(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.size() >= 10 && text[4] == '-' && text[7] == '-') {
    const std::string_view v(text);
    if (!all_digits(v.substr(0, 4)) || !all_digits(v.substr(5, 2)) || !all_digits(v.substr(8, 2)) ||
        (text.size() > 10 && text[10] != 'T' && text[10] != ' '))
      throw DomainError("unparseable date '" + text + "'");
    return checked_date(to_int(v.substr(0, 4)), to_int(v.substr(5, 2)), to_int(v.substr(8, 2)), text);
  }
  const auto s1 = text.find('/');
  const auto s2 = s1 == std::string::npos ? std::string::npos : text.find('/', s1 + 1);
  if (s2 != std::string::npos) {
    const std::string_view v(text);
    const auto m = v.substr(0, s1), d = v.substr(s1 + 1, s2 - s1 - 1), y = v.substr(s2 + 1, 4);
    const bool time_ok = v.size() == s2 + 5 || (v.size() > s2 + 5 && v[s2 + 5] == ' ');
    if (all_digits(m) && all_digits(d) && all_digits(y) && y.size() == 4 && m.size() <= 2 && d.size() <= 2 && time_ok)
      return checked_date(to_int(y), to_int(m), to_int(d), text);
  }
  throw DomainError("unparseable date '" + text + "'");
}

std::int64_t parse_cents(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.empty()) return 0;
  std::string_view v(text);
  bool negative = false;
  if (v.front() == '-' || v.front() == '+') {
    negative = v.front() == '-';
    v.remove_prefix(1);
  }
  const auto dot = v.find('.');
  const std::string_view whole = v.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view() : v.substr(dot + 1);
  const bool plain = (whole.empty() || all_digits(whole)) && (frac.empty() || all_digits(frac)) &&
                     !(whole.empty() && frac.empty()) && whole.size() <= 15;
  if (!plain) {
    // Exponent notation and similar fall back to floating point.
    double d = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(d) || std::fabs(d) > 1e15)
      throw DomainError("malformed amount '" + text + "'");
    return std::llround(d * 100.0);
  }
  std::int64_t cents = 0;
  for (char c : whole) cents = cents * 10 + (c - '0');
  cents *= 100;
  if (!frac.empty()) {
    const int tenths = frac[0] - '0';
    const int hundredths = frac.size() > 1 ? frac[1] - '0' : 0;
    cents += tenths * 10 + hundredths;
    if (frac.size() > 2 && frac[2] >= '5') cents += 1;
  }
  return negative ? -cents : cents;
}

bool CsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool any = false;
  bool quoted = false;
  int ch;
  while ((ch = in_.get()) != EOF) {
    any = true;
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter_) {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (c == '\r') {
      if (in_.peek() == '\n') in_.get();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (in_.bad()) throw IoError("read error");
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

ParseSummary for_each_claim(std::istream& in, const ClaimSchema& schema,
                            const std::function<void(const ClaimRecord&)>& sink) {
  CsvReader reader(in, schema.delimiter);
  std::vector<std::string> header;
  if (!reader.next(header)) throw SchemaError("input has no header row");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  for (auto& h : header) h = trim(h);
  const std::size_t date_col = column_index(header, schema.date_column);
  const std::size_t state_col = column_index(header, schema.state_column);
  const std::size_t building_col = column_index(header, schema.building_column);
  const std::size_t contents_col = column_index(header, schema.contents_column);
  const std::size_t needed = std::max({date_col, state_col, building_col, contents_col}) + 1;

  ParseSummary summary;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    const std::size_t row = ++summary.rows;
    try {
      if (fields.size() < needed) throw DomainError("row has " + std::to_string(fields.size()) + " fields");
      ClaimRecord record;
      record.row = row;
      record.date_of_loss = parse_date(fields[date_col]);
      record.state = trim(fields[state_col]);
      if (record.state.empty()) throw DomainError("empty state");
      record.building_cents = parse_cents(fields[building_col]);
      record.contents_cents = parse_cents(fields[contents_col]);
      if (record.building_cents < 0 || record.contents_cents < 0) throw DomainError("negative damage amount");
      ++summary.accepted;
      sink(record);
    } catch (const DomainError& e) {
      summary.rejects.push_back({row, e.what()});
    }
  }
  return summary;
}

ParseSummary for_each_claim(const std::string& path, const ClaimSchema& schema,
                            const std::function<void(const ClaimRecord&)>& sink) {
  std::ifstream in = open_input(path);
  return for_each_claim(in, schema, sink);
}

std::vector<ClaimRecord> parse_claims(const std::string& path, const ClaimSchema& schema, ParseSummary* summary) {
  std::vector<ClaimRecord> records;
  ParseSummary s = for_each_claim(path, schema, [&](const ClaimRecord& r) { records.push_back(r); });
  if (summary) *summary = std::move(s);
  return records;
}

std::vector<double> LossSeries::values() const {
  std::vector<double> out;
  out.reserve(cents.size());
  for (std::int64_t c : cents) out.push_back(static_cast<double>(c) / 100.0);
  return out;
}

MonthlyAggregator::MonthlyAggregator(std::set<std::string> states, MonthWindow window)
    : states_(std::move(states)), window_(window) {
  if (window.start.month < 1 || window.start.month > 12 || window.end.month < 1 || window.end.month > 12)
    throw DomainError("window months must lie in 1..12");
  if (window.end < window.start) throw DomainError("window start must not follow its end");
  cells_.assign(states_.size(), std::vector<std::int64_t>(static_cast<std::size_t>(window.months()), 0));
}

bool MonthlyAggregator::add(const ClaimRecord& record) {
  const auto it = states_.find(record.state);
  if (it == states_.end()) return true;
  const YearMonth ym = record.date_of_loss.year_month();
  if (!window_.contains(ym)) {
    ++out_of_window_;
    return false;
  }
  const auto s = static_cast<std::size_t>(std::distance(states_.begin(), it));
  cells_[s][static_cast<std::size_t>(ym.index() - window_.start.index())] += record.total_cents();
  accepted_total_ += record.total_cents();
  return true;
}

std::vector<LossSeries> MonthlyAggregator::series() const {
  std::vector<LossSeries> out;
  std::size_t s = 0;
  for (const auto& state : states_) out.push_back({state, window_.start, cells_[s++]});
  return out;
}

std::vector<LossSeries> aggregate_monthly(const std::vector<ClaimRecord>& records, const std::set<std::string>& states,
                                          MonthWindow window) {
  MonthlyAggregator agg(states, window);
  for (const auto& r : records) agg.add(r);
  return agg.series();
}

void write_series(const std::vector<LossSeries>& series, std::ostream& out) {
  std::vector<const LossSeries*> sorted;
  for (const auto& s : series) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const LossSeries* a, const LossSeries* b) {
    return std::tie(a->state, a->start) < std::tie(b->state, b->start);
  });
  out << "state,year,month,loss_cents\n";
  for (const LossSeries* s : sorted) {
    for (std::size_t k = 0; k < s->cents.size(); ++k) {
      const YearMonth ym = YearMonth::from_index(s->start.index() + static_cast<int>(k));
      out << s->state << ',' << ym.year << ',' << ym.month << ',' << s->cents[k] << '\n';
    }
  }
}

void persist_series(const std::vector<LossSeries>& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_series(series, out);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<LossSeries> read_series(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw SchemaError("series file is empty");
  if (fields != std::vector<std::string>{"state", "year", "month", "loss_cents"})
    throw SchemaError("series header must be state,year,month,loss_cents");
  std::map<std::string, LossSeries> by_state;
  std::size_t row = 0;
  while (reader.next(fields)) {
    ++row;
    if (fields.size() != 4) throw SchemaError("series row " + std::to_string(row) + " must have 4 fields");
    std::int64_t cents = 0;
    const auto& c = fields[3];
    const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), cents);
    if (ec != std::errc() || ptr != c.data() + c.size())
      throw SchemaError("series row " + std::to_string(row) + " has a malformed loss_cents");
    YearMonth ym;
    try {
      ym = {to_int(fields[1]), to_int(fields[2])};
    } catch (const DomainError&) {
      throw SchemaError("series row " + std::to_string(row) + " has a malformed year or month");
    }
    if (ym.month < 1 || ym.month > 12) throw SchemaError("series row " + std::to_string(row) + " has month out of range");
    auto [it, fresh] = by_state.try_emplace(fields[0]);
    LossSeries& s = it->second;
    if (fresh) {
      s.state = fields[0];
      s.start = ym;
    } else if (ym.index() != s.start.index() + static_cast<int>(s.cents.size())) {
      throw SchemaError("series row " + std::to_string(row) + " breaks the monthly sequence of " + fields[0]);
    }
    s.cents.push_back(cents);
  }
  std::vector<LossSeries> out;
  for (auto& [_, s] : by_state) out.push_back(std::move(s));
  return out;
}

std::vector<LossSeries> read_series(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_series(in);
}

}  // namespace catpool
