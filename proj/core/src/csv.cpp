#include "liquidcast/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace liquidcast::csv {

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw Error(ErrorCode::MissingExpectedColumn,
                "column '" + name + "' not found");
  }
  return static_cast<std::size_t>(it - header.begin());
}

bool Table::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

Table parse_string(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool had_any = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    had_any = true;
  };
  auto end_record = [&] {
    if (!record.empty() || had_any) {
      records.push_back(std::move(record));
      record.clear();
    }
    had_any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) {
          throw Error(ErrorCode::BadConfig, "stray quote inside a field");
        }
        quoted = true;
        had_any = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_field();
        end_record();
        break;
      default:
        field.push_back(c);
        had_any = true;
        break;
    }
  }
  if (quoted) {
    throw Error(ErrorCode::BadConfig, "unterminated quoted field");
  }
  if (had_any || !field.empty() || !record.empty()) {
    end_field();
    end_record();
  }
  if (records.empty()) {
    throw Error(ErrorCode::BadConfig, "csv input has no header row");
  }
  Table t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw Error(ErrorCode::BadConfig,
                  "row " + std::to_string(r) + " has " +
                      std::to_string(records[r].size()) + " fields, expected " +
                      std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::BadConfig, "cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

std::string escape_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_file(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::BadConfig, "cannot open '" + path + "' for writing");
  }
  auto write_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << escape_field(row[i]);
    }
    out << '\n';
  };
  write_row(header);
  for (const auto& row : rows) write_row(row);
  if (!out.good()) {
    throw Error(ErrorCode::BadConfig, "failed writing '" + path + "'");
  }
}

double parse_number(const std::string& field) {
  // Fields padded with whitespace are still numbers; only genuinely
  // non-numeric content maps to NaN (the missing-value marker).
  std::size_t lo = 0, hi = field.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(field[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(field[hi - 1]))) --hi;
  if (lo == hi) return std::numeric_limits<double>::quiet_NaN();
  const char* begin = field.c_str() + lo;
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != field.c_str() + hi) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::int64_t days_from_civil(int year, unsigned month, unsigned day) noexcept {
  year -= month <= 2;
  const std::int64_t era = (year >= 0 ? year : year - 399) / 400;
  const auto yoe = static_cast<unsigned>(year - era * 400);
  const unsigned doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t days) noexcept {
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const auto doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe =
      (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : static_cast<unsigned>(-9));
  return CivilDate{static_cast<int>(y + (m <= 2)), m, d};
}

std::int64_t parse_date(const std::string& text, const std::string& format) {
  std::size_t pos = 0;
  int year = 0;
  unsigned month = 0, day = 0;
  bool saw_y = false, saw_m = false, saw_d = false;

  auto fail = [&]() -> std::int64_t {
    throw Error(ErrorCode::UnparseableDate,
                "'" + text + "' does not match format '" + format + "'");
  };
  auto read_digits = [&](std::size_t max_len, std::size_t min_len) -> long {
    std::size_t len = 0;
    long value = 0;
    while (len < max_len && pos < text.size() &&
           text[pos] >= '0' && text[pos] <= '9') {
      value = value * 10 + (text[pos] - '0');
      ++pos;
      ++len;
    }
    if (len < min_len) fail();
    return value;
  };

  for (std::size_t f = 0; f < format.size(); ++f) {
    if (format[f] == '%' && f + 1 < format.size()) {
      const char tok = format[f + 1];
      ++f;
      switch (tok) {
        case 'Y':
          year = static_cast<int>(read_digits(4, 4));
          saw_y = true;
          break;
        case 'm':
          month = static_cast<unsigned>(read_digits(2, 1));
          saw_m = true;
          break;
        case 'd':
          day = static_cast<unsigned>(read_digits(2, 1));
          saw_d = true;
          break;
        default:
          fail();
      }
      continue;
    }
    if (pos >= text.size() || text[pos] != format[f]) fail();
    ++pos;
  }
  if (pos != text.size() || !saw_y || !saw_m || !saw_d) fail();
  if (month < 1 || month > 12 || day < 1 || day > 31) fail();
  const std::int64_t days = days_from_civil(year, month, day);
  const CivilDate back = civil_from_days(days);
  if (back.year != year || back.month != month || back.day != day) fail();
  return days;
}

std::string format_date(std::int64_t days) {
  const CivilDate c = civil_from_days(days);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
  return std::string(buf);
}

}  // namespace liquidcast::csv
