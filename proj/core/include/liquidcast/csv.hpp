#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "liquidcast/errors.hpp"

namespace liquidcast::csv {

/// A parsed delimited file: header row plus data rows of raw string fields.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const;
  [[nodiscard]] bool has_column(const std::string& name) const;
};

/// RFC-4180 parser: quoted fields, doubled quotes, CR/LF line ends.
/// @throws Error{BadConfig} on structurally broken input (unbalanced quotes,
///         ragged rows).
[[nodiscard]] Table parse_string(const std::string& text);
[[nodiscard]] Table read_file(const std::string& path);

/// Field quoting for output (quotes only when needed).
[[nodiscard]] std::string escape_field(const std::string& field);

void write_file(const std::string& path,
                const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows);

/// Numeric field: NaN for empty or unparseable content (missing values).
[[nodiscard]] double parse_number(const std::string& field);

/// Shortest decimal representation that round-trips the double exactly.
[[nodiscard]] std::string format_number(double v);

// --- Calendar dates -------------------------------------------------------
// Dates are carried as days since 1970-01-01 (civil calendar).

[[nodiscard]] std::int64_t days_from_civil(int year, unsigned month,
                                           unsigned day) noexcept;
struct CivilDate {
  int year;
  unsigned month, day;
};
[[nodiscard]] CivilDate civil_from_days(std::int64_t days) noexcept;

/// Parses `text` against a format of %Y / %m / %d tokens separated by literal
/// characters (e.g. "%Y-%m-%d", "%m/%d/%Y").
/// @throws Error{UnparseableDate} when the text does not match or the date is
///         not a real calendar day.
[[nodiscard]] std::int64_t parse_date(const std::string& text,
                                      const std::string& format);

/// ISO-8601 rendering (YYYY-MM-DD).
[[nodiscard]] std::string format_date(std::int64_t days);

}  // namespace liquidcast::csv
