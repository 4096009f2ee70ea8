#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liquidcast/cells.hpp"
#include "liquidcast/numerics.hpp"
#include "liquidcast/sample.hpp"

namespace liquidcast::dataset {

using cells::ArchKind;
using numerics::Matrix;
using numerics::Standardizer;
using numerics::Vector;

// Canonical column names of a prepared frame.
inline constexpr const char* kSpotPrice = "Spot Price";
inline constexpr const char* kSpotReturn = "Spot Return";
inline constexpr const char* kAr1SpotPrice = "AR1 Spot Price";
inline constexpr const char* kLagReturn = "Spot Return lag-1";

/// Window length used throughout: one model input spans this many rows.
inline constexpr std::size_t kWindow = 30;

/// Threshold of the price-level outlier filter, in standard deviations from
/// the median.
inline constexpr double kOutlierSigma = 5.5;

/// Records which frame rows were handed to a model-facing consumer (scaler
/// fitting, window assembly, target extraction for training). Bookkeeping
/// reads — e.g. storing the realized value next to a finished forecast — are
/// deliberately not audited.
struct RowAudit {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t max_row{kNone};
  std::size_t reads{0};

  void note(std::size_t row) noexcept {
    ++reads;
    if (max_row == kNone || row > max_row) max_row = row;
  }
  void merge(const RowAudit& other) noexcept {
    reads += other.reads;
    if (other.max_row != kNone) {
      if (max_row == kNone || other.max_row > max_row) max_row = other.max_row;
    }
  }
};

/// Date-indexed numeric table. Dates and calendar gaps ride alongside the
/// value columns so they can never leak into a feature matrix.
struct TimeSeriesFrame {
  std::vector<std::int64_t> dates;  ///< days since 1970-01-01, strictly increasing
  std::vector<double> gaps;  ///< elapsed days to the previous row (>= 1); empty
                             ///< until compute_returns
  std::vector<std::string> columns;
  Matrix values;  ///< rows() == dates.size(), cols() == columns.size()

  [[nodiscard]] std::size_t rows() const noexcept { return dates.size(); }
  [[nodiscard]] bool has_column(const std::string& name) const;
  /// @throws Error{MissingExpectedColumn}
  [[nodiscard]] std::size_t column(const std::string& name) const;
};

// --- Schema -----------------------------------------------------------------

enum class ColumnRole { Feature, TargetPrice };

struct SchemaColumn {
  std::string name;          ///< column header in the source file
  std::string rename;        ///< canonical name in the frame (defaults to name)
  ColumnRole role{ColumnRole::Feature};
  bool sparse{false};  ///< drop during cleaning instead of keeping
};

struct SchemaSource {
  std::string path;  ///< relative to the schema's directory or the data dir
  std::string date_column{"Date"};
  std::string date_format{"%Y-%m-%d"};
  std::vector<SchemaColumn> columns;
};

struct Schema {
  std::vector<SchemaSource> sources;

  /// Canonical names of columns flagged sparse.
  [[nodiscard]] std::vector<std::string> sparse_columns() const;
};

/// @throws Error{BadConfig} on malformed JSON or missing fields, and when the
///         schema does not declare exactly one target-price column.
[[nodiscard]] Schema parse_schema_string(const std::string& text);
[[nodiscard]] Schema load_schema_file(const std::string& path);

// --- Assembly ---------------------------------------------------------------

/// Reads every source file, parses dates, and inner-joins the sources on
/// their common dates (sorted ascending). Missing numeric fields become NaN.
///
/// @throws Error{UnparseableDate}
/// @throws Error{DuplicateDateWithinSource}
/// @throws Error{EmptyJoin}             when no date appears in every source.
/// @throws Error{MissingExpectedColumn} when a declared column is absent.
[[nodiscard]] TimeSeriesFrame load_and_merge(const Schema& schema,
                                             const std::string& base_dir);

struct RemovalReport {
  std::vector<std::string> dropped_columns;  ///< sparse columns removed
  std::size_t rows_before{0};
  std::size_t rows_missing{0};  ///< dropped for missing values
  std::size_t rows_outlier{0};  ///< dropped by the price-level filter
  std::size_t rows_after{0};
};

/// Cleaning pass: drops the named sparse columns, then drops rows with any
/// missing value and rows whose target price sits more than 5.5 standard
/// deviations from the median price. Both row rules are evaluated against the
/// frame as it stood before any row was removed; a row failing both counts as
/// missing.
[[nodiscard]] std::pair<TimeSeriesFrame, RemovalReport> clean(
    const TimeSeriesFrame& frame, std::span<const std::string> sparse_columns);

/// Derives the return structure from the target price column:
///   R_t = 100 * (P_t - P_{t-1}) / P_{t-1}
/// plus calendar gaps (elapsed days, floored at 1), the lagged price column
/// and the lagged return column. The first two input rows only seed the
/// derived columns and are consumed: every returned row is fully populated.
///
/// @throws Error{MissingExpectedColumn} when the price column is absent.
/// @throws Error{NonPositivePrice}      when any price is <= 0.
/// @throws Error{InsufficientHistory}   when fewer than 3 rows are given.
[[nodiscard]] TimeSeriesFrame compute_returns(const TimeSeriesFrame& frame);

/// Predictor column names for one architecture: every value column except
/// {Spot Return, Spot Price, AR1 Spot Price}; the continuous-time variant
/// additionally excludes the lagged return.
/// @throws Error{MissingExpectedColumn} when the frame lacks the derived
///         return column (i.e. compute_returns has not run).
[[nodiscard]] std::vector<std::string> feature_columns(
    const TimeSeriesFrame& frame, ArchKind arch);

/// Copies rows [row_begin, row_end) of the named columns; audited.
/// @throws Error{RangeTooShort} when the range is empty or out of bounds.
[[nodiscard]] Matrix feature_matrix(const TimeSeriesFrame& frame,
                                    std::span<const std::string> column_names,
                                    std::size_t row_begin, std::size_t row_end,
                                    RowAudit* audit = nullptr);

/// Head/tail split at floor(fraction * rows).
/// @throws Error{DegenerateSplit} when either part would be empty.
[[nodiscard]] std::pair<TimeSeriesFrame, TimeSeriesFrame> chronological_split(
    const TimeSeriesFrame& frame, double fraction);

/// All supervised samples whose feature window AND target row lie inside
/// [row_begin, row_end): window rows w..w+L-1, target at row w+L. Feature
/// rows are standardized with `scaler`; targets stay raw. The first gap of
/// each window is 1 (no in-window predecessor); later gaps come from the
/// frame.
///
/// @throws Error{RangeTooShort} when the range yields no sample.
/// @throws Error{ShapeMismatch} when the scaler does not match the feature
///         count.
[[nodiscard]] std::vector<SequenceSample> make_samples(
    const TimeSeriesFrame& frame, ArchKind arch, const Standardizer& scaler,
    std::size_t row_begin, std::size_t row_end, std::size_t window_len = kWindow,
    RowAudit* audit = nullptr);

/// The standardized window ending at t_eval (rows t_eval-L+1 .. t_eval), used
/// to forecast the next row. `target` is left at 0; the caller records the
/// realized value separately.
/// @throws Error{InsufficientHistory} when fewer than L rows precede t_eval+1.
[[nodiscard]] SequenceSample make_forecast_window(
    const TimeSeriesFrame& frame, ArchKind arch, const Standardizer& scaler,
    std::size_t t_eval, std::size_t window_len = kWindow,
    RowAudit* audit = nullptr);

/// Realized return of one row; an unaudited bookkeeping accessor.
[[nodiscard]] double return_at(const TimeSeriesFrame& frame, std::size_t row);

// --- Canonical frame CSV ------------------------------------------------------

/// Writes Date, Calendar Gap, then every value column. Numbers round-trip
/// exactly.
void write_frame_csv(const TimeSeriesFrame& frame, const std::string& path);
/// @throws Error{BadConfig} / Error{UnparseableDate} on malformed input.
[[nodiscard]] TimeSeriesFrame read_frame_csv(const std::string& path);

}  // namespace liquidcast::dataset
