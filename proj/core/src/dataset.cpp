#include "liquidcast/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "liquidcast/csv.hpp"

namespace liquidcast::dataset {

namespace {

using nlohmann::json;

std::string canonical_name(const SchemaColumn& c) {
  if (c.role == ColumnRole::TargetPrice) return kSpotPrice;
  return c.rename.empty() ? c.name : c.rename;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TimeSeriesFrame take_rows(const TimeSeriesFrame& frame,
                          const std::vector<std::size_t>& rows) {
  TimeSeriesFrame out;
  out.columns = frame.columns;
  out.dates.reserve(rows.size());
  out.values.resize(static_cast<Eigen::Index>(rows.size()),
                    frame.values.cols());
  const bool with_gaps = !frame.gaps.empty();
  if (with_gaps) out.gaps.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.dates.push_back(frame.dates[rows[i]]);
    if (with_gaps) out.gaps.push_back(frame.gaps[rows[i]]);
    out.values.row(static_cast<Eigen::Index>(i)) =
        frame.values.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace

bool TimeSeriesFrame::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::size_t TimeSeriesFrame::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    throw Error(ErrorCode::MissingExpectedColumn,
                "frame has no column '" + name + "'");
  }
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<std::string> Schema::sparse_columns() const {
  std::vector<std::string> out;
  for (const SchemaSource& s : sources) {
    for (const SchemaColumn& c : s.columns) {
      if (c.sparse) out.push_back(canonical_name(c));
    }
  }
  return out;
}

Schema parse_schema_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig,
                std::string("cannot parse schema JSON: ") + e.what());
  }
  Schema schema;
  try {
    std::size_t targets = 0;
    for (const json& src : doc.at("sources")) {
      SchemaSource s;
      s.path = src.at("path").get<std::string>();
      s.date_column = src.value("date_column", std::string("Date"));
      s.date_format = src.value("date_format", std::string("%Y-%m-%d"));
      for (const json& col : src.at("columns")) {
        SchemaColumn c;
        c.name = col.at("name").get<std::string>();
        c.rename = col.value("rename", std::string());
        const std::string role = col.value("role", std::string("feature"));
        if (role == "target_price") {
          c.role = ColumnRole::TargetPrice;
          ++targets;
        } else if (role == "feature") {
          c.role = ColumnRole::Feature;
        } else {
          throw Error(ErrorCode::BadConfig, "unknown column role '" + role + "'");
        }
        c.sparse = col.value("sparse", false);
        s.columns.push_back(std::move(c));
      }
      if (s.columns.empty()) {
        throw Error(ErrorCode::BadConfig,
                    "source '" + s.path + "' declares no columns");
      }
      schema.sources.push_back(std::move(s));
    }
    if (schema.sources.empty()) {
      throw Error(ErrorCode::BadConfig, "schema declares no sources");
    }
    if (targets != 1) {
      throw Error(ErrorCode::BadConfig,
                  "schema must declare exactly one target_price column");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig,
                std::string("malformed schema JSON: ") + e.what());
  }
  return schema;
}

Schema load_schema_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::BadConfig, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema_string(buf.str());
}

TimeSeriesFrame load_and_merge(const Schema& schema,
                               const std::string& base_dir) {
  struct LoadedSource {
    std::unordered_map<std::int64_t, std::size_t> row_of_date;
    std::vector<std::size_t> value_columns;  // indices into the csv table
    csv::Table table;
  };
  std::vector<LoadedSource> loaded;
  std::vector<std::string> names;

  for (const SchemaSource& entry : schema.sources) {
    LoadedSource src;
    const std::string path =
        base_dir.empty() ? entry.path : base_dir + "/" + entry.path;
    src.table = csv::read_file(path);
    const std::size_t date_col = src.table.column(entry.date_column);
    for (std::size_t r = 0; r < src.table.rows.size(); ++r) {
      const std::int64_t day =
          csv::parse_date(src.table.rows[r][date_col], entry.date_format);
      if (!src.row_of_date.emplace(day, r).second) {
        throw Error(ErrorCode::DuplicateDateWithinSource,
                    "date " + csv::format_date(day) + " repeats in '" +
                        entry.path + "'");
      }
    }
    for (const SchemaColumn& col : entry.columns) {
      src.value_columns.push_back(src.table.column(col.name));
      const std::string canon = canonical_name(col);
      if (std::find(names.begin(), names.end(), canon) != names.end()) {
        throw Error(ErrorCode::BadConfig,
                    "column '" + canon + "' declared more than once");
      }
      names.push_back(canon);
    }
    loaded.push_back(std::move(src));
  }

  // intersection of dates, ascending
  std::vector<std::int64_t> dates;
  for (const auto& [day, row] : loaded.front().row_of_date) {
    (void)row;
    bool everywhere = true;
    for (std::size_t s = 1; s < loaded.size(); ++s) {
      if (!loaded[s].row_of_date.count(day)) {
        everywhere = false;
        break;
      }
    }
    if (everywhere) dates.push_back(day);
  }
  if (dates.empty()) {
    throw Error(ErrorCode::EmptyJoin, "sources share no dates");
  }
  std::sort(dates.begin(), dates.end());

  TimeSeriesFrame frame;
  frame.dates = dates;
  frame.columns = names;
  frame.values.resize(static_cast<Eigen::Index>(dates.size()),
                      static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 0; r < dates.size(); ++r) {
    std::size_t out_col = 0;
    for (const LoadedSource& src : loaded) {
      const std::size_t src_row = src.row_of_date.at(dates[r]);
      for (const std::size_t c : src.value_columns) {
        frame.values(static_cast<Eigen::Index>(r),
                     static_cast<Eigen::Index>(out_col)) =
            csv::parse_number(src.table.rows[src_row][c]);
        ++out_col;
      }
    }
  }
  return frame;
}

std::pair<TimeSeriesFrame, RemovalReport> clean(
    const TimeSeriesFrame& frame, std::span<const std::string> sparse_columns) {
  RemovalReport report;
  report.rows_before = frame.rows();

  // 1. drop sparse columns
  TimeSeriesFrame slim;
  slim.dates = frame.dates;
  slim.gaps = frame.gaps;
  std::vector<std::size_t> kept_cols;
  for (std::size_t c = 0; c < frame.columns.size(); ++c) {
    const bool sparse =
        std::find(sparse_columns.begin(), sparse_columns.end(),
                  frame.columns[c]) != sparse_columns.end();
    if (sparse) {
      report.dropped_columns.push_back(frame.columns[c]);
    } else {
      kept_cols.push_back(c);
      slim.columns.push_back(frame.columns[c]);
    }
  }
  slim.values.resize(frame.values.rows(),
                     static_cast<Eigen::Index>(kept_cols.size()));
  for (std::size_t c = 0; c < kept_cols.size(); ++c) {
    slim.values.col(static_cast<Eigen::Index>(c)) =
        frame.values.col(static_cast<Eigen::Index>(kept_cols[c]));
  }

  // 2. outlier statistics on the full pre-drop price series
  const std::size_t price_col = slim.column(kSpotPrice);
  std::vector<double> prices;
  prices.reserve(slim.rows());
  for (std::size_t r = 0; r < slim.rows(); ++r) {
    const double p =
        slim.values(static_cast<Eigen::Index>(r),
                    static_cast<Eigen::Index>(price_col));
    if (std::isfinite(p)) prices.push_back(p);
  }
  double median = 0.0, sd = 0.0;
  const bool outlier_rule = prices.size() >= 2;
  if (outlier_rule) {
    median = median_of(prices);
    double mean = 0.0;
    for (double p : prices) mean += p;
    mean /= static_cast<double>(prices.size());
    double ss = 0.0;
    for (double p : prices) ss += (p - mean) * (p - mean);
    sd = std::sqrt(ss / static_cast<double>(prices.size() - 1));
  }

  // 3. row filters, both assessed against the pre-drop frame
  std::vector<std::size_t> kept_rows;
  for (std::size_t r = 0; r < slim.rows(); ++r) {
    const bool missing =
        !slim.values.row(static_cast<Eigen::Index>(r)).allFinite();
    if (missing) {
      ++report.rows_missing;
      continue;
    }
    if (outlier_rule && sd > 0.0) {
      const double p = slim.values(static_cast<Eigen::Index>(r),
                                   static_cast<Eigen::Index>(price_col));
      if (std::fabs(p - median) > kOutlierSigma * sd) {
        ++report.rows_outlier;
        continue;
      }
    }
    kept_rows.push_back(r);
  }
  TimeSeriesFrame out = take_rows(slim, kept_rows);
  report.rows_after = out.rows();
  return {std::move(out), report};
}

TimeSeriesFrame compute_returns(const TimeSeriesFrame& frame) {
  const std::size_t price_col = frame.column(kSpotPrice);
  if (frame.rows() < 3) {
    throw Error(ErrorCode::InsufficientHistory,
                "need at least 3 rows to derive returns and their lags");
  }
  for (const char* derived : {kSpotReturn, kAr1SpotPrice, kLagReturn}) {
    if (frame.has_column(derived)) {
      throw Error(ErrorCode::BadConfig,
                  std::string("frame already has derived column '") + derived +
                      "'");
    }
  }
  const std::size_t n = frame.rows();
  std::vector<double> price(n);
  for (std::size_t r = 0; r < n; ++r) {
    price[r] = frame.values(static_cast<Eigen::Index>(r),
                            static_cast<Eigen::Index>(price_col));
    if (!(price[r] > 0.0)) {
      throw Error(ErrorCode::NonPositivePrice,
                  "price at row " + std::to_string(r) + " is not positive");
    }
    if (r > 0 && frame.dates[r] <= frame.dates[r - 1]) {
      throw Error(ErrorCode::BadConfig, "dates are not strictly increasing");
    }
  }
  auto ret = [&](std::size_t r) {
    return 100.0 * (price[r] - price[r - 1]) / price[r - 1];
  };

  // canonical layout: price, derived columns, then the remaining features
  TimeSeriesFrame out;
  out.columns = {kSpotPrice, kSpotReturn, kAr1SpotPrice, kLagReturn};
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < frame.columns.size(); ++c) {
    if (c == price_col) continue;
    feature_cols.push_back(c);
    out.columns.push_back(frame.columns[c]);
  }
  const std::size_t kept = n - 2;  // the first two rows seed the lags
  out.dates.assign(frame.dates.begin() + 2, frame.dates.end());
  out.gaps.resize(kept);
  out.values.resize(static_cast<Eigen::Index>(kept),
                    static_cast<Eigen::Index>(out.columns.size()));
  for (std::size_t j = 0; j < kept; ++j) {
    const std::size_t i = j + 2;
    const auto row = static_cast<Eigen::Index>(j);
    out.gaps[j] = std::max<double>(
        1.0, static_cast<double>(frame.dates[i] - frame.dates[i - 1]));
    out.values(row, 0) = price[i];
    out.values(row, 1) = ret(i);
    out.values(row, 2) = price[i - 1];
    out.values(row, 3) = ret(i - 1);
    for (std::size_t c = 0; c < feature_cols.size(); ++c) {
      out.values(row, static_cast<Eigen::Index>(4 + c)) =
          frame.values(static_cast<Eigen::Index>(i),
                       static_cast<Eigen::Index>(feature_cols[c]));
    }
  }
  return out;
}

std::vector<std::string> feature_columns(const TimeSeriesFrame& frame,
                                         ArchKind arch) {
  if (!frame.has_column(kSpotReturn)) {
    throw Error(ErrorCode::MissingExpectedColumn,
                "frame has no return column; run compute_returns first");
  }
  std::vector<std::string> out;
  for (const std::string& name : frame.columns) {
    if (name == kSpotPrice || name == kSpotReturn || name == kAr1SpotPrice) {
      continue;
    }
    if (arch == ArchKind::CtLtc && name == kLagReturn) continue;
    out.push_back(name);
  }
  return out;
}

Matrix feature_matrix(const TimeSeriesFrame& frame,
                      std::span<const std::string> column_names,
                      std::size_t row_begin, std::size_t row_end,
                      RowAudit* audit) {
  if (row_begin >= row_end || row_end > frame.rows()) {
    throw Error(ErrorCode::RangeTooShort,
                "feature row range [" + std::to_string(row_begin) + ", " +
                    std::to_string(row_end) + ") is empty or out of bounds");
  }
  std::vector<std::size_t> cols;
  cols.reserve(column_names.size());
  for (const std::string& name : column_names) cols.push_back(frame.column(name));
  Matrix out(static_cast<Eigen::Index>(row_end - row_begin),
             static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = row_begin; r < row_end; ++r) {
    if (audit) audit->note(r);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Eigen::Index>(r - row_begin),
          static_cast<Eigen::Index>(c)) =
          frame.values(static_cast<Eigen::Index>(r),
                       static_cast<Eigen::Index>(cols[c]));
    }
  }
  return out;
}

std::pair<TimeSeriesFrame, TimeSeriesFrame> chronological_split(
    const TimeSeriesFrame& frame, double fraction) {
  const auto cut = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(frame.rows())));
  if (cut == 0 || cut >= frame.rows()) {
    throw Error(ErrorCode::DegenerateSplit,
                "split fraction leaves an empty part");
  }
  std::vector<std::size_t> head(cut), tail(frame.rows() - cut);
  std::iota(head.begin(), head.end(), std::size_t{0});
  std::iota(tail.begin(), tail.end(), cut);
  return {take_rows(frame, head), take_rows(frame, tail)};
}

namespace {

double gap_at(const TimeSeriesFrame& frame, std::size_t row) {
  return frame.gaps.empty() ? 1.0 : frame.gaps[row];
}

}  // namespace

std::vector<SequenceSample> make_samples(const TimeSeriesFrame& frame,
                                         ArchKind arch,
                                         const Standardizer& scaler,
                                         std::size_t row_begin,
                                         std::size_t row_end,
                                         std::size_t window_len,
                                         RowAudit* audit) {
  if (window_len == 0) {
    throw Error(ErrorCode::BadConfig, "window length must be positive");
  }
  if (row_end > frame.rows() || row_begin >= row_end) {
    throw Error(ErrorCode::RangeTooShort, "sample row range out of bounds");
  }
  if (row_end - row_begin < window_len + 1) {
    throw Error(ErrorCode::RangeTooShort,
                "range of " + std::to_string(row_end - row_begin) +
                    " rows cannot host a window plus target");
  }
  const std::vector<std::string> cols = feature_columns(frame, arch);
  if (scaler.dim() != static_cast<Eigen::Index>(cols.size())) {
    throw Error(ErrorCode::ShapeMismatch,
                "scaler dimension does not match the feature count");
  }
  const std::size_t count = (row_end - row_begin) - window_len;
  // feature rows span [row_begin, row_end - 1); standardize the block once
  const Matrix raw =
      feature_matrix(frame, cols, row_begin, row_end - 1, audit);
  const Matrix standardized = scaler.apply(raw);
  const std::size_t return_col = frame.column(kSpotReturn);

  std::vector<SequenceSample> samples;
  samples.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    SequenceSample s;
    s.window = standardized.middleRows(static_cast<Eigen::Index>(w),
                                       static_cast<Eigen::Index>(window_len));
    s.gaps.resize(window_len);
    s.gaps[0] = 1.0;  // the window's first row has no in-window predecessor
    for (std::size_t j = 1; j < window_len; ++j) {
      s.gaps[j] = gap_at(frame, row_begin + w + j);
    }
    const std::size_t target_row = row_begin + w + window_len;
    if (audit) audit->note(target_row);
    s.target = frame.values(static_cast<Eigen::Index>(target_row),
                            static_cast<Eigen::Index>(return_col));
    s.t_eval_row = target_row - 1;
    samples.push_back(std::move(s));
  }
  return samples;
}

SequenceSample make_forecast_window(const TimeSeriesFrame& frame, ArchKind arch,
                                    const Standardizer& scaler,
                                    std::size_t t_eval, std::size_t window_len,
                                    RowAudit* audit) {
  if (window_len == 0) {
    throw Error(ErrorCode::BadConfig, "window length must be positive");
  }
  if (t_eval >= frame.rows() || t_eval + 1 < window_len) {
    throw Error(ErrorCode::InsufficientHistory,
                "not enough history to assemble the window ending at row " +
                    std::to_string(t_eval));
  }
  const std::vector<std::string> cols = feature_columns(frame, arch);
  if (scaler.dim() != static_cast<Eigen::Index>(cols.size())) {
    throw Error(ErrorCode::ShapeMismatch,
                "scaler dimension does not match the feature count");
  }
  const std::size_t begin = t_eval + 1 - window_len;
  const Matrix raw = feature_matrix(frame, cols, begin, t_eval + 1, audit);
  SequenceSample s;
  s.window = scaler.apply(raw);
  s.gaps.resize(window_len);
  s.gaps[0] = 1.0;
  for (std::size_t j = 1; j < window_len; ++j) {
    s.gaps[j] = gap_at(frame, begin + j);
  }
  s.target = 0.0;
  s.t_eval_row = t_eval;
  return s;
}

double return_at(const TimeSeriesFrame& frame, std::size_t row) {
  return frame.values(static_cast<Eigen::Index>(row),
                      static_cast<Eigen::Index>(frame.column(kSpotReturn)));
}

void write_frame_csv(const TimeSeriesFrame& frame, const std::string& path) {
  std::vector<std::string> header = {"Date", "Calendar Gap"};
  header.insert(header.end(), frame.columns.begin(), frame.columns.end());
  std::vector<std::vector<std::string>> rows;
  rows.reserve(frame.rows());
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    std::vector<std::string> row;
    row.reserve(header.size());
    row.push_back(csv::format_date(frame.dates[r]));
    row.push_back(csv::format_number(gap_at(frame, r)));
    for (Eigen::Index c = 0; c < frame.values.cols(); ++c) {
      row.push_back(
          csv::format_number(frame.values(static_cast<Eigen::Index>(r), c)));
    }
    rows.push_back(std::move(row));
  }
  csv::write_file(path, header, rows);
}

TimeSeriesFrame read_frame_csv(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  const std::size_t date_col = table.column("Date");
  const bool has_gaps = table.has_column("Calendar Gap");
  const std::size_t gap_col = has_gaps ? table.column("Calendar Gap") : 0;
  TimeSeriesFrame frame;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == date_col || (has_gaps && c == gap_col)) continue;
    frame.columns.push_back(table.header[c]);
  }
  frame.values.resize(static_cast<Eigen::Index>(table.rows.size()),
                      static_cast<Eigen::Index>(frame.columns.size()));
  frame.dates.reserve(table.rows.size());
  if (has_gaps) frame.gaps.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    frame.dates.push_back(csv::parse_date(table.rows[r][date_col], "%Y-%m-%d"));
    if (has_gaps) {
      frame.gaps.push_back(csv::parse_number(table.rows[r][gap_col]));
    }
    std::size_t out_c = 0;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c == date_col || (has_gaps && c == gap_col)) continue;
      frame.values(static_cast<Eigen::Index>(r),
                   static_cast<Eigen::Index>(out_c)) =
          csv::parse_number(table.rows[r][c]);
      ++out_c;
    }
  }
  return frame;
}

}  // namespace liquidcast::dataset
