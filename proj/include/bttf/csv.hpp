#pragma once

#include <string>

#include "bttf/timeseries.hpp"

namespace bttf {

/// Where and how to read a benchmark CSV. Empty target_column selects
/// "OT" when the header has it (ETT convention), otherwise the last
/// column. date_column, when present in the header, is excluded from
/// target auto-selection.
struct DatasetSpec {
    std::string path;
    std::string target_column;  // empty = auto
    std::string date_column = "date";
    std::string name;
};

struct LoadInfo {
    long rows = 0;
    long skipped_trailing_blank = 0;
    std::string resolved_target;
};

/// Loads the target column of a comma-separated UTF-8 file with a header
/// row. Trailing blank lines are skipped. Parsing is locale-independent
/// (dot decimal separator). Errors name missing columns (listing the
/// header) and unparseable cells (with their 1-based data row).
TimeSeries load_csv(const DatasetSpec& spec, LoadInfo* info = nullptr);

/// Single-column CSV (header = series name); values are written with
/// enough digits to reload bit-identically.
void write_csv(const std::string& path, const TimeSeries& series);

} // namespace bttf
