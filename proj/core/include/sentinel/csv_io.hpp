#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>

#include "sentinel/detector.hpp"
#include "sentinel/timeseries.hpp"

namespace sentinel::io {

/// File-system failure while reading or writing an artifact.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/**
 * TimeSeries CSV: header `t,<id>:<name>,...`, one row per sample, time in
 * fixed decimal seconds, values with 17 significant digits.
 */
std::string format_timeseries_csv(const TimeSeries& series);
void write_timeseries_csv(const TimeSeries& series, const std::filesystem::path& path);

/// Parses the CSV produced by format_timeseries_csv. Sample rate comes from the time column.
TimeSeries parse_timeseries_csv(std::istream& in);
TimeSeries load_timeseries_csv(const std::filesystem::path& path);

/**
 * LES CSV: `# key=value` metadata lines (phi, standardize, window_length,
 * stride, channels, c) followed by `window_end_s,tau,score`.
 * Missing scores are written as `nan`.
 */
std::string format_les_csv(const detect::LESSeries& series, std::span<const double> scores);
void write_les_csv(const detect::LESSeries& series, std::span<const double> scores,
                   const std::filesystem::path& path);

struct LoadedLES {
    detect::LESSeries series;
    std::vector<double> scores;
};

LoadedLES parse_les_csv(std::istream& in);
LoadedLES load_les_csv(const std::filesystem::path& path);

} // namespace sentinel::io
