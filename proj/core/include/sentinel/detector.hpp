#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/rmt.hpp"
#include "sentinel/test_function.hpp"
#include "sentinel/timeseries.hpp"

namespace sentinel::detect {

struct WindowSpec {
    std::size_t length = 2000;
    std::size_t stride = 100;

    /// Throws ConfigError unless length >= 2, stride >= 1 and length >= channels (c <= 1).
    void validate(std::size_t channels) const;
};

/// Number of windows over a series of `samples` samples: floor((L - length) / stride) + 1.
std::size_t window_count(std::size_t samples, const WindowSpec& spec);

/// Window k covers samples [k * stride, k * stride + length) of every channel.
std::vector<rmt::DataMatrix> sliding_windows(const TimeSeries& series, const WindowSpec& spec);

/// LES trace over sliding windows.
struct LESSeries {
    std::vector<double> window_end_s;
    std::vector<double> tau;
    std::vector<double> c;
    std::string phi;
    std::vector<std::string> channels;
    std::size_t window_length = 0;
    std::size_t stride = 0;
    bool standardized = false;

    std::size_t size() const noexcept { return tau.size(); }
};

/**
 * One LES value per window over the selected channels.
 *
 * Window end-time is the timestamp of the window's last sample. With
 * `standardize` each window's rows are standardized before the covariance
 * is formed. Zero-variance errors are rethrown with the window index.
 */
LESSeries les_series(const TimeSeries& series, const WindowSpec& spec, const TestFunction& phi,
                     bool standardize, std::span<const std::string> subset);

/// (tau - E tau) / sigma(tau) under the MP/CLT null.
double zscore_null(double tau, const TestFunction& phi, std::size_t n, double c, double kappa4);

/// Half-open window index range [begin, end).
struct WindowRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
};

/// Signed (tau - mean_ref) / std_ref, population standard deviation over the reference windows.
std::vector<double> reference_zscores(std::span<const double> tau, WindowRange reference);

/// |tau - mean_ref| / std_ref. The reference needs at least 8 windows and nonzero dispersion.
std::vector<double> reference_score(std::span<const double> tau, WindowRange reference);

enum class Method { null_zscore, reference_window };

std::string_view method_name(Method m);
/// "null-zscore" or "reference-window"; throws ConfigError otherwise.
Method parse_method(std::string_view text);

struct DetectionConfig {
    Method method = Method::reference_window;
    double threshold = 3.0;
    WindowRange reference{0, 30};
    std::size_t min_gap = 20;
    /// Fourth cumulant used by the null model.
    double kappa4 = 0.0;
    /// Re-learn the reference after each event (reference-window method only).
    bool rebaseline = true;

    void validate() const;
};

struct DetectionEvent {
    std::size_t window = 0;
    double time_s = 0.0;
    double score = 0.0;
    Method method = Method::reference_window;
    std::vector<std::string> channels;
};

/**
 * Threshold-crossing detector over a score sequence.
 *
 * An event fires where the score rises from below to at-or-above the
 * threshold (index 0 counts when it starts above). Crossings within
 * `min_gap` windows of the previous event are suppressed.
 */
std::vector<DetectionEvent> detect_changepoints(std::span<const double> scores,
                                                const DetectionConfig& cfg);

/// Scores plus events for a whole LES series.
struct DetectionResult {
    std::vector<double> scores;
    std::vector<DetectionEvent> events;
    /// Reference ranges used, in order (reference-window method).
    std::vector<WindowRange> references;
};

/**
 * Scores `series` with the configured method and detects events.
 *
 * With the reference-window method and `rebaseline`, detection runs as a
 * sequential fold: after an event at window k the reference moves to
 * [k + min_gap, k + min_gap + |reference|) and scanning resumes after it.
 * Windows are scored against the reference in force when they are reached.
 */
DetectionResult run_detection(const LESSeries& series, const DetectionConfig& cfg);

/// Per-cycle RMS of i0 = (iA + iB + iC) / 3 over complete cycles.
std::vector<double> zero_sequence_indicator(const TimeSeries& currents, std::size_t cycle);

} // namespace sentinel::detect
