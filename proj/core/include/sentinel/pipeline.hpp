#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "sentinel/cases.hpp"
#include "sentinel/detector.hpp"

namespace sentinel::pipeline {

/// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitChecksFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Maps the exception in flight to an exit status and prints it to `err`, prefixed with `stage`.
int report_failure(std::ostream& err, const std::string& stage);

struct SimulateOptions {
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
};

/// Simulates the configured system (plus optional noise) and writes a TimeSeries CSV.
int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);

struct AnalyzeOptions {
    std::filesystem::path in;
    std::filesystem::path out;
    detect::WindowSpec window;
    std::string phi = "square";
    std::string subset;
    bool standardize = true;
    double kappa4 = 0.0;
};

/// Computes the LES series of a TimeSeries CSV. The score column holds null-model z-scores.
int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& err);

struct DetectOptions {
    std::filesystem::path in;
    std::filesystem::path out;
    std::string method = "reference-window";
    detect::DetectionConfig detection;
};

/// Detects events in an LES CSV and writes a JSON report.
int cmd_detect(const DetectOptions& opt, std::ostream& out, std::ostream& err);

/// JSON event report for a detection run.
std::string events_json(const detect::LESSeries& les, const detect::DetectionConfig& cfg,
                        const detect::DetectionResult& result);

struct ReproduceOptions {
    std::string case_name;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
};

/**
 * Runs a case end to end and writes its artifacts into `out_dir`:
 *   lorenz: raw.csv, les.csv, events.json, config.json
 *   fault:  raw.csv, entities.json, les_1-42.csv, les_1-24.csv,
 *           events_1-42.json, events_1-24.json, comparison.csv
 * Prints one PASS/FAIL line per check. Returns kExitChecksFailed when a check fails.
 */
int cmd_reproduce(const ReproduceOptions& opt, std::ostream& out, std::ostream& err);

} // namespace sentinel::pipeline
