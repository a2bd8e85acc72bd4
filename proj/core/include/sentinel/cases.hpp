#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sentinel/config.hpp"
#include "sentinel/detector.hpp"
#include "sentinel/timeseries.hpp"

namespace sentinel::cases {

/// One PASS/FAIL line of a case reproduction.
struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

// ---- Lorenz change-point case -------------------------------------------

/// Run configuration for the Lorenz case: rho 28 -> 30 at 60 s -> 31 at 120 s, 100 Hz, 180 s.
RunConfig lorenz_case_config();

/// Index of the first window whose end time is at or after `time_s`.
std::size_t first_window_ending_after(const detect::LESSeries& les, double time_s);

struct LorenzCaseResult {
    TimeSeries raw;
    detect::LESSeries les;
    detect::DetectionResult detection;
    std::vector<double> change_times_s;
    std::vector<std::size_t> change_windows;
    /// Largest allowed delay, in windows, between a change point and its event.
    std::size_t tolerance_windows = 10;
    std::vector<Check> checks;

    bool passed() const;
};

LorenzCaseResult run_lorenz_case(const RunConfig& cfg);

// ---- Synthetic fault-recorder case --------------------------------------

/**
 * Seven fault recorders on the feeders of one substation bus, each logging
 * VA, VB, VC, IA, IB, IC. A single-phase (A) ground fault starts mid-record
 * and lasts to the end. The neutral shift appears on every recorder's
 * voltages; zero-sequence current is strong on the sensitive feeders and
 * only a faint trace on the others.
 */
struct FaultCaseConfig {
    std::size_t recorders = 7;
    /// The last `sensitive` recorders sit on feeders with strong zero-sequence response.
    std::size_t sensitive = 3;
    double fundamental_hz = 50.0;
    std::size_t samples_per_cycle = 64;
    std::size_t cycles_before = 10;
    std::size_t cycles_after = 10;
    double voltage_amplitude = 1.0;
    /// Load current amplitudes are drawn from [min, max] per feeder.
    double current_min = 0.3;
    double current_max = 1.0;
    /// Per-feeder voltage magnitude spread (fraction) and angle spread (rad).
    double voltage_spread = 0.02;
    double angle_spread = 0.03;
    /// Zero-sequence current amplitude during the fault.
    double sensitive_i0 = 0.5;
    double insensitive_i0 = 0.004;
    /// Inception transient on voltages and sensitive-feeder currents.
    double transient_amplitude = 0.3;
    double transient_frequency_hz = 700.0;
    double transient_decay_s = 0.005;
    double snr_db = 40.0;
    /// False leaves the data fault-free (used for threshold calibration).
    bool faulted = true;

    double sample_rate() const { return fundamental_hz * static_cast<double>(samples_per_cycle); }
    std::size_t samples() const { return (cycles_before + cycles_after) * samples_per_cycle; }
    double fault_start_s() const { return static_cast<double>(cycles_before) / fundamental_hz; }
    void validate() const;
};

struct FaultDataset {
    TimeSeries series;
    std::vector<EntityDescriptor> entities;
    double fault_start_s = 0.0;
    double fault_end_s = 0.0;
    std::vector<std::size_t> sensitive;
};

FaultDataset make_fault_dataset(const FaultCaseConfig& cfg, std::uint64_t seed);

struct FaultCaseSettings {
    FaultCaseConfig data;
    detect::WindowSpec window{128, 16};
    std::string phi = "square";
    bool standardize = true;
    detect::DetectionConfig detection{detect::Method::reference_window, 3.0, {0, 16}, 8, 0.0, true};
    /// Zero-sequence alarm level as a multiple of the mean pre-fault indicator.
    double zero_sequence_factor = 5.0;
    /// The LES threshold is raised to `calibration_margin` times the largest reference score
    /// seen on this many fault-free datasets (seeds disjoint from the run seed). 0 disables.
    std::size_t calibration_runs = 20;
    double calibration_margin = 2.0;
};

/// Fault-free calibration of the LES alarm level; never below `s.detection.threshold`.
double calibrate_fault_threshold(const FaultCaseSettings& s, std::uint64_t seed);

struct FaultCaseResult {
    FaultDataset data;
    detect::LESSeries les_all;
    detect::LESSeries les_subset;
    detect::DetectionResult detection_all;
    detect::DetectionResult detection_subset;
    /// Detection settings actually used, with the calibrated threshold.
    detect::DetectionConfig detection;
    /// Per recorder: per-cycle zero-sequence RMS and its alarm threshold.
    std::vector<std::vector<double>> zero_sequence;
    std::vector<double> zero_sequence_threshold;
    std::vector<double> zero_sequence_prefault;
    std::vector<Check> checks;

    bool passed() const;
};

FaultCaseResult run_fault_case(const FaultCaseSettings& settings, std::uint64_t seed);

/**
 * Plot-ready comparison table, one row per window: both LES traces, their
 * scores, and each recorder's zero-sequence indicator for the cycle holding
 * the window's last sample.
 */
std::string fault_comparison_csv(const FaultCaseResult& result);

} // namespace sentinel::cases
