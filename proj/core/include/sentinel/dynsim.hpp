#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/timeseries.hpp"

namespace sentinel::dynsim {

using State = std::vector<double>;

/// Right-hand side of an autonomous or time-dependent ODE: writes dx/dt into `dxdt`.
using Dynamics = std::function<void(std::span<const double> x, double t, std::span<double> dxdt)>;

/**
 * One classical fourth-order Runge-Kutta step.
 *
 * Throws IntegrationError naming the first component whose stage derivative
 * is not finite.
 */
State rk4_step(std::span<const double> state, double t, double dt, const Dynamics& f);

struct LorenzParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;

    void validate() const;
    /// Sets "sigma", "rho" or "beta". Throws ConfigError on anything else.
    void set(std::string_view name, double value);
};

struct ScheduleEntry {
    double time_s = 0.0;
    std::string parameter;
    double value = 0.0;
};

/// Parameter jumps applied during a run, ordered by strictly increasing time.
struct ParameterSchedule {
    std::vector<ScheduleEntry> entries;

    void validate(std::span<const std::string_view> valid_names, double duration) const;
};

struct SimConfig {
    /// Integration step in seconds. Zero selects 1 / (10 * sample_rate).
    double dt = 0.0;
    double sample_rate = 100.0;
    double duration = 0.0;
    std::vector<double> initial_state;
    std::uint64_t seed = 0;
    /// Seconds integrated with the initial parameters before recording starts.
    double warmup = 0.0;
    /// Any state component exceeding this magnitude aborts the run.
    double divergence_bound = 1e6;

    double effective_dt() const;
    std::size_t sample_count() const;
    std::size_t steps_per_sample() const;
    void validate(std::size_t state_dim) const;
};

inline constexpr std::string_view kLorenzParameterNames[] = {"sigma", "rho", "beta"};

/// Lorenz system sampled at cfg.sample_rate; channels x1, x2, x3.
TimeSeries simulate_lorenz(const LorenzParams& params, const ParameterSchedule& schedule,
                           const SimConfig& cfg);

/// Common-mode disturbance added to a set of channels over [start_s, end_s].
struct FaultSpec {
    double start_s = 0.0;
    double end_s = 0.0;
    std::vector<std::string> channels;
    /// Constant zero-sequence offset.
    double offset = 0.0;
    /// Sinusoidal zero-sequence component a*sin(2*pi*f*t + phase), t absolute.
    double amplitude = 0.0;
    double frequency_hz = 50.0;
    double phase_rad = 0.0;
    /// Decaying oscillation starting at the fault inception.
    double transient_amplitude = 0.0;
    double transient_frequency_hz = 0.0;
    double transient_decay_s = 0.01;
};

/// Copy of `series` with the fault added. Untouched channels are bit-identical.
TimeSeries inject_fault(const TimeSeries& series, const FaultSpec& fault);

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/**
 * Adds zero-mean Gaussian noise to every channel so that
 * mean(x^2) / noise_variance equals 10^(snr_db/10).
 *
 * snr_db == kNoNoise returns the input unchanged.
 */
TimeSeries add_noise(const TimeSeries& series, double snr_db, std::uint64_t seed);

} // namespace sentinel::dynsim
