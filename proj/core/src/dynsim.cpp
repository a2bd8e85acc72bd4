#include "sentinel/dynsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "integrate.hpp"
#include "sentinel/error.hpp"

namespace sentinel::dynsim {

State rk4_step(std::span<const double> state, double t, double dt, const Dynamics& f) {
    if (!(dt > 0.0)) throw ConfigError("rk4_step: dt must be positive");
    State x(state.begin(), state.end());
    detail::Rk4Stepper stepper(x.size());
    stepper.step(x, t, dt, f);
    return x;
}

void LorenzParams::validate() const {
    if (!(sigma > 0.0)) throw ConfigError("lorenz.sigma must be > 0");
    if (!(beta > 0.0)) throw ConfigError("lorenz.beta must be > 0");
    if (!(rho >= 0.0)) throw ConfigError("lorenz.rho must be >= 0");
}

void LorenzParams::set(std::string_view name, double value) {
    if (name == "sigma") sigma = value;
    else if (name == "rho") rho = value;
    else if (name == "beta") beta = value;
    else throw ConfigError("unknown Lorenz parameter '" + std::string(name) + "'");
}

void ParameterSchedule::validate(std::span<const std::string_view> valid_names,
                                 double duration) const {
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const std::string where = "schedule[" + std::to_string(i) + "]";
        if (std::find(valid_names.begin(), valid_names.end(), e.parameter) == valid_names.end()) {
            throw ConfigError(where + ".parameter: unknown parameter '" + e.parameter + "'");
        }
        if (!std::isfinite(e.time_s) || e.time_s < 0.0) {
            throw ConfigError(where + ".time: must be finite and >= 0");
        }
        if (e.time_s > duration) {
            throw ConfigError(where + ".time: " + std::to_string(e.time_s) +
                              " s lies beyond the run duration " + std::to_string(duration) + " s");
        }
        if (!std::isfinite(e.value)) throw ConfigError(where + ".value: must be finite");
        if (i > 0 && !(e.time_s > entries[i - 1].time_s)) {
            throw ConfigError(where + ".time: schedule times must be strictly increasing");
        }
    }
}

double SimConfig::effective_dt() const { return dt > 0.0 ? dt : 1.0 / (10.0 * sample_rate); }

std::size_t SimConfig::sample_count() const {
    return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

std::size_t SimConfig::steps_per_sample() const {
    return static_cast<std::size_t>(std::llround(1.0 / (sample_rate * effective_dt())));
}

void SimConfig::validate(std::size_t state_dim) const {
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
        throw ConfigError("sim.sample_rate: must be > 0");
    }
    if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("sim.duration: must be > 0");
    if (dt < 0.0 || !std::isfinite(dt)) throw ConfigError("sim.dt: must be > 0");
    const double ratio = 1.0 / (sample_rate * effective_dt());
    if (std::llround(ratio) < 1 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
        throw ConfigError("sim.dt: sample interval must be an integer multiple of dt");
    }
    if (sample_count() < 1) throw ConfigError("sim.duration: yields no samples");
    if (initial_state.size() != state_dim) {
        throw ConfigError("sim.initial_state: expected " + std::to_string(state_dim) +
                          " components, got " + std::to_string(initial_state.size()));
    }
    for (double v : initial_state) {
        if (!std::isfinite(v)) throw ConfigError("sim.initial_state: components must be finite");
    }
    if (warmup < 0.0 || !std::isfinite(warmup)) throw ConfigError("sim.warmup: must be >= 0");
    if (!(divergence_bound > 0.0)) throw ConfigError("sim.divergence_bound: must be > 0");
}

namespace {

auto divergence_check(double bound) {
    return [bound](std::span<const double> x, double t) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!(std::abs(x[i]) <= bound)) {
                throw SimulationDiverged("state component " + std::to_string(i) +
                                             " exceeded bound at t=" + std::to_string(t) + " s",
                                         t);
            }
        }
    };
}

} // namespace

TimeSeries simulate_lorenz(const LorenzParams& params, const ParameterSchedule& schedule,
                           const SimConfig& cfg) {
    params.validate();
    cfg.validate(3);
    schedule.validate(kLorenzParameterNames, cfg.duration);

    auto apply = [](LorenzParams& p, const std::string& name, double value) {
        p.set(name, value);
        p.validate();
    };
    auto rhs = [](const LorenzParams& p, std::span<const double> x, double,
                  std::span<double> d) {
        d[0] = p.sigma * (x[1] - x[0]);
        d[1] = p.rho * x[0] - x[1] - x[0] * x[2];
        d[2] = -p.beta * x[2] + x[0] * x[1];
    };
    auto rows = detail::run_sampled(params, schedule, cfg, apply, rhs,
                                    divergence_check(cfg.divergence_bound));
    std::vector<Channel> channels = {{"1", "x1", ""}, {"2", "x2", ""}, {"3", "x3", ""}};
    return TimeSeries(0.0, cfg.sample_rate, std::move(channels), std::move(rows));
}

TimeSeries inject_fault(const TimeSeries& series, const FaultSpec& fault) {
    if (fault.channels.empty()) throw ConfigError("fault: affected channel set is empty");
    if (!(fault.end_s >= fault.start_s)) throw ConfigError("fault: end must not precede start");
    const double t_end = series.time_at(series.length() == 0 ? 0 : series.length() - 1);
    if (series.length() == 0 || fault.start_s < series.t0() - 1e-12 || fault.end_s > t_end + 1e-9) {
        throw ConfigError("fault: window lies outside the series");
    }
    if (!(fault.transient_decay_s > 0.0)) throw ConfigError("fault: transient_decay_s must be > 0");

    const auto idx = series.indices_of(fault.channels);
    const double fs = series.sample_rate();
    const auto first = static_cast<std::size_t>(std::ceil((fault.start_s - series.t0()) * fs - 1e-9));
    const auto last = std::min<std::size_t>(
        static_cast<std::size_t>(std::floor((fault.end_s - series.t0()) * fs + 1e-9)),
        series.length() - 1);

    std::vector<double> component(last + 1 - first);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = first; i <= last; ++i) {
        const double t = series.time_at(i);
        const double since = t - fault.start_s;
        double v = fault.offset;
        v += fault.amplitude * std::sin(two_pi * fault.frequency_hz * t + fault.phase_rad);
        v += fault.transient_amplitude * std::exp(-since / fault.transient_decay_s) *
             std::sin(two_pi * fault.transient_frequency_hz * since);
        component[i - first] = v;
    }

    TimeSeries out = series;
    for (auto c : idx) {
        auto data = out.channel(c);
        for (std::size_t i = first; i <= last; ++i) data[i] += component[i - first];
    }
    return out;
}

TimeSeries add_noise(const TimeSeries& series, double snr_db, std::uint64_t seed) {
    if (snr_db == kNoNoise) return series;
    if (!std::isfinite(snr_db)) throw ConfigError("add_noise: snr_db must be finite");

    TimeSeries out = series;
    const double ratio = std::pow(10.0, snr_db / 10.0);
    for (std::size_t c = 0; c < out.channel_count(); ++c) {
        auto data = out.channel(c);
        if (data.empty()) continue;
        double power = 0.0;
        for (double v : data) power += v * v;
        power /= static_cast<double>(data.size());
        if (!(power > 0.0)) {
            throw NumericError("add_noise: channel '" + out.channels()[c].id +
                               "' has zero power, SNR is undefined");
        }
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(c)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> noise(0.0, std::sqrt(power / ratio));
        for (double& v : data) v += noise(rng);
    }
    return out;
}

} // namespace sentinel::dynsim
