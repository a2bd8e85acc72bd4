#pragma once

// Fixed-step RK4 machinery shared by the simulators.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sentinel/dynsim.hpp"
#include "sentinel/error.hpp"

namespace sentinel::dynsim::detail {

inline void check_finite(std::span<const double> dxdt, double t) {
    for (std::size_t i = 0; i < dxdt.size(); ++i) {
        if (!std::isfinite(dxdt[i])) {
            throw IntegrationError("non-finite derivative in state component " + std::to_string(i) +
                                       " at t=" + std::to_string(t),
                                   i);
        }
    }
}

/// Reusable RK4 stage buffers; `f(x, t, dxdt)` is any callable.
class Rk4Stepper {
  public:
    explicit Rk4Stepper(std::size_t n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

    template <class F>
    void step(std::span<double> x, double t, double dt, F&& f) {
        const std::size_t n = x.size();
        const double half = 0.5 * dt;

        f(std::span<const double>(x), t, std::span<double>(k1_));
        check_finite(k1_, t);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k1_[i];

        f(std::span<const double>(tmp_), t + half, std::span<double>(k2_));
        check_finite(k2_, t + half);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k2_[i];

        f(std::span<const double>(tmp_), t + half, std::span<double>(k3_));
        check_finite(k3_, t + half);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + dt * k3_[i];

        f(std::span<const double>(tmp_), t + dt, std::span<double>(k4_));
        check_finite(k4_, t + dt);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        }
    }

  private:
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Step index at which a change scheduled for `time_s` takes effect (first step with t >= time_s).
inline std::size_t change_step(double time_s, double dt) {
    return static_cast<std::size_t>(std::ceil(time_s / dt - 1e-9));
}

/**
 * Integrates and samples a system whose parameters follow `schedule`.
 *
 * `apply(params, name, value)` mutates parameters; `rhs(params, x, t, dxdt)`
 * evaluates the field; `check(x, t)` may throw on inadmissible states.
 * Returns one row per state component.
 */
template <class Params, class Apply, class Rhs, class Check>
std::vector<std::vector<double>> run_sampled(Params params, const ParameterSchedule& schedule,
                                             const SimConfig& cfg, Apply&& apply, Rhs&& rhs,
                                             Check&& check) {
    const std::size_t dim = cfg.initial_state.size();
    const double dt = cfg.effective_dt();
    const std::size_t sub = cfg.steps_per_sample();
    const std::size_t samples = cfg.sample_count();

    std::vector<double> x = cfg.initial_state;
    Rk4Stepper stepper(dim);

    const Params initial = params;
    auto field = [&](const Params& p) {
        return [&rhs, &p](std::span<const double> s, double t, std::span<double> d) { rhs(p, s, t, d); };
    };

    if (cfg.warmup > 0.0) {
        const auto warm_steps = static_cast<std::size_t>(std::llround(cfg.warmup / dt));
        auto f = field(initial);
        for (std::size_t s = 0; s < warm_steps; ++s) {
            // Warmup runs on its own clock ending at t = 0.
            const double t = -cfg.warmup + static_cast<double>(s) * dt;
            stepper.step(x, t, dt, f);
            check(std::span<const double>(x), t + dt);
        }
    }

    std::vector<std::size_t> at_step;
    at_step.reserve(schedule.entries.size());
    for (const auto& e : schedule.entries) at_step.push_back(change_step(e.time_s, dt));

    std::vector<std::vector<double>> out(dim, std::vector<double>(samples));
    std::size_t next_change = 0;
    std::size_t step = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        for (std::size_t c = 0; c < dim; ++c) out[c][i] = x[c];
        if (i + 1 == samples) break;
        for (std::size_t j = 0; j < sub; ++j, ++step) {
            while (next_change < at_step.size() && at_step[next_change] <= step) {
                apply(params, schedule.entries[next_change].parameter,
                      schedule.entries[next_change].value);
                ++next_change;
            }
            const double t = static_cast<double>(step) * dt;
            stepper.step(x, t, dt, field(params));
            check(std::span<const double>(x), t + dt);
        }
    }
    return out;
}

} // namespace sentinel::dynsim::detail
