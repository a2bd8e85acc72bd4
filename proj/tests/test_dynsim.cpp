#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "sentinel/detector.hpp"
#include "sentinel/dynsim.hpp"
#include "sentinel/error.hpp"
#include "sentinel/power3bus.hpp"

using namespace sentinel;
using namespace sentinel::dynsim;

namespace {

Dynamics lorenz_field(double sigma = 10.0, double rho = 28.0, double beta = 8.0 / 3.0) {
    return [=](std::span<const double> x, double, std::span<double> d) {
        d[0] = sigma * (x[1] - x[0]);
        d[1] = rho * x[0] - x[1] - x[0] * x[2];
        d[2] = -beta * x[2] + x[0] * x[1];
    };
}

State integrate(State x, double dt, int steps, const Dynamics& f) {
    for (int i = 0; i < steps; ++i) x = rk4_step(x, i * dt, dt, f);
    return x;
}

double distance(const State& a, const State& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

SimConfig lorenz_sim(double duration, State x0) {
    SimConfig cfg;
    cfg.sample_rate = 100.0;
    cfg.duration = duration;
    cfg.initial_state = std::move(x0);
    return cfg;
}

} // namespace

TEST(Rk4Step, ZeroFieldKeepsState) {
    Dynamics zero = [](std::span<const double>, double, std::span<double> d) {
        std::fill(d.begin(), d.end(), 0.0);
    };
    const State x{1.5, -2.0, 3.25};
    EXPECT_EQ(rk4_step(x, 0.0, 0.1, zero), x);
}

TEST(Rk4Step, ExponentialOneStep) {
    Dynamics grow = [](std::span<const double> x, double, std::span<double> d) { d[0] = x[0]; };
    const auto x = rk4_step(State{1.0}, 0.0, 0.1, grow);
    // 1 + h + h^2/2 + h^3/6 + h^4/24 at h = 0.1.
    EXPECT_NEAR(x[0], 1.10517083, 5e-9);
    EXPECT_LT(std::abs(x[0] - std::exp(0.1)), 1e-7);
}

TEST(Rk4Step, MatchesIndependentStepper) {
    const State x0{1.0, 1.0, 1.0};
    const auto ours = integrate(x0, 0.005, 200, lorenz_field());
    const auto ref = oracle::lorenz_rk4(x0, 10.0, 28.0, 8.0 / 3.0, 0.005, 200);
    EXPECT_LT(distance(ours, ref), 1e-11);
}

TEST(Rk4Step, NonFiniteDerivativeNamesComponent) {
    Dynamics bad = [](std::span<const double> x, double, std::span<double> d) {
        d[0] = 0.0;
        d[1] = 1.0 / (x[1] - x[1]) * 0.0;  // NaN
    };
    try {
        (void)rk4_step(State{1.0, 2.0}, 0.0, 0.1, bad);
        FAIL() << "expected IntegrationError";
    } catch (const IntegrationError& e) {
        EXPECT_EQ(e.component(), 1u);
    }
}

TEST(Rk4Step, FourthOrderConvergenceOnLorenz) {
    const State x0{1.0, 1.0, 1.0};
    // Default integration step at 100 Hz; coarser steps are still pre-asymptotic on Lorenz.
    const double dt = 0.001;
    const auto ref = integrate(x0, dt / 100.0, 100000, lorenz_field());
    const double e1 = distance(integrate(x0, dt, 1000, lorenz_field()), ref);
    const double e2 = distance(integrate(x0, dt / 2, 2000, lorenz_field()), ref);
    EXPECT_NEAR(e1 / e2, 16.0, 16.0 * 0.2);
}

TEST(SimulateLorenz, CaseProtocolShape) {
    ParameterSchedule schedule{{{60.0, "rho", 30.0}, {120.0, "rho", 31.0}}};
    const auto ts = simulate_lorenz({10.0, 28.0, 8.0 / 3.0}, schedule, lorenz_sim(180.0, {1.0, 1.0, 1.0}));
    EXPECT_EQ(ts.channel_count(), 3u);
    EXPECT_EQ(ts.length(), 18000u);
    EXPECT_EQ(ts.channels()[0].name, "x1");
    EXPECT_DOUBLE_EQ(ts.sample_rate(), 100.0);
}

TEST(SimulateLorenz, OriginIsFixed) {
    const auto ts = simulate_lorenz({}, {}, lorenz_sim(20.0, {0.0, 0.0, 0.0}));
    for (std::size_t c = 0; c < 3; ++c) {
        for (double v : ts.channel(c)) ASSERT_EQ(v, 0.0);
    }
}

TEST(SimulateLorenz, SubcriticalRhoDecays) {
    for (double dt : {0.001, 0.0001}) {
        auto cfg = lorenz_sim(50.0, {0.5, -0.3, 0.4});
        cfg.dt = dt;
        const auto ts = simulate_lorenz({10.0, 0.5, 8.0 / 3.0}, {}, cfg);
        const std::size_t last = ts.length() - 1;
        const double norm = std::hypot(ts.channel(0)[last], ts.channel(1)[last], ts.channel(2)[last]);
        EXPECT_LT(norm, 1e-6) << "dt " << dt;
    }
}

TEST(SimulateLorenz, BitIdenticalBeforeFirstChange) {
    const auto cfg = lorenz_sim(30.0, {1.0, 2.0, 3.0});
    const auto plain = simulate_lorenz({}, {}, cfg);
    const auto sched = simulate_lorenz({}, ParameterSchedule{{{20.0, "rho", 35.0}}}, cfg);
    // Sample i is the state at i / 100 s; samples strictly before 20 s are untouched.
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < 2000; ++i) ASSERT_EQ(plain.channel(c)[i], sched.channel(c)[i]);
    }
    EXPECT_NE(plain.channel(0)[2999], sched.channel(0)[2999]);
}

TEST(SimulateLorenz, Deterministic) {
    const auto cfg = lorenz_sim(10.0, {1.0, 1.0, 1.0});
    EXPECT_EQ(simulate_lorenz({}, {}, cfg), simulate_lorenz({}, {}, cfg));
}

TEST(SimulateLorenz, ConfigErrors) {
    EXPECT_THROW(simulate_lorenz({}, ParameterSchedule{{{200.0, "rho", 30.0}}}, lorenz_sim(180.0, {1, 1, 1})),
                 ConfigError);
    EXPECT_THROW(simulate_lorenz({}, ParameterSchedule{{{10.0, "gamma", 30.0}}}, lorenz_sim(180.0, {1, 1, 1})),
                 ConfigError);
    EXPECT_THROW(simulate_lorenz({}, ParameterSchedule{{{20.0, "rho", 30.0}, {10.0, "rho", 31.0}}},
                                 lorenz_sim(180.0, {1, 1, 1})),
                 ConfigError);
    EXPECT_THROW(simulate_lorenz({}, {}, lorenz_sim(0.0, {1, 1, 1})), ConfigError);
    EXPECT_THROW(simulate_lorenz({-1.0, 28.0, 1.0}, {}, lorenz_sim(1.0, {1, 1, 1})), ConfigError);
    auto cfg = lorenz_sim(1.0, {1, 1, 1});
    cfg.dt = 0.003;  // 0.01 s sample interval is not a multiple
    EXPECT_THROW(simulate_lorenz({}, {}, cfg), ConfigError);
}

TEST(SimulateLorenz, DivergenceReportsTime) {
    auto cfg = lorenz_sim(10.0, {1.0, 1.0, 1.0});
    cfg.divergence_bound = 5.0;
    try {
        (void)simulate_lorenz({}, {}, cfg);
        FAIL() << "expected SimulationDiverged";
    } catch (const SimulationDiverged& e) {
        EXPECT_GT(e.time(), 0.0);
        EXPECT_LT(e.time(), 10.0);
    }
}

namespace {

Power3BusState to_state(const Eigen::VectorXd& x) { return {x[0], x[1], x[2], x[3], x[4], x[5]}; }

Eigen::VectorXd residual(const Power3BusParams& p, const AlgebraicClosures& cl, const Eigen::VectorXd& x) {
    Eigen::VectorXd d(6);
    power3bus_rhs(p, cl, to_state(x), {d.data(), 6});
    return d;
}

// Newton iteration with a finite-difference Jacobian.
Eigen::VectorXd find_equilibrium(const Power3BusParams& p, const AlgebraicClosures& cl, Eigen::VectorXd x) {
    for (int it = 0; it < 100; ++it) {
        const Eigen::VectorXd r = residual(p, cl, x);
        if (r.cwiseAbs().maxCoeff() < 1e-14) break;
        Eigen::MatrixXd j(6, 6);
        for (int k = 0; k < 6; ++k) {
            Eigen::VectorXd h = x;
            const double step = 1e-7 * std::max(1.0, std::abs(x[k]));
            h[k] += step;
            j.col(k) = (residual(p, cl, h) - r) / step;
        }
        x -= j.fullPivLu().solve(r);
    }
    return x;
}

} // namespace

TEST(SimulatePower3Bus, EquilibriumIsConstant) {
    Power3BusParams p;
    p.d = 2.0;
    const auto cl = default_closures(p);
    Eigen::VectorXd x0(6);
    x0 << 0.4, 0.0, 0.8, 0.1, 0.05, 1.2;
    const auto eq = find_equilibrium(p, cl, x0);
    ASSERT_LT(residual(p, cl, eq).cwiseAbs().maxCoeff(), 1e-12);
    ASSERT_GT(eq[5], 0.0);

    SimConfig cfg;
    cfg.sample_rate = 100.0;
    cfg.duration = 10.0;
    cfg.initial_state.assign(eq.data(), eq.data() + 6);
    const auto ts = simulate_power3bus(p, cl, {}, cfg);
    for (std::size_t c = 0; c < 6; ++c) {
        for (double v : ts.channel(c)) ASSERT_NEAR(v, eq[static_cast<Eigen::Index>(c)], 1e-9) << "channel " << c;
    }
}

TEST(SimulatePower3Bus, ZeroBaseFrequencyFreezesAngle) {
    Power3BusParams p;
    p.omega_B = 0.0;
    SimConfig cfg;
    cfg.sample_rate = 100.0;
    cfg.duration = 5.0;
    cfg.initial_state = default_power3bus_initial_state();
    const auto ts = simulate_power3bus(p, default_closures(p), {}, cfg);
    for (double v : ts.channel(0)) ASSERT_EQ(v, cfg.initial_state[0]);
}

TEST(SimulatePower3Bus, DefaultsStayBoundedWithoutSettling) {
    Power3BusParams p;
    SimConfig cfg;
    cfg.sample_rate = 100.0;
    cfg.duration = 100.0;
    cfg.initial_state = default_power3bus_initial_state();
    const auto ts = simulate_power3bus(p, default_closures(p), {}, cfg);
    ASSERT_EQ(ts.length(), 10000u);
    for (std::size_t c = 0; c < 6; ++c) {
        const auto tail = ts.channel(c).subspan(5000);
        const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
        EXPECT_GT(*hi - *lo, 2e-4) << ts.channels()[c].name << " settles";
        EXPECT_LT(std::max(std::abs(*lo), std::abs(*hi)), 10.0) << ts.channels()[c].name;
    }
    const auto v = ts.channel(5);
    EXPECT_GT(*std::min_element(v.begin(), v.end()), 0.0);
}

TEST(SimulatePower3Bus, ScheduleAndErrors) {
    Power3BusParams p;
    SimConfig cfg;
    cfg.sample_rate = 100.0;
    cfg.duration = 2.0;
    cfg.initial_state = default_power3bus_initial_state();
    EXPECT_THROW(simulate_power3bus(p, default_closures(p), ParameterSchedule{{{1.0, "rho", 1.0}}}, cfg),
                 ConfigError);
    EXPECT_NO_THROW(simulate_power3bus(p, default_closures(p), ParameterSchedule{{{1.0, "Q1d", 0.45}}}, cfg));
    Power3BusParams bad;
    bad.q1 = 0.0;
    EXPECT_THROW(simulate_power3bus(bad, default_closures(bad), {}, cfg), ConfigError);
    cfg.divergence_bound = 0.5;
    EXPECT_THROW(simulate_power3bus(p, default_closures(p), {}, cfg), SimulationDiverged);
}

namespace {

TimeSeries sine_series(std::size_t n, double fs, std::size_t channels, double amp) {
    std::vector<Channel> ch;
    std::vector<std::vector<double>> data;
    for (std::size_t c = 0; c < channels; ++c) {
        ch.push_back({std::to_string(c + 1), "s" + std::to_string(c + 1), ""});
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = amp * std::sin(2.0 * std::numbers::pi * 5.0 * static_cast<double>(i) / fs -
                                  2.0 * std::numbers::pi / 3.0 * static_cast<double>(c % 3));
        }
        data.push_back(std::move(x));
    }
    return TimeSeries(0.0, fs, std::move(ch), std::move(data));
}

} // namespace

TEST(InjectFault, ExactSampleRange) {
    const auto ts = sine_series(300, 100.0, 3, 1.0);
    FaultSpec f;
    f.start_s = 1.0;
    f.end_s = 1.2;
    f.channels = {"2"};
    f.offset = 0.5;
    const auto out = inject_fault(ts, f);
    for (std::size_t i = 0; i < ts.length(); ++i) {
        const bool inside = i >= 100 && i <= 120;
        EXPECT_EQ(out.channel(1)[i] != ts.channel(1)[i], inside) << i;
        ASSERT_EQ(out.channel(0)[i], ts.channel(0)[i]);
        ASSERT_EQ(out.channel(2)[i], ts.channel(2)[i]);
    }
}

TEST(InjectFault, ZeroMagnitudeIsIdentity) {
    const auto ts = sine_series(300, 100.0, 3, 1.0);
    FaultSpec f;
    f.start_s = 0.5;
    f.end_s = 2.0;
    f.channels = {"1", "2", "3"};
    EXPECT_EQ(inject_fault(ts, f), ts);
    f.channels.clear();
    EXPECT_THROW(inject_fault(ts, f), ConfigError);
}

TEST(InjectFault, RaisesZeroSequenceOnBalancedSet) {
    // Six channels; 4, 5, 6 form a balanced three-phase set.
    const auto ts = sine_series(1000, 1000.0, 6, 1.0);
    FaultSpec f;
    f.start_s = 0.5;
    f.end_s = 0.999;
    f.channels = {"4", "5", "6"};
    f.amplitude = 0.3;
    f.frequency_hz = 5.0;
    const auto out = inject_fault(ts, f);
    const std::vector<std::string> phases{"4", "5", "6"};
    const auto before = detect::zero_sequence_indicator(ts.select(phases), 200);
    const auto after = detect::zero_sequence_indicator(out.select(phases), 200);
    for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_LT(before[k], 1e-10);
        if (k < 2) {
            EXPECT_NEAR(after[k], before[k], 1e-12);
        }
        if (k >= 3) {
            EXPECT_NEAR(after[k], 0.3 / std::sqrt(2.0), 1e-3);
        }
    }
}

TEST(AddNoise, InfiniteSnrIsIdentity) {
    const auto ts = sine_series(500, 100.0, 2, 1.0);
    EXPECT_EQ(add_noise(ts, kNoNoise, 3), ts);
}

TEST(AddNoise, SeedDeterminism) {
    const auto ts = sine_series(500, 100.0, 2, 1.0);
    EXPECT_EQ(add_noise(ts, 20.0, 11), add_noise(ts, 20.0, 11));
    EXPECT_NE(add_noise(ts, 20.0, 11), add_noise(ts, 20.0, 12));
}

TEST(AddNoise, MeasuredNoisePower) {
    // Unit-power sine: amplitude sqrt(2), exactly 500 whole periods.
    const auto ts = sine_series(100000, 1000.0, 1, std::sqrt(2.0));
    const auto noisy = add_noise(ts, 20.0, 5);
    double p = 0.0;
    for (std::size_t i = 0; i < ts.length(); ++i) {
        const double e = noisy.channel(0)[i] - ts.channel(0)[i];
        p += e * e;
    }
    p /= static_cast<double>(ts.length());
    EXPECT_NEAR(p, 0.01, 0.001);
}

TEST(AddNoise, ZeroPowerChannelFails) {
    TimeSeries ts(0.0, 10.0, {{"1", "z", ""}}, {{0.0, 0.0, 0.0, 0.0}});
    EXPECT_THROW(add_noise(ts, 20.0, 1), NumericError);
}
