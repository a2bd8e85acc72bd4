#include "sentinel/power3bus.hpp"

#include <cmath>
#include <complex>

#include "integrate.hpp"
#include "sentinel/error.hpp"

namespace sentinel::dynsim {

void Power3BusParams::validate() const {
    if (!(H > 0.0)) throw ConfigError("power3bus.H must be > 0");
    if (!(T_d0_prime > 0.0)) throw ConfigError("power3bus.T_d0_prime must be > 0");
    if (!(T_A > 0.0)) throw ConfigError("power3bus.T_A must be > 0");
    if (q1 == 0.0) throw ConfigError("power3bus.q1 must be nonzero");
    if (p2 == 0.0) throw ConfigError("power3bus.p2 must be nonzero");
}

void Power3BusParams::set(std::string_view name, double value) {
    struct Field {
        std::string_view name;
        double Power3BusParams::*member;
    };
    static constexpr Field fields[] = {
        {"omega_B", &Power3BusParams::omega_B}, {"H", &Power3BusParams::H},
        {"d", &Power3BusParams::d},             {"P_m", &Power3BusParams::P_m},
        {"T_d0_prime", &Power3BusParams::T_d0_prime}, {"x_d", &Power3BusParams::x_d},
        {"x_d_prime", &Power3BusParams::x_d_prime},   {"T_A", &Power3BusParams::T_A},
        {"K_A", &Power3BusParams::K_A},         {"V_ref", &Power3BusParams::V_ref},
        {"q1", &Power3BusParams::q1},           {"q2", &Power3BusParams::q2},
        {"q3", &Power3BusParams::q3},           {"B_c", &Power3BusParams::B_c},
        {"p1", &Power3BusParams::p1},           {"p2", &Power3BusParams::p2},
        {"p3", &Power3BusParams::p3},           {"P0", &Power3BusParams::P0},
        {"Q0", &Power3BusParams::Q0},           {"P1d", &Power3BusParams::P1d},
        {"Q1d", &Power3BusParams::Q1d},         {"P", &Power3BusParams::P},
        {"Q", &Power3BusParams::Q},
    };
    for (const auto& f : fields) {
        if (f.name == name) {
            this->*(f.member) = value;
            return;
        }
    }
    throw ConfigError("unknown power3bus parameter '" + std::string(name) + "'");
}

AlgebraicClosures default_closures(const Power3BusParams& params, const NetworkParams& net) {
    if (!(net.X0 > 0.0) || !(net.x_line >= 0.0)) {
        throw ConfigError("power3bus network reactances must be positive");
    }
    // Generator internal EMF E'q at angle delta_m sits behind x'_d + x_line.
    const double xdp = params.x_d_prime;
    const double xg = xdp + net.x_line;
    if (!(xg > 0.0)) throw ConfigError("power3bus: x_d_prime + x_line must be > 0");

    AlgebraicClosures c;
    c.P_g = [xg](const Power3BusState& s) {
        return s.E_q_prime * s.V_L * std::sin(s.delta_m - s.delta_L) / xg;
    };
    c.I_d = [xg](const Power3BusState& s) {
        return (s.V_L * std::cos(s.delta_m - s.delta_L) - s.E_q_prime) / xg;
    };
    c.V_t = [xg, xdp, xl = net.x_line](const Power3BusState& s) {
        const auto e = std::polar(s.E_q_prime, s.delta_m);
        const auto v = std::polar(s.V_L, s.delta_L);
        return std::abs((xl * e + xdp * v) / xg);
    };
    c.P = [xg, net](const Power3BusState& s) {
        return s.E_q_prime * s.V_L * std::sin(s.delta_m - s.delta_L) / xg -
               net.E0 * s.V_L * std::sin(s.delta_L) / net.X0;
    };
    c.Q = [xg, net](const Power3BusState& s) {
        return s.E_q_prime * s.V_L * std::cos(s.delta_m - s.delta_L) / xg - s.V_L * s.V_L / xg +
               net.E0 * s.V_L * std::cos(s.delta_L) / net.X0 - s.V_L * s.V_L / net.X0;
    };
    return c;
}

std::vector<double> default_power3bus_initial_state() {
    return {0.3, 0.0, 1.0, 1.5, 0.1, 0.9};
}

void power3bus_rhs(const Power3BusParams& p, const AlgebraicClosures& closures,
                   const Power3BusState& s, std::span<double> d) {
    const double Pg = closures.P_g(s);
    const double Id = closures.I_d(s);
    const double Vt = closures.V_t(s);
    const double P = closures.P ? closures.P(s) : p.P;
    const double Q = closures.Q ? closures.Q(s) : p.Q;
    const double V = s.V_L;

    d[0] = p.omega_B * s.s_m;
    d[1] = (-p.d * s.s_m + p.P_m - Pg) / (2.0 * p.H);
    d[2] = (-s.E_q_prime + (p.x_d - p.x_d_prime) * Id + s.E_fd) / p.T_d0_prime;
    d[3] = (-s.E_fd + p.K_A * (p.V_ref - Vt)) / p.T_A;
    d[4] = (Q - p.Q1d - p.Q0 - p.q2 * V - (p.q3 - p.B_c) * V * V) / p.q1;
    d[5] = (P - p.P1d - p.P0 - p.p3 * V - p.p1 * d[4]) / p.p2;
}

TimeSeries simulate_power3bus(const Power3BusParams& params, const AlgebraicClosures& closures,
                              const ParameterSchedule& schedule, const SimConfig& cfg) {
    params.validate();
    cfg.validate(6);
    schedule.validate(kPower3BusParameterNames, cfg.duration);
    if (!closures.P_g || !closures.I_d || !closures.V_t) {
        throw ConfigError("power3bus: closures for P_g, I_d and V_t are required");
    }

    auto apply = [](Power3BusParams& p, const std::string& name, double value) {
        p.set(name, value);
        p.validate();
    };
    auto rhs = [&closures](const Power3BusParams& p, std::span<const double> x, double,
                           std::span<double> d) {
        const Power3BusState s{x[0], x[1], x[2], x[3], x[4], x[5]};
        power3bus_rhs(p, closures, s, d);
    };
    auto check = [bound = cfg.divergence_bound](std::span<const double> x, double t) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!(std::abs(x[i]) <= bound)) {
                throw SimulationDiverged("power3bus state component " + std::to_string(i) +
                                             " exceeded bound at t=" + std::to_string(t) + " s",
                                         t);
            }
        }
        if (x[5] < 0.0) {
            throw SimulationDiverged("power3bus load voltage collapsed below zero at t=" +
                                         std::to_string(t) + " s",
                                     t);
        }
    };
    auto rows = detail::run_sampled(params, schedule, cfg, apply, rhs, check);
    std::vector<Channel> channels = {
        {"1", "delta_m", "rad"}, {"2", "s_m", ""},     {"3", "E_q_prime", "pu"},
        {"4", "E_fd", "pu"},     {"5", "delta_L", "rad"}, {"6", "V_L", "pu"},
    };
    return TimeSeries(0.0, cfg.sample_rate, std::move(channels), std::move(rows));
}

} // namespace sentinel::dynsim
