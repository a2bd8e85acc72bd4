#pragma once

#include <functional>
#include <string_view>

#include "sentinel/dynsim.hpp"

namespace sentinel::dynsim {

/**
 * Three-bus system: a generator with one-axis flux decay and a first-order
 * exciter feeds a dynamic load bus that is also tied to a slack bus.
 *
 * Load-bus dynamics:
 *   q1 * dL' = Q - Q1d - Q0 - q2 V - (q3 - B_c) V^2
 *   p2 * V'  = P - P1d - P0 - p3 V - p1 dL'
 */
struct Power3BusParams {
    double omega_B = 377.0;
    double H = 2.0;
    double d = 0.5;
    double P_m = 1.0;
    double T_d0_prime = 5.0;
    double x_d = 1.0;
    double x_d_prime = 0.2;
    double T_A = 0.05;
    double K_A = 10.0;
    double V_ref = 1.0;
    double q1 = -0.03;
    double q2 = -2.8;
    double q3 = 2.1;
    double B_c = 2.5;
    double p1 = 0.4;
    double p2 = 2.55;
    double p3 = 0.3;
    double P0 = 0.6;
    double Q0 = 1.3;
    double P1d = 0.0;
    double Q1d = 0.5;
    /// Load-bus injections used when the closures do not supply them.
    double P = 0.0;
    double Q = 0.0;

    void validate() const;
    void set(std::string_view name, double value);
};

struct Power3BusState {
    double delta_m = 0.0;
    double s_m = 0.0;
    double E_q_prime = 0.0;
    double E_fd = 0.0;
    double delta_L = 0.0;
    double V_L = 0.0;
};

/// Algebraic quantities the state equations leave open. Empty P / Q fall back to the constants in Power3BusParams.
struct AlgebraicClosures {
    std::function<double(const Power3BusState&)> P_g;
    std::function<double(const Power3BusState&)> I_d;
    std::function<double(const Power3BusState&)> V_t;
    std::function<double(const Power3BusState&)> P;
    std::function<double(const Power3BusState&)> Q;
};

/// Lossless network used by the default closures.
struct NetworkParams {
    /// Reactance between the generator terminal and the load bus.
    double x_line = 0.2;
    /// Slack-bus voltage and its reactance to the load bus.
    double E0 = 1.0;
    double X0 = 0.5;
};

AlgebraicClosures default_closures(const Power3BusParams& params, const NetworkParams& net = {});

inline constexpr std::string_view kPower3BusParameterNames[] = {
    "omega_B", "H",  "d",  "P_m", "T_d0_prime", "x_d", "x_d_prime", "T_A", "K_A", "V_ref", "q1", "q2",
    "q3",      "B_c", "p1", "p2",  "p3",         "P0",  "Q0",        "P1d", "Q1d", "P",     "Q"};

/// Starting point for the shipped default parameter set (order as in Power3BusState).
std::vector<double> default_power3bus_initial_state();

/// Right-hand side of the six state equations at `s`.
void power3bus_rhs(const Power3BusParams& p, const AlgebraicClosures& closures,
                   const Power3BusState& s, std::span<double> dxdt);

/// Channels: delta_m, s_m, E_q_prime, E_fd, delta_L, V_L.
TimeSeries simulate_power3bus(const Power3BusParams& params, const AlgebraicClosures& closures,
                              const ParameterSchedule& schedule, const SimConfig& cfg);

} // namespace sentinel::dynsim
