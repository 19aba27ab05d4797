#pragma once

// Reduced-order two-machine microgrid. Each machine is an internal EMF
// E_fd at rotor angle delta behind its synchronous reactance, connected
// through a line reactance to a common load bus. The load is a constant
// admittance; while grid-connected an infinite bus is tied to the load bus.
//
//   d(delta)/dt   = omega_base * d_omega
//   M d(d_omega)/dt = P_m - P_e - D d_omega
//   T_G dP_m/dt   = -P_m + K_G (P_ref + T_sec - d_omega / R)
//   T_a dE_fd/dt  = -E_fd + K_a (V_set + U_sec - V_t)
//
// The secondary commands only enter machine 0 (SM1).

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mgsim/controllers.hpp"

namespace mgsim::plant {

using Complex = std::complex<double>;

inline constexpr std::size_t kMachines = 2;

struct MachineParams {
    double M = 6.0;         // inertia, s
    double D = 1.0;         // damping, pu
    double R = 0.05;        // droop, pu
    double K_G = 1.0;       // turbine/governor gain
    double T_G = 0.5;       // turbine/governor time constant, s
    double K_a = 50.0;      // AVR gain
    double T_a = 0.1;       // AVR time constant, s
    double X = 0.8;         // synchronous reactance, pu
    double X_line = 0.05;   // line reactance to the load bus, pu
    double P_dispatch = 0.5;  // pre-event electrical output, pu

    void validate(std::string_view label) const;
    bool operator==(const MachineParams&) const = default;
};

struct PlantParams {
    std::array<MachineParams, kMachines> machines{};
    double load_P = 1.0;         // pu at 1 pu voltage
    double load_Q = 0.3;         // pu at 1 pu voltage
    double X_tie = 0.1;          // grid tie reactance, pu
    double grid_voltage = 1.0;   // infinite bus magnitude, pu
    double omega_base = 376.99111843077515;  // rad/s, 60 Hz
    double v_target = 1.0;       // pre-event terminal voltage of both machines, pu
    // Freezes governors and AVRs so only the swing dynamics evolve.
    bool swing_only = false;

    PlantParams();
    void validate() const;
    bool operator==(const PlantParams&) const = default;
};

struct MachineState {
    double delta = 0.0;
    double d_omega = 0.0;
    double p_m = 0.0;
    double e_fd = 0.0;

    bool operator==(const MachineState&) const = default;
};

using Dynamics = std::array<MachineState, kMachines>;

struct PlantState {
    Dynamics machines{};
    bool grid_connected = true;
    double load_P = 0.0;
    double load_Q = 0.0;
    // Primary-control set points, fixed at initialization.
    std::array<double, kMachines> p_ref{};
    std::array<double, kMachines> v_set{};

    bool operator==(const PlantState&) const = default;
};

struct NetworkSolution {
    Complex v_bus;
    std::array<Complex, kMachines> v_terminal{};
    std::array<double, kMachines> p_e{};
    std::array<double, kMachines> q_e{};
    double p_grid = 0.0;  // injection from the infinite bus
    double q_grid = 0.0;
    double p_load = 0.0;
    double q_load = 0.0;
    double losses = 0.0;  // all branches are lossless reactances
};

enum class EventKind { islanding, load_step, parameter_change };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::islanding;
    // load_step
    double d_load_P = 0.0;
    double d_load_Q = 0.0;
    // parameter_change
    int machine = 0;
    std::string field;
    double value = 0.0;

    bool operator==(const Event&) const = default;
};

inline Event islanding_at(double time) {
    Event ev;
    ev.time = time;
    ev.kind = EventKind::islanding;
    return ev;
}

void validate_events(const std::vector<Event>& events);

struct PlantReadings {
    std::array<Measurements, kMachines> machines{};
    bool voltage_collapse = false;  // some terminal voltage below 0.1 pu
};

inline constexpr double kCollapseVoltage = 0.1;

// Returns a writable reference to a named MachineParams field
// (M, D, R, K_G, T_G, K_a, T_a, X, X_line).
double& machine_field(MachineParams& params, std::string_view name);

// Solves the grid-connected operating point with both terminal voltages at
// v_target, each machine delivering its dispatch, and zero speed deviation.
PlantState initialize(const PlantParams& params);

NetworkSolution network_solve(const PlantState& state, const PlantParams& params);

Dynamics derivatives(const PlantState& state, const ControlCommand& cmd,
                     const PlantParams& params);

// Classical RK4 with the command held over the step.
PlantState integrate_step(const PlantState& state, const ControlCommand& cmd,
                          const PlantParams& params, double dt);

// Events may rewrite `params` (parameter_change).
PlantState apply_event(const PlantState& state, PlantParams& params, const Event& event);

PlantReadings measure(const PlantState& state, const PlantParams& params);
PlantReadings measure(const PlantState& state, const NetworkSolution& network);

}  // namespace mgsim::plant
