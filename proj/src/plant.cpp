#include "mgsim/plant.hpp"

#include <algorithm>
#include <cmath>

#include "mgsim/errors.hpp"

namespace mgsim::plant {

namespace {

constexpr Complex j{0.0, 1.0};

Dynamics axpy(const Dynamics& x, double a, const Dynamics& d) {
    Dynamics out = x;
    for (std::size_t k = 0; k < kMachines; ++k) {
        out[k].delta += a * d[k].delta;
        out[k].d_omega += a * d[k].d_omega;
        out[k].p_m += a * d[k].p_m;
        out[k].e_fd += a * d[k].e_fd;
    }
    return out;
}

void require_finite(const Dynamics& x, const char* context) {
    static constexpr const char* names[] = {"delta", "d_omega", "p_m", "e_fd"};
    for (std::size_t k = 0; k < kMachines; ++k) {
        const double values[] = {x[k].delta, x[k].d_omega, x[k].p_m, x[k].e_fd};
        for (std::size_t i = 0; i < 4; ++i) {
            if (!std::isfinite(values[i])) {
                throw SimulationFault(std::string(context) + ": non-finite sm" +
                                      std::to_string(k + 1) + "." + names[i]);
            }
        }
    }
}

// Dense solve with partial pivoting; A is n x n row-major.
template <std::size_t N>
std::array<double, N> solve_linear(std::array<std::array<double, N>, N> a,
                                   std::array<double, N> b) {
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < N; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-14) {
            throw SimulationFault("initialize: singular Jacobian in operating-point solve");
        }
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < N; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < N; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::array<double, N> x{};
    for (std::size_t i = N; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < N; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace

void MachineParams::validate(std::string_view label) const {
    auto positive = [&](double x, const char* name) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw ContractViolation(std::string(label) + "." + name + " must be > 0");
        }
    };
    positive(M, "M");
    positive(T_G, "T_G");
    positive(T_a, "T_a");
    positive(K_G, "K_G");
    positive(K_a, "K_a");
    positive(R, "R");
    positive(X, "X");
    if (!(D >= 0.0)) throw ContractViolation(std::string(label) + ".D must be >= 0");
    if (!(X_line >= 0.0)) throw ContractViolation(std::string(label) + ".X_line must be >= 0");
    if (!std::isfinite(P_dispatch)) {
        throw ContractViolation(std::string(label) + ".P_dispatch must be finite");
    }
}

PlantParams::PlantParams() { machines[1].P_dispatch = 0.3; }

void PlantParams::validate() const {
    machines[0].validate("sm1");
    machines[1].validate("sm2");
    if (!(load_P >= 0.0)) throw ContractViolation("load.P must be >= 0");
    if (!std::isfinite(load_Q)) throw ContractViolation("load.Q must be finite");
    if (!(X_tie > 0.0)) throw ContractViolation("grid.X_tie must be > 0");
    if (!(grid_voltage > 0.0)) throw ContractViolation("grid.voltage must be > 0");
    if (!(omega_base > 0.0)) throw ContractViolation("omega_base must be > 0");
    if (!(v_target > 0.0)) throw ContractViolation("v_target must be > 0");
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::islanding: return "islanding";
        case EventKind::load_step: return "load_step";
        case EventKind::parameter_change: return "parameter_change";
    }
    return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
    for (auto k : {EventKind::islanding, EventKind::load_step, EventKind::parameter_change}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

double& machine_field(MachineParams& p, std::string_view name) {
    if (name == "M") return p.M;
    if (name == "D") return p.D;
    if (name == "R") return p.R;
    if (name == "K_G") return p.K_G;
    if (name == "T_G") return p.T_G;
    if (name == "K_a") return p.K_a;
    if (name == "T_a") return p.T_a;
    if (name == "X") return p.X;
    if (name == "X_line") return p.X_line;
    throw ContractViolation("unknown machine parameter '" + std::string(name) + "'");
}

void validate_events(const std::vector<Event>& events) {
    int islandings = 0;
    double previous = 0.0;
    for (const auto& ev : events) {
        if (!(ev.time >= 0.0) || !std::isfinite(ev.time)) {
            throw ContractViolation("event time must be finite and >= 0");
        }
        if (ev.time < previous) throw ContractViolation("events must be sorted by time");
        previous = ev.time;
        switch (ev.kind) {
            case EventKind::islanding:
                if (++islandings > 1) throw ContractViolation("at most one islanding event");
                break;
            case EventKind::load_step:
                if (!std::isfinite(ev.d_load_P) || !std::isfinite(ev.d_load_Q)) {
                    throw ContractViolation("load_step deltas must be finite");
                }
                break;
            case EventKind::parameter_change: {
                if (ev.machine < 0 || ev.machine >= static_cast<int>(kMachines)) {
                    throw ContractViolation("parameter_change machine must be 0 or 1");
                }
                MachineParams probe;
                machine_field(probe, ev.field) = ev.value;
                probe.validate("parameter_change");
                break;
            }
        }
    }
}

NetworkSolution network_solve(const PlantState& state, const PlantParams& params) {
    std::array<Complex, kMachines> emf{};
    std::array<Complex, kMachines> y_branch{};
    Complex injected{0.0, 0.0};
    Complex y_sum{state.load_P, -state.load_Q};
    for (std::size_t k = 0; k < kMachines; ++k) {
        const auto& mp = params.machines[k];
        emf[k] = std::polar(state.machines[k].e_fd, state.machines[k].delta);
        y_branch[k] = 1.0 / (j * (mp.X + mp.X_line));
        injected += y_branch[k] * emf[k];
        y_sum += y_branch[k];
    }
    const Complex y_tie = 1.0 / (j * params.X_tie);
    const Complex v_grid{params.grid_voltage, 0.0};
    if (state.grid_connected) {
        injected += y_tie * v_grid;
        y_sum += y_tie;
    }
    if (std::abs(y_sum) < 1e-12 || !std::isfinite(std::abs(y_sum))) {
        throw SimulationFault("network_solve: singular load-bus admittance");
    }

    NetworkSolution sol;
    sol.v_bus = injected / y_sum;
    for (std::size_t k = 0; k < kMachines; ++k) {
        const Complex current = y_branch[k] * (emf[k] - sol.v_bus);
        const Complex s = emf[k] * std::conj(current);
        sol.p_e[k] = s.real();
        sol.q_e[k] = s.imag();
        sol.v_terminal[k] = emf[k] - j * params.machines[k].X * current;
    }
    if (state.grid_connected) {
        const Complex s = v_grid * std::conj(y_tie * (v_grid - sol.v_bus));
        sol.p_grid = s.real();
        sol.q_grid = s.imag();
    }
    const double v2 = std::norm(sol.v_bus);
    sol.p_load = state.load_P * v2;
    sol.q_load = state.load_Q * v2;
    return sol;
}

Dynamics derivatives(const PlantState& state, const ControlCommand& cmd,
                     const PlantParams& params) {
    const NetworkSolution net = network_solve(state, params);
    Dynamics d{};
    for (std::size_t k = 0; k < kMachines; ++k) {
        const auto& mp = params.machines[k];
        const auto& x = state.machines[k];
        const double t_sec = k == 0 ? cmd.t_sec : 0.0;
        const double u_sec = k == 0 ? cmd.u_sec : 0.0;
        d[k].delta = params.omega_base * x.d_omega;
        d[k].d_omega = (x.p_m - net.p_e[k] - mp.D * x.d_omega) / mp.M;
        if (!params.swing_only) {
            d[k].p_m = (-x.p_m + mp.K_G * (state.p_ref[k] + t_sec - x.d_omega / mp.R)) / mp.T_G;
            d[k].e_fd =
                (-x.e_fd + mp.K_a * (state.v_set[k] + u_sec - std::abs(net.v_terminal[k]))) / mp.T_a;
        }
    }
    return d;
}

PlantState integrate_step(const PlantState& state, const ControlCommand& cmd,
                          const PlantParams& params, double dt) {
    if (!(dt > 0.0)) throw ContractViolation("integrate_step: dt must be > 0");
    auto eval = [&](const Dynamics& x) {
        PlantState s = state;
        s.machines = x;
        return derivatives(s, cmd, params);
    };
    const Dynamics& x0 = state.machines;
    const Dynamics k1 = eval(x0);
    const Dynamics k2 = eval(axpy(x0, 0.5 * dt, k1));
    const Dynamics k3 = eval(axpy(x0, 0.5 * dt, k2));
    const Dynamics k4 = eval(axpy(x0, dt, k3));

    PlantState next = state;
    for (std::size_t k = 0; k < kMachines; ++k) {
        auto combine = [&](auto member) {
            return x0[k].*member + dt / 6.0 *
                                       (k1[k].*member + 2.0 * k2[k].*member + 2.0 * k3[k].*member +
                                        k4[k].*member);
        };
        next.machines[k].delta = combine(&MachineState::delta);
        next.machines[k].d_omega = combine(&MachineState::d_omega);
        next.machines[k].p_m = combine(&MachineState::p_m);
        next.machines[k].e_fd = combine(&MachineState::e_fd);
    }
    require_finite(next.machines, "integrate_step");
    return next;
}

PlantState apply_event(const PlantState& state, PlantParams& params, const Event& event) {
    PlantState next = state;
    switch (event.kind) {
        case EventKind::islanding:
            next.grid_connected = false;
            break;
        case EventKind::load_step:
            next.load_P += event.d_load_P;
            next.load_Q += event.d_load_Q;
            break;
        case EventKind::parameter_change: {
            auto& mp = params.machines.at(static_cast<std::size_t>(event.machine));
            machine_field(mp, event.field) = event.value;
            mp.validate("parameter_change");
            break;
        }
    }
    return next;
}

PlantReadings measure(const PlantState& state, const NetworkSolution& network) {
    PlantReadings r;
    for (std::size_t k = 0; k < kMachines; ++k) {
        r.machines[k].omega = 1.0 + state.machines[k].d_omega;
        r.machines[k].v = std::abs(network.v_terminal[k]);
        if (r.machines[k].v < kCollapseVoltage) r.voltage_collapse = true;
    }
    return r;
}

PlantReadings measure(const PlantState& state, const PlantParams& params) {
    return measure(state, network_solve(state, params));
}

PlantState initialize(const PlantParams& params) {
    params.validate();
    PlantState s;
    s.grid_connected = true;
    s.load_P = params.load_P;
    s.load_Q = params.load_Q;

    // Unknowns: delta_1, E_1, delta_2, E_2 (grid angle is the reference).
    auto residual = [&](const std::array<double, 4>& x) {
        PlantState trial = s;
        trial.machines[0].delta = x[0];
        trial.machines[0].e_fd = x[1];
        trial.machines[1].delta = x[2];
        trial.machines[1].e_fd = x[3];
        const NetworkSolution net = network_solve(trial, params);
        return std::array<double, 4>{
            net.p_e[0] - params.machines[0].P_dispatch,
            std::abs(net.v_terminal[0]) - params.v_target,
            net.p_e[1] - params.machines[1].P_dispatch,
            std::abs(net.v_terminal[1]) - params.v_target,
        };
    };

    std::array<double, 4> x{0.2, 1.1, 0.2, 1.1};
    bool converged = false;
    for (int iter = 0; iter < 50; ++iter) {
        const auto f = residual(x);
        double norm = 0.0;
        for (double r : f) norm = std::max(norm, std::abs(r));
        if (norm < 1e-14) {
            converged = true;
            break;
        }
        std::array<std::array<double, 4>, 4> jac{};
        for (std::size_t c = 0; c < 4; ++c) {
            const double h = 1e-7 * std::max(1.0, std::abs(x[c]));
            auto xp = x;
            auto xm = x;
            xp[c] += h;
            xm[c] -= h;
            const auto fp = residual(xp);
            const auto fm = residual(xm);
            for (std::size_t r = 0; r < 4; ++r) jac[r][c] = (fp[r] - fm[r]) / (2.0 * h);
        }
        std::array<double, 4> rhs{};
        for (std::size_t r = 0; r < 4; ++r) rhs[r] = -f[r];
        const auto dx = solve_linear(jac, rhs);
        for (std::size_t c = 0; c < 4; ++c) x[c] += dx[c];
    }
    if (!converged) {
        const auto f = residual(x);
        double norm = 0.0;
        for (double r : f) norm = std::max(norm, std::abs(r));
        if (!(norm < 1e-10)) {
            throw SimulationFault("initialize: operating point did not converge");
        }
    }

    s.machines[0].delta = x[0];
    s.machines[0].e_fd = x[1];
    s.machines[1].delta = x[2];
    s.machines[1].e_fd = x[3];
    const NetworkSolution net = network_solve(s, params);
    for (std::size_t k = 0; k < kMachines; ++k) {
        const auto& mp = params.machines[k];
        s.machines[k].d_omega = 0.0;
        s.machines[k].p_m = net.p_e[k];
        s.p_ref[k] = net.p_e[k] / mp.K_G;
        s.v_set[k] = std::abs(net.v_terminal[k]) + s.machines[k].e_fd / mp.K_a;
        if (s.machines[k].e_fd <= 0.0) {
            throw SimulationFault("initialize: non-positive excitation at operating point");
        }
    }
    return s;
}

}  // namespace mgsim::plant
