#include <doctest.h>

#include <cmath>
#include <complex>

#include "mgsim/errors.hpp"
#include "mgsim/plant.hpp"
#include "oracles.hpp"

using namespace mgsim;
using namespace mgsim::plant;

namespace {

oracle::NetworkData network_data(const PlantParams& p) {
    oracle::NetworkData d{};
    for (int k = 0; k < 2; ++k) {
        const auto& m = p.machines[static_cast<std::size_t>(k)];
        d.m[k] = {m.X, m.X_line, m.P_dispatch};
    }
    d.load_P = p.load_P;
    d.load_Q = p.load_Q;
    d.X_tie = p.X_tie;
    d.v_grid = p.grid_voltage;
    d.v_term = p.v_target;
    return d;
}

PlantState bare_state(double e1, double d1, double e2, double d2) {
    PlantState s;
    s.machines[0].e_fd = e1;
    s.machines[0].delta = d1;
    s.machines[1].e_fd = e2;
    s.machines[1].delta = d2;
    return s;
}

double sup_diff(const Dynamics& a, const Dynamics& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < kMachines; ++k) {
        m = std::max({m, std::abs(a[k].delta - b[k].delta), std::abs(a[k].d_omega - b[k].d_omega),
                      std::abs(a[k].p_m - b[k].p_m), std::abs(a[k].e_fd - b[k].e_fd)});
    }
    return m;
}

// Single exponential mode: the governor of SM1 with the rotor pinned by an
// enormous inertia and a zero power reference gives dP_m/dt = -P_m.
struct ExpFixture {
    PlantParams params;
    PlantState state;
    ExpFixture() {
        params.machines[0].M = 1e300;
        params.machines[0].T_G = 1.0;
        params.machines[0].K_G = 1.0;
        state = bare_state(1.0, 0.0, 1.0, 0.0);
        state.machines[0].p_m = 1.0;
        state.p_ref = {0.0, 0.0};
        state.v_set = {1.0, 1.0};
    }
};

}  // namespace

TEST_SUITE_BEGIN("plant");

TEST_CASE("operating point agrees with the bus-voltage root solve") {
    const PlantParams p;
    const PlantState s = initialize(p);
    const auto ref = oracle::steady_state(network_data(p));
    CHECK(std::abs(oracle::bus_mismatch(network_data(p), std::abs(ref.v_bus), std::arg(ref.v_bus))) <
          1e-12);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(s.machines[k].delta == doctest::Approx(std::arg(ref.emf[k])).epsilon(1e-10));
        CHECK(s.machines[k].e_fd == doctest::Approx(std::abs(ref.emf[k])).epsilon(1e-10));
    }
    const auto net = network_solve(s, p);
    CHECK(std::abs(net.v_bus - ref.v_bus) < 1e-10);
    const auto r = measure(s, net);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(r.machines[k].v == doctest::Approx(std::abs(ref.v_terminal[k])).epsilon(1e-10));
        CHECK(r.machines[k].omega == 1.0);
    }
    CHECK_FALSE(r.voltage_collapse);

    const Dynamics d = derivatives(s, {}, p);
    for (const auto& m : d) {
        CHECK(std::abs(m.delta) < 1e-9);
        CHECK(std::abs(m.d_omega) < 1e-9);
        CHECK(std::abs(m.p_m) < 1e-9);
        CHECK(std::abs(m.e_fd) < 1e-9);
    }
}

TEST_CASE("operating point for a perturbed network") {
    PlantParams p;
    p.load_P = 0.8;
    p.load_Q = 0.5;
    p.machines[0].X = 0.6;
    p.machines[1].X_line = 0.12;
    p.X_tie = 0.2;
    const PlantState s = initialize(p);
    const auto ref = oracle::steady_state(network_data(p));
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(s.machines[k].delta == doctest::Approx(std::arg(ref.emf[k])).epsilon(1e-9));
        CHECK(s.machines[k].e_fd == doctest::Approx(std::abs(ref.emf[k])).epsilon(1e-9));
    }
}

TEST_CASE("huge inertia freezes the speed") {
    PlantParams p;
    p.machines[0].M = 1e6;
    PlantState s = initialize(p);
    s.machines[0].d_omega = 0.01;
    CHECK(std::abs(derivatives(s, {}, p)[0].d_omega) < 1e-7);
}

TEST_CASE("governor responds to the secondary command") {
    const PlantParams p;
    const PlantState s = initialize(p);
    const double c = 0.2;
    const Dynamics d0 = derivatives(s, {}, p);
    const Dynamics d1 = derivatives(s, {0.0, c}, p);
    const auto& m = p.machines[0];
    CHECK(d1[0].p_m - d0[0].p_m == doctest::Approx(m.K_G * c / m.T_G).epsilon(1e-12));
    CHECK(d1[1].p_m == d0[1].p_m);
}

TEST_CASE("network power flows") {
    PlantParams p;
    p.load_P = 0.0;
    p.load_Q = 0.0;

    auto islanded = bare_state(1.1, 0.3, 1.1, 0.3);
    islanded.grid_connected = false;
    auto net = network_solve(islanded, p);
    CHECK(std::abs(net.p_e[0]) < 1e-15);
    CHECK(std::abs(net.p_e[1]) < 1e-15);

    // Two machines facing each other across the bus form a two-bus system.
    const double e1 = 1.2, e2 = 0.9, d1 = 0.4, d2 = -0.1;
    auto pair = bare_state(e1, d1, e2, d2);
    pair.grid_connected = false;
    net = network_solve(pair, p);
    const double x_total =
        p.machines[0].X + p.machines[0].X_line + p.machines[1].X + p.machines[1].X_line;
    const double transfer = e1 * e2 * std::sin(d1 - d2) / x_total;
    CHECK(std::abs(net.p_e[0] - transfer) < 1e-12);
    CHECK(std::abs(net.p_e[1] + transfer) < 1e-12);

    auto matched = bare_state(p.grid_voltage, 0.0, p.grid_voltage, 0.0);
    net = network_solve(matched, p);
    CHECK(std::abs(net.p_grid) < 1e-15);
    CHECK(std::abs(net.q_grid) < 1e-15);
    CHECK(std::abs(net.p_e[0]) < 1e-15);
}

TEST_CASE("singular network is a simulation fault") {
    PlantParams p;
    p.load_P = 0.0;
    p.load_Q = 0.0;
    p.machines[0].X = 1e13;
    p.machines[1].X = 1e13;
    auto s = bare_state(1.0, 0.0, 1.0, 0.0);
    s.grid_connected = false;
    CHECK_THROWS_AS(network_solve(s, p), SimulationFault);
}

TEST_CASE("RK4 on a single decaying mode") {
    ExpFixture f;
    const double dt = 1e-3;
    const auto next = integrate_step(f.state, {}, f.params, dt);
    CHECK(std::abs(next.machines[0].p_m - std::exp(-dt)) < 1e-16);

    // Global error falls by 2^4 when the step halves.
    auto error_for = [&](int steps) {
        PlantState s = f.state;
        const double h = 1.0 / steps;
        for (int i = 0; i < steps; ++i) s = integrate_step(s, {}, f.params, h);
        return std::abs(s.machines[0].p_m - std::exp(-1.0));
    };
    const double e10 = error_for(10);
    const double e20 = error_for(20);
    const double e40 = error_for(40);
    CHECK(e10 / e20 == doctest::Approx(16.0).epsilon(0.05));
    CHECK(e20 / e40 == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("steady state is a fixed point of the integrator") {
    const PlantParams p;
    const PlantState s = initialize(p);
    const PlantState n = integrate_step(s, {}, p, 1e-3);
    CHECK(sup_diff(s.machines, n.machines) < 1e-12);
}

TEST_CASE("non-finite integration result names the component") {
    const PlantParams p;
    PlantState s = initialize(p);
    s.machines[1].p_m = INFINITY;
    try {
        (void)integrate_step(s, {}, p, 1e-3);
        FAIL("expected a fault");
    } catch (const SimulationFault& e) {
        CHECK(std::string(e.what()).find("non-finite sm") != std::string::npos);
    }
}

TEST_CASE("islanding creates an immediate imbalance") {
    PlantParams p;
    const PlantState s = initialize(p);
    const auto before = network_solve(s, p);
    CHECK(before.p_grid > 0.1);

    const PlantState isl = apply_event(s, p, islanding_at(0.2));
    CHECK_FALSE(isl.grid_connected);
    const auto after = network_solve(isl, p);
    const Dynamics d = derivatives(isl, {}, p);
    double accel = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(d[k].d_omega < 0.0);
        accel += p.machines[k].M * d[k].d_omega;
    }
    const double pm = s.machines[0].p_m + s.machines[1].p_m;
    CHECK(accel == doctest::Approx(pm - after.p_load).epsilon(1e-12));
}

TEST_CASE("zero load step and parameter changes") {
    PlantParams p;
    const PlantState s = initialize(p);
    Event step0;
    step0.kind = EventKind::load_step;
    CHECK(apply_event(s, p, step0) == s);

    PlantState probe = s;
    probe.machines[0].p_m = 0.0;
    const double before = derivatives(probe, {0.0, 0.1}, p)[0].p_m;
    Event change;
    change.kind = EventKind::parameter_change;
    change.machine = 0;
    change.field = "K_G";
    change.value = 2.0 * p.machines[0].K_G;
    const PlantState after = apply_event(probe, p, change);
    CHECK(p.machines[0].K_G == 2.0);
    CHECK(derivatives(after, {0.0, 0.1}, p)[0].p_m == doctest::Approx(2.0 * before).epsilon(1e-14));

    change.field = "Q";
    CHECK_THROWS_AS(validate_events({change}), ContractViolation);
    CHECK_THROWS_AS(validate_events({islanding_at(0.5), islanding_at(0.1)}), ContractViolation);
    CHECK_THROWS_AS(validate_events({islanding_at(0.1), islanding_at(0.5)}), ContractViolation);
}

TEST_CASE("zero excitation while islanded collapses the voltage") {
    const PlantParams p;
    PlantState s = initialize(p);
    s.grid_connected = false;
    s.machines[0].e_fd = 0.0;
    s.machines[1].e_fd = 0.0;
    CHECK(measure(s, p).voltage_collapse);
}

TEST_CASE("property: power balance holds along a disturbed trajectory") {
    PlantParams p;
    PlantState s = initialize(p);
    for (int k = 0; k < 3000; ++k) {
        if (k == 200) s = apply_event(s, p, islanding_at(0.2));
        const auto net = network_solve(s, p);
        const double gen = net.p_e[0] + net.p_e[1] + net.p_grid;
        REQUIRE(std::abs(gen - net.p_load - net.losses) < 1e-9);
        const ControlCommand cmd{0.05 * std::sin(k * 1e-2), 0.1 * std::cos(k * 3e-3)};
        s = integrate_step(s, cmd, p, 1e-3);
    }
}

TEST_CASE("property: energy is conserved on the lossless swing system") {
    PlantParams p;
    p.load_P = 0.0;
    p.swing_only = true;
    for (auto& m : p.machines) m.D = 0.0;
    PlantState s = initialize(p);
    s.machines[0].d_omega = 2e-3;
    s.machines[1].d_omega = -1e-3;

    // Kron-reduced susceptances between the two EMFs and the grid.
    using C = std::complex<double>;
    const C y1 = 1.0 / C(0.0, p.machines[0].X + p.machines[0].X_line);
    const C y2 = 1.0 / C(0.0, p.machines[1].X + p.machines[1].X_line);
    const C yg = 1.0 / C(0.0, p.X_tie);
    const C ysum = y1 + y2 + yg + C(p.load_P, -p.load_Q);
    const double b12 = -(y1 * y2 / ysum).imag();
    const double b1g = -(y1 * yg / ysum).imag();
    const double b2g = -(y2 * yg / ysum).imag();

    auto energy = [&](const PlantState& x) {
        const auto& a = x.machines[0];
        const auto& b = x.machines[1];
        const double kinetic = 0.5 * p.omega_base *
                               (p.machines[0].M * a.d_omega * a.d_omega +
                                p.machines[1].M * b.d_omega * b.d_omega);
        const double potential = -(a.p_m * a.delta + b.p_m * b.delta) -
                                 b12 * a.e_fd * b.e_fd * std::cos(a.delta - b.delta) -
                                 b1g * a.e_fd * p.grid_voltage * std::cos(a.delta) -
                                 b2g * b.e_fd * p.grid_voltage * std::cos(b.delta);
        return kinetic + potential;
    };

    const double h0 = energy(s);
    double drift = 0.0;
    for (int k = 0; k < 1000; ++k) {
        s = integrate_step(s, {}, p, 1e-3);
        drift = std::max(drift, std::abs(energy(s) - h0));
    }
    CHECK(drift < 1e-6);
    CHECK(std::abs(s.machines[0].d_omega) > 0.0);
}

TEST_CASE("property: the plant is deterministic") {
    PlantParams p1, p2;
    PlantState a = initialize(p1);
    PlantState b = initialize(p2);
    a = apply_event(a, p1, islanding_at(0.0));
    b = apply_event(b, p2, islanding_at(0.0));
    for (int k = 0; k < 500; ++k) {
        a = integrate_step(a, {0.01, 0.02}, p1, 1e-3);
        b = integrate_step(b, {0.01, 0.02}, p2, 1e-3);
    }
    CHECK(a == b);
}

TEST_SUITE_END();
