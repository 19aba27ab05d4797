#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mgsim/config.hpp"
#include "mgsim/errors.hpp"
#include "mgsim/harness.hpp"

using namespace mgsim;
using namespace mgsim::harness;

namespace {

Scenario short_scenario(ControllerConfig controller, double horizon = 2.0) {
    Scenario sc;
    sc.horizon = horizon;
    sc.controller = std::move(controller);
    return sc;
}

std::vector<NamedController> tuned_controllers() {
    std::vector<NamedController> out;
    for (const auto& c : config::defaults().controllers) {
        if (kind_of(c.config) != ControllerKind::none) out.push_back(c);
    }
    return out;
}

bool same_metrics(const Metrics& a, const Metrics& b) {
    if (a.defined != b.defined) return false;
    for (std::size_t s = 0; s < 4; ++s) {
        if (a.signals[s].mse != b.signals[s].mse ||
            a.signals[s].settling_time != b.signals[s].settling_time ||
            a.signals[s].overshoot != b.signals[s].overshoot ||
            a.signals[s].peak_abs_error != b.signals[s].peak_abs_error) {
            return false;
        }
    }
    return a.mean_abs_u_sec == b.mean_abs_u_sec && a.mean_abs_t_sec == b.mean_abs_t_sec;
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("null controller leaves both commands at zero") {
    const auto r = run_scenario(short_scenario(NullConfig{}));
    REQUIRE(r.t.size() == 2000);
    CHECK(std::all_of(r.u_sec.begin(), r.u_sec.end(), [](double x) { return x == 0.0; }));
    CHECK(std::all_of(r.t_sec.begin(), r.t_sec.end(), [](double x) { return x == 0.0; }));
    CHECK_FALSE(r.fault);
}

TEST_CASE("zero horizon gives an empty, undefined result") {
    const auto r = run_scenario(short_scenario(NullConfig{}, 0.0));
    CHECK(r.t.empty());
    CHECK_FALSE(r.metrics.defined);
}

TEST_CASE("scenario validation") {
    Scenario sc = short_scenario(NullConfig{});
    sc.dt = 3e-3;
    sc.horizon = 0.01;
    CHECK_THROWS_AS(run_scenario(sc), ContractViolation);
    sc = short_scenario(NullConfig{});
    sc.log_every = 0;
    CHECK_THROWS_AS(run_scenario(sc), ContractViolation);
}

TEST_CASE("every controller shares the pre-islanding trace") {
    const auto base = run_scenario(short_scenario(NullConfig{}, 0.4));
    for (const auto& nc : tuned_controllers()) {
        const auto r = run_scenario(short_scenario(nc.config, 0.4));
        for (std::size_t k = 0; k < r.t.size() && r.t[k] < 0.2 - 1e-9; ++k) {
            for (std::size_t m = 0; m < 2; ++m) {
                REQUIRE(std::abs(r.omega[m][k] - base.omega[m][k]) < 1e-9);
                REQUIRE(std::abs(r.v[m][k] - base.v[m][k]) < 1e-9);
            }
        }
    }
}

TEST_CASE("metrics of simple fixtures") {
    std::vector<double> t(1000);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 1e-3 * static_cast<double>(i);

    const std::vector<double> flat(t.size(), 1.0);
    auto m = signal_metrics(t, flat, 1.0, {MseWindow::full, 0.005, 0.2});
    CHECK(m.mse == 0.0);
    CHECK(m.settling_time == 0.2);
    CHECK(m.overshoot == 0.0);

    const std::vector<double> offset(t.size(), 1.01);
    m = signal_metrics(t, offset, 1.0, {MseWindow::full, 0.005, 0.0});
    CHECK(m.mse == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK_FALSE(m.settling_time.has_value());

    CHECK_THROWS_AS(signal_metrics({}, {}, 1.0, {}), ContractViolation);
}

TEST_CASE("settling time of a decaying exponential") {
    const double dt = 1e-3, a = 0.05, tau = 0.7, band = 0.005, ref = 1.0;
    std::vector<double> t, x;
    for (int i = 0; i < 8000; ++i) {
        t.push_back(dt * i);
        x.push_back(ref + a * std::exp(-t.back() / tau));
    }
    const double crossing = tau * std::log(a / (band * ref));
    const auto m = signal_metrics(t, x, ref, {MseWindow::full, band, 0.0});
    REQUIRE(m.settling_time.has_value());
    CHECK(std::abs(*m.settling_time - crossing) <= dt);
    CHECK(m.peak_abs_error == doctest::Approx(a));
}

TEST_CASE("overshoot is measured past the reference") {
    std::vector<double> t, x;
    for (int i = 0; i < 100; ++i) {
        t.push_back(0.01 * i);
        x.push_back(i < 50 ? 0.9 : 1.02);
    }
    const auto m = signal_metrics(t, x, 1.0, {MseWindow::full, 0.005, 0.0});
    CHECK(m.overshoot == doctest::Approx(0.02));
}

TEST_CASE("post-event window ignores the pre-event segment") {
    std::vector<double> t, x;
    for (int i = 0; i < 100; ++i) {
        t.push_back(0.01 * i);
        x.push_back(i < 20 ? 1.5 : 1.0);
    }
    CHECK(signal_metrics(t, x, 1.0, {MseWindow::post_event, 0.005, 0.2}).mse == 0.0);
    CHECK(signal_metrics(t, x, 1.0, {MseWindow::full, 0.005, 0.2}).mse > 0.0);
}

TEST_CASE("runs are reproducible and metrics ignore the logging stride") {
    Scenario sc = short_scenario(config::default_controller(ControllerKind::belbic));
    sc.log_internals = true;
    const auto a = run_scenario(sc);
    const auto b = run_scenario(sc);
    CHECK(a.omega == b.omega);
    CHECK(a.v == b.v);
    CHECK(a.u_sec == b.u_sec);
    CHECK(a.internals.size() == a.t.size());

    sc.log_every = 7;
    const auto c = run_scenario(sc);
    CHECK(c.internals.size() == (a.t.size() + 6) / 7);
    CHECK(same_metrics(a.metrics, c.metrics));
}

TEST_CASE("a mid-run fault keeps the partial trace") {
    Scenario sc = short_scenario(NullConfig{}, 1.0);
    sc.plant.load_P = 0.0;
    sc.plant.load_Q = 0.0;
    for (int m = 0; m < 2; ++m) {
        plant::Event ev;
        ev.time = 0.1;
        ev.kind = plant::EventKind::parameter_change;
        ev.machine = m;
        ev.field = "X";
        ev.value = 1e13;
        sc.events.insert(sc.events.begin() + m, ev);
    }
    const auto r = run_scenario(sc);
    REQUIRE(r.fault.has_value());
    CHECK(r.fault->find("singular") != std::string::npos);
    CHECK(r.t.size() == 200);
    CHECK(r.metrics.defined);
}

TEST_CASE("sweep bookkeeping") {
    const Scenario base = short_scenario(NullConfig{});
    const auto ctls = tuned_controllers();

    SweepSpec nominal{"K_G", {1.0}, SweepTargets::sm1};
    const auto rows = sensitivity_sweep(base, nominal, ctls, 2);
    REQUIRE(rows.size() == ctls.size());
    for (std::size_t i = 0; i < ctls.size(); ++i) {
        Scenario sc = base;
        sc.controller = ctls[i].config;
        CHECK(rows[i].controller == ctls[i].name);
        CHECK(same_metrics(rows[i].metrics, run_scenario(sc).metrics));
    }

    SweepSpec both = nominal;
    both.targets = SweepTargets::both;
    const auto rows_both = sensitivity_sweep(base, both, ctls, 1);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(same_metrics(rows[i].metrics, rows_both[i].metrics));

    SweepSpec grid{"K_G", {0.5, 1.0, 2.0}, SweepTargets::sm1};
    const auto nine = sensitivity_sweep(base, grid, ctls, 3);
    REQUIRE(nine.size() == 9);
    for (std::size_t i = 0; i < nine.size(); ++i) {
        CHECK(nine[i].multiplier == grid.multipliers[i / 3]);
        CHECK(nine[i].controller == ctls[i % 3].name);
        CHECK(nine[i].metrics.defined);
    }
    CHECK_THROWS_AS(sensitivity_sweep(base, SweepSpec{"X", {1.0}, SweepTargets::sm1}, ctls, 1),
                    ContractViolation);
    CHECK_THROWS_AS(sensitivity_sweep(base, SweepSpec{"K_a", {}, SweepTargets::sm1}, ctls, 1),
                    ContractViolation);
}

TEST_CASE("tuner with a budget of one returns the start point") {
    const Scenario sc = short_scenario(config::default_controller(ControllerKind::pid));
    TuneOptions opts;
    opts.budget = 1;
    const auto r = tune_gains(sc, opts);
    CHECK(r.evaluations == 1);
    CHECK(r.best == sc.controller);
    CHECK(same_metrics(r.best_metrics, [&] {
        auto m = run_scenario(sc).metrics;
        for (auto& s : m.signals) s.abs_error.clear();
        return m;
    }()));
}

TEST_CASE("objective of the null controller is its raw MSE") {
    const Scenario sc = short_scenario(NullConfig{});
    const auto m = run_scenario(sc).metrics;
    TuneOptions opts;
    CHECK(objective(m, opts) == m[Signal::omega_sm1].mse + m[Signal::v_sm1].mse);
    const auto r = tune_gains(sc, opts);
    CHECK(r.best_score == objective(m, opts));
}

TEST_CASE("tuner traces are monotone, prefix-stable and worker-independent") {
    const Scenario sc = short_scenario(config::default_controller(ControllerKind::belbic), 1.0);
    TuneOptions opts;
    opts.seed = 99;
    opts.random_samples = 6;
    opts.lambda = 1e-7;
    opts.budget = 14;
    const auto small = tune_gains(sc, opts);
    opts.budget = 28;
    const auto large = tune_gains(sc, opts);
    opts.workers = 3;
    const auto parallel = tune_gains(sc, opts);

    REQUIRE(small.score_trace.size() == 14);
    REQUIRE(large.score_trace.size() == 28);
    for (std::size_t i = 0; i < small.score_trace.size(); ++i) {
        CHECK(small.score_trace[i] == large.score_trace[i]);
    }
    for (std::size_t i = 1; i < large.score_trace.size(); ++i) {
        CHECK(large.score_trace[i] <= large.score_trace[i - 1]);
    }
    CHECK(parallel.score_trace == large.score_trace);
    CHECK(parallel.best == large.best);
}

TEST_CASE("robust tuning scores the mean over plant variants") {
    const Scenario sc = short_scenario(config::default_controller(ControllerKind::pid), 1.0);
    TuneOptions opts;
    opts.budget = 1;
    opts.across = SweepSpec{"K_G", {0.5, 1.0, 2.0}, SweepTargets::sm1};
    const auto r = tune_gains(sc, opts);
    double expected = 0.0;
    for (double mult : opts.across->multipliers) {
        expected += objective(run_scenario(scaled_scenario(sc, *opts.across, mult)).metrics, opts);
    }
    CHECK(r.best_score == doctest::Approx(expected / 3.0).epsilon(1e-14));
}

TEST_CASE("tuner bounds are validated") {
    const Scenario sc = short_scenario(config::default_controller(ControllerKind::pid), 1.0);
    TuneOptions opts;
    opts.bounds["voltage.kz"] = {0.0, 1.0};
    CHECK_THROWS_AS(tune_gains(sc, opts), ContractViolation);
    opts.bounds.clear();
    opts.bounds["voltage.kp"] = {2.0, 1.0};
    CHECK_THROWS_AS(tune_gains(sc, opts), ContractViolation);
}

TEST_SUITE_END();
