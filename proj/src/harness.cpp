#include "mgsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mgsim/errors.hpp"
#include "mgsim/parallel.hpp"
#include "mgsim/seeding.hpp"

namespace mgsim::harness {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double mean_abs(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += std::abs(x);
    return s / static_cast<double>(xs.size());
}

}  // namespace

// ---- scenario ------------------------------------------------------------------------

std::size_t Scenario::samples() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractViolation("scenario.dt must be > 0");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
        throw ContractViolation("scenario.horizon must be >= 0");
    }
    const double ratio = horizon / dt;
    const double n = std::round(ratio);
    if (std::abs(ratio - n) > 1e-6) {
        throw ContractViolation("scenario.dt must divide scenario.horizon evenly");
    }
    return static_cast<std::size_t>(n);
}

void Scenario::validate() const {
    (void)samples();
    plant.validate();
    plant::validate_events(events);
    mgsim::validate(controller);
    if (!(refs.omega_ref > 0.0) || !(refs.v_ref > 0.0)) {
        throw ContractViolation("references must be > 0");
    }
    if (log_every < 1) throw ContractViolation("scenario.log_every must be >= 1");
    if (!(settling_band > 0.0)) throw ContractViolation("scenario.settling_band must be > 0");
}

double Scenario::last_event_time() const {
    double t = 0.0;
    for (const auto& ev : events) {
        if (ev.time <= horizon) t = std::max(t, ev.time);
    }
    return t;
}

std::span<const double> RunResult::series(Signal s) const {
    switch (s) {
        case Signal::omega_sm1: return omega[0];
        case Signal::v_sm1: return v[0];
        case Signal::omega_sm2: return omega[1];
        case Signal::v_sm2: return v[1];
    }
    return {};
}

// ---- metrics ---------------------------------------------------------------------------

SignalMetrics signal_metrics(std::span<const double> t, std::span<const double> x, double ref,
                             const MetricsOptions& options) {
    if (x.empty()) throw ContractViolation("compute_metrics: empty series");
    if (t.size() != x.size()) throw ContractViolation("compute_metrics: series length mismatch");

    SignalMetrics m;
    m.abs_error.resize(x.size());
    double sum_sq = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double err = x[i] - ref;
        m.abs_error[i] = std::abs(err);
        if (options.window == MseWindow::full || t[i] >= options.event_time) {
            sum_sq += err * err;
            ++counted;
        }
    }
    m.mse = counted > 0 ? sum_sq / static_cast<double>(counted) : 0.0;

    const double band = options.band * std::abs(ref);
    std::size_t first_post = 0;
    while (first_post < t.size() && t[first_post] < options.event_time) ++first_post;

    std::optional<std::size_t> last_outside;
    double peak = 0.0;
    double peak_signed = 0.0;
    for (std::size_t i = first_post; i < x.size(); ++i) {
        if (m.abs_error[i] > band) last_outside = i;
        if (m.abs_error[i] > peak) {
            peak = m.abs_error[i];
            peak_signed = x[i] - ref;
        }
    }
    m.peak_abs_error = peak;
    if (!last_outside) {
        m.settling_time = options.event_time;
    } else if (*last_outside + 1 < x.size()) {
        m.settling_time = t[*last_outside + 1];
    }

    // Excursion past the reference opposite to the main deviation.
    if (peak > 0.0) {
        const double direction = peak_signed > 0.0 ? 1.0 : -1.0;
        for (std::size_t i = first_post; i < x.size(); ++i) {
            m.overshoot = std::max(m.overshoot, -direction * (x[i] - ref));
        }
    }
    return m;
}

Metrics compute_metrics(const RunResult& result, const References& refs,
                        const MetricsOptions& options) {
    if (result.t.empty()) throw ContractViolation("compute_metrics: empty series");
    Metrics m;
    m.defined = true;
    const double reference[4] = {refs.omega_ref, refs.v_ref, refs.omega_ref, refs.v_ref};
    for (std::size_t s = 0; s < 4; ++s) {
        m.signals[s] = signal_metrics(result.t, result.series(static_cast<Signal>(s)), reference[s],
                                      options);
    }
    m.mean_abs_u_sec = mean_abs(result.u_sec);
    m.mean_abs_t_sec = mean_abs(result.t_sec);
    return m;
}

// ---- scenario execution -------------------------------------------------------------------

RunResult run_scenario(const Scenario& scenario) {
    scenario.validate();
    const std::size_t n = scenario.samples();
    const double dt = scenario.dt;

    plant::PlantParams params = scenario.plant;
    plant::PlantState state = plant::initialize(params);
    SecondaryController controller(scenario.controller, dt);

    RunResult r;
    r.t.reserve(n);
    for (auto* series : {&r.omega[0], &r.omega[1], &r.v[0], &r.v[1], &r.u_sec, &r.t_sec}) {
        series->reserve(n);
    }

    std::size_t next_event = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        try {
            while (next_event < scenario.events.size() &&
                   scenario.events[next_event].time <= t + 0.5 * dt) {
                state = plant::apply_event(state, params, scenario.events[next_event]);
                ++next_event;
            }
            const auto net = plant::network_solve(state, params);
            const auto readings = plant::measure(state, net);
            if (readings.voltage_collapse && !r.voltage_collapse_time) {
                r.voltage_collapse_time = t;
            }
            const ControlCommand cmd = controller.control_step(readings.machines[0], scenario.refs);

            r.t.push_back(t);
            for (std::size_t m = 0; m < plant::kMachines; ++m) {
                r.omega[m].push_back(readings.machines[m].omega);
                r.v[m].push_back(readings.machines[m].v);
            }
            r.u_sec.push_back(cmd.u_sec);
            r.t_sec.push_back(cmd.t_sec);
            if (scenario.log_internals && k % static_cast<std::size_t>(scenario.log_every) == 0) {
                r.internals.push_back({t, controller.internals()});
            }
            state = plant::integrate_step(state, cmd, params, dt);
        } catch (const SimulationFault& fault) {
            r.fault = "t=" + std::to_string(t) + ": " + fault.what();
            break;
        } catch (const ContractViolation& fault) {
            r.fault = "t=" + std::to_string(t) + ": " + fault.what();
            break;
        }
    }
    r.controller_faults = controller.fault_count();

    if (!r.t.empty()) {
        r.metrics = compute_metrics(
            r, scenario.refs,
            MetricsOptions{scenario.mse_window, scenario.settling_band, scenario.last_event_time()});
    }
    return r;
}

// ---- sweep --------------------------------------------------------------------------------

void validate(const SweepSpec& spec) {
    static constexpr const char* allowed[] = {"K_a", "T_a", "K_G", "T_G"};
    if (std::find(std::begin(allowed), std::end(allowed), spec.param) == std::end(allowed)) {
        throw ContractViolation("sweep.param must be one of K_a, T_a, K_G, T_G (got '" +
                                spec.param + "')");
    }
    if (spec.multipliers.empty()) throw ContractViolation("sweep.values must not be empty");
    for (double m : spec.multipliers) {
        if (!(m > 0.0) || !std::isfinite(m)) {
            throw ContractViolation("sweep.values must be positive multipliers");
        }
    }
}

Scenario scaled_scenario(const Scenario& base, const SweepSpec& spec, double multiplier) {
    Scenario sc = base;
    plant::machine_field(sc.plant.machines[0], spec.param) *= multiplier;
    if (spec.targets == SweepTargets::both) {
        plant::machine_field(sc.plant.machines[1], spec.param) *= multiplier;
    }
    return sc;
}

std::vector<SweepRow> sensitivity_sweep(const Scenario& base, const SweepSpec& spec,
                                        std::span<const NamedController> controllers,
                                        unsigned workers) {
    validate(spec);
    base.validate();
    if (controllers.empty()) throw ContractViolation("sweep needs at least one controller");

    const std::size_t cols = controllers.size();
    std::vector<SweepRow> rows(spec.multipliers.size() * cols);
    parallel_for(rows.size(), workers, [&](std::size_t cell) {
        const std::size_t vi = cell / cols;
        const std::size_t ci = cell % cols;
        const double mult = spec.multipliers[vi];
        Scenario sc = scaled_scenario(base, spec, mult);
        sc.controller = controllers[ci].config;
        sc.log_internals = false;

        SweepRow row;
        row.multiplier = mult;
        row.controller = controllers[ci].name;
        row.kind = kind_of(controllers[ci].config);
        try {
            RunResult r = run_scenario(sc);
            row.metrics = std::move(r.metrics);
            row.fault = std::move(r.fault);
        } catch (const SimulationFault& e) {
            row.fault = e.what();
        }
        for (auto& s : row.metrics.signals) {
            s.abs_error.clear();
            s.abs_error.shrink_to_fit();
        }
        rows[cell] = std::move(row);
    });
    return rows;
}

// ---- tuner -----------------------------------------------------------------------------------

std::vector<Tunable> tunables(const ControllerConfig& config) {
    std::vector<Tunable> out;
    std::visit(
        overloaded{
            [](const NullConfig&) {},
            [&](const PidConfig& c) {
                for (auto [label, g] : {std::pair{"voltage", &c.voltage},
                                        std::pair{"frequency", &c.frequency}}) {
                    const std::string p = label;
                    out.push_back({p + ".kp", g->kp, {0.01, 500.0}});
                    out.push_back({p + ".ki", g->ki, {0.01, 500.0}});
                    out.push_back({p + ".kd", g->kd, {1e-4, 10.0}});
                }
            },
            [&](const NnConfig& c) {
                for (auto [label, ch] : {std::pair{"voltage", &c.voltage},
                                         std::pair{"frequency", &c.frequency}}) {
                    const std::string p = label;
                    out.push_back({p + ".learning_rate", ch->learning_rate, {1e-4, 100.0}});
                    for (int i = 0; i < 3; ++i) {
                        out.push_back({p + ".input_scale" + std::to_string(i),
                                       ch->input_scale[static_cast<std::size_t>(i)],
                                       {0.01, 1000.0}});
                    }
                    out.push_back({p + ".output_scale", ch->output_scale, {0.01, 100.0}});
                }
            },
            [&](const BelbicConfig& c) {
                for (auto [label, ch] : {std::pair{"voltage", &c.voltage},
                                         std::pair{"frequency", &c.frequency}}) {
                    const std::string p = label;
                    const auto& g = ch->gains;
                    const double k[7] = {g.k1, g.k2, g.k3, g.k4, g.k5, g.k6, g.k7};
                    for (int i = 0; i < 7; ++i) {
                        out.push_back({p + ".k" + std::to_string(i + 1), k[i], {1e-3, 1000.0}});
                    }
                    out.push_back({p + ".k_v", ch->k_v, {1e-2, 1e6}});
                    out.push_back({p + ".k_w", ch->k_w, {1e-2, 1e6}});
                }
            },
        },
        config);
    return out;
}

ControllerConfig with_values(const ControllerConfig& config, std::span<const double> values) {
    if (values.size() != tunables(config).size()) {
        throw ContractViolation("with_values: wrong number of tunable values");
    }
    ControllerConfig out = config;
    std::size_t i = 0;
    std::visit(overloaded{
                   [](NullConfig&) {},
                   [&](PidConfig& c) {
                       for (PidGains* g : {&c.voltage, &c.frequency}) {
                           g->kp = values[i++];
                           g->ki = values[i++];
                           g->kd = values[i++];
                       }
                   },
                   [&](NnConfig& c) {
                       for (NnChannelConfig* ch : {&c.voltage, &c.frequency}) {
                           ch->learning_rate = values[i++];
                           for (double& s : ch->input_scale) s = values[i++];
                           ch->output_scale = values[i++];
                       }
                   },
                   [&](BelbicConfig& c) {
                       for (BelbicChannelConfig* ch : {&c.voltage, &c.frequency}) {
                           auto& g = ch->gains;
                           for (double* k : {&g.k1, &g.k2, &g.k3, &g.k4, &g.k5, &g.k6, &g.k7}) {
                               *k = values[i++];
                           }
                           ch->k_v = values[i++];
                           ch->k_w = values[i++];
                       }
                   },
               },
               out);
    return out;
}

double objective(const Metrics& metrics, const TuneOptions& options) {
    if (!metrics.defined) return std::numeric_limits<double>::infinity();
    return options.w_freq * metrics[Signal::omega_sm1].mse +
           options.w_volt * metrics[Signal::v_sm1].mse +
           options.lambda * (metrics.mean_abs_u_sec + metrics.mean_abs_t_sec);
}

namespace {

bool log_scaled(const Bound& b) { return b.lo > 0.0; }

double to_unit(double value, const Bound& b) {
    double u;
    if (log_scaled(b)) {
        const double v = std::max(value, b.lo);
        u = std::log(v / b.lo) / std::log(b.hi / b.lo);
    } else {
        u = (value - b.lo) / (b.hi - b.lo);
    }
    return std::clamp(u, 0.0, 1.0);
}

double from_unit(double u, const Bound& b) {
    if (log_scaled(b)) return b.lo * std::pow(b.hi / b.lo, u);
    return b.lo + (b.hi - b.lo) * u;
}

struct Evaluation {
    double score = std::numeric_limits<double>::infinity();
    Metrics metrics;
    bool ok = false;
};

Evaluation evaluate_one(const Scenario& sc) {
    Evaluation ev;
    try {
        RunResult r = run_scenario(sc);
        if (r.fault || !r.metrics.defined) return ev;
        ev.metrics = std::move(r.metrics);
        ev.ok = true;
    } catch (const SimulationFault&) {
    } catch (const ContractViolation&) {
    }
    return ev;
}

Evaluation evaluate(const Scenario& base, const ControllerConfig& config,
                    const TuneOptions& options) {
    Scenario sc = base;
    sc.controller = config;
    sc.log_internals = false;
    Evaluation ev = evaluate_one(sc);
    if (!ev.ok) return ev;
    ev.score = objective(ev.metrics, options);
    if (options.across) {
        double total = 0.0;
        for (double mult : options.across->multipliers) {
            if (mult == 1.0) {
                total += ev.score;
                continue;
            }
            const Evaluation variant = evaluate_one(scaled_scenario(sc, *options.across, mult));
            if (!variant.ok) return Evaluation{};
            total += objective(variant.metrics, options);
        }
        ev.score = total / static_cast<double>(options.across->multipliers.size());
    }
    ev.ok = std::isfinite(ev.score);
    return ev;
}

}  // namespace

TuneResult tune_gains(const Scenario& scenario, const TuneOptions& options) {
    scenario.validate();
    if (options.budget < 1) throw ContractViolation("tune.budget must be >= 1");
    if (options.across) validate(*options.across);
    for (double w : {options.w_freq, options.w_volt, options.lambda}) {
        if (!(w >= 0.0)) throw ContractViolation("tune weights must be >= 0");
    }

    std::vector<Tunable> params = tunables(scenario.controller);
    for (auto& p : params) {
        if (auto it = options.bounds.find(p.name); it != options.bounds.end()) p.bound = it->second;
        if (!(p.bound.hi > p.bound.lo) || p.bound.lo < 0.0) {
            throw ContractViolation("tune bound for '" + p.name + "' must satisfy 0 <= lo < hi");
        }
    }
    for (const auto& [name, bound] : options.bounds) {
        if (std::none_of(params.begin(), params.end(),
                         [&](const Tunable& p) { return p.name == name; })) {
            throw ContractViolation("tune bound names unknown parameter '" + name + "'");
        }
    }

    TuneResult result;
    std::vector<double> incumbent(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) incumbent[i] = params[i].value;
    Evaluation best;
    std::vector<double> best_values = incumbent;

    auto record = [&](Evaluation ev, const std::vector<double>& values) {
        ++result.evaluations;
        if (ev.ok && ev.score < best.score) {
            best = std::move(ev);
            best_values = values;
        }
        result.score_trace.push_back(best.score);
    };

    // Start point.
    record(evaluate(scenario, scenario.controller, options), incumbent);

    // Random phase: candidates are drawn up front so the sequence does not
    // depend on the worker count.
    if (!params.empty()) {
        const std::size_t n_random = std::min(options.random_samples, options.budget - 1);
        std::mt19937_64 rng(derive_seed(options.seed, "tune/random"));
        std::vector<std::vector<double>> candidates(n_random, std::vector<double>(params.size()));
        for (auto& cand : candidates) {
            for (std::size_t i = 0; i < params.size(); ++i) {
                cand[i] = from_unit(uniform01(rng), params[i].bound);
            }
        }
        std::vector<Evaluation> evals(n_random);
        parallel_for(n_random, options.workers, [&](std::size_t i) {
            evals[i] = evaluate(scenario, with_values(scenario.controller, candidates[i]), options);
        });
        for (std::size_t i = 0; i < n_random; ++i) record(std::move(evals[i]), candidates[i]);

        // Coordinate descent in the unit box around the incumbent.
        std::vector<double> step(params.size(), 0.25);
        while (result.evaluations < options.budget) {
            bool improved_pass = false;
            for (std::size_t c = 0; c < params.size() && result.evaluations < options.budget; ++c) {
                const double u0 = to_unit(best_values[c], params[c].bound);
                for (double dir : {1.0, -1.0}) {
                    if (result.evaluations >= options.budget) break;
                    const double u = std::clamp(u0 + dir * step[c], 0.0, 1.0);
                    if (u == u0) continue;
                    std::vector<double> cand = best_values;
                    cand[c] = from_unit(u, params[c].bound);
                    const double before = best.score;
                    record(evaluate(scenario, with_values(scenario.controller, cand), options),
                           cand);
                    if (best.score < before) {
                        improved_pass = true;
                        break;
                    }
                }
            }
            if (!improved_pass) {
                double largest = 0.0;
                for (double& s : step) {
                    s *= 0.5;
                    largest = std::max(largest, s);
                }
                if (largest < 1e-4) break;
            }
        }
    }

    result.success = best.ok;
    result.best = with_values(scenario.controller, best_values);
    result.best_score = best.score;
    result.best_metrics = std::move(best.metrics);
    for (auto& s : result.best_metrics.signals) {
        s.abs_error.clear();
        s.abs_error.shrink_to_fit();
    }
    result.message = best.ok ? "ok" : "all candidates faulted";
    return result;
}

}  // namespace mgsim::harness
