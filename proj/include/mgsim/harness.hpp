#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgsim/controllers.hpp"
#include "mgsim/plant.hpp"

namespace mgsim::harness {

enum class MseWindow { full, post_event };

struct Scenario {
    double horizon = 20.0;
    double dt = 1e-3;
    std::vector<plant::Event> events{plant::islanding_at(0.2)};
    plant::PlantParams plant;
    References refs;
    ControllerConfig controller = NullConfig{};
    bool log_internals = false;
    int log_every = 1;  // controller internals are logged every n-th tick
    MseWindow mse_window = MseWindow::full;
    double settling_band = 0.005;  // fraction of the reference

    // Number of ticks; throws ContractViolation on an invalid scenario.
    std::size_t samples() const;
    void validate() const;
    double last_event_time() const;
};

// Signals in the order omega_sm1, v_sm1, omega_sm2, v_sm2.
enum class Signal : std::size_t { omega_sm1 = 0, v_sm1 = 1, omega_sm2 = 2, v_sm2 = 3 };
inline constexpr std::array<const char*, 4> kSignalNames{"omega_sm1", "v_sm1", "omega_sm2",
                                                         "v_sm2"};

struct SignalMetrics {
    std::vector<double> abs_error;
    double mse = 0.0;
    std::optional<double> settling_time;  // empty when still outside the band at the horizon
    double overshoot = 0.0;
    double peak_abs_error = 0.0;
};

struct Metrics {
    bool defined = false;
    std::array<SignalMetrics, 4> signals{};
    double mean_abs_u_sec = 0.0;
    double mean_abs_t_sec = 0.0;

    const SignalMetrics& operator[](Signal s) const { return signals[static_cast<std::size_t>(s)]; }
};

struct MetricsOptions {
    MseWindow window = MseWindow::full;
    double band = 0.005;
    double event_time = 0.0;
};

struct InternalSample {
    double t = 0.0;
    ControllerInternals values;
};

struct RunResult {
    std::vector<double> t;
    std::array<std::vector<double>, 2> omega;
    std::array<std::vector<double>, 2> v;
    std::vector<double> u_sec;
    std::vector<double> t_sec;
    std::vector<InternalSample> internals;
    Metrics metrics;
    std::optional<std::string> fault;
    std::optional<double> voltage_collapse_time;
    std::size_t controller_faults = 0;

    std::span<const double> series(Signal s) const;
};

// Metrics for one signal against a constant reference.
SignalMetrics signal_metrics(std::span<const double> t, std::span<const double> x, double ref,
                             const MetricsOptions& options);

Metrics compute_metrics(const RunResult& result, const References& refs,
                        const MetricsOptions& options);

RunResult run_scenario(const Scenario& scenario);

// ---- sensitivity sweep ------------------------------------------------------------

enum class SweepTargets { sm1, both };

struct SweepSpec {
    std::string param;                // one of K_a, T_a, K_G, T_G
    std::vector<double> multipliers;  // applied to the nominal value
    SweepTargets targets = SweepTargets::sm1;
};

struct NamedController {
    std::string name;
    ControllerConfig config;
};

struct SweepRow {
    double multiplier = 1.0;
    std::string controller;
    ControllerKind kind = ControllerKind::none;
    Metrics metrics;  // abs_error series dropped
    std::optional<std::string> fault;
};

void validate(const SweepSpec& spec);

// `base` with the swept parameter scaled by `multiplier` on the targeted machines.
Scenario scaled_scenario(const Scenario& base, const SweepSpec& spec, double multiplier);

// Rows ordered by (multiplier index, controller index).
std::vector<SweepRow> sensitivity_sweep(const Scenario& base, const SweepSpec& spec,
                                        std::span<const NamedController> controllers,
                                        unsigned workers);

// ---- gain tuner ----------------------------------------------------------------------

struct Bound {
    double lo = 0.0;
    double hi = 1.0;
    bool operator==(const Bound&) const = default;
};

struct TuneOptions {
    std::size_t budget = 200;          // total scenario evaluations, including the start point
    std::size_t random_samples = 64;   // random-search candidates evaluated before refinement
    std::uint64_t seed = 1;
    double w_freq = 1.0;
    double w_volt = 1.0;
    double lambda = 0.01;              // weight on mean |u_sec| + mean |t_sec|
    std::map<std::string, Bound> bounds;  // overrides of the default search box
    // When set, a candidate's score is the mean objective over these plant
    // variants instead of the single base scenario.
    std::optional<SweepSpec> across;
    unsigned workers = 1;
};

struct Tunable {
    std::string name;
    double value = 0.0;
    Bound bound;
};

// Tunable coordinates of a controller with their default search bounds.
std::vector<Tunable> tunables(const ControllerConfig& config);
ControllerConfig with_values(const ControllerConfig& config, std::span<const double> values);

double objective(const Metrics& metrics, const TuneOptions& options);

struct TuneResult {
    ControllerConfig best;
    double best_score = 0.0;
    Metrics best_metrics;  // on the base scenario
    std::vector<double> score_trace;  // best-so-far after each evaluation
    std::size_t evaluations = 0;
    bool success = false;
    std::string message;
};

// Evaluates the starting configuration first, then `random_samples` random
// candidates (log-uniform inside positive boxes), then coordinate descent
// from the incumbent with step halving. The evaluation sequence for a budget
// is a prefix of the sequence for any larger budget.
TuneResult tune_gains(const Scenario& scenario, const TuneOptions& options);

}  // namespace mgsim::harness
