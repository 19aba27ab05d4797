#include "mgsim/belbic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mgsim/errors.hpp"

namespace mgsim::belbic {

namespace {

void require_finite(std::span<const double> xs, const char* what) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i])) {
            throw ContractViolation(std::string(what) + "[" + std::to_string(i) +
                                    "] is not finite");
        }
    }
}

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw ContractViolation(std::string(what) + " is not finite");
}

void require_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw ContractViolation(std::string(what) + ": expected " + std::to_string(want) +
                                " sensory inputs, got " + std::to_string(got));
    }
}

void check_state(const BelbicState& state) {
    if (state.v.empty() || state.v.size() != state.w.size()) {
        throw ContractViolation("BelbicState: v and w must be non-empty and equally sized");
    }
}

void check_rates(const LearningRates& rates) {
    if (!(rates.k_v >= 0.0) || !(rates.k_w >= 0.0)) {
        throw ContractViolation("learning rates must be non-negative");
    }
    if (rates.weight_limit && !(*rates.weight_limit > 0.0)) {
        throw ContractViolation("weight_limit must be positive");
    }
}

double clamp_weight(double x, const LearningRates& rates) {
    if (!rates.weight_limit) return x;
    return std::clamp(x, -*rates.weight_limit, *rates.weight_limit);
}

double max_input(std::span<const double> si) {
    return *std::max_element(si.begin(), si.end());
}

double sum(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
}

}  // namespace

BelbicState BelbicState::zeros(std::size_t inputs) {
    if (inputs == 0) throw ContractViolation("BelbicState needs at least one sensory input");
    return BelbicState{std::vector<double>(inputs, 0.0), 0.0, std::vector<double>(inputs, 0.0)};
}

std::vector<double> amygdala_outputs(std::span<const double> si, const BelbicState& state) {
    check_state(state);
    require_size(si.size(), state.v.size(), "amygdala_outputs");
    require_finite(si, "si");
    std::vector<double> a(si.size());
    for (std::size_t i = 0; i < si.size(); ++i) a[i] = state.v[i] * si[i];
    return a;
}

double thalamic_output(std::span<const double> si, const BelbicState& state,
                       const LearningRates& rates) {
    if (si.empty()) throw ContractViolation("thalamic_output: empty sensory input");
    require_finite(si, "si");
    if (!rates.thalamus_enabled) return 0.0;
    return state.v_th * max_input(si);
}

std::vector<double> ofc_outputs(std::span<const double> si, const BelbicState& state) {
    check_state(state);
    require_size(si.size(), state.w.size(), "ofc_outputs");
    require_finite(si, "si");
    std::vector<double> oc(si.size());
    for (std::size_t i = 0; i < si.size(); ++i) oc[i] = state.w[i] * si[i];
    return oc;
}

double model_output(std::span<const double> a, double a_th, std::span<const double> oc) {
    if (a.size() != oc.size()) {
        throw ContractViolation("model_output: amygdala and OFC output sizes differ");
    }
    return (sum(a) + a_th) - sum(oc);
}

BelbicState update_amygdala(const BelbicState& state, std::span<const double> si, double es,
                            const LearningRates& rates) {
    check_rates(rates);
    require_finite(es, "es");
    const auto a = amygdala_outputs(si, state);
    const double a_th = thalamic_output(si, state, rates);
    const double reinforcement = std::max(0.0, es - (sum(a) + a_th));

    BelbicState next = state;
    for (std::size_t i = 0; i < si.size(); ++i) {
        next.v[i] = clamp_weight(state.v[i] + rates.k_v * si[i] * reinforcement, rates);
    }
    if (rates.thalamus_enabled) {
        next.v_th = clamp_weight(state.v_th + rates.k_v * max_input(si) * reinforcement, rates);
    }
    return next;
}

BelbicState update_ofc(const BelbicState& state, std::span<const double> si, double mo,
                       double es, const LearningRates& rates) {
    check_rates(rates);
    check_state(state);
    require_size(si.size(), state.w.size(), "update_ofc");
    require_finite(si, "si");
    require_finite(mo, "mo");
    require_finite(es, "es");

    BelbicState next = state;
    const double inhibition = mo - es;
    for (std::size_t i = 0; i < si.size(); ++i) {
        next.w[i] = clamp_weight(state.w[i] + rates.k_w * si[i] * inhibition, rates);
    }
    return next;
}

StepResult step(const BelbicState& state, std::span<const double> si, double es,
                const LearningRates& rates) {
    const auto a = amygdala_outputs(si, state);
    const double a_th = thalamic_output(si, state, rates);
    const auto oc = ofc_outputs(si, state);
    const double mo = model_output(a, a_th, oc);

    BelbicState next = update_amygdala(state, si, es, rates);
    next = update_ofc(next, si, mo, es, rates);
    for (double x : next.v) require_finite(x, "updated amygdala weight");
    for (double x : next.w) require_finite(x, "updated OFC weight");
    require_finite(next.v_th, "updated thalamic weight");
    return {mo, std::move(next)};
}

}  // namespace mgsim::belbic
