#pragma once

// Emotional-learning unit: Amygdala, Thalamus and Orbitofrontal Cortex
// nodes with their discrete per-sample weight updates.

#include <optional>
#include <span>
#include <vector>

namespace mgsim::belbic {

struct BelbicState {
    std::vector<double> v;  // Amygdala weights, one per sensory input
    double v_th = 0.0;      // thalamic weight
    std::vector<double> w;  // Orbitofrontal weights

    // All-zero weights for `inputs` sensory channels.
    static BelbicState zeros(std::size_t inputs);

    bool operator==(const BelbicState&) const = default;
};

struct LearningRates {
    double k_v = 0.0;
    double k_w = 0.0;
    bool thalamus_enabled = false;
    // Symmetric band applied to every weight after an update. Empty means
    // the raw update laws are applied unmodified.
    std::optional<double> weight_limit;
};

struct StepResult {
    double mo = 0.0;
    BelbicState state;
};

std::vector<double> amygdala_outputs(std::span<const double> si, const BelbicState& state);

// V_th * max(SI); zero when the thalamic path is disabled.
double thalamic_output(std::span<const double> si, const BelbicState& state,
                       const LearningRates& rates);

std::vector<double> ofc_outputs(std::span<const double> si, const BelbicState& state);

// (sum A_i + A_th) - sum OC_i. The thalamic term is not inhibited.
double model_output(std::span<const double> a, double a_th, std::span<const double> oc);

BelbicState update_amygdala(const BelbicState& state, std::span<const double> si, double es,
                            const LearningRates& rates);

BelbicState update_ofc(const BelbicState& state, std::span<const double> si, double mo,
                       double es, const LearningRates& rates);

// Computes MO from the current weights, then applies the Amygdala update
// followed by the Orbitofrontal update. The returned MO is the pre-update one.
StepResult step(const BelbicState& state, std::span<const double> si, double es,
                const LearningRates& rates);

}  // namespace mgsim::belbic
