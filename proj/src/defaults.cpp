// Built-in configuration. The pid, nn and belbic gain sets below were
// produced by `mgsim tune --config configs/tune.yaml --controller <name>`
// (mean objective over the K_G sweep variants) and are the committed
// reference configuration.

#include "mgsim/config.hpp"

namespace mgsim::config {

ControllerConfig default_controller(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::none:
            return NullConfig{};
        case ControllerKind::pid: {
            PidConfig c;
            c.voltage = {3.263275665434962, 41.88411096794087, 0.004154191209135196};
            c.frequency = {500.0, 198.09480381605422, 10.0};
            return c;
        }
        case ControllerKind::nn: {
            NnConfig c;
            c.voltage.learning_rate = 24.097690838139414;
            c.voltage.input_scale = {1000.0, 5.192063247359182,
                                     0.06847154013583474};
            c.voltage.output_scale = 0.03436513559138813;
            c.frequency.learning_rate = 0.08069540345278294;
            c.frequency.input_scale = {1000.0, 0.6819800796252982,
                                       299.18005416161867};
            c.frequency.output_scale = 100.0;
            return c;
        }
        case ControllerKind::belbic: {
            BelbicConfig c;
            c.voltage.gains = {0.26829930062318785, 8.023481672283237, 0.0038245335466628814, 5.436902720753784,
                               9.291500837663536, 76.0439943049809, 0.1576724317362999};
            c.voltage.k_v = 86.45270559141011;
            c.voltage.k_w = 148.9217757950805;
            c.frequency.gains = {55.543788085647975, 0.618258681772284, 1.1384628276670212, 0.4070908261758176,
                                 0.13700920031670993, 1.809320527161477, 644.9847294722503};
            c.frequency.k_v = 421696.50342858053;
            c.frequency.k_w = 0.01669768446645562;
            return c;
        }
    }
    return NullConfig{};
}

Config defaults() {
    Config c;
    c.seed = 1;
    c.output_dir = "out";
    for (auto kind : {ControllerKind::none, ControllerKind::pid, ControllerKind::nn,
                      ControllerKind::belbic}) {
        c.controllers.push_back({std::string(to_string(kind)), default_controller(kind)});
    }
    SweepBlock sweep;
    sweep.spec.param = "K_G";
    sweep.spec.multipliers = {0.5, 1.0, 2.0};
    sweep.spec.targets = harness::SweepTargets::sm1;
    sweep.controllers = {"pid", "nn", "belbic"};
    c.sweep = sweep;

    TuneBlock tune;
    tune.controller = "belbic";
    tune.budget = 3000;
    tune.random_samples = 400;
    tune.lambda = 1e-7;
    tune.across_sweep = true;
    c.tune = tune;
    return c;
}

}  // namespace mgsim::config
