#pragma once

// Scenario/controller/sweep/tune configuration, read from and written to a
// nested YAML document. Unknown keys are rejected with their line number.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mgsim/harness.hpp"

namespace mgsim::config {

struct SweepBlock {
    harness::SweepSpec spec;
    std::vector<std::string> controllers;  // names from the controllers block
    bool operator==(const SweepBlock&) const = default;
};

struct TuneBlock {
    std::string controller;  // name from the controllers block
    std::size_t budget = 200;
    std::size_t random_samples = 64;
    double w_freq = 1.0;
    double w_volt = 1.0;
    double lambda = 0.01;
    std::map<std::string, harness::Bound> bounds;
    // Score candidates over the sweep block's plant variants.
    bool across_sweep = false;
    bool operator==(const TuneBlock&) const = default;
};

struct Config {
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    harness::Scenario scenario;  // scenario.controller is filled per run
    std::vector<harness::NamedController> controllers;
    std::optional<SweepBlock> sweep;
    std::optional<TuneBlock> tune;

    const harness::NamedController* find_controller(std::string_view name) const;
    // Scenario with the named controller installed and its seed derived.
    harness::Scenario scenario_for(const harness::NamedController& controller) const;
    void validate() const;
};

// Built-in defaults, including the committed tuned gain sets.
Config defaults();
ControllerConfig default_controller(ControllerKind kind);

// Parses a YAML document; omitted keys take their defaults. Throws
// ConfigError naming the offending key and line.
Config parse(std::string_view yaml_text);
Config load_file(const std::string& path);

// Canonical YAML rendering; parse(emit(c)) reproduces c.
std::string emit(const Config& config);

// FNV-1a hash of the canonical rendering without output_dir.
std::uint64_t config_hash(const Config& config);
std::string hash_hex(std::uint64_t hash);

// Shortest round-trip decimal rendering.
std::string format_double(double x);

}  // namespace mgsim::config
