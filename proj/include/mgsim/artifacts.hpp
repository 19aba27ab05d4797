#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <json.hpp>

#include "mgsim/harness.hpp"

namespace mgsim::artifacts {

// t, omega_sm1, v_sm1, omega_sm2, v_sm2, u_sec, t_sec; with `internals` the
// learning-unit columns follow (empty on ticks that were not logged).
std::string run_csv(const harness::RunResult& result, bool internals);

nlohmann::json metrics_json(const harness::Metrics& metrics);

nlohmann::json run_summary(const harness::RunResult& result, const std::string& controller,
                           ControllerKind kind, const std::string& config_hash);

struct CompareRow {
    std::string controller;
    ControllerKind kind = ControllerKind::none;
    harness::Metrics metrics;
    std::optional<std::string> fault;
};

// One row per controller in input order, with 1-based ranks by frequency
// and voltage MSE (faulted runs rank last).
std::string compare_csv(std::span<const CompareRow> rows);

std::string sweep_csv(const harness::SweepSpec& spec, std::span<const harness::SweepRow> rows);

// Writes via a temporary file and rename; throws IoError.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mgsim::artifacts
