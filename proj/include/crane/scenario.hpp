// Scenario execution: single and paired runs, trace and metrics files.
#pragma once

#include "crane/config.hpp"
#include "crane/metrics.hpp"
#include "crane/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace crane::scenario {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAbort = 3;

struct RunOptions {
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    bool paired = false;
    std::optional<bool> adaptive;
    std::optional<sim::ControllerKind> controller;
    std::optional<bool> deadzone;
};

/// Applies command-line overrides and re-validates.
config::ScenarioConfig apply_overrides(config::ScenarioConfig cfg, const RunOptions &opts);

struct Variant {
    std::string label;
    config::ScenarioConfig cfg;
};

/// The pair compared by --paired: adaptive off/on for the adaptive
/// scenarios, angular/Cartesian for the controller comparison. The baseline
/// comes first. Both variants share all seeds.
std::vector<Variant> paired_variants(const config::ScenarioConfig &cfg);

struct VariantResult {
    std::string label;
    sim::SimResult sim;
    metrics::MetricsReport metrics;
};

/// Runs the variants concurrently, one task each. Rethrows the first
/// SimulationAbort in variant order.
std::vector<VariantResult> run_variants(const std::vector<Variant> &variants);

metrics::Window metrics_window(const config::ScenarioConfig &cfg);

void write_metrics(std::ostream &os, const config::ScenarioConfig &cfg,
                   const std::vector<VariantResult> &results);

/// Full CLI `run` flow. Writes nothing on configuration errors or aborts.
/// Returns one of the kExit* codes.
int run_scenario(const RunOptions &opts, std::ostream &out, std::ostream &err);

} // namespace crane::scenario
