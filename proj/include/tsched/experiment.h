#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsched/controllers.h"
#include "tsched/metrics.h"

namespace tsched {

struct RunOptions {
    std::optional<double> duration;  // overrides the scenario's run.duration
    bool debug_traces = false;
    bool zero_feedback = false;
    bool check_invariants = true;
};

struct RunResult {
    MetricsBundle metrics;
    InvariantReport invariants;
    std::vector<std::string> command_trace;
    std::map<std::string, std::vector<std::string>> traces;
    std::size_t bottleneck_ticks = 0;
};

/// Runs demand over [0, duration), then drains without demand for up to
/// run.cooldown seconds. Stops early on deadlock (flagged in the metrics).
RunResult run_scenario(const Scenario& scenario, ControllerKind kind, std::uint64_t seed,
                       const RunOptions& options = {});

/// vehicles.csv, aggregate.csv, cdf.csv and, with traces, one CSV per trace.
void write_run_outputs(const RunResult& result, const std::filesystem::path& dir);

struct SweepStep {
    std::string label;
    std::map<std::string, double> group_scale;
};

struct ExperimentSpec {
    std::filesystem::path scenario;
    std::vector<ControllerKind> controllers;
    std::vector<std::uint64_t> seeds;
    std::optional<double> duration;
    std::filesystem::path out;
    std::vector<SweepStep> steps;  // one unnamed step when empty
};

/// Parses an experiment file; relative paths resolve against `base_dir`.
ExperimentSpec load_experiment(std::string_view text, const std::filesystem::path& base_dir);

struct CellResult {
    std::string step;
    ControllerKind controller;
    std::uint64_t seed = 0;
    std::optional<MetricsBundle> metrics;
    std::size_t invariant_violations = 0;
    std::string error;
};

struct PooledResult {
    std::string step;
    ControllerKind controller;
    Aggregate aggregate;
    std::map<std::string, Aggregate> by_band;
    std::vector<VehicleMetric> vehicles;
};

struct ExperimentReport {
    std::vector<CellResult> cells;
    std::vector<PooledResult> pooled;  // per (step, controller), in spec order
};

using ProgressFn = std::function<void(const CellResult&)>;

/// Runs every (step, controller, seed) cell; a failing cell is recorded and
/// the rest continue. Writes reports under spec.out when it is non-empty.
ExperimentReport run_experiment(const ExperimentSpec& spec, const ProgressFn& progress = {});

/// Pooled result for (step, controller), or nullptr.
const PooledResult* find_pooled(const ExperimentReport& r, const std::string& step, ControllerKind c);

}  // namespace tsched
