// Command-line front end: run, experiment, validate, oracle.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "tsched/experiment.h"
#include "tsched/oracle/brute_force.h"

namespace fs = std::filesystem;
using namespace tsched;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kRuntimeFailure = 2;

int cmd_run(const std::string& scenario_path, const std::string& controller, std::uint64_t seed,
            std::optional<double> duration, const std::string& out, bool traces, bool zero_feedback) {
    const Scenario s = load_scenario_file(scenario_path);
    const auto kind = parse_controller_kind(controller);
    if (!kind) throw ScenarioError("unknown controller '" + controller + "'");
    RunOptions opt;
    opt.duration = duration;
    opt.debug_traces = traces;
    opt.zero_feedback = zero_feedback;
    const RunResult r = run_scenario(s, *kind, seed, opt);
    write_run_outputs(r, out);
    const Aggregate& a = r.metrics.aggregate;
    std::printf("%s seed %llu: %zu vehicles, mean delay %.2f s (std %.2f), %.3f stops/veh\n", controller.c_str(),
                static_cast<unsigned long long>(seed), a.vehicles, a.mean_delay, a.std_delay, a.mean_stops);
    if (r.invariants.total() > 0) {
        std::fprintf(stderr, "%zu invariant violations\n", r.invariants.total());
        for (const auto& s : r.invariants.samples()) std::fprintf(stderr, "  %s\n", s.c_str());
        return kRuntimeFailure;
    }
    if (r.metrics.deadlock) {
        std::fprintf(stderr, "run aborted: no vehicle moved for too long (deadlock)\n");
        return kRuntimeFailure;
    }
    return kOk;
}

int cmd_experiment(const std::string& path, const std::string& out) {
    ExperimentSpec spec = load_experiment(read_text_file(path), fs::path(path).parent_path());
    if (!out.empty()) spec.out = out;
    bool failed = false;
    const ExperimentReport report = run_experiment(spec, [&](const CellResult& c) {
        if (!c.error.empty() || c.invariant_violations > 0) failed = true;
        std::printf("%-12s %-15s seed %-4llu ", c.step.c_str(), to_string(c.controller).c_str(),
                    static_cast<unsigned long long>(c.seed));
        if (c.metrics)
            std::printf("mean %.2f s, stops %.3f\n", c.metrics->aggregate.mean_delay, c.metrics->aggregate.mean_stops);
        else
            std::printf("FAILED: %s\n", c.error.c_str());
        std::fflush(stdout);
    });
    for (const PooledResult& p : report.pooled)
        std::printf("pooled %-12s %-15s mean %.2f s, std %.2f, stops %.3f\n", p.step.c_str(),
                    to_string(p.controller).c_str(), p.aggregate.mean_delay, p.aggregate.std_delay,
                    p.aggregate.mean_stops);
    return failed ? kRuntimeFailure : kOk;
}

int cmd_validate(const std::string& path) {
    const Scenario s = load_scenario_file(path);
    std::size_t sources = s.demand.sources.size();
    std::printf("%s: %zu intersections, %zu roads, %zu sources\n", s.name.c_str(),
                s.network.intersections().size(), s.network.roads().size(), sources);
    return kOk;
}

int cmd_oracle(std::size_t cases, std::uint64_t seed) {
    const oracle::SuiteResult r = oracle::run_oracle_suite(cases, seed);
    for (const auto& f : r.failures) std::fprintf(stderr, "%s\n", f.c_str());
    std::printf("%zu cases, %zu mismatches\n", r.cases, r.mismatches);
    return r.mismatches == 0 ? kOk : kRuntimeFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Schedule-driven traffic signal control simulator"};
    app.require_subcommand(1);

    std::string scenario, controller = "dcc", out = "out", experiment_path;
    std::uint64_t seed = 1;
    std::optional<double> duration;
    bool traces = false, zero_feedback = false;
    std::size_t cases = 500;

    auto* run = app.add_subcommand("run", "Simulate one scenario with one controller and seed");
    run->add_option("--scenario", scenario, "Scenario file")->required();
    run->add_option("--controller", controller, "fixed_time | cycle_adaptive | baseline_sd | dcc | dcc_bc");
    run->add_option("--seed", seed, "Random seed");
    run->add_option("--duration", duration, "Demand duration in seconds (overrides the scenario)");
    run->add_option("--out", out, "Output directory");
    run->add_flag("--debug-traces", traces, "Also write schedule, message and command traces");
    run->add_flag("--zero-feedback", zero_feedback, "Schedule DCC variants with congestion feedback forced to 0");

    auto* exp = app.add_subcommand("experiment", "Run an experiment file (controllers x seeds x steps)");
    exp->add_option("spec", experiment_path, "Experiment file")->required();
    exp->add_option("--out", out, "Output directory (overrides the file)");

    auto* val = app.add_subcommand("validate", "Check a scenario file");
    val->add_option("--scenario,scenario", scenario, "Scenario file")->required();

    auto* orc = app.add_subcommand("oracle", "Cross-check the scheduler against exhaustive search");
    orc->add_option("--cases", cases, "Number of random instances");
    orc->add_option("--seed", seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*run) return cmd_run(scenario, controller, seed, duration, out, traces, zero_feedback);
        if (*exp) return cmd_experiment(experiment_path, exp->count("--out") ? out : std::string());
        if (*val) return cmd_validate(scenario);
        if (*orc) return cmd_oracle(cases, seed);
    } catch (const ScenarioError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInputError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failure: %s\n", e.what());
        return kRuntimeFailure;
    }
    return kInputError;
}
