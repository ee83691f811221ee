#include "tsched/experiment.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "toml_util.h"

namespace tsched {

RunResult run_scenario(const Scenario& scenario, ControllerKind kind, std::uint64_t seed, const RunOptions& options) {
    Scenario s = scenario;
    if (options.duration) {
        if (!(*options.duration > s.run.warmup)) throw ScenarioError("duration must exceed the warmup");
        s.run.duration = *options.duration;
    }
    s.run.seed = seed;
    SimOptions so;
    so.check_invariants = options.check_invariants;
    Simulator sim(s, seed, so);
    ScheduleOptions sched;
    sched.zero_feedback = options.zero_feedback;
    sched.debug_traces = options.debug_traces;
    auto controller = make_controller(kind, s, sched);

    const auto demand_ticks = static_cast<long>(std::ceil(s.run.duration));
    const auto last_tick = demand_ticks + static_cast<long>(std::ceil(s.run.cooldown));
    while (sim.tick() < demand_ticks && !sim.deadlocked()) sim.step(*controller);
    sim.set_demand_enabled(false);
    while (sim.tick() < last_tick && sim.vehicles_in_network() > 0 && !sim.deadlocked()) sim.step(*controller);

    RunResult r;
    r.metrics = collect_metrics(sim, s.run, controller->name(), seed);
    r.invariants = sim.invariants();
    controller->check(r.invariants);
    r.command_trace = sim.command_trace();
    if (options.debug_traces) {
        r.traces = controller->traces();
        auto& cmd = r.traces["command_trace"];
        cmd.push_back("tick,intersection,phase");
        cmd.insert(cmd.end(), r.command_trace.begin(), r.command_trace.end());
    }
    if (auto* sd = dynamic_cast<ScheduleDrivenController*>(controller.get())) r.bottleneck_ticks = sd->bottleneck_ticks();
    return r;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string s;
    for (const auto& l : lines) s += l + "\n";
    return s;
}

std::string fmt(double x, const char* spec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

std::string cell_dir(const std::string& step) { return step.empty() ? std::string("default") : step; }

}  // namespace

void write_run_outputs(const RunResult& result, const std::filesystem::path& dir) {
    const MetricsBundle& m = result.metrics;
    write_file(dir / "vehicles.csv", vehicles_csv(m));
    write_file(dir / "aggregate.csv",
               aggregate_csv_header() + aggregate_csv_row(m.controller, std::to_string(m.seed), m.aggregate));
    write_file(dir / "cdf.csv", cdf_csv(m.vehicles));
    for (const auto& [stem, lines] : result.traces) write_file(dir / (stem + ".csv"), join_lines(lines));
}

ExperimentSpec load_experiment(std::string_view text, const std::filesystem::path& base_dir) {
    const toml::table doc = detail::parse_toml(text);
    ExperimentSpec spec;
    const std::string scenario = detail::string_or(doc["scenario"], "");
    if (scenario.empty()) throw ScenarioError("experiment needs 'scenario'");
    spec.scenario = base_dir / scenario;
    if (const auto* arr = doc["controllers"].as_array()) {
        for (const auto& n : *arr) {
            auto name = n.value<std::string>();
            auto kind = name ? parse_controller_kind(*name) : std::nullopt;
            if (!kind) throw ScenarioError("unknown controller in experiment");
            spec.controllers.push_back(*kind);
        }
    }
    if (spec.controllers.empty()) throw ScenarioError("experiment needs at least one controller");
    if (const auto* arr = doc["seeds"].as_array()) {
        for (const auto& n : *arr) {
            auto v = n.value<long long>();
            if (!v || *v < 0) throw ScenarioError("seeds must be non-negative integers");
            spec.seeds.push_back(static_cast<std::uint64_t>(*v));
        }
    } else {
        const long long count = detail::int_or(doc["seed_count"], 10, "seed_count");
        const long long first = detail::int_or(doc["first_seed"], 1, "first_seed");
        for (long long k = 0; k < count; ++k) spec.seeds.push_back(static_cast<std::uint64_t>(first + k));
    }
    if (spec.seeds.empty()) throw ScenarioError("experiment needs at least one seed");
    if (auto d = detail::opt_number(doc["duration"])) spec.duration = *d;
    const std::string out = detail::string_or(doc["out"], "");
    if (!out.empty()) spec.out = base_dir / out;
    if (const auto* arr = doc["step"].as_array()) {
        for (const auto& n : *arr) {
            const auto* t = n.as_table();
            if (!t) throw ScenarioError("step entries must be tables");
            SweepStep s;
            s.label = detail::string_or((*t)["label"], "");
            if (s.label.empty()) throw ScenarioError("step needs a label");
            if (const auto* groups = (*t)["groups"].as_table()) {
                for (const auto& [k, v] : *groups) {
                    auto x = v.value<double>();
                    if (!x || *x < 0.0) throw ScenarioError("step group scales must be numbers >= 0");
                    s.group_scale[std::string(k.str())] = *x;
                }
            }
            spec.steps.push_back(std::move(s));
        }
    }
    return spec;
}

const PooledResult* find_pooled(const ExperimentReport& r, const std::string& step, ControllerKind c) {
    for (const PooledResult& p : r.pooled)
        if (p.step == step && p.controller == c) return &p;
    return nullptr;
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const ProgressFn& progress) {
    const Scenario base = load_scenario_file(spec.scenario);
    std::vector<SweepStep> steps = spec.steps;
    if (steps.empty()) steps.push_back({});
    RunOptions options;
    options.duration = spec.duration;

    ExperimentReport report;
    for (const SweepStep& step : steps) {
        Scenario s = base;
        for (const auto& [group, scale] : step.group_scale) s.demand.group_scale[group] = scale;
        for (ControllerKind kind : spec.controllers) {
            PooledResult pooled{step.label, kind, {}, {}, {}};
            for (std::uint64_t seed : spec.seeds) {
                CellResult cell{step.label, kind, seed, std::nullopt, 0, {}};
                try {
                    RunResult r = run_scenario(s, kind, seed, options);
                    cell.invariant_violations = r.invariants.total();
                    if (!spec.out.empty())
                        write_run_outputs(r, spec.out / "runs" / cell_dir(step.label) /
                                                 (to_string(kind) + "_seed" + std::to_string(seed)));
                    pooled.vehicles.insert(pooled.vehicles.end(), r.metrics.vehicles.begin(),
                                           r.metrics.vehicles.end());
                    cell.metrics = std::move(r.metrics);
                } catch (const std::exception& e) {
                    cell.error = e.what();
                }
                if (progress) progress(cell);
                report.cells.push_back(std::move(cell));
            }
            pooled.aggregate = aggregate(pooled.vehicles);
            std::map<std::string, std::vector<VehicleMetric>> bands;
            for (const VehicleMetric& v : pooled.vehicles)
                if (!v.band.empty()) bands[v.band].push_back(v);
            for (const auto& [b, vs] : bands) pooled.by_band[b] = aggregate(vs);
            report.pooled.push_back(std::move(pooled));
        }
    }

    if (spec.out.empty()) return report;

    std::string per_run = "step,controller,seed,vehicles,mean,std,stops,p50,p90,deadlock,invariant_violations,error\n";
    for (const CellResult& c : report.cells) {
        per_run += c.step + "," + to_string(c.controller) + "," + std::to_string(c.seed) + ",";
        if (c.metrics) {
            const Aggregate& a = c.metrics->aggregate;
            per_run += std::to_string(a.vehicles) + "," + fmt(a.mean_delay, "%.4f") + "," +
                       fmt(a.std_delay, "%.4f") + "," + fmt(a.mean_stops, "%.4f") + "," + fmt(a.p50, "%.1f") + "," +
                       fmt(a.p90, "%.1f") + "," + (c.metrics->deadlock ? "1" : "0");
        } else {
            per_run += ",,,,,,";
        }
        std::string err = c.error;
        for (char& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        per_run += "," + std::to_string(c.invariant_violations) + "," + err + "\n";
    }
    write_file(spec.out / "per_run.csv", per_run);

    std::string pooled_csv = "step,controller,vehicles,mean,std,stops,p50,p90\n";
    std::string bands_csv = "step,controller,band,vehicles,mean,std,stops\n";
    for (const PooledResult& p : report.pooled) {
        const Aggregate& a = p.aggregate;
        pooled_csv += p.step + "," + to_string(p.controller) + "," + std::to_string(a.vehicles) + "," +
                      fmt(a.mean_delay, "%.4f") + "," + fmt(a.std_delay, "%.4f") + "," + fmt(a.mean_stops, "%.4f") +
                      "," + fmt(a.p50, "%.1f") + "," + fmt(a.p90, "%.1f") + "\n";
        for (const auto& [band, b] : p.by_band)
            bands_csv += p.step + "," + to_string(p.controller) + "," + band + "," + std::to_string(b.vehicles) +
                         "," + fmt(b.mean_delay, "%.4f") + "," + fmt(b.std_delay, "%.4f") + "," +
                         fmt(b.mean_stops, "%.4f") + "\n";
        write_file(spec.out / "cdf" / (cell_dir(p.step) + "_" + to_string(p.controller) + ".csv"),
                   cdf_csv(p.vehicles));
    }
    write_file(spec.out / "pooled.csv", pooled_csv);
    write_file(spec.out / "bands.csv", bands_csv);

    // Side-by-side table per step: delay statistics and change against the first controller.
    std::string cmp = "step,controller,mean,std,stops,delay_change_pct,stops_change_pct\n";
    for (const SweepStep& step : steps) {
        const PooledResult* ref = find_pooled(report, step.label, spec.controllers.front());
        for (ControllerKind kind : spec.controllers) {
            const PooledResult* p = find_pooled(report, step.label, kind);
            const Aggregate& a = p->aggregate;
            auto change = [](double x, double base) {
                return base > 0.0 ? fmt(100.0 * (x - base) / base, "%.2f") : std::string();
            };
            cmp += step.label + "," + to_string(kind) + "," + fmt(a.mean_delay, "%.4f") + "," +
                   fmt(a.std_delay, "%.4f") + "," + fmt(a.mean_stops, "%.4f") + "," +
                   change(a.mean_delay, ref->aggregate.mean_delay) + "," +
                   change(a.mean_stops, ref->aggregate.mean_stops) + "\n";
        }
    }
    write_file(spec.out / "comparison.csv", cmp);
    return report;
}

}  // namespace tsched
