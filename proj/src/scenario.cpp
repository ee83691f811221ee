#include "tsched/scenario.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "toml_util.h"

namespace tsched {

double DemandSpec::rate(const SourceDemand& s, double t) const {
    for (const DemandWindow& w : windows) {
        if (t < w.start || t >= w.end) continue;
        double scale = s.scale;
        if (auto it = group_scale.find(s.group); it != group_scale.end()) scale *= it->second;
        return std::min(w.rate * scale, max_rate) / 3600.0;
    }
    return 0.0;
}

std::string DemandSpec::band_at(double t) const {
    for (const DemandWindow& w : windows)
        if (t >= w.start && t < w.end) return w.band;
    return {};
}

namespace {

using NodeView = toml::node_view<const toml::node>;

// Travel heading of a road in the grid template: 0 E, 1 W, 2 S, 3 N.
int grid_heading(const RoadSegment& r, int cols) {
    auto side = [&](std::size_t pos) { return r.name.size() > pos ? r.name[pos] : '?'; };
    if (r.name.rfind("src_", 0) == 0) {
        switch (side(4)) {
            case 'W': return 0;
            case 'E': return 1;
            case 'N': return 2;
            case 'S': return 3;
        }
    }
    if (r.name.rfind("snk_", 0) == 0) {
        switch (side(4)) {
            case 'W': return 1;
            case 'E': return 0;
            case 'N': return 3;
            case 'S': return 2;
        }
    }
    if (r.from && r.to) {
        const int d = r.to->value - r.from->value;
        if (cols > 1 && d == 1) return 0;
        if (cols > 1 && d == -1) return 1;
        if (d == cols) return 2;
        if (d == -cols) return 3;
    }
    throw ScenarioError("cannot infer grid heading of road " + std::to_string(r.id.value));
}

std::map<Movement, double> turn_priors(const toml::table& doc, const NetworkGraph& g) {
    auto demand = doc["demand"];
    std::map<RoadId, std::map<RoadId, double>> explicit_turns;
    if (const auto* arr = demand["turn"].as_array()) {
        for (const auto& n : *arr) {
            const auto* t = n.as_table();
            if (!t) throw ScenarioError("demand.turn entries must be tables");
            RoadId entry{static_cast<int>(detail::require_int((*t)["entry"], "demand.turn.entry"))};
            RoadId exit{static_cast<int>(detail::require_int((*t)["exit"], "demand.turn.exit"))};
            const double p = detail::require_number((*t)["p"], "demand.turn.p");
            if (p < 0.0) throw ScenarioError("turn probability must be >= 0");
            if (!g.has_road(entry) || !g.road(entry).to)
                throw ScenarioError("demand.turn: road " + std::to_string(entry.value) + " is not an entry road");
            const auto& exits = g.exits_of(entry);
            if (std::find(exits.begin(), exits.end(), exit) == exits.end())
                throw ScenarioError("demand.turn: no movement " + std::to_string(entry.value) + " -> " +
                                    std::to_string(exit.value));
            explicit_turns[entry][exit] = p;
        }
    }

    const bool grid = detail::string_or(doc["network"]["template"], "") == "grid";
    const int cols = grid ? static_cast<int>(detail::require_int(doc["network"]["cols"], "network.cols")) : 0;
    const double share[3] = {detail::number_or(demand["straight"], 0.6, "demand.straight"),
                             detail::number_or(demand["left"], 0.2, "demand.left"),
                             detail::number_or(demand["right"], 0.2, "demand.right")};
    if (!grid && (demand["straight"] || demand["left"] || demand["right"]))
        throw ScenarioError("demand.straight/left/right need the grid template; use [[demand.turn]]");
    static constexpr int turns[4][3] = {{0, 3, 2}, {1, 2, 3}, {2, 0, 1}, {3, 1, 0}};

    std::map<Movement, double> w;
    for (const auto& [iid, ic] : g.intersections()) {
        for (RoadId e : ic.entries) {
            auto ex = explicit_turns.find(e);
            double total = 0.0;
            for (RoadId x : g.exits_of(e)) {
                double p = 1.0;
                if (ex != explicit_turns.end()) {
                    auto it = ex->second.find(x);
                    p = it == ex->second.end() ? 0.0 : it->second;
                } else if (grid) {
                    const int hin = grid_heading(g.road(e), cols);
                    const int hout = grid_heading(g.road(x), cols);
                    p = 0.0;
                    for (int k = 0; k < 3; ++k)
                        if (turns[hin][k] == hout) p = share[k];
                }
                w[{e, x}] = p;
                total += p;
            }
            if (!(total > 0.0))
                throw ScenarioError("turn probabilities of road " + std::to_string(e.value) + " sum to zero");
            for (RoadId x : g.exits_of(e)) w[{e, x}] /= total;
        }
    }
    return w;
}

DemandSpec parse_demand(const toml::table& doc, const NetworkGraph& g) {
    DemandSpec d;
    auto demand = doc["demand"];
    d.max_rate = detail::number_or(demand["max_rate"], d.max_rate, "demand.max_rate");
    if (!(d.max_rate >= 0.0)) throw ScenarioError("demand.max_rate must be >= 0");

    if (const auto* arr = demand["window"].as_array()) {
        for (const auto& n : *arr) {
            const auto* t = n.as_table();
            if (!t) throw ScenarioError("demand.window entries must be tables");
            DemandWindow w;
            w.start = detail::require_number((*t)["start"], "demand.window.start");
            w.end = detail::require_number((*t)["end"], "demand.window.end");
            w.rate = detail::require_number((*t)["rate"], "demand.window.rate");
            w.band = detail::string_or((*t)["band"], "");
            if (!(w.start >= 0.0 && w.end > w.start)) throw ScenarioError("demand window needs 0 <= start < end");
            if (!(w.rate >= 0.0)) throw ScenarioError("demand rate must be >= 0");
            d.windows.push_back(std::move(w));
        }
    }
    std::sort(d.windows.begin(), d.windows.end(),
              [](const DemandWindow& a, const DemandWindow& b) { return a.start < b.start; });
    for (std::size_t k = 1; k < d.windows.size(); ++k)
        if (d.windows[k].start < d.windows[k - 1].end) throw ScenarioError("demand windows overlap");

    if (const auto* groups = demand["groups"].as_table()) {
        for (const auto& [k, v] : *groups) {
            auto s = v.value<double>();
            if (!s || *s < 0.0) throw ScenarioError("demand.groups values must be numbers >= 0");
            d.group_scale[std::string(k.str())] = *s;
        }
    }
    if (const auto* arr = demand["source"].as_array()) {
        for (const auto& n : *arr) {
            const auto* t = n.as_table();
            if (!t) throw ScenarioError("demand.source entries must be tables");
            SourceDemand s;
            s.road = RoadId{static_cast<int>(detail::require_int((*t)["road"], "demand.source.road"))};
            s.group = detail::string_or((*t)["group"], "default");
            s.scale = detail::number_or((*t)["scale"], 1.0, "demand.source.scale");
            if (!g.has_road(s.road) || g.road(s.road).from)
                throw ScenarioError("demand.source: road " + std::to_string(s.road.value) + " is not a source road");
            if (!(s.scale >= 0.0)) throw ScenarioError("demand.source.scale must be >= 0");
            d.sources.push_back(std::move(s));
        }
    } else {
        for (const auto& [id, r] : g.roads())
            if (!r.from) d.sources.push_back({id, "default", 1.0});
    }
    d.turn_probability = turn_priors(doc, g);
    return d;
}

ControllerParams parse_controller(const toml::table& doc) {
    ControllerParams c;
    auto t = doc["controller"];
    c.gap_threshold = detail::number_or(t["gap_threshold"], c.gap_threshold, "controller.gap_threshold");
    c.epsilon = detail::number_or(t["epsilon"], c.epsilon, "controller.epsilon");
    c.alpha = detail::number_or(t["alpha"], c.alpha, "controller.alpha");
    c.flow_window = detail::number_or(t["flow_window"], c.flow_window, "controller.flow_window");
    c.horizon_cap = detail::number_or(t["horizon_cap"], c.horizon_cap, "controller.horizon_cap");
    c.cycle_min = detail::number_or(t["cycle_min"], c.cycle_min, "controller.cycle_min");
    c.cycle_max = detail::number_or(t["cycle_max"], c.cycle_max, "controller.cycle_max");
    c.fixed_green = detail::number_or(t["fixed_green"], c.fixed_green, "controller.fixed_green");
    if (!(c.gap_threshold > 0.0)) throw ScenarioError("controller.gap_threshold must be > 0");
    if (!(c.epsilon >= 0.0)) throw ScenarioError("controller.epsilon must be >= 0");
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ScenarioError("controller.alpha must be in (0, 1]");
    if (!(c.flow_window >= 1.0)) throw ScenarioError("controller.flow_window must be >= 1");
    if (!(c.horizon_cap > 0.0)) throw ScenarioError("controller.horizon_cap must be > 0");
    if (!(c.cycle_min > 0.0 && c.cycle_min <= c.cycle_max)) throw ScenarioError("need 0 < cycle_min <= cycle_max");
    if (!(c.fixed_green > 0.0)) throw ScenarioError("controller.fixed_green must be > 0");
    return c;
}

RunParams parse_run(const toml::table& doc) {
    RunParams r;
    auto t = doc["run"];
    r.duration = detail::number_or(t["duration"], r.duration, "run.duration");
    r.warmup = detail::number_or(t["warmup"], r.warmup, "run.warmup");
    r.cooldown = detail::number_or(t["cooldown"], r.cooldown, "run.cooldown");
    const long long seed = detail::int_or(t["seed"], 1, "run.seed");
    if (seed < 0) throw ScenarioError("run.seed must be >= 0");
    r.seed = static_cast<std::uint64_t>(seed);
    if (!(r.duration > 0.0 && r.warmup >= 0.0 && r.duration > r.warmup))
        throw ScenarioError("run needs duration > warmup >= 0");
    if (!(r.cooldown >= 0.0)) throw ScenarioError("run.cooldown must be >= 0");
    return r;
}

}  // namespace

Scenario load_scenario(std::string_view text) {
    const toml::table doc = detail::parse_toml(text);
    Scenario s;
    s.network = detail::load_network_table(doc);
    s.name = s.network.name();
    s.demand = parse_demand(doc, s.network);
    s.controller = parse_controller(doc);
    s.run = parse_run(doc);
    return s;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    Scenario s = load_scenario(read_text_file(path));
    if (s.name.empty()) s.name = path.stem().string();
    return s;
}

}  // namespace tsched
