#include "tsched/network.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "toml_util.h"

namespace tsched {

namespace {

std::string id_str(RoadId r) { return "road " + std::to_string(r.value); }
std::string id_str(IntersectionId i) { return "intersection " + std::to_string(i.value); }

}  // namespace

NetworkGraph NetworkGraph::build(std::vector<IntersectionConfig> intersections,
                                 std::vector<RoadSegment> roads,
                                 std::vector<MovementConflict> conflicts,
                                 std::string name) {
    if (intersections.empty()) throw ScenarioError("network has no intersections");

    NetworkGraph g;
    g.name_ = std::move(name);
    g.conflicts_ = std::move(conflicts);

    for (auto& ic : intersections) {
        if (ic.id.value <= 0) throw ScenarioError("intersection ids must be positive");
        ic.entries.clear();
        ic.exits.clear();
        if (!g.intersections_.emplace(ic.id, std::move(ic)).second)
            throw ScenarioError("duplicate " + id_str(ic.id));
    }

    for (auto& r : roads) {
        if (r.id.value <= 0) throw ScenarioError("road ids must be positive");
        if (!(r.length > 0.0)) throw ScenarioError(id_str(r.id) + ": length must be > 0");
        if (r.lanes < 1) throw ScenarioError(id_str(r.id) + ": lanes must be >= 1");
        if (r.capacity < 1) throw ScenarioError(id_str(r.id) + ": capacity must be >= 1");
        if (!(r.saturation_flow > 0.0)) throw ScenarioError(id_str(r.id) + ": saturation_flow must be > 0");
        if (!(r.free_flow_speed > 0.0)) throw ScenarioError(id_str(r.id) + ": free_flow_speed must be > 0");
        if (!r.from && !r.to) throw ScenarioError(id_str(r.id) + ": road connects two external nodes");
        if (r.from && r.to && *r.from == *r.to) throw ScenarioError(id_str(r.id) + ": self loop");
        if (r.from && !g.intersections_.contains(*r.from))
            throw ScenarioError(id_str(r.id) + ": dangling from " + id_str(*r.from));
        if (r.to && !g.intersections_.contains(*r.to))
            throw ScenarioError(id_str(r.id) + ": dangling to " + id_str(*r.to));
        if (r.from && r.to && !g.links_.emplace(std::pair{*r.from, *r.to}, r.id).second)
            throw ScenarioError(id_str(r.id) + ": parallel link between the same intersections");
        if (r.to) g.intersections_.at(*r.to).entries.push_back(r.id);
        if (r.from) g.intersections_.at(*r.from).exits.push_back(r.id);
        RoadId id = r.id;
        if (!g.roads_.emplace(id, std::move(r)).second) throw ScenarioError("duplicate " + id_str(id));
    }

    double total_entry_capacity = 0.0;
    for (auto& [iid, ic] : g.intersections_) {
        std::sort(ic.entries.begin(), ic.entries.end());
        std::sort(ic.exits.begin(), ic.exits.end());
        if (ic.entries.empty()) throw ScenarioError(id_str(iid) + " has no entry roads");
        if (ic.phases.empty()) throw ScenarioError(id_str(iid) + " has no phases");
        if (!(ic.min_green > 0.0)) throw ScenarioError(id_str(iid) + ": min_green must be > 0");
        if (ic.min_green > ic.max_green) throw ScenarioError(id_str(iid) + ": min_green > max_green");
        if (ic.changeover < 0.0) throw ScenarioError(id_str(iid) + ": changeover must be >= 0");

        for (std::size_t k = 0; k < ic.phases.size(); ++k) {
            Phase& p = ic.phases[k];
            p.id = PhaseId{static_cast<int>(k) + 1};
            if (p.movements.empty()) throw ScenarioError(id_str(iid) + ": empty phase " + std::to_string(k + 1));
            std::sort(p.movements.begin(), p.movements.end());
            p.movements.erase(std::unique(p.movements.begin(), p.movements.end()), p.movements.end());
            for (const Movement& m : p.movements) {
                if (!std::binary_search(ic.entries.begin(), ic.entries.end(), m.entry))
                    throw ScenarioError(id_str(iid) + ": phase movement from non-entry " + id_str(m.entry));
                if (!std::binary_search(ic.exits.begin(), ic.exits.end(), m.exit))
                    throw ScenarioError(id_str(iid) + ": phase movement to non-exit " + id_str(m.exit));
                auto [it, fresh] = g.entry_phase_.emplace(m.entry, p.id);
                if (!fresh && it->second != p.id)
                    throw ScenarioError(id_str(m.entry) + " is served by more than one phase");
                auto& ex = g.entry_exits_[m.entry];
                if (std::find(ex.begin(), ex.end(), m.exit) == ex.end()) ex.push_back(m.exit);
            }
            for (const auto& [a, b] : g.conflicts_) {
                bool has_a = std::binary_search(p.movements.begin(), p.movements.end(), a);
                bool has_b = std::binary_search(p.movements.begin(), p.movements.end(), b);
                if (has_a && has_b)
                    throw ScenarioError(id_str(iid) + ": conflicting movements share phase " + std::to_string(k + 1));
            }
        }
        for (RoadId e : ic.entries) {
            if (!g.entry_phase_.contains(e))
                throw ScenarioError(id_str(iid) + ": " + id_str(e) + " is not covered by any phase");
            std::sort(g.entry_exits_[e].begin(), g.entry_exits_[e].end());
        }
        for (RoadId e : ic.entries) total_entry_capacity += g.roads_.at(e).capacity;
    }

    const double mean_capacity = total_entry_capacity / static_cast<double>(g.intersections_.size());
    for (auto& [iid, ic] : g.intersections_) {
        if (ic.bottleneck_weight > 0.0) continue;
        double own = 0.0;
        for (RoadId e : ic.entries) own += g.roads_.at(e).capacity;
        ic.bottleneck_weight = own / mean_capacity;
    }
    return g;
}

const IntersectionConfig& NetworkGraph::intersection(IntersectionId id) const {
    auto it = intersections_.find(id);
    if (it == intersections_.end()) throw std::out_of_range("unknown " + id_str(id));
    return it->second;
}

const RoadSegment& NetworkGraph::road(RoadId id) const {
    auto it = roads_.find(id);
    if (it == roads_.end()) throw std::out_of_range("unknown " + id_str(id));
    return it->second;
}

PhaseId NetworkGraph::phase_of_entry(RoadId entry) const {
    auto it = entry_phase_.find(entry);
    if (it == entry_phase_.end()) throw std::out_of_range(id_str(entry) + " is not an intersection entry");
    return it->second;
}

const std::vector<RoadId>& NetworkGraph::exits_of(RoadId entry) const {
    static const std::vector<RoadId> none;
    auto it = entry_exits_.find(entry);
    return it == entry_exits_.end() ? none : it->second;
}

std::optional<RoadId> NetworkGraph::road_between(IntersectionId i, IntersectionId j) const {
    auto it = links_.find({i, j});
    if (it == links_.end()) return std::nullopt;
    return it->second;
}

std::optional<PhaseId> NetworkGraph::phase_of_neighbor(IntersectionId i, IntersectionId j) const {
    auto r = road_between(i, j);
    if (!r) return std::nullopt;
    return phase_of_entry(*r);
}

bool NetworkGraph::operator==(const NetworkGraph& o) const {
    auto same_road = [](const RoadSegment& a, const RoadSegment& b) {
        return a.id == b.id && a.from == b.from && a.to == b.to && a.length == b.length && a.lanes == b.lanes &&
               a.free_flow_speed == b.free_flow_speed && a.capacity == b.capacity &&
               a.saturation_flow == b.saturation_flow && a.name == b.name;
    };
    auto same_node = [](const IntersectionConfig& a, const IntersectionConfig& b) {
        if (a.id != b.id || a.name != b.name || a.changeover != b.changeover || a.min_green != b.min_green ||
            a.max_green != b.max_green || a.bottleneck_weight != b.bottleneck_weight || a.entries != b.entries ||
            a.exits != b.exits || a.phases.size() != b.phases.size())
            return false;
        for (std::size_t k = 0; k < a.phases.size(); ++k)
            if (a.phases[k].id != b.phases[k].id || a.phases[k].movements != b.phases[k].movements) return false;
        return true;
    };
    if (name_ != o.name_ || conflicts_ != o.conflicts_ || roads_.size() != o.roads_.size() ||
        intersections_.size() != o.intersections_.size())
        return false;
    for (auto a = roads_.begin(), b = o.roads_.begin(); a != roads_.end(); ++a, ++b)
        if (!same_road(a->second, b->second)) return false;
    for (auto a = intersections_.begin(), b = o.intersections_.begin(); a != intersections_.end(); ++a, ++b)
        if (!same_node(a->second, b->second)) return false;
    return true;
}

std::vector<Neighbor> neighbors(const NetworkGraph& g, IntersectionId i) {
    const IntersectionConfig& ic = g.intersection(i);
    std::vector<Neighbor> out;
    for (RoadId e : ic.exits)
        if (auto to = g.road(e).to) out.push_back({*to, Direction::downstream, e});
    for (RoadId e : ic.entries)
        if (auto from = g.road(e).from) out.push_back({*from, Direction::upstream, e});
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Scenario parsing

namespace {

using toml::node_view;

std::optional<IntersectionId> parse_endpoint(const node_view<const toml::node>& n, std::string_view external,
                                             RoadId road) {
    if (auto s = n.value<std::string>()) {
        if (*s == external) return std::nullopt;
        throw ScenarioError(id_str(road) + ": endpoint must be an intersection id or \"" + std::string(external) +
                            "\"");
    }
    if (auto v = n.value<long long>()) return IntersectionId{static_cast<int>(*v)};
    throw ScenarioError(id_str(road) + ": missing endpoint");
}

Movement parse_movement(const toml::node& n) {
    const auto* arr = n.as_array();
    if (!arr || arr->size() != 2) throw ScenarioError("movement must be [entry, exit]");
    auto e = (*arr)[0].value<long long>();
    auto x = (*arr)[1].value<long long>();
    if (!e || !x) throw ScenarioError("movement must be [entry, exit]");
    return {RoadId{static_cast<int>(*e)}, RoadId{static_cast<int>(*x)}};
}

struct SignalDefaults {
    double changeover = 5.0;
    double min_green = 5.0;
    double max_green = 60.0;
};

SignalDefaults parse_signal_defaults(const toml::table& doc) {
    SignalDefaults d;
    auto s = doc["signals"];
    d.changeover = detail::number_or(s["changeover"], d.changeover, "signals.changeover");
    d.min_green = detail::number_or(s["min_green"], d.min_green, "signals.min_green");
    d.max_green = detail::number_or(s["max_green"], d.max_green, "signals.max_green");
    return d;
}

RoadSegment parse_road(const toml::table& t, double default_speed, double default_sat_per_lane,
                       double default_spacing) {
    RoadSegment r;
    r.id = RoadId{static_cast<int>(detail::require_int(t["id"], "road.id"))};
    r.from = parse_endpoint(t["from"], "source", r.id);
    r.to = parse_endpoint(t["to"], "sink", r.id);
    r.length = detail::require_number(t["length"], "road.length");
    r.lanes = static_cast<int>(detail::int_or(t["lanes"], 1, "road.lanes"));
    r.free_flow_speed = detail::number_or(t["speed"], default_speed, "road.speed");
    double default_capacity = std::max(1.0, std::floor(r.length / default_spacing * r.lanes));
    r.capacity = static_cast<int>(
        detail::int_or(t["capacity"], static_cast<long long>(default_capacity),
                       "road.capacity"));
    r.saturation_flow = detail::number_or(t["saturation_flow"],
                                          default_sat_per_lane * r.lanes, "road.saturation_flow");
    r.name = detail::string_or(t["name"], "");
    return r;
}

// Rectangular two-way grid; rows x cols intersections, each with an E-W
// phase (1) and a N-S phase (2). Boundary approaches get a source and a sink.
void expand_grid(const toml::table& net, const SignalDefaults& sd, std::vector<IntersectionConfig>& nodes,
                 std::vector<RoadSegment>& roads) {
    auto nv = [&](const char* k) { return net[k]; };
    const int rows = static_cast<int>(detail::require_int(nv("rows"), "network.rows"));
    const int cols = static_cast<int>(detail::require_int(nv("cols"), "network.cols"));
    if (rows < 1 || cols < 1) throw ScenarioError("grid needs rows, cols >= 1");
    const double length = detail::number_or(nv("link_length"), 150.0, "network.link_length");
    const double boundary_length = detail::number_or(nv("boundary_length"), length, "network.boundary_length");
    const int lanes = static_cast<int>(detail::int_or(nv("lanes"), 2, "network.lanes"));
    const double speed = detail::number_or(nv("speed"), 13.9, "network.speed");
    const double sat_per_lane = detail::number_or(nv("saturation_flow_per_lane"), 0.5, "saturation_flow_per_lane");
    const double spacing = detail::number_or(nv("vehicle_spacing"), 7.0, "network.vehicle_spacing");

    auto node_id = [&](int r, int c) { return IntersectionId{r * cols + c + 1}; };
    int next_road = 1;
    auto add_road = [&](std::optional<IntersectionId> from, std::optional<IntersectionId> to, double len,
                        std::string name) {
        RoadSegment s;
        s.id = RoadId{next_road++};
        s.from = from;
        s.to = to;
        s.length = len;
        s.lanes = lanes;
        s.free_flow_speed = speed;
        s.capacity = static_cast<int>(std::max(1.0, std::floor(len / spacing * lanes)));
        s.saturation_flow = sat_per_lane * lanes;
        s.name = std::move(name);
        roads.push_back(s);
        return s.id;
    };

    // Heading of travel: 0 = eastbound, 1 = westbound, 2 = southbound, 3 = northbound.
    // in_road[node][heading] is the road arriving at the node while travelling in `heading`;
    // out_road[node][heading] leaves the node in that heading.
    std::vector<std::array<RoadId, 4>> in_road(rows * cols), out_road(rows * cols);
    auto idx = [&](int r, int c) { return r * cols + c; };
    auto nm = [](IntersectionId i) { return std::to_string(i.value); };

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            IntersectionId me = node_id(r, c);
            if (c + 1 < cols) {
                IntersectionId east = node_id(r, c + 1);
                RoadId eb = add_road(me, east, length, nm(me) + ">" + nm(east));
                RoadId wb = add_road(east, me, length, nm(east) + ">" + nm(me));
                out_road[idx(r, c)][0] = eb;
                in_road[idx(r, c + 1)][0] = eb;
                out_road[idx(r, c + 1)][1] = wb;
                in_road[idx(r, c)][1] = wb;
            }
            if (r + 1 < rows) {
                IntersectionId south = node_id(r + 1, c);
                RoadId sb = add_road(me, south, length, nm(me) + ">" + nm(south));
                RoadId nb = add_road(south, me, length, nm(south) + ">" + nm(me));
                out_road[idx(r, c)][2] = sb;
                in_road[idx(r + 1, c)][2] = sb;
                out_road[idx(r + 1, c)][3] = nb;
                in_road[idx(r, c)][3] = nb;
            }
        }
    }
    // Boundary sources and sinks.
    for (int r = 0; r < rows; ++r) {
        IntersectionId w = node_id(r, 0), e = node_id(r, cols - 1);
        in_road[idx(r, 0)][0] = add_road(std::nullopt, w, boundary_length, "src_W_" + nm(w));
        out_road[idx(r, 0)][1] = add_road(w, std::nullopt, boundary_length, "snk_W_" + nm(w));
        in_road[idx(r, cols - 1)][1] = add_road(std::nullopt, e, boundary_length, "src_E_" + nm(e));
        out_road[idx(r, cols - 1)][0] = add_road(e, std::nullopt, boundary_length, "snk_E_" + nm(e));
    }
    for (int c = 0; c < cols; ++c) {
        IntersectionId n = node_id(0, c), s = node_id(rows - 1, c);
        in_road[idx(0, c)][2] = add_road(std::nullopt, n, boundary_length, "src_N_" + nm(n));
        out_road[idx(0, c)][3] = add_road(n, std::nullopt, boundary_length, "snk_N_" + nm(n));
        in_road[idx(rows - 1, c)][3] = add_road(std::nullopt, s, boundary_length, "src_S_" + nm(s));
        out_road[idx(rows - 1, c)][2] = add_road(s, std::nullopt, boundary_length, "snk_S_" + nm(s));
    }

    // Exits allowed from each heading: straight, left, right (no U-turns).
    // Eastbound: straight E(0), left N(3), right S(2). Westbound: W(1), left S(2), right N(3).
    // Southbound: S(2), left E(0), right W(1). Northbound: N(3), left W(1), right E(0).
    static constexpr int turns[4][3] = {{0, 3, 2}, {1, 2, 3}, {2, 0, 1}, {3, 1, 0}};
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            IntersectionConfig ic;
            ic.id = node_id(r, c);
            ic.name = "r" + std::to_string(r) + "c" + std::to_string(c);
            ic.changeover = sd.changeover;
            ic.min_green = sd.min_green;
            ic.max_green = sd.max_green;
            ic.bottleneck_weight = 0.0;
            Phase ew, ns;
            for (int h = 0; h < 4; ++h) {
                Phase& p = h < 2 ? ew : ns;
                for (int t : turns[h]) p.movements.push_back({in_road[idx(r, c)][h], out_road[idx(r, c)][t]});
            }
            ic.phases = {ew, ns};
            nodes.push_back(std::move(ic));
        }
    }
}

}  // namespace

NetworkGraph detail::load_network_table(const toml::table& doc) {
    const toml::table* net = doc["network"].as_table();
    if (!net) throw ScenarioError("missing [network] section");
    const SignalDefaults sd = parse_signal_defaults(doc);
    auto nv = [&](const char* k) { return (*net)[k]; };

    std::vector<IntersectionConfig> nodes;
    std::vector<RoadSegment> roads;
    std::vector<MovementConflict> conflicts;
    const std::string name = detail::string_or(nv("name"), "");
    const std::string tmpl = detail::string_or(nv("template"), "");

    if (tmpl == "grid") {
        expand_grid(*net, sd, nodes, roads);
    } else if (!tmpl.empty()) {
        throw ScenarioError("unknown network template '" + tmpl + "'");
    } else {
        const double speed = detail::number_or(nv("speed"), 13.9, "network.speed");
        const double sat = detail::number_or(nv("saturation_flow_per_lane"), 0.5, "saturation_flow_per_lane");
        const double spacing = detail::number_or(nv("vehicle_spacing"), 7.0, "network.vehicle_spacing");
        if (const auto* arr = (*net)["intersection"].as_array()) {
            for (const auto& n : *arr) {
                const auto* t = n.as_table();
                if (!t) throw ScenarioError("network.intersection entries must be tables");
                IntersectionConfig ic;
                ic.id = IntersectionId{static_cast<int>(
                    detail::require_int((*t)["id"], "intersection.id"))};
                ic.name = detail::string_or((*t)["name"], "");
                ic.changeover = sd.changeover;
                ic.min_green = sd.min_green;
                ic.max_green = sd.max_green;
                ic.bottleneck_weight = 0.0;
                nodes.push_back(std::move(ic));
            }
        }
        if (const auto* arr = (*net)["road"].as_array()) {
            for (const auto& n : *arr) {
                const auto* t = n.as_table();
                if (!t) throw ScenarioError("network.road entries must be tables");
                roads.push_back(parse_road(*t, speed, sat, spacing));
            }
        }
    }

    // Per-intersection signal settings and phases; templates may be overridden.
    std::map<IntersectionId, IntersectionConfig*> by_id;
    for (auto& ic : nodes) by_id[ic.id] = &ic;
    if (const auto* arr = doc["signals"]["intersection"].as_array()) {
        for (const auto& n : *arr) {
            const auto* t = n.as_table();
            if (!t) throw ScenarioError("signals.intersection entries must be tables");
            auto tv = [&](const char* k) { return (*t)[k]; };
            IntersectionId id{static_cast<int>(detail::require_int(tv("id"), "signals.intersection.id"))};
            auto it = by_id.find(id);
            if (it == by_id.end()) throw ScenarioError("signals reference unknown " + id_str(id));
            IntersectionConfig& ic = *it->second;
            ic.changeover = detail::number_or(tv("changeover"), ic.changeover, "changeover");
            ic.min_green = detail::number_or(tv("min_green"), ic.min_green, "min_green");
            ic.max_green = detail::number_or(tv("max_green"), ic.max_green, "max_green");
            ic.bottleneck_weight = detail::number_or(tv("weight"), ic.bottleneck_weight, "weight");
            if (const auto* phases = (*t)["phase"].as_array()) {
                ic.phases.clear();
                for (const auto& pn : *phases) {
                    const auto* pt = pn.as_table();
                    if (!pt) throw ScenarioError("signals.intersection.phase entries must be tables");
                    Phase p;
                    if (const auto* mv = (*pt)["movements"].as_array())
                        for (const auto& m : *mv) p.movements.push_back(parse_movement(m));
                    if (const auto* en = (*pt)["entries"].as_array()) {
                        // Shorthand: every exit of the intersection except the U-turn.
                        for (const auto& e : *en) {
                            auto v = e.value<long long>();
                            if (!v) throw ScenarioError("phase entries must be road ids");
                            RoadId entry{static_cast<int>(*v)};
                            auto src = std::find_if(roads.begin(), roads.end(),
                                                    [&](const RoadSegment& r) { return r.id == entry; });
                            if (src == roads.end()) throw ScenarioError("phase references unknown " + id_str(entry));
                            for (const auto& r : roads) {
                                if (r.from != ic.id) continue;
                                if (src->from && r.to == src->from) continue;
                                p.movements.push_back({entry, r.id});
                            }
                        }
                    }
                    ic.phases.push_back(std::move(p));
                }
            }
        }
    }
    if (const auto* arr = doc["signals"]["conflict"].as_array()) {
        for (const auto& n : *arr) {
            const auto* t = n.as_table();
            if (!t || !(*t)["a"].node() || !(*t)["b"].node()) throw ScenarioError("conflict needs a and b");
            conflicts.emplace_back(parse_movement(*(*t)["a"].node()), parse_movement(*(*t)["b"].node()));
        }
    }
    return NetworkGraph::build(std::move(nodes), std::move(roads), std::move(conflicts), name);
}

NetworkGraph load_network(std::string_view scenario_text) {
    return detail::load_network_table(detail::parse_toml(scenario_text));
}

std::string serialize_network(const NetworkGraph& g) {
    toml::table doc;
    toml::table net;
    if (!g.name().empty()) net.insert("name", g.name());
    toml::array nodes;
    for (const auto& [id, ic] : g.intersections()) {
        toml::table t;
        t.insert("id", id.value);
        if (!ic.name.empty()) t.insert("name", ic.name);
        nodes.push_back(std::move(t));
    }
    net.insert("intersection", std::move(nodes));
    toml::array roads;
    for (const auto& [id, r] : g.roads()) {
        toml::table t;
        t.insert("id", id.value);
        if (r.from) t.insert("from", r.from->value); else t.insert("from", "source");
        if (r.to) t.insert("to", r.to->value); else t.insert("to", "sink");
        t.insert("length", r.length);
        t.insert("lanes", r.lanes);
        t.insert("speed", r.free_flow_speed);
        t.insert("capacity", r.capacity);
        t.insert("saturation_flow", r.saturation_flow);
        if (!r.name.empty()) t.insert("name", r.name);
        roads.push_back(std::move(t));
    }
    net.insert("road", std::move(roads));
    doc.insert("network", std::move(net));

    toml::table sig;
    toml::array sig_nodes;
    for (const auto& [id, ic] : g.intersections()) {
        toml::table t;
        t.insert("id", id.value);
        t.insert("changeover", ic.changeover);
        t.insert("min_green", ic.min_green);
        t.insert("max_green", ic.max_green);
        t.insert("weight", ic.bottleneck_weight);
        toml::array phases;
        for (const Phase& p : ic.phases) {
            toml::array mv;
            for (const Movement& m : p.movements) mv.push_back(toml::array{m.entry.value, m.exit.value});
            toml::table pt;
            pt.insert("movements", std::move(mv));
            phases.push_back(std::move(pt));
        }
        t.insert("phase", std::move(phases));
        sig_nodes.push_back(std::move(t));
    }
    sig.insert("intersection", std::move(sig_nodes));
    if (!g.conflicts().empty()) {
        toml::array cs;
        for (const auto& [a, b] : g.conflicts()) {
            toml::table t;
            t.insert("a", toml::array{a.entry.value, a.exit.value});
            t.insert("b", toml::array{b.entry.value, b.exit.value});
            cs.push_back(std::move(t));
        }
        sig.insert("conflict", std::move(cs));
    }
    doc.insert("signals", std::move(sig));

    std::ostringstream os;
    os << doc;
    return os.str();
}

}  // namespace tsched
