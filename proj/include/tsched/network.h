#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tsched {

/// Opaque integer identifier, distinct per tag so ids cannot be mixed up.
template <class Tag>
struct Id {
    int value = 0;
    constexpr auto operator<=>(const Id&) const = default;
};

using IntersectionId = Id<struct IntersectionTag>;
using RoadId = Id<struct RoadTag>;
using PhaseId = Id<struct PhaseTag>;

/// Raised for malformed or inconsistent scenario input.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A directed road segment. `from`/`to` are empty for external sources/sinks.
struct RoadSegment {
    RoadId id;
    std::optional<IntersectionId> from;
    std::optional<IntersectionId> to;
    double length = 0.0;           // m
    int lanes = 1;
    double free_flow_speed = 13.9; // m/s
    int capacity = 1;              // vehicles stored
    double saturation_flow = 0.5;  // veh/s discharge on green
    std::string name;

    /// Free-flow traversal time; also the sensing horizon H_m of the road.
    double travel_time() const { return length / free_flow_speed; }
    bool is_source() const { return !from.has_value(); }
    bool is_sink() const { return !to.has_value(); }
};

struct Movement {
    RoadId entry;
    RoadId exit;
    auto operator<=>(const Movement&) const = default;
};

struct Phase {
    PhaseId id;
    std::vector<Movement> movements;
};

struct IntersectionConfig {
    IntersectionId id;
    std::string name;
    std::vector<Phase> phases;   // phases[k].id == k + 1
    double changeover = 5.0;     // yellow + all-red, s
    double min_green = 5.0;
    double max_green = 60.0;
    double bottleneck_weight = 1.0;
    std::vector<RoadId> entries; // sorted
    std::vector<RoadId> exits;   // sorted
};

enum class Direction { upstream, downstream };

struct Neighbor {
    IntersectionId id;
    Direction direction;
    RoadId road;
    auto operator<=>(const Neighbor&) const = default;
};

/// Pairs of movements that may not share a phase.
using MovementConflict = std::pair<Movement, Movement>;

/// Immutable, validated description of the signalized network.
class NetworkGraph {
public:
    NetworkGraph() = default;

    /// Validates and indexes. Intersections without an explicit positive
    /// `bottleneck_weight` get the capacity-normalized default.
    static NetworkGraph build(std::vector<IntersectionConfig> intersections,
                              std::vector<RoadSegment> roads,
                              std::vector<MovementConflict> conflicts = {},
                              std::string name = {});

    const std::string& name() const { return name_; }
    const std::map<IntersectionId, IntersectionConfig>& intersections() const { return intersections_; }
    const std::map<RoadId, RoadSegment>& roads() const { return roads_; }
    const std::vector<MovementConflict>& conflicts() const { return conflicts_; }

    const IntersectionConfig& intersection(IntersectionId id) const;
    const RoadSegment& road(RoadId id) const;
    bool has_intersection(IntersectionId id) const { return intersections_.contains(id); }
    bool has_road(RoadId id) const { return roads_.contains(id); }

    /// Phase of the downstream intersection of `entry` that serves it.
    PhaseId phase_of_entry(RoadId entry) const;
    /// Exit roads reachable from `entry` through its downstream intersection.
    const std::vector<RoadId>& exits_of(RoadId entry) const;
    /// P(i, j): the phase of `j` that serves the road from `i` into `j`.
    std::optional<PhaseId> phase_of_neighbor(IntersectionId i, IntersectionId j) const;
    /// Road from `i` into `j`, if adjacent.
    std::optional<RoadId> road_between(IntersectionId i, IntersectionId j) const;

    bool operator==(const NetworkGraph& other) const;

private:
    std::string name_;
    std::map<IntersectionId, IntersectionConfig> intersections_;
    std::map<RoadId, RoadSegment> roads_;
    std::vector<MovementConflict> conflicts_;
    std::map<RoadId, PhaseId> entry_phase_;
    std::map<RoadId, std::vector<RoadId>> entry_exits_;
    std::map<std::pair<IntersectionId, IntersectionId>, RoadId> links_;
};

/// Direct neighbors of `i`, sorted by (id, direction, road).
std::vector<Neighbor> neighbors(const NetworkGraph& g, IntersectionId i);

/// Parses the `[network]` and `[signals]` sections of a scenario document.
NetworkGraph load_network(std::string_view scenario_text);

/// Writes an explicit `[network]`/`[signals]` document; `load_network` of the
/// result compares equal to `g`.
std::string serialize_network(const NetworkGraph& g);

}  // namespace tsched

template <class Tag>
struct std::hash<tsched::Id<Tag>> {
    std::size_t operator()(const tsched::Id<Tag>& id) const noexcept { return std::hash<int>{}(id.value); }
};
