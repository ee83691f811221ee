#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "tsched/cluster.h"
#include "tsched/coordination.h"

namespace tsched {

/// Constant arrival rate per source road over [start, end), veh/h.
struct DemandWindow {
    double start = 0.0;
    double end = 0.0;
    double rate = 0.0;
    std::string band;
};

struct SourceDemand {
    RoadId road;
    std::string group = "default";
    double scale = 1.0;
};

struct DemandSpec {
    std::vector<DemandWindow> windows;
    std::vector<SourceDemand> sources;
    std::map<std::string, double> group_scale;
    double max_rate = std::numeric_limits<double>::infinity();  // per source, veh/h
    std::map<Movement, double> turn_probability;                 // normalized per entry

    /// Arrival rate of a source at time t, veh/s.
    double rate(const SourceDemand& s, double t) const;
    /// Band label of the window containing t; empty outside every window.
    std::string band_at(double t) const;
};

struct ControllerParams {
    double gap_threshold = kDefaultGapThreshold;
    double epsilon = kDefaultEpsilon;
    double alpha = 0.1;          // EMA smoothing of turning counts
    double flow_window = 10.0;   // s per turning-count window
    double horizon_cap = kHorizonCap;
    double cycle_min = 30.0;
    double cycle_max = 120.0;
    double fixed_green = 30.0;   // fixed-time green per phase
};

struct RunParams {
    double duration = 12600.0;  // demand is generated over [0, duration)
    double warmup = 600.0;      // vehicles entering before this are not measured
    double cooldown = 900.0;    // demand-free drain time after duration
    std::uint64_t seed = 1;
};

struct Scenario {
    std::string name;
    NetworkGraph network;
    DemandSpec demand;
    ControllerParams controller;
    RunParams run;
};

/// Parses a scenario document with sections [network] [signals] [demand]
/// [controller] [run]. Throws ScenarioError on any invalid input.
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace tsched
