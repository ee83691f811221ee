#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsched/sim.h"

namespace tsched {

struct VehicleMetric {
    long id = 0;
    double entered = 0.0;
    std::optional<double> exited;  // empty if still in the network at the end
    double delay = 0.0;
    int stops = 0;
    std::string band;
};

struct Aggregate {
    std::size_t vehicles = 0;
    double mean_delay = 0.0;
    double std_delay = 0.0;  // population std across vehicles
    double mean_stops = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
};

struct MetricsBundle {
    std::string scenario;
    std::string controller;
    std::uint64_t seed = 0;
    bool deadlock = false;
    std::vector<VehicleMetric> vehicles;
    Aggregate aggregate;
    std::map<std::string, Aggregate> by_band;
};

Aggregate aggregate(std::span<const VehicleMetric> vehicles);

/// Fraction of vehicles with delay <= k seconds, k = 0, 1, ..., ceil(max delay).
std::vector<std::pair<double, double>> delay_cdf(std::span<const VehicleMetric> vehicles);

/// Vehicles that entered during [warmup, duration), including those still
/// travelling, with the delay accrued so far.
MetricsBundle collect_metrics(const Simulator& sim, const RunParams& run, const std::string& controller,
                              std::uint64_t seed);

std::string vehicles_csv(const MetricsBundle& m);
std::string aggregate_csv_header();
std::string aggregate_csv_row(const std::string& controller, const std::string& seed, const Aggregate& a);
std::string cdf_csv(std::span<const VehicleMetric> vehicles);

/// Parses a per-vehicle CSV back into metrics (band left empty).
std::vector<VehicleMetric> parse_vehicles_csv(const std::string& text);

}  // namespace tsched
