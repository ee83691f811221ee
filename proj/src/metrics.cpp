#include "tsched/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace tsched {

namespace {

std::string fmt(double x, const char* spec = "%.3f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

double nearest_rank(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

}  // namespace

Aggregate aggregate(std::span<const VehicleMetric> vehicles) {
    Aggregate a;
    a.vehicles = vehicles.size();
    if (vehicles.empty()) return a;
    std::vector<double> delays;
    delays.reserve(vehicles.size());
    double sum = 0.0, stops = 0.0;
    for (const VehicleMetric& v : vehicles) {
        delays.push_back(v.delay);
        sum += v.delay;
        stops += v.stops;
    }
    const double n = static_cast<double>(vehicles.size());
    a.mean_delay = sum / n;
    a.mean_stops = stops / n;
    double ss = 0.0;
    for (double d : delays) ss += (d - a.mean_delay) * (d - a.mean_delay);
    a.std_delay = std::sqrt(ss / n);
    std::sort(delays.begin(), delays.end());
    a.p50 = nearest_rank(delays, 0.5);
    a.p90 = nearest_rank(delays, 0.9);
    return a;
}

std::vector<std::pair<double, double>> delay_cdf(std::span<const VehicleMetric> vehicles) {
    std::vector<std::pair<double, double>> out;
    if (vehicles.empty()) return out;
    std::vector<double> delays;
    for (const VehicleMetric& v : vehicles) delays.push_back(v.delay);
    std::sort(delays.begin(), delays.end());
    const auto last = static_cast<long>(std::ceil(delays.back()));
    std::size_t idx = 0;
    for (long k = 0; k <= last; ++k) {
        while (idx < delays.size() && delays[idx] <= static_cast<double>(k)) ++idx;
        out.emplace_back(static_cast<double>(k), static_cast<double>(idx) / static_cast<double>(delays.size()));
    }
    return out;
}

MetricsBundle collect_metrics(const Simulator& sim, const RunParams& run, const std::string& controller,
                              std::uint64_t seed) {
    MetricsBundle m;
    m.scenario = sim.scenario().name;
    m.controller = controller;
    m.seed = seed;
    m.deadlock = sim.deadlocked();
    for (const VehicleRecord& v : sim.vehicles()) {
        if (v.entered_at < run.warmup || v.entered_at >= run.duration) continue;
        m.vehicles.push_back({v.id, v.entered_at, v.exited_at, v.delay(), v.stops, v.band});
    }
    m.aggregate = aggregate(m.vehicles);
    std::map<std::string, std::vector<VehicleMetric>> bands;
    for (const VehicleMetric& v : m.vehicles)
        if (!v.band.empty()) bands[v.band].push_back(v);
    for (const auto& [b, vs] : bands) m.by_band[b] = aggregate(vs);
    return m;
}

std::string vehicles_csv(const MetricsBundle& m) {
    std::string out = "id,entered,exited,delay,stops\n";
    for (const VehicleMetric& v : m.vehicles) {
        out += std::to_string(v.id) + "," + fmt(v.entered, "%.0f") + "," +
               (v.exited ? fmt(*v.exited, "%.0f") : std::string()) + "," + fmt(v.delay, "%.0f") + "," +
               std::to_string(v.stops) + "\n";
    }
    return out;
}

std::string aggregate_csv_header() { return "controller,seed,vehicles,mean,std,stops,p50,p90\n"; }

std::string aggregate_csv_row(const std::string& controller, const std::string& seed, const Aggregate& a) {
    return controller + "," + seed + "," + std::to_string(a.vehicles) + "," + fmt(a.mean_delay, "%.4f") + "," +
           fmt(a.std_delay, "%.4f") + "," + fmt(a.mean_stops, "%.4f") + "," + fmt(a.p50, "%.1f") + "," +
           fmt(a.p90, "%.1f") + "\n";
}

std::string cdf_csv(std::span<const VehicleMetric> vehicles) {
    std::string out = "delay_s,fraction\n";
    for (const auto& [d, f] : delay_cdf(vehicles)) out += fmt(d, "%.0f") + "," + fmt(f, "%.6f") + "\n";
    return out;
}

std::vector<VehicleMetric> parse_vehicles_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (line != "id,entered,exited,delay,stops") throw std::runtime_error("not a per-vehicle CSV");
    std::vector<VehicleMetric> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 5) throw std::runtime_error("malformed per-vehicle row: " + line);
        VehicleMetric v;
        v.id = std::stol(f[0]);
        v.entered = std::stod(f[1]);
        if (!f[2].empty()) v.exited = std::stod(f[2]);
        v.delay = std::stod(f[3]);
        v.stops = std::stoi(f[4]);
        out.push_back(v);
    }
    return out;
}

}  // namespace tsched
