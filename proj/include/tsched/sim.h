#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tsched/scenario.h"

namespace tsched {

struct VehicleRecord {
    long id = 0;
    std::vector<RoadId> route;  // source road ... sink road
    double entered_at = 0.0;
    std::optional<double> exited_at;
    std::map<IntersectionId, double> wait;  // s queued before each intersection
    int stops = 0;
    std::size_t leg = 0;  // index of the current road in `route`
    std::string band;     // demand window label at entry

    double delay() const;
};

struct SignalState {
    PhaseId phase{1};            // green phase, or the target while changing over
    long phase_start = 0;        // tick the current green began
    bool in_changeover = false;
    double changeover_remaining = 0.0;
};

class InvariantReport {
public:
    void record(const std::string& kind, const std::string& detail);
    std::size_t total() const;
    std::size_t count(const std::string& kind) const;
    const std::map<std::string, std::size_t>& by_kind() const { return counts_; }
    const std::vector<std::string>& samples() const { return samples_; }

private:
    std::map<std::string, std::size_t> counts_;
    std::vector<std::string> samples_;  // first few violations, for diagnostics
};

class Simulator;

/// Signal policy consulted once per tick, before any vehicle moves.
class Controller {
public:
    virtual ~Controller() = default;
    virtual std::string name() const = 0;
    /// Fills a command per intersection; missing entries mean hold.
    virtual void decide(const Simulator& sim, long tick, std::map<IntersectionId, SignalCommand>& commands) = 0;
    /// Protocol-level checks the simulator cannot see (message timing, projections).
    virtual void check(InvariantReport&) const {}
    /// Debug CSV rows, keyed by file stem.
    virtual std::map<std::string, std::vector<std::string>> traces() const { return {}; }
};

struct SimOptions {
    bool check_invariants = true;
    long deadlock_ticks = 300;
};

/// Fixed-step (1 s) point-queue network with storage capacities. Tick t covers
/// [t, t + 1): controllers decide, commands apply, green queues discharge,
/// travelling vehicles reach stop lines, sources generate, waits accrue.
class Simulator {
public:
    Simulator(const Scenario& scenario, std::uint64_t seed, SimOptions options = {});

    void step(Controller& controller);

    long tick() const { return tick_; }
    const Scenario& scenario() const { return scenario_; }
    const NetworkGraph& network() const { return scenario_.network; }

    /// Detector view of one entry road: queued vehicles at 0, then travelling
    /// vehicles by time to the stop line; anything beyond `horizon` is omitted.
    std::vector<Arrival> sense_road(RoadId road, double horizon) const;
    /// Clusterized detector view of every entry of i.
    std::vector<RoadClusterSequence> sense(IntersectionId i, double horizon, double gap_threshold) const;

    const SignalState& signal(IntersectionId i) const { return signals_.at(i); }
    SignalView signal_view(IntersectionId i) const;

    /// Movements discharged during the previous tick.
    const std::vector<TurnCount>& last_discharges() const { return last_discharges_; }
    /// Stop-line arrivals per entry road during the previous tick.
    const std::map<RoadId, int>& last_arrivals() const { return last_arrivals_; }

    std::size_t queue_length(RoadId road) const;
    std::size_t occupancy(RoadId road) const;
    std::size_t backlog(RoadId source) const;
    std::size_t vehicles_in_network() const { return in_network_; }
    std::size_t vehicles_generated() const { return vehicles_.size(); }
    std::size_t vehicles_exited() const { return exited_; }
    const std::vector<VehicleRecord>& vehicles() const { return vehicles_; }

    void set_demand_enabled(bool on) { demand_enabled_ = on; }
    /// Adds a vehicle at the upstream end of route[0] (a source road) now.
    long inject_vehicle(std::vector<RoadId> route);

    const InvariantReport& invariants() const { return invariants_; }
    bool deadlocked() const { return deadlocked_; }
    /// One row per applied switch: tick,intersection,phase.
    const std::vector<std::string>& command_trace() const { return command_trace_; }

private:
    struct Link {
        std::deque<std::pair<long, double>> transit;  // (vehicle, eta at stop line)
        std::deque<long> queue;
        double credit = 0.0;
        long last_seq = -1;
    };
    struct Motion {
        long ready_tick = 0;
        long seq = 0;
    };

    long add_vehicle(std::vector<RoadId> route, std::string band);
    std::vector<RoadId> sample_route(RoadId source, std::mt19937_64& rng) const;
    bool green_for(RoadId entry) const;
    void check_tick();

    Scenario scenario_;
    SimOptions options_;
    long tick_ = 0;
    bool demand_enabled_ = true;
    std::map<RoadId, Link> links_;
    std::map<RoadId, std::deque<long>> backlog_;
    std::map<RoadId, std::mt19937_64> rngs_;
    std::map<IntersectionId, SignalState> signals_;
    std::vector<VehicleRecord> vehicles_;
    std::vector<Motion> motion_;
    std::size_t in_network_ = 0;
    std::size_t exited_ = 0;
    long seq_ = 0;
    std::vector<TurnCount> last_discharges_;
    std::map<RoadId, int> last_arrivals_;
    long idle_ticks_ = 0;
    bool deadlocked_ = false;
    InvariantReport invariants_;
    std::vector<std::string> command_trace_;
};

}  // namespace tsched
