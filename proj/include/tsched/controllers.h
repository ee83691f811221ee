#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsched/sim.h"

namespace tsched {

enum class ControllerKind { fixed_time, cycle_adaptive, baseline_sd, dcc, dcc_bc };

std::string to_string(ControllerKind k);
/// Accepts fixed_time, cycle_adaptive, baseline_sd, dcc, dcc_bc.
std::optional<ControllerKind> parse_controller_kind(std::string_view name);

struct CyclePlan {
    double cycle = 0.0;
    std::vector<double> greens;  // per phase, in phase order
};

/// Webster cycle C = (1.5 L + 5) / (1 - Σy), L = |P| * changeover, clamped to
/// [cycle_min, cycle_max] (cycle_max when Σy >= 1). Greens split C - L by y,
/// equally when Σy = 0, floored at min_green.
CyclePlan webster_plan(std::span<const double> flow_ratios, double changeover, double cycle_min, double cycle_max,
                       double min_green);

/// Cycles through the phases with a fixed green each.
class FixedTimeController : public Controller {
public:
    explicit FixedTimeController(const Scenario& s);
    std::string name() const override { return "fixed_time"; }
    void decide(const Simulator& sim, long tick, std::map<IntersectionId, SignalCommand>& commands) override;

private:
    std::map<IntersectionId, double> green_;
};

/// Re-plans each cycle from the flow ratios observed over the previous one.
class CycleAdaptiveController : public Controller {
public:
    explicit CycleAdaptiveController(const Scenario& s);
    std::string name() const override { return "cycle_adaptive"; }
    void decide(const Simulator& sim, long tick, std::map<IntersectionId, SignalCommand>& commands) override;

    const CyclePlan& plan(IntersectionId i) const { return state_.at(i).plan; }

private:
    struct State {
        CyclePlan plan;
        long cycle_start = 0;
        std::map<RoadId, double> arrivals;  // over the running cycle
    };
    const Scenario* scenario_;
    std::map<IntersectionId, State> state_;
};

struct ScheduleOptions {
    bool zero_feedback = false;  // DCC variants: emit feedback but schedule as if it were 0
    bool debug_traces = false;
};

/// Rolling-horizon schedule-driven control, one agent per intersection:
/// baseline_sd (outflow projections only), dcc (plus congestion feedback)
/// and dcc_bc (plus the bottleneck test).
class ScheduleDrivenController : public Controller {
public:
    ScheduleDrivenController(const Scenario& s, ControllerKind kind, ScheduleOptions options = {});
    std::string name() const override { return to_string(kind_); }
    void decide(const Simulator& sim, long tick, std::map<IntersectionId, SignalCommand>& commands) override;
    void check(InvariantReport& report) const override;
    std::map<std::string, std::vector<std::string>> traces() const override;

    const AgentState& agent(IntersectionId i) const { return agents_.at(i); }
    const TurningProportions& turning() const { return zeta_; }
    std::size_t bottleneck_ticks() const { return bottleneck_ticks_; }

private:
    ControllerKind kind_;
    ScheduleOptions options_;
    const Scenario* scenario_;
    std::map<IntersectionId, AgentState> agents_;
    MessageBus bus_;
    TurningProportions zeta_;
    std::vector<TurnCount> window_counts_;
    long window_start_ = 0;
    std::size_t bottleneck_ticks_ = 0;
    std::size_t stale_violations_ = 0;
    std::size_t mass_violations_ = 0;
    std::vector<std::string> schedule_trace_;
};

std::unique_ptr<Controller> make_controller(ControllerKind kind, const Scenario& s, ScheduleOptions options = {});

}  // namespace tsched
