#include "tsched/controllers.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tsched {

std::string to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::fixed_time: return "fixed_time";
        case ControllerKind::cycle_adaptive: return "cycle_adaptive";
        case ControllerKind::baseline_sd: return "baseline_sd";
        case ControllerKind::dcc: return "dcc";
        case ControllerKind::dcc_bc: return "dcc_bc";
    }
    return "unknown";
}

std::optional<ControllerKind> parse_controller_kind(std::string_view name) {
    for (auto k : {ControllerKind::fixed_time, ControllerKind::cycle_adaptive, ControllerKind::baseline_sd,
                   ControllerKind::dcc, ControllerKind::dcc_bc})
        if (to_string(k) == name) return k;
    return std::nullopt;
}

CyclePlan webster_plan(std::span<const double> flow_ratios, double changeover, double cycle_min, double cycle_max,
                       double min_green) {
    CyclePlan plan;
    const double n = static_cast<double>(flow_ratios.size());
    const double lost = n * changeover;
    double y_total = 0.0;
    for (double y : flow_ratios) y_total += std::max(0.0, y);
    if (y_total >= 1.0) {
        plan.cycle = cycle_max;
    } else {
        plan.cycle = std::clamp((1.5 * lost + 5.0) / (1.0 - y_total), cycle_min, cycle_max);
    }
    const double available = std::max(0.0, plan.cycle - lost);
    for (double y : flow_ratios) {
        const double g = y_total > 0.0 ? available * std::max(0.0, y) / y_total : available / n;
        plan.greens.push_back(std::max(min_green, g));
    }
    return plan;
}

FixedTimeController::FixedTimeController(const Scenario& s) {
    for (const auto& [id, ic] : s.network.intersections())
        green_[id] = std::clamp(s.controller.fixed_green, ic.min_green, ic.max_green);
}

void FixedTimeController::decide(const Simulator& sim, long tick, std::map<IntersectionId, SignalCommand>& commands) {
    for (const auto& [id, green] : green_) {
        const SignalState& s = sim.signal(id);
        if (s.in_changeover) continue;
        if (static_cast<double>(tick - s.phase_start) < green) continue;
        const int n = static_cast<int>(sim.network().intersection(id).phases.size());
        commands[id] = SignalCommand::switch_to(PhaseId{s.phase.value % n + 1});
    }
}

CycleAdaptiveController::CycleAdaptiveController(const Scenario& s) : scenario_(&s) {
    for (const auto& [id, ic] : s.network.intersections()) {
        std::vector<double> zero(ic.phases.size(), 0.0);
        State st;
        st.plan = webster_plan(zero, ic.changeover, s.controller.cycle_min, s.controller.cycle_max, ic.min_green);
        for (double& g : st.plan.greens) g = std::min(g, ic.max_green);
        state_[id] = std::move(st);
    }
}

void CycleAdaptiveController::decide(const Simulator& sim, long tick,
                                     std::map<IntersectionId, SignalCommand>& commands) {
    const NetworkGraph& g = sim.network();
    for (const auto& [road, n] : sim.last_arrivals()) state_.at(*g.road(road).to).arrivals[road] += n;

    for (auto& [id, st] : state_) {
        const SignalState& s = sim.signal(id);
        if (s.in_changeover) continue;
        const IntersectionConfig& ic = g.intersection(id);
        if (static_cast<double>(tick - s.phase_start) < st.plan.greens[s.phase.value - 1]) continue;
        const int n = static_cast<int>(ic.phases.size());
        const PhaseId next{s.phase.value % n + 1};
        if (next.value == 1) {
            const double span = static_cast<double>(std::max(1L, tick - st.cycle_start));
            std::vector<double> y(ic.phases.size(), 0.0);
            for (RoadId e : ic.entries) {
                const double flow = st.arrivals[e] / span;
                double& yp = y[g.phase_of_entry(e).value - 1];
                yp = std::max(yp, flow / g.road(e).saturation_flow);
            }
            st.plan = webster_plan(y, ic.changeover, scenario_->controller.cycle_min,
                                   scenario_->controller.cycle_max, ic.min_green);
            for (double& gr : st.plan.greens) gr = std::min(gr, ic.max_green);
            st.arrivals.clear();
            st.cycle_start = tick;
        }
        commands[id] = SignalCommand::switch_to(next);
    }
}

ScheduleDrivenController::ScheduleDrivenController(const Scenario& s, ControllerKind kind, ScheduleOptions options)
    : kind_(kind), options_(options), scenario_(&s), bus_(options.debug_traces),
      zeta_(make_turning_proportions(s.demand.turn_probability)) {
    if (kind != ControllerKind::baseline_sd && kind != ControllerKind::dcc && kind != ControllerKind::dcc_bc)
        throw std::invalid_argument("not a schedule-driven controller kind");
    for (const auto& [id, ic] : s.network.intersections()) {
        AgentState a;
        a.id = id;
        a.options.use_augmented = kind != ControllerKind::baseline_sd;
        a.options.use_bottleneck_criterion = kind == ControllerKind::dcc_bc;
        a.options.zero_feedback = options.zero_feedback;
        a.options.epsilon = s.controller.epsilon;
        a.options.gap_threshold = s.controller.gap_threshold;
        a.options.horizon_cap = s.controller.horizon_cap;
        agents_.emplace(id, std::move(a));
    }
}

namespace {

double expected_projection_mass(const ControlFlow& cf, const NetworkGraph& g, const TurningProportions& zeta,
                                double horizon) {
    double mass = 0.0;
    for (const ScheduledCluster& sc : cf.scheduled)
        for (RoadId x : g.exits_of(sc.cluster.origin)) {
            const RoadSegment& r = g.road(x);
            const double part = sc.cluster.count * zeta(sc.cluster.origin, x);
            if (!r.to || part <= 0.0 || part < kMinFragment || sc.ast + r.travel_time() > horizon) continue;
            mass += part;
        }
    return mass;
}

}  // namespace

void ScheduleDrivenController::decide(const Simulator& sim, long tick,
                                      std::map<IntersectionId, SignalCommand>& commands) {
    const NetworkGraph& g = sim.network();
    bus_.deliver(tick, agents_);
    for (const auto& [id, a] : agents_) {
        for (const auto& [k, m] : a.outflow_inbox)
            if (m.issued_at > tick - 1) ++stale_violations_;
        for (const auto& [k, m] : a.feedback_inbox)
            if (m.issued_at > tick - 1) ++stale_violations_;
    }

    window_counts_.insert(window_counts_.end(), sim.last_discharges().begin(), sim.last_discharges().end());
    if (static_cast<double>(tick - window_start_) >= scenario_->controller.flow_window) {
        zeta_ = update_turning_proportions(zeta_, window_counts_, scenario_->controller.alpha);
        window_counts_.clear();
        window_start_ = tick;
    }

    for (auto& [id, agent] : agents_) {
        const auto sensed = sim.sense(id, agent.options.horizon_cap, agent.options.gap_threshold);
        TickResult r = dcc_tick(agent, sensed, g, zeta_, sim.signal_view(id), tick);
        if (agent.options.use_augmented && r.mode == DelayMode::baseline) ++bottleneck_ticks_;
        commands[id] = r.command;

        double sent = 0.0;
        for (const auto& m : r.outflow)
            for (const Cluster& c : m.clusters) sent += c.count;
        const double expected = expected_projection_mass(r.cf, g, zeta_, agent.options.horizon_cap);
        if (std::abs(sent - expected) > 1e-6 * (1.0 + expected)) ++mass_violations_;

        if (options_.debug_traces) {
            char buf[200];
            for (std::size_t k = 0; k < r.cf.scheduled.size(); ++k) {
                const ScheduledCluster& sc = r.cf.scheduled[k];
                std::snprintf(buf, sizeof buf, "%ld,%d,%zu,%d,%.4f,%.2f,%.2f,%.4f,%.4f", tick, id.value, k,
                              sc.phase.value, sc.cluster.count, sc.cluster.arr, sc.ast, sc.local_delay,
                              sc.augmented_delay);
                schedule_trace_.emplace_back(buf);
            }
        }
        for (auto& m : r.outflow) bus_.post(std::move(m));
        for (auto& m : r.congestion) bus_.post(m);
    }
}

void ScheduleDrivenController::check(InvariantReport& report) const {
    for (std::size_t k = 0; k < stale_violations_; ++k) report.record("staleness", "message consumed too early");
    for (std::size_t k = 0; k < mass_violations_; ++k) report.record("projection_mass", "projected mass mismatch");
}

std::map<std::string, std::vector<std::string>> ScheduleDrivenController::traces() const {
    if (!options_.debug_traces) return {};
    std::map<std::string, std::vector<std::string>> out;
    auto& sched = out["schedule_trace"];
    sched.push_back("tick,intersection,seq,phase,count,arr,ast,local_delay,augmented_delay");
    sched.insert(sched.end(), schedule_trace_.begin(), schedule_trace_.end());
    auto& msgs = out["message_trace"];
    msgs.push_back("tick,from,to,kind,phase,value");
    msgs.insert(msgs.end(), bus_.trace().begin(), bus_.trace().end());
    return out;
}

std::unique_ptr<Controller> make_controller(ControllerKind kind, const Scenario& s, ScheduleOptions options) {
    switch (kind) {
        case ControllerKind::fixed_time: return std::make_unique<FixedTimeController>(s);
        case ControllerKind::cycle_adaptive: return std::make_unique<CycleAdaptiveController>(s);
        default: return std::make_unique<ScheduleDrivenController>(s, kind, options);
    }
}

}  // namespace tsched
