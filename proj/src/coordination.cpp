#include "tsched/coordination.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tsched {

namespace {

template <class F>
double ratio_over(const ControlFlow& cf, F&& include) {
    double delay = 0.0, count = 0.0;
    for (const auto* list : {&cf.scheduled, &cf.deferred})
        for (const ScheduledCluster& sc : *list)
            if (include(sc)) {
                delay += sc.local_delay;
                count += sc.cluster.count;
            }
    return count > 0.0 ? delay / count : 0.0;
}

}  // namespace

double congestion_feedback(const ControlFlow& cf, PhaseId p) {
    return ratio_over(cf, [p](const ScheduledCluster& sc) { return sc.phase == p; });
}

double aggregate_feedback(const ControlFlow& cf) {
    return ratio_over(cf, [](const ScheduledCluster&) { return true; });
}

double effective_feedback(std::span<const double> zeta, std::span<const double> feedback) {
    if (zeta.size() != feedback.size()) throw std::invalid_argument("zeta and feedback sizes differ");
    double sum = 0.0;
    for (std::size_t k = 0; k < zeta.size(); ++k) sum += zeta[k] * feedback[k];
    return sum;
}

double staleness_weight(long age) {
    if (age <= kStaleAfter) return 1.0;
    return std::max(0.0, 1.0 - static_cast<double>(age - kStaleAfter) / static_cast<double>(kStaleSpan));
}

double effective_feedback(const NetworkGraph& g, IntersectionId i, RoadId entry, const TurningProportions& zeta,
                          const AgentState& state, long now) {
    const std::optional<IntersectionId> u = g.road(entry).from;
    std::vector<double> shares, values;
    for (RoadId x : g.exits_of(entry)) {
        const std::optional<IntersectionId> j = g.road(x).to;
        if (!j || (u && *j == *u)) continue;
        const std::optional<PhaseId> p = g.phase_of_neighbor(i, *j);
        double value = 0.0;
        if (p) {
            auto it = state.feedback_inbox.find({*j, *p});
            if (it != state.feedback_inbox.end())
                value = it->second.value * staleness_weight(now - it->second.issued_at);
        }
        shares.push_back(zeta(entry, x));
        values.push_back(value);
    }
    return effective_feedback(shares, values);
}

bool is_bottleneck(double self, double w_self, std::span<const std::pair<double, double>> neighbors,
                   double epsilon) {
    if (!(w_self > 0.0) || epsilon < 0.0) throw std::invalid_argument("bottleneck test needs w > 0, epsilon >= 0");
    const double mine = self * w_self + epsilon;
    for (const auto& [d, w] : neighbors) {
        if (!(w > 0.0)) throw std::invalid_argument("bottleneck test needs w > 0");
        if (mine < d * w) return false;
    }
    return true;
}

namespace {

InputClusterSequence assemble_input(const AgentState& state, std::span<const RoadClusterSequence> sensed,
                                    const NetworkGraph& g, long now, double cap, double gap) {
    const IntersectionConfig& ic = g.intersection(state.id);
    std::map<RoadId, std::vector<Cluster>> projected_by_road;
    std::vector<Cluster> projected;
    for (const auto& [from, msg] : state.outflow_inbox) {
        for (const Cluster& c : receive_projection(msg, g, now)) {
            if (c.arr > cap) continue;
            projected_by_road[c.origin].push_back(c);
            projected.push_back(c);
        }
    }
    const double horizon = prediction_horizon(g, state.id, projected, cap);

    std::vector<RoadClusterSequence> seqs;
    for (const RoadClusterSequence& s : sensed) {
        RoadClusterSequence kept{s.road, {}};
        for (const Cluster& c : s.clusters)
            if (c.arr <= horizon) kept.clusters.push_back(c);
        seqs.push_back(std::move(kept));
    }
    for (auto& [road, list] : projected_by_road) {
        RoadClusterSequence s{road, {}};
        for (const Cluster& c : list)
            if (c.arr <= horizon) s.clusters.push_back(c);
        std::stable_sort(s.clusters.begin(), s.clusters.end(),
                         [](const Cluster& a, const Cluster& b) { return a.arr < b.arr; });
        s.clusters = coalesce_fragments(s.clusters, gap);
        seqs.push_back(std::move(s));
    }
    return merge_by_phase(seqs, ic.phases, horizon);
}

void trim_to(InputClusterSequence& input, double horizon) {
    input.horizon = horizon;
    for (auto& [p, list] : input.phases)
        std::erase_if(list, [horizon](const Cluster& c) { return c.arr > horizon; });
}

}  // namespace

TickResult dcc_tick(AgentState& state, std::span<const RoadClusterSequence> sensed, const NetworkGraph& g,
                    const TurningProportions& zeta, const SignalView& signal, long now) {
    const IntersectionConfig& ic = g.intersection(state.id);
    const DccOptions& opt = state.options;
    TickResult out;

    InputClusterSequence input = assemble_input(state, sensed, g, now, opt.horizon_cap, opt.gap_threshold);

    DelayParams params;
    params.changeover = ic.changeover;
    params.min_green = ic.min_green;
    params.max_green = ic.max_green;
    params.initial.phase = signal.phase;
    params.initial.green_elapsed = signal.green_elapsed;
    params.initial.changeover_remaining = signal.changeover_remaining;

    for (RoadId e : ic.entries) {
        double d = 0.0;
        if (opt.use_augmented && !opt.zero_feedback) d = effective_feedback(g, state.id, e, zeta, state, now);
        out.feedback[e] = d;
    }
    out.mode = opt.use_augmented ? DelayMode::augmented : DelayMode::baseline;
    if (opt.use_augmented && opt.use_bottleneck_criterion) {
        std::map<IntersectionId, std::pair<double, double>> downstream;
        for (const auto& [key, msg] : state.feedback_inbox)
            downstream[key.first] = {msg.aggregate * staleness_weight(now - msg.issued_at),
                                     g.intersection(key.first).bottleneck_weight};
        std::vector<std::pair<double, double>> pairs;
        for (const Neighbor& n : neighbors(g, state.id)) {
            if (n.direction != Direction::downstream) continue;
            auto it = downstream.find(n.id);
            pairs.push_back(it == downstream.end()
                                ? std::pair{0.0, g.intersection(n.id).bottleneck_weight}
                                : it->second);
        }
        if (is_bottleneck(state.last_aggregate, ic.bottleneck_weight, pairs, opt.epsilon))
            out.mode = DelayMode::baseline;
    }
    params.mode = out.mode;
    params.feedback = out.feedback;

    for (;;) {
        try {
            out.cf = enforce_max_green(optimize(input, params), input, params);
            break;
        } catch (const StateSpaceOverflow&) {
            if (input.horizon <= 1.0) throw;
            trim_to(input, std::floor(input.horizon / 2.0));
        }
    }

    out.command = first_action(out.cf, signal.changeover_remaining > 0.0 ? std::nullopt : signal.phase,
                               signal.green_elapsed, params);

    out.outflow = project_outflow(out.cf, g, state.id, zeta, opt.horizon_cap, now);
    const double aggregate = aggregate_feedback(out.cf);
    for (const Neighbor& n : neighbors(g, state.id)) {
        if (n.direction != Direction::upstream) continue;
        const PhaseId p = g.phase_of_entry(n.road);
        out.congestion.push_back({state.id, n.id, p, congestion_feedback(out.cf, p), aggregate, now});
    }
    state.last = out.cf;
    state.last_aggregate = aggregate;
    return out;
}

void MessageBus::post(OutflowProjectionMsg msg) { outflow_.push_back(std::move(msg)); }
void MessageBus::post(CongestionFeedbackMsg msg) { congestion_.push_back(msg); }

std::size_t MessageBus::deliver(long now, std::map<IntersectionId, AgentState>& agents) {
    std::size_t delivered = 0;
    char buf[160];
    std::vector<OutflowProjectionMsg> keep_outflow;
    for (auto& m : outflow_) {
        if (m.issued_at >= now) {
            keep_outflow.push_back(std::move(m));
            continue;
        }
        auto it = agents.find(m.to);
        if (it == agents.end()) continue;
        if (trace_enabled_) {
            double total = 0.0;
            for (const Cluster& c : m.clusters) total += c.count;
            std::snprintf(buf, sizeof buf, "%ld,%d,%d,outflow,,%.4f", now, m.from.value, m.to.value, total);
            trace_.emplace_back(buf);
        }
        auto [slot, fresh] = it->second.outflow_inbox.try_emplace(m.from, m);
        if (!fresh && slot->second.issued_at <= m.issued_at) slot->second = std::move(m);
        ++delivered;
    }
    outflow_ = std::move(keep_outflow);

    std::vector<CongestionFeedbackMsg> keep_congestion;
    for (const auto& m : congestion_) {
        if (m.issued_at >= now) {
            keep_congestion.push_back(m);
            continue;
        }
        auto it = agents.find(m.to);
        if (it == agents.end()) continue;
        if (trace_enabled_) {
            std::snprintf(buf, sizeof buf, "%ld,%d,%d,feedback,%d,%.6f", now, m.from.value, m.to.value,
                          m.phase.value, m.value);
            trace_.emplace_back(buf);
        }
        auto [slot, fresh] = it->second.feedback_inbox.try_emplace({m.from, m.phase}, m);
        if (!fresh && slot->second.issued_at <= m.issued_at) slot->second = m;
        ++delivered;
    }
    congestion_ = std::move(keep_congestion);
    return delivered;
}

}  // namespace tsched
