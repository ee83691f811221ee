#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsched/outflow.h"

namespace tsched {

/// Average local delay of one phase, sent upstream. `aggregate` carries the
/// all-phase average used by the bottleneck test.
struct CongestionFeedbackMsg {
    IntersectionId from;
    IntersectionId to;  // upstream neighbor
    PhaseId phase;      // phase of `from` serving the link to -> from
    double value = 0.0;
    double aggregate = 0.0;
    long issued_at = 0;
};

inline constexpr double kDefaultEpsilon = 5.0;
inline constexpr long kStaleAfter = 5;  // ticks before feedback starts to decay
inline constexpr long kStaleSpan = 5;   // further ticks until it reaches zero

/// Σ local delay / Σ count over the phase's clusters, deferred ones included.
/// 0 for a phase without clusters.
double congestion_feedback(const ControlFlow& cf, PhaseId p);

/// Same ratio over every phase.
double aggregate_feedback(const ControlFlow& cf);

/// Σ zeta_k * feedback_k.
double effective_feedback(std::span<const double> zeta, std::span<const double> feedback);

/// Weight applied to a feedback value issued `age` ticks ago: 1 up to
/// kStaleAfter, then linear decay to 0.
double staleness_weight(long age);

struct AgentState;

/// Turning-weighted feedback of i's downstream neighbors for traffic entering
/// on `entry`, excluding the neighbor the entry comes from. Neighbors without
/// a message contribute 0.
double effective_feedback(const NetworkGraph& g, IntersectionId i, RoadId entry, const TurningProportions& zeta,
                          const AgentState& state, long now);

/// True iff self * w_self + epsilon >= d_j * w_j for every (d_j, w_j).
/// Vacuously true without neighbors.
bool is_bottleneck(double self, double w_self, std::span<const std::pair<double, double>> neighbors,
                   double epsilon);

struct DccOptions {
    bool use_augmented = true;
    bool use_bottleneck_criterion = false;
    bool zero_feedback = false;  // compute and emit feedback but schedule as if it were 0
    double epsilon = kDefaultEpsilon;
    double gap_threshold = kDefaultGapThreshold;
    double horizon_cap = kHorizonCap;
};

struct AgentState {
    IntersectionId id;
    DccOptions options;
    ControlFlow last;
    double last_aggregate = 0.0;
    std::map<IntersectionId, OutflowProjectionMsg> outflow_inbox;                    // by upstream sender
    std::map<std::pair<IntersectionId, PhaseId>, CongestionFeedbackMsg> feedback_inbox;  // by (sender, phase)
};

/// Current signal of the intersection as seen by its controller.
struct SignalView {
    std::optional<PhaseId> phase;
    double green_elapsed = 0.0;
    double changeover_remaining = 0.0;
};

struct TickResult {
    ControlFlow cf;
    SignalCommand command;
    DelayMode mode = DelayMode::baseline;
    std::map<RoadId, double> feedback;  // downstream delay charged per entry road
    std::vector<OutflowProjectionMsg> outflow;
    std::vector<CongestionFeedbackMsg> congestion;
};

/// One planning step: merge local clusters with received projections, derive
/// the downstream delay per entry, pick the objective (bottleneck test), optimize, choose the
/// signal command and emit this tick's messages.
TickResult dcc_tick(AgentState& state, std::span<const RoadClusterSequence> sensed, const NetworkGraph& g,
                    const TurningProportions& zeta, const SignalView& signal, long now);

/// Tick barrier for neighbor messages: anything posted during tick t lands in
/// the recipient's inbox at the start of tick t + 1.
class MessageBus {
public:
    explicit MessageBus(bool trace = false) : trace_enabled_(trace) {}

    void post(OutflowProjectionMsg msg);
    void post(CongestionFeedbackMsg msg);

    /// Delivers every message issued before `now`; returns how many arrived.
    std::size_t deliver(long now, std::map<IntersectionId, AgentState>& agents);

    /// CSV rows: tick,from,to,kind,phase,value (count for projections).
    const std::vector<std::string>& trace() const { return trace_; }

private:
    bool trace_enabled_;
    std::vector<OutflowProjectionMsg> outflow_;
    std::vector<CongestionFeedbackMsg> congestion_;
    std::vector<std::string> trace_;
};

}  // namespace tsched
