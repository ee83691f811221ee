#pragma once

#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tsched/cluster.h"

namespace tsched {

enum class DelayMode { baseline, augmented };

/// Signal state the schedule starts from.
struct InitialSignal {
    std::optional<PhaseId> phase;     // green (or changing over into) this phase
    double green_elapsed = 0.0;       // s of green already shown on `phase`
    double changeover_remaining = 0.0;  // > 0 while changing over into `phase`
};

struct DelayParams {
    DelayMode mode = DelayMode::baseline;
    /// Effective next-hop delay per entry road, s/veh. Ignored in baseline mode.
    std::map<RoadId, double> feedback;
    double changeover = 5.0;
    double min_green = 5.0;
    double max_green = std::numeric_limits<double>::infinity();
    InitialSignal initial;
    double time_step = 0.5;            // DP time resolution
    std::size_t max_states = 4'000'000;  // cap on the consumed-vector lattice
};

struct ScheduledCluster {
    Cluster cluster;  // as quantized by the optimizer
    PhaseId phase;
    double ast = 0.0;
    double local_delay = 0.0;
    double augmented_delay = 0.0;
    bool new_run = false;      // starts a green run (after a switch or a forced restart)
    double green_start = 0.0;  // start of the green run serving this cluster
    std::size_t index = 0;     // position in its phase list of the optimized input

    double finish() const { return ast + cluster.duration(); }
};

/// Intersection schedule: phase sequence and per-cluster timing. `scheduled` is aligned with `phase_sequence`;
/// `deferred` holds phase tails left unserved within the horizon, charged
/// their wait up to the horizon (ast = max(horizon, arr)).
struct ControlFlow {
    std::vector<PhaseId> phase_sequence;
    std::vector<ScheduledCluster> scheduled;
    std::vector<ScheduledCluster> deferred;
    double total_local_delay = 0.0;
    double total_augmented_delay = 0.0;
    double horizon = 0.0;
    bool max_green_forced = false;  // split cap hit; overflow moved to `deferred`

    bool empty() const { return scheduled.empty() && deferred.empty(); }
};

class StateSpaceOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// |c| * (ast - arr). Throws std::invalid_argument when ast < arr.
double cluster_delay(const Cluster& c, double ast);

/// |c| * ((ast - arr) + feedback). Throws on ast < arr or negative feedback.
double augmented_delay(const Cluster& c, double ast, double feedback);

/// Rounds arrivals and service durations onto the optimizer's time grid.
InputClusterSequence quantize(const InputClusterSequence& input, double step);

/// Forward-recursion DP over order-preserving interleavings of the phase
/// lists. Minimizes summed augmented delay; the local delay of the
/// same schedule is tracked in a second table. A phase switch costs one
/// changeover; a run that would exceed max_green is restarted after a
/// changeover. Each phase may leave its remaining clusters unserved, each
/// charged |c| * (H - arr) with no next-hop term.
ControlFlow optimize(const InputClusterSequence& input, const DelayParams& params);

inline constexpr int kMaxGreenSplitIterations = 20;

/// Splits the first cluster whose service overruns max_green at the vehicle
/// boundary and re-solves, until every green run fits or the iteration cap is
/// reached (then the overflow is cut and `max_green_forced` is set).
ControlFlow enforce_max_green(const ControlFlow& cf, const InputClusterSequence& input, const DelayParams& params);

/// Longest green run in the schedule, counting green already elapsed.
double longest_green_run(const ControlFlow& cf, const DelayParams& params);

struct SignalCommand {
    enum class Kind { hold, switch_to };
    Kind kind = Kind::hold;
    PhaseId phase{};

    static SignalCommand hold() { return {}; }
    static SignalCommand switch_to(PhaseId p) { return {Kind::switch_to, p}; }
    bool operator==(const SignalCommand&) const = default;
};

/// Rolling-horizon executor: hold while the schedule continues the current
/// green run or min_green has not elapsed; otherwise switch to the head phase.
SignalCommand first_action(const ControlFlow& cf, std::optional<PhaseId> current_phase, double green_elapsed,
                           const DelayParams& params);

}  // namespace tsched
