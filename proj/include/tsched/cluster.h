#pragma once

#include <map>
#include <span>
#include <vector>

#include "tsched/network.h"

namespace tsched {

enum class Provenance { local_sensed, projected };

/// Aggregated platoon or queue: the job unit of the intersection scheduler.
/// Times are seconds relative to the planning instant.
struct Cluster {
    double count = 0.0;  // fractional after turning-proportion weighting
    double arr = 0.0;    // arrival at the stop line
    double dep = 0.0;    // departure if served without delay
    RoadId origin;
    Provenance provenance = Provenance::local_sensed;
    IntersectionId projected_from{};  // set when provenance == projected

    double duration() const { return dep - arr; }
};

/// Checked constructor: requires count > 0 and 0 <= arr <= dep.
Cluster make_cluster(double count, double arr, double dep, RoadId origin,
                     Provenance provenance = Provenance::local_sensed, IntersectionId projected_from = {});

struct RoadClusterSequence {
    RoadId road;
    std::vector<Cluster> clusters;  // increasing arr, prev.dep < next.arr
};

/// Per-phase merge of road sequences over a prediction horizon.
struct InputClusterSequence {
    std::map<PhaseId, std::vector<Cluster>> phases;
    double horizon = 0.0;

    std::size_t cluster_count() const;
};

/// Detector report for one vehicle on an entry road.
struct Arrival {
    double time = 0.0;  // predicted stop-line arrival, s from now
    bool queued = false;
};

inline constexpr double kDefaultGapThreshold = 2.5;
inline constexpr double kHorizonCap = 120.0;

/// Groups one road's arrivals into clusters. Queued vehicles form the head
/// cluster at arr = 0. A vehicle joins the open cluster when it arrives before
/// the cluster would clear the stop line, or within `gap_threshold` of the
/// later of the previous member and the cluster's last saturation slot.
/// dep = arr + count / saturation_flow.
RoadClusterSequence clusterize(RoadId road, std::span<const Arrival> arrivals, double gap_threshold,
                               double saturation_flow);

/// Combines road sequences into per-phase lists sorted by arr; ties go to the
/// lower road id, then to input order. Throws ScenarioError for a road that
/// no phase serves.
InputClusterSequence merge_by_phase(std::span<const RoadClusterSequence> seqs, std::span<const Phase> phases,
                                    double horizon);

/// H = max entry-road travel time, extended to the latest projected arrival,
/// capped at `cap`.
double prediction_horizon(const NetworkGraph& g, IntersectionId i, std::span<const Cluster> projected,
                          double cap = kHorizonCap);

}  // namespace tsched
