#pragma once

#include <span>
#include <string>
#include <vector>

#include "tsched/scheduler.h"
#include "tsched/turning.h"

namespace tsched {

/// Predicted arrivals that intersection `from` expects to release toward
/// `to`, relative to tick `issued_at`.
struct OutflowProjectionMsg {
    IntersectionId from;
    IntersectionId to;
    long issued_at = 0;
    std::vector<Cluster> clusters;  // origin = the link from -> to, sorted by arr
};

/// Fragments lighter than this are dropped.
inline constexpr double kMinFragment = 0.05;

/// Splits every scheduled cluster over the exits of its entry road by turning
/// share and shifts it by the exit link's travel time: count * zeta,
/// arr = ast + travel_time, duration scaled by zeta. Fragments arriving after
/// `horizon` are dropped. One message per downstream neighbor, possibly empty.
std::vector<OutflowProjectionMsg> project_outflow(const ControlFlow& cf, const NetworkGraph& g, IntersectionId i,
                                                  const TurningProportions& zeta, double horizon, long tick);

/// Joins projected fragments on one road (sorted by arr) that arrive within
/// `gap` of the previous fragment's clearance. Counts add; service is back to back.
std::vector<Cluster> coalesce_fragments(std::span<const Cluster> sorted, double gap);

/// Re-bases a received projection to tick `now`. The part of a fragment that
/// should already have entered the link (arr < travel time) is sensed locally
/// by then, so it is trimmed off proportionally.
std::vector<Cluster> receive_projection(const OutflowProjectionMsg& msg, const NetworkGraph& g, long now);

/// Flat record: from,to,issued_at,n,{count,arr,dep,road}*n.
std::string encode_projection(const OutflowProjectionMsg& msg);

}  // namespace tsched
