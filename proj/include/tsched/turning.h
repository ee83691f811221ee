#pragma once

#include <map>
#include <span>

#include "tsched/network.h"

namespace tsched {

/// Per-movement turning shares, estimated from moving averages of observed
/// flow counts and falling back to a prior for entries with no observations.
struct TurningProportions {
    std::map<Movement, double> prior;    // normalized per entry
    std::map<Movement, double> average;  // EMA of per-window counts
    std::map<Movement, double> share;    // current estimate, sums to 1 per entry

    double operator()(RoadId entry, RoadId exit) const;
};

/// Normalizes `weights` per entry road; an entry whose weights are all zero
/// gets a uniform split over its movements.
TurningProportions make_turning_proportions(std::map<Movement, double> weights);

/// Uniform prior over every exit reachable from each entry.
TurningProportions uniform_turning_proportions(const NetworkGraph& g);

struct TurnCount {
    RoadId entry;
    RoadId exit;
    double count = 0.0;
};

/// avg <- (1 - alpha) * avg + alpha * count for each observed pair (pairs not
/// listed observe 0), then per-entry normalization. Entries whose averages
/// are all zero keep the prior.
TurningProportions update_turning_proportions(const TurningProportions& zeta, std::span<const TurnCount> observed,
                                              double alpha);

}  // namespace tsched
