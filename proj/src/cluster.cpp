#include "tsched/cluster.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace tsched {

Cluster make_cluster(double count, double arr, double dep, RoadId origin, Provenance provenance,
                     IntersectionId projected_from) {
    if (!(count > 0.0)) throw std::invalid_argument("cluster count must be > 0");
    if (!(arr >= 0.0) || !(dep >= arr)) throw std::invalid_argument("cluster needs 0 <= arr <= dep");
    return Cluster{count, arr, dep, origin, provenance, projected_from};
}

std::size_t InputClusterSequence::cluster_count() const {
    std::size_t n = 0;
    for (const auto& [p, cs] : phases) n += cs.size();
    return n;
}

RoadClusterSequence clusterize(RoadId road, std::span<const Arrival> arrivals, double gap_threshold,
                               double saturation_flow) {
    if (!(gap_threshold > 0.0)) throw std::invalid_argument("gap_threshold must be > 0");
    if (!(saturation_flow > 0.0)) throw std::invalid_argument("saturation_flow must be > 0");
    RoadClusterSequence seq{road, {}};
    const double headway = 1.0 / saturation_flow;

    bool open = false;
    Cluster cur;
    double last = 0.0;
    for (const Arrival& a : arrivals) {
        const double t = a.queued ? 0.0 : std::max(0.0, a.time);
        if (open && t < last) throw std::invalid_argument("arrivals must be sorted");
        const bool joins = open && (t <= cur.dep || t - std::max(last, cur.dep - headway) <= gap_threshold);
        if (joins) {
            cur.count += 1.0;
            cur.dep += headway;
        } else {
            if (open) seq.clusters.push_back(cur);
            cur = Cluster{1.0, t, t + headway, road, Provenance::local_sensed, {}};
            open = true;
        }
        last = t;
    }
    if (open) seq.clusters.push_back(cur);
    return seq;
}

InputClusterSequence merge_by_phase(std::span<const RoadClusterSequence> seqs, std::span<const Phase> phases,
                                    double horizon) {
    std::map<RoadId, PhaseId> phase_of;
    for (const Phase& p : phases)
        for (const Movement& m : p.movements) phase_of.emplace(m.entry, p.id);

    struct Keyed {
        double arr;
        int road;
        std::size_t seq;
        std::size_t idx;
        const Cluster* c;
    };
    std::map<PhaseId, std::vector<Keyed>> buckets;
    for (const Phase& p : phases) buckets[p.id];
    for (std::size_t s = 0; s < seqs.size(); ++s) {
        auto it = phase_of.find(seqs[s].road);
        if (it == phase_of.end())
            throw ScenarioError("road " + std::to_string(seqs[s].road.value) + " is not served by any phase");
        for (std::size_t k = 0; k < seqs[s].clusters.size(); ++k) {
            const Cluster& c = seqs[s].clusters[k];
            buckets[it->second].push_back({c.arr, seqs[s].road.value, s, k, &c});
        }
    }

    InputClusterSequence out;
    out.horizon = horizon;
    for (auto& [pid, list] : buckets) {
        std::sort(list.begin(), list.end(), [](const Keyed& a, const Keyed& b) {
            return std::tie(a.arr, a.road, a.seq, a.idx) < std::tie(b.arr, b.road, b.seq, b.idx);
        });
        auto& dst = out.phases[pid];
        dst.reserve(list.size());
        for (const Keyed& k : list) dst.push_back(*k.c);
    }
    return out;
}

double prediction_horizon(const NetworkGraph& g, IntersectionId i, std::span<const Cluster> projected,
                          double cap) {
    double h = 0.0;
    for (RoadId e : g.intersection(i).entries) h = std::max(h, g.road(e).travel_time());
    for (const Cluster& c : projected) h = std::max(h, c.arr);
    return std::min(h, cap);
}

}  // namespace tsched
