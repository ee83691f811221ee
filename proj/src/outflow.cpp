#include "tsched/outflow.h"

#include <algorithm>
#include <cstdio>
#include <map>

namespace tsched {

std::vector<OutflowProjectionMsg> project_outflow(const ControlFlow& cf, const NetworkGraph& g, IntersectionId i,
                                                  const TurningProportions& zeta, double horizon, long tick) {
    std::map<IntersectionId, OutflowProjectionMsg> out;
    for (const Neighbor& n : neighbors(g, i))
        if (n.direction == Direction::downstream) out[n.id] = OutflowProjectionMsg{i, n.id, tick, {}};

    for (const ScheduledCluster& sc : cf.scheduled) {
        const Cluster& c = sc.cluster;
        for (RoadId x : g.exits_of(c.origin)) {
            const RoadSegment& link = g.road(x);
            if (!link.to) continue;
            const double z = zeta(c.origin, x);
            if (z <= 0.0) continue;
            Cluster f;
            f.count = c.count * z;
            f.arr = sc.ast + link.travel_time();
            f.dep = f.arr + c.duration() * z;
            f.origin = x;
            f.provenance = Provenance::projected;
            f.projected_from = i;
            if (f.arr > horizon || f.count < kMinFragment) continue;
            out.at(*link.to).clusters.push_back(f);
        }
    }
    std::vector<OutflowProjectionMsg> msgs;
    for (auto& [j, m] : out) {
        std::stable_sort(m.clusters.begin(), m.clusters.end(),
                         [](const Cluster& a, const Cluster& b) { return a.arr < b.arr; });
        msgs.push_back(std::move(m));
    }
    return msgs;
}

std::vector<Cluster> receive_projection(const OutflowProjectionMsg& msg, const NetworkGraph& g, long now) {
    const double shift = static_cast<double>(now - msg.issued_at);
    std::vector<Cluster> out;
    for (Cluster c : msg.clusters) {
        const double tt = g.road(c.origin).travel_time();
        c.arr -= shift;
        c.dep -= shift;
        if (c.dep <= tt) continue;
        if (c.arr < tt) {
            c.count *= (c.dep - tt) / (c.dep - c.arr);
            c.arr = tt;
        }
        if (c.count < kMinFragment) continue;
        out.push_back(c);
    }
    return out;
}

std::vector<Cluster> coalesce_fragments(std::span<const Cluster> sorted, double gap) {
    std::vector<Cluster> out;
    for (const Cluster& c : sorted) {
        if (!out.empty() && c.arr <= out.back().dep + gap) {
            Cluster& b = out.back();
            b.count += c.count;
            b.dep = std::max(b.dep, c.arr) + c.duration();
            continue;
        }
        out.push_back(c);
    }
    return out;
}

std::string encode_projection(const OutflowProjectionMsg& msg) {
    std::string s = std::to_string(msg.from.value) + "," + std::to_string(msg.to.value) + "," +
                    std::to_string(msg.issued_at) + "," + std::to_string(msg.clusters.size());
    char buf[96];
    for (const Cluster& c : msg.clusters) {
        std::snprintf(buf, sizeof buf, ",%.4f,%.3f,%.3f,%d", c.count, c.arr, c.dep, c.origin.value);
        s += buf;
    }
    return s;
}

}  // namespace tsched
