#include "tsched/turning.h"

#include <stdexcept>

namespace tsched {

namespace {

void normalize_into(const std::map<Movement, double>& weights, const std::map<Movement, double>& fallback,
                    std::map<Movement, double>& out) {
    std::map<RoadId, double> totals;
    for (const auto& [m, w] : weights) totals[m.entry] += w;
    out.clear();
    for (const auto& [m, w] : weights) {
        const double total = totals.at(m.entry);
        if (total > 0.0) {
            out[m] = w / total;
        } else {
            auto it = fallback.find(m);
            out[m] = it == fallback.end() ? 0.0 : it->second;
        }
    }
}

}  // namespace

double TurningProportions::operator()(RoadId entry, RoadId exit) const {
    auto it = share.find({entry, exit});
    return it == share.end() ? 0.0 : it->second;
}

TurningProportions make_turning_proportions(std::map<Movement, double> weights) {
    std::map<RoadId, int> movements;
    for (const auto& [m, w] : weights) {
        if (w < 0.0) throw std::invalid_argument("turning weight must be >= 0");
        ++movements[m.entry];
    }
    std::map<Movement, double> uniform;
    for (const auto& [m, w] : weights) uniform[m] = 1.0 / movements.at(m.entry);

    TurningProportions z;
    normalize_into(weights, uniform, z.prior);
    for (const auto& [m, w] : z.prior) z.average[m] = 0.0;
    z.share = z.prior;
    return z;
}

TurningProportions uniform_turning_proportions(const NetworkGraph& g) {
    std::map<Movement, double> w;
    for (const auto& [iid, ic] : g.intersections())
        for (RoadId e : ic.entries)
            for (RoadId x : g.exits_of(e)) w[{e, x}] = 1.0;
    return make_turning_proportions(std::move(w));
}

TurningProportions update_turning_proportions(const TurningProportions& zeta, std::span<const TurnCount> observed,
                                              double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0, 1]");
    std::map<Movement, double> counts;
    for (const TurnCount& c : observed) {
        if (c.count < 0.0) throw std::invalid_argument("turn count must be >= 0");
        counts[{c.entry, c.exit}] += c.count;
    }
    TurningProportions out = zeta;
    for (const auto& [m, c] : counts) out.average.try_emplace(m, 0.0);
    for (auto& [m, avg] : out.average) {
        auto it = counts.find(m);
        avg = (1.0 - alpha) * avg + alpha * (it == counts.end() ? 0.0 : it->second);
    }
    normalize_into(out.average, out.prior, out.share);
    return out;
}

}  // namespace tsched
