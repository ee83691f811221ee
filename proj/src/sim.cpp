#include "tsched/sim.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tsched {

namespace {
constexpr std::size_t kMaxRouteLength = 64;
constexpr int kRouteAttempts = 20;
constexpr std::size_t kMaxSamples = 20;
}  // namespace

double VehicleRecord::delay() const {
    double d = 0.0;
    for (const auto& [i, w] : wait) d += w;
    return d;
}

void InvariantReport::record(const std::string& kind, const std::string& detail) {
    ++counts_[kind];
    if (samples_.size() < kMaxSamples) samples_.push_back(kind + ": " + detail);
}

std::size_t InvariantReport::total() const {
    std::size_t n = 0;
    for (const auto& [k, c] : counts_) n += c;
    return n;
}

std::size_t InvariantReport::count(const std::string& kind) const {
    auto it = counts_.find(kind);
    return it == counts_.end() ? 0 : it->second;
}

Simulator::Simulator(const Scenario& scenario, std::uint64_t seed, SimOptions options)
    : scenario_(scenario), options_(options) {
    for (const auto& [id, r] : network().roads()) links_[id];
    for (const auto& [id, ic] : network().intersections()) signals_[id] = SignalState{};
    for (const SourceDemand& s : scenario_.demand.sources) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(s.road.value)};
        rngs_.emplace(s.road, std::mt19937_64(seq));
        backlog_[s.road];
    }
}

std::vector<RoadId> Simulator::sample_route(RoadId source, std::mt19937_64& rng) const {
    const NetworkGraph& g = network();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int attempt = 0; attempt < kRouteAttempts; ++attempt) {
        std::vector<RoadId> route{source};
        RoadId r = source;
        while (g.road(r).to && route.size() < kMaxRouteLength) {
            const auto& exits = g.exits_of(r);
            const double draw = u(rng);
            double acc = 0.0;
            RoadId pick = exits.back();
            for (RoadId x : exits) {
                auto it = scenario_.demand.turn_probability.find({r, x});
                acc += it == scenario_.demand.turn_probability.end() ? 0.0 : it->second;
                if (draw < acc) {
                    pick = x;
                    break;
                }
            }
            r = pick;
            route.push_back(r);
        }
        if (!g.road(r).to) return route;
    }
    throw std::runtime_error("could not sample a route from road " + std::to_string(source.value) +
                             " that reaches a sink");
}

long Simulator::add_vehicle(std::vector<RoadId> route, std::string band) {
    VehicleRecord v;
    v.id = static_cast<long>(vehicles_.size());
    v.route = std::move(route);
    v.entered_at = static_cast<double>(tick_);
    v.band = std::move(band);
    vehicles_.push_back(std::move(v));
    motion_.push_back({});
    backlog_[vehicles_.back().route.front()].push_back(vehicles_.back().id);
    ++in_network_;
    return vehicles_.back().id;
}

long Simulator::inject_vehicle(std::vector<RoadId> route) {
    const NetworkGraph& g = network();
    if (route.empty() || !g.has_road(route.front()) || g.road(route.front()).from)
        throw std::invalid_argument("route must start on a source road");
    for (std::size_t k = 0; k + 1 < route.size(); ++k) {
        const auto& exits = g.exits_of(route[k]);
        if (std::find(exits.begin(), exits.end(), route[k + 1]) == exits.end())
            throw std::invalid_argument("route is not a connected path");
    }
    if (g.road(route.back()).to) throw std::invalid_argument("route must end on a sink road");
    return add_vehicle(std::move(route), scenario_.demand.band_at(static_cast<double>(tick_)));
}

bool Simulator::green_for(RoadId entry) const {
    const NetworkGraph& g = network();
    const SignalState& s = signals_.at(*g.road(entry).to);
    return !s.in_changeover && s.phase == g.phase_of_entry(entry);
}

SignalView Simulator::signal_view(IntersectionId i) const {
    const SignalState& s = signals_.at(i);
    SignalView v;
    v.phase = s.phase;
    if (s.in_changeover) {
        v.changeover_remaining = s.changeover_remaining;
    } else {
        v.green_elapsed = static_cast<double>(tick_ - s.phase_start);
    }
    return v;
}

std::size_t Simulator::queue_length(RoadId road) const { return links_.at(road).queue.size(); }

std::size_t Simulator::occupancy(RoadId road) const {
    const Link& l = links_.at(road);
    return l.transit.size() + l.queue.size();
}

std::size_t Simulator::backlog(RoadId source) const {
    auto it = backlog_.find(source);
    return it == backlog_.end() ? 0 : it->second.size();
}

std::vector<Arrival> Simulator::sense_road(RoadId road, double horizon) const {
    const Link& l = links_.at(road);
    std::vector<Arrival> out;
    out.reserve(l.queue.size() + l.transit.size());
    for (std::size_t k = 0; k < l.queue.size(); ++k) out.push_back({0.0, true});
    for (const auto& [v, eta] : l.transit) {
        const double dt = std::max(0.0, eta - static_cast<double>(tick_));
        if (dt > horizon) break;
        out.push_back({dt, false});
    }
    return out;
}

std::vector<RoadClusterSequence> Simulator::sense(IntersectionId i, double horizon, double gap_threshold) const {
    std::vector<RoadClusterSequence> out;
    for (RoadId e : network().intersection(i).entries) {
        const auto arrivals = sense_road(e, horizon);
        out.push_back(clusterize(e, arrivals, gap_threshold, network().road(e).saturation_flow));
    }
    return out;
}

void Simulator::step(Controller& controller) {
    const NetworkGraph& g = network();
    const long t = tick_;
    const double now = static_cast<double>(t);
    std::size_t moved = 0;

    std::map<IntersectionId, SignalCommand> commands;
    controller.decide(*this, t, commands);
    last_discharges_.clear();
    last_arrivals_.clear();

    for (auto& [i, s] : signals_) {
        if (s.in_changeover) continue;
        auto it = commands.find(i);
        if (it == commands.end() || it->second.kind != SignalCommand::Kind::switch_to) continue;
        const IntersectionConfig& ic = g.intersection(i);
        const PhaseId p = it->second.phase;
        if (p.value < 1 || p.value > static_cast<int>(ic.phases.size()))
            throw std::runtime_error("controller switched intersection " + std::to_string(i.value) +
                                     " to unknown phase " + std::to_string(p.value));
        command_trace_.push_back(std::to_string(t) + "," + std::to_string(i.value) + "," + std::to_string(p.value));
        s.phase = p;
        if (ic.changeover > 0.0) {
            s.in_changeover = true;
            s.changeover_remaining = ic.changeover;
        } else {
            s.phase_start = t;
        }
    }

    // Discharge green queues at saturation flow, subject to downstream storage.
    for (const auto& [i, ic] : g.intersections()) {
        const SignalState& s = signals_.at(i);
        for (RoadId e : ic.entries) {
            Link& link = links_.at(e);
            const RoadSegment& road = g.road(e);
            const bool green = !s.in_changeover && s.phase == g.phase_of_entry(e);
            if (!green) {
                link.credit = 0.0;
                continue;
            }
            link.credit = std::min(link.credit + road.saturation_flow, std::max(1.0, road.saturation_flow));
            while (link.credit >= 1.0 - 1e-9 && !link.queue.empty()) {
                const long v = link.queue.front();
                if (motion_[v].ready_tick > t) break;
                VehicleRecord& rec = vehicles_[v];
                const RoadId next = rec.route[rec.leg + 1];
                const RoadSegment& nr = g.road(next);
                if (nr.to && occupancy(next) >= static_cast<std::size_t>(nr.capacity)) break;
                link.queue.pop_front();
                link.credit -= 1.0;
                if (options_.check_invariants) {
                    if (!green_for(e)) invariants_.record("red_discharge", "road " + std::to_string(e.value));
                    if (motion_[v].seq <= link.last_seq)
                        invariants_.record("fifo", "road " + std::to_string(e.value) + " vehicle " + std::to_string(v));
                }
                link.last_seq = motion_[v].seq;
                last_discharges_.push_back({e, next, 1.0});
                ++moved;
                ++rec.leg;
                if (!nr.to) {
                    rec.exited_at = now;
                    --in_network_;
                    ++exited_;
                } else {
                    links_.at(next).transit.emplace_back(v, now + nr.travel_time());
                }
            }
        }
    }

    for (auto& [i, s] : signals_) {
        if (!s.in_changeover) continue;
        s.changeover_remaining -= 1.0;
        if (s.changeover_remaining <= 1e-9) {
            s.in_changeover = false;
            s.changeover_remaining = 0.0;
            s.phase_start = t + 1;
        }
    }

    // Travelling vehicles that reach the stop line during this tick join the queue.
    for (auto& [r, link] : links_) {
        while (!link.transit.empty() && link.transit.front().second < now + 1.0) {
            const long v = link.transit.front().first;
            link.transit.pop_front();
            if (!link.queue.empty() || !green_for(r)) ++vehicles_[v].stops;
            motion_[v].ready_tick = t + 1;
            motion_[v].seq = seq_++;
            link.queue.push_back(v);
            ++last_arrivals_[r];
            ++moved;
        }
    }

    if (demand_enabled_) {
        const std::string band = scenario_.demand.band_at(now);
        for (const SourceDemand& s : scenario_.demand.sources) {
            const double lambda = scenario_.demand.rate(s, now);
            if (lambda <= 0.0) continue;
            auto& rng = rngs_.at(s.road);
            std::poisson_distribution<int> arrivals(lambda);
            const int n = arrivals(rng);
            for (int k = 0; k < n; ++k) add_vehicle(sample_route(s.road, rng), band);
        }
    }
    for (auto& [src, queue] : backlog_) {
        const RoadSegment& road = g.road(src);
        Link& link = links_.at(src);
        while (!queue.empty() && occupancy(src) < static_cast<std::size_t>(road.capacity)) {
            link.transit.emplace_back(queue.front(), now + road.travel_time());
            queue.pop_front();
            ++moved;
        }
    }

    for (auto& [r, link] : links_) {
        if (link.queue.empty()) continue;
        const IntersectionId at = *g.road(r).to;
        for (long v : link.queue)
            if (motion_[v].ready_tick <= t) vehicles_[v].wait[at] += 1.0;
    }
    for (auto& [src, queue] : backlog_) {
        if (queue.empty()) continue;
        const IntersectionId at = *g.road(src).to;
        for (long v : queue) vehicles_[v].wait[at] += 1.0;
    }

    if (moved == 0 && in_network_ > 0) {
        if (++idle_ticks_ >= options_.deadlock_ticks) deadlocked_ = true;
    } else {
        idle_ticks_ = 0;
    }
    tick_ = t + 1;
    if (options_.check_invariants) check_tick();
}

void Simulator::check_tick() {
    const NetworkGraph& g = network();
    std::size_t on_roads = 0;
    for (const auto& [r, link] : links_) {
        const std::size_t occ = link.transit.size() + link.queue.size();
        on_roads += occ;
        if (occ > static_cast<std::size_t>(g.road(r).capacity))
            invariants_.record("capacity", "road " + std::to_string(r.value) + " at tick " + std::to_string(tick_));
    }
    for (const auto& [src, q] : backlog_) on_roads += q.size();
    if (on_roads != in_network_ || vehicles_.size() != exited_ + in_network_)
        invariants_.record("conservation", "tick " + std::to_string(tick_));

    for (const auto& [i, s] : signals_) {
        if (s.in_changeover) continue;
        const IntersectionConfig& ic = g.intersection(i);
        if (static_cast<double>(tick_ - s.phase_start) <= ic.max_green + 1.0) continue;
        for (RoadId e : ic.entries) {
            if (g.phase_of_entry(e) == s.phase || links_.at(e).queue.empty()) continue;
            invariants_.record("max_green", "intersection " + std::to_string(i.value) + " at tick " +
                                                std::to_string(tick_));
            break;
        }
    }
}

}  // namespace tsched
