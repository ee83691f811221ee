#include <cmath>
#include <random>

#include "doctest.h"
#include "tsched/coordination.h"

using namespace tsched;

namespace {

// Intersection 1 feeds three neighbors over 278 m links (20 s at 13.9 m/s).
const char* kStar = R"(
[network]
[[network.intersection]]
id = 1
[[network.intersection]]
id = 2
[[network.intersection]]
id = 3
[[network.intersection]]
id = 4
[[network.road]]
id = 1
from = "source"
to = 1
length = 200
[[network.road]]
id = 2
from = 1
to = 2
length = 278
[[network.road]]
id = 3
from = 1
to = 3
length = 278
[[network.road]]
id = 4
from = 1
to = 4
length = 278
[[network.road]]
id = 5
from = 2
to = "sink"
length = 100
[[network.road]]
id = 6
from = 3
to = "sink"
length = 100
[[network.road]]
id = 7
from = 4
to = "sink"
length = 100
[[signals.intersection]]
id = 1
[[signals.intersection.phase]]
entries = [1]
[[signals.intersection]]
id = 2
[[signals.intersection.phase]]
entries = [2]
[[signals.intersection]]
id = 3
[[signals.intersection.phase]]
entries = [3]
[[signals.intersection]]
id = 4
[[signals.intersection.phase]]
entries = [4]
)";

// Road 1 crosses 1 -> 2 on phase 1; road 3 leaves the network on phase 2.
const char* kPair = R"(
[network]
[[network.intersection]]
id = 1
[[network.intersection]]
id = 2
[[network.road]]
id = 1
from = "source"
to = 1
length = 200
[[network.road]]
id = 2
from = 1
to = 2
length = 150
[[network.road]]
id = 3
from = "source"
to = 1
length = 200
[[network.road]]
id = 4
from = 1
to = "sink"
length = 100
[[network.road]]
id = 5
from = 2
to = "sink"
length = 100
[[network.road]]
id = 6
from = "source"
to = 2
length = 100
[[network.road]]
id = 7
from = 2
to = "sink"
length = 100
[[signals.intersection]]
id = 1
[[signals.intersection.phase]]
movements = [[1, 2]]
[[signals.intersection.phase]]
movements = [[3, 4]]
[[signals.intersection]]
id = 2
[[signals.intersection.phase]]
movements = [[2, 5]]
[[signals.intersection.phase]]
movements = [[6, 7]]
)";

ScheduledCluster scheduled(PhaseId p, double count, double local) {
    ScheduledCluster sc;
    sc.phase = p;
    sc.cluster = Cluster{count, 0.0, count * 2.0, RoadId{1}};
    sc.ast = local / count;
    sc.local_delay = local;
    sc.augmented_delay = local;
    return sc;
}

TurningProportions pair_zeta() {
    return make_turning_proportions({{Movement{RoadId{1}, RoadId{2}}, 1.0},
                                     {Movement{RoadId{3}, RoadId{4}}, 1.0},
                                     {Movement{RoadId{2}, RoadId{5}}, 1.0},
                                     {Movement{RoadId{6}, RoadId{7}}, 1.0}});
}

std::vector<RoadClusterSequence> pair_sensed() {
    return {{RoadId{1}, {Cluster{4, 0, 8, RoadId{1}}}}, {RoadId{3}, {Cluster{4, 0, 8, RoadId{3}}}}};
}

double scheduled_count(const ControlFlow& cf, PhaseId p) {
    double n = 0.0;
    for (const auto& sc : cf.scheduled)
        if (sc.phase == p) n += sc.cluster.count;
    return n;
}

}  // namespace

TEST_CASE("turning shares from observed counts") {
    const NetworkGraph g = load_network(kStar);
    auto zeta = uniform_turning_proportions(g);
    CHECK(zeta(RoadId{1}, RoadId{2}) == doctest::Approx(1.0 / 3.0));
    std::vector<TurnCount> obs{{RoadId{1}, RoadId{2}, 10}, {RoadId{1}, RoadId{3}, 5}, {RoadId{1}, RoadId{4}, 5}};
    auto z = update_turning_proportions(zeta, obs, 1.0);
    CHECK(z(RoadId{1}, RoadId{2}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(z(RoadId{1}, RoadId{3}) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(z(RoadId{1}, RoadId{4}) == doctest::Approx(0.25).epsilon(1e-12));

    auto idle = update_turning_proportions(zeta, {}, 0.1);
    CHECK(idle(RoadId{1}, RoadId{3}) == doctest::Approx(1.0 / 3.0));

    auto steady = zeta;
    std::vector<TurnCount> window{{RoadId{1}, RoadId{2}, 6}, {RoadId{1}, RoadId{3}, 3}, {RoadId{1}, RoadId{4}, 1}};
    for (int k = 0; k < 300; ++k) steady = update_turning_proportions(steady, window, 0.1);
    CHECK(steady(RoadId{1}, RoadId{2}) == doctest::Approx(0.6));
    CHECK(steady(RoadId{1}, RoadId{4}) == doctest::Approx(0.1));
}

TEST_CASE("outflow splits by turning share") {
    const NetworkGraph g = load_network(kStar);
    auto zeta = make_turning_proportions({{Movement{RoadId{1}, RoadId{2}}, 0.5},
                                          {Movement{RoadId{1}, RoadId{3}}, 0.25},
                                          {Movement{RoadId{1}, RoadId{4}}, 0.25}});
    ControlFlow cf;
    ScheduledCluster sc;
    sc.cluster = Cluster{4, 0, 8, RoadId{1}};
    sc.phase = PhaseId{1};
    sc.ast = 10;
    cf.scheduled.push_back(sc);
    auto msgs = project_outflow(cf, g, IntersectionId{1}, zeta, 120, 7);
    REQUIRE(msgs.size() == 3);
    const double counts[] = {2.0, 1.0, 1.0};
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(msgs[k].from == IntersectionId{1});
        CHECK(msgs[k].to == IntersectionId{static_cast<int>(k) + 2});
        CHECK(msgs[k].issued_at == 7);
        REQUIRE(msgs[k].clusters.size() == 1);
        const Cluster& f = msgs[k].clusters[0];
        CHECK(f.count == doctest::Approx(counts[k]));
        CHECK(f.arr == doctest::Approx(30.0));
        CHECK(f.duration() == doctest::Approx(8.0 * counts[k] / 4.0));
        CHECK(f.provenance == Provenance::projected);
        CHECK(f.origin == RoadId{static_cast<int>(k) + 2});
    }

    auto straight = make_turning_proportions({{Movement{RoadId{1}, RoadId{2}}, 1.0}});
    auto one = project_outflow(cf, g, IntersectionId{1}, straight, 120, 7);
    double total = 0.0;
    for (const auto& m : one)
        for (const auto& c : m.clusters) total += c.count;
    CHECK(total == 4.0);

    auto none = project_outflow(cf, g, IntersectionId{1}, zeta, 25, 7);
    for (const auto& m : none) CHECK(m.clusters.empty());
}

TEST_CASE("projection keeps every fragment above the floor") {
    const NetworkGraph g = load_network(kStar);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        auto zeta = make_turning_proportions({{Movement{RoadId{1}, RoadId{2}}, u(rng)},
                                              {Movement{RoadId{1}, RoadId{3}}, u(rng)},
                                              {Movement{RoadId{1}, RoadId{4}}, u(rng)}});
        ControlFlow cf;
        double sent = 0.0;
        for (int k = 0; k < 5; ++k) {
            ScheduledCluster sc;
            sc.cluster = Cluster{1.0 + k, 0, 2.0 + 2.0 * k, RoadId{1}};
            sc.ast = 10.0 * k;
            for (int exit = 2; exit <= 4; ++exit) {
                const double part = sc.cluster.count * zeta(RoadId{1}, RoadId{exit});
                if (part >= kMinFragment) sent += part;
            }
            cf.scheduled.push_back(sc);
        }
        double got = 0.0;
        for (const auto& m : project_outflow(cf, g, IntersectionId{1}, zeta, 1000, 0))
            for (const auto& c : m.clusters) got += c.count;
        CHECK(got == doctest::Approx(sent));
    }
}

TEST_CASE("received projections are re-based to the current tick") {
    const NetworkGraph g = load_network(kStar);
    OutflowProjectionMsg m{IntersectionId{1}, IntersectionId{2}, 10, {Cluster{2, 30, 34, RoadId{2}}}};
    auto now = receive_projection(m, g, 13);
    REQUIRE(now.size() == 1);
    CHECK(now[0].arr == 27);
    CHECK(now[0].count == 2);
    // Half the fragment should have entered the link already.
    auto late = receive_projection(m, g, 22);
    REQUIRE(late.size() == 1);
    CHECK(late[0].arr == doctest::Approx(20.0));
    CHECK(late[0].count == doctest::Approx(1.0));
    CHECK(receive_projection(m, g, 30).empty());
}

TEST_CASE("close fragments on a road are joined") {
    std::vector<Cluster> fs{Cluster{0.5, 20, 21, RoadId{2}}, Cluster{0.25, 22, 22.5, RoadId{2}},
                            Cluster{1, 40, 42, RoadId{2}}};
    auto joined = coalesce_fragments(fs, 2.5);
    REQUIRE(joined.size() == 2);
    CHECK(joined[0].count == 0.75);
    CHECK(joined[0].arr == 20);
    CHECK(joined[0].dep == 22.5);
    CHECK(joined[1].count == 1);
}

TEST_CASE("congestion feedback is the average local delay") {
    ControlFlow cf;
    cf.scheduled = {scheduled(PhaseId{1}, 2, 10), scheduled(PhaseId{1}, 3, 20), scheduled(PhaseId{2}, 4, 0)};
    CHECK(congestion_feedback(cf, PhaseId{1}) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(congestion_feedback(cf, PhaseId{2}) == 0.0);
    CHECK(congestion_feedback(cf, PhaseId{3}) == 0.0);
    CHECK(aggregate_feedback(cf) == doctest::Approx(30.0 / 9.0));

    // Splitting a cluster proportionally leaves the ratio unchanged.
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    for (int trial = 0; trial < 50; ++trial) {
        ControlFlow split = cf;
        const double f = frac(rng);
        ScheduledCluster a = cf.scheduled[1], b = cf.scheduled[1];
        a.cluster.count *= f;
        a.local_delay *= f;
        b.cluster.count *= 1.0 - f;
        b.local_delay *= 1.0 - f;
        split.scheduled[1] = a;
        split.scheduled.push_back(b);
        CHECK(congestion_feedback(split, PhaseId{1}) == doctest::Approx(6.0));
    }
}

TEST_CASE("effective feedback weights neighbors by turning share") {
    const double zeta[] = {0.5, 0.3, 0.2};
    const double fb[] = {10, 20, 30};
    CHECK(std::abs(effective_feedback(zeta, fb) - 17.0) < 1e-9);
    const double zero[] = {0, 0, 0};
    CHECK(effective_feedback(zeta, zero) == 0.0);
    const double straight[] = {1, 0, 0};
    const double mixed[] = {8, 99, 99};
    CHECK(effective_feedback(straight, mixed) == 8.0);
}

TEST_CASE("bottleneck test") {
    using P = std::pair<double, double>;
    const std::vector<P> lighter{{5, 1}, {7, 1}}, heavier{{10, 1}};
    CHECK(is_bottleneck(10, 1, lighter, 0));
    CHECK_FALSE(is_bottleneck(5, 1, heavier, 0));
    CHECK(is_bottleneck(9, 1, heavier, 2));
    CHECK(is_bottleneck(0, 1, {}, 0));
    CHECK_THROWS(is_bottleneck(1, 0, lighter, 0));

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 30.0), w(0.2, 3.0), lambda(0.1, 10.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double self = u(rng), ws = w(rng), eps = u(rng) / 5.0, l = lambda(rng);
        std::vector<P> n{{u(rng), w(rng)}, {u(rng), w(rng)}};
        std::vector<P> scaled;
        for (auto [d, wj] : n) scaled.emplace_back(d * l, wj);
        CHECK(is_bottleneck(self, ws, n, eps) == is_bottleneck(self * l, ws, scaled, eps * l));
    }
}

TEST_CASE("stale feedback fades out") {
    CHECK(staleness_weight(0) == 1.0);
    CHECK(staleness_weight(5) == 1.0);
    CHECK(staleness_weight(6) == doctest::Approx(0.8));
    CHECK(staleness_weight(10) == 0.0);
    CHECK(staleness_weight(50) == 0.0);
}

TEST_CASE("first tick plans exactly like the baseline") {
    const NetworkGraph g = load_network(kPair);
    const auto zeta = pair_zeta();
    const auto sensed = pair_sensed();
    AgentState dcc{IntersectionId{1}, {}, {}, 0.0, {}, {}};
    AgentState base = dcc;
    base.options.use_augmented = false;
    auto a = dcc_tick(dcc, sensed, g, zeta, SignalView{PhaseId{1}, 10, 0}, 0);
    auto b = dcc_tick(base, sensed, g, zeta, SignalView{PhaseId{1}, 10, 0}, 0);
    for (const auto& [road, d] : a.feedback) CHECK(d == 0.0);
    REQUIRE(a.cf.scheduled.size() == b.cf.scheduled.size());
    for (std::size_t k = 0; k < a.cf.scheduled.size(); ++k) {
        CHECK(a.cf.scheduled[k].phase == b.cf.scheduled[k].phase);
        CHECK(a.cf.scheduled[k].ast == b.cf.scheduled[k].ast);
    }
    CHECK(a.command == b.command);
}

TEST_CASE("downstream congestion holds back traffic heading there") {
    const NetworkGraph g = load_network(kPair);
    const auto zeta = pair_zeta();
    const auto sensed = pair_sensed();
    AgentState dcc{IntersectionId{1}, {}, {}, 0.0, {}, {}};
    AgentState base = dcc;
    base.options.use_augmented = false;
    const PhaseId toward = *g.phase_of_neighbor(IntersectionId{1}, IntersectionId{2});
    dcc.feedback_inbox[{IntersectionId{2}, toward}] =
        CongestionFeedbackMsg{IntersectionId{2}, IntersectionId{1}, toward, 100.0, 100.0, 0};
    auto a = dcc_tick(dcc, sensed, g, zeta, SignalView{PhaseId{2}, 10, 0}, 1);
    auto b = dcc_tick(base, sensed, g, zeta, SignalView{PhaseId{2}, 10, 0}, 1);
    CHECK(a.feedback.at(RoadId{1}) == 100.0);
    CHECK(a.mode == DelayMode::augmented);
    CHECK(scheduled_count(b.cf, PhaseId{1}) == 4.0);
    CHECK(scheduled_count(a.cf, PhaseId{1}) < scheduled_count(b.cf, PhaseId{1}));

    // The bottleneck test returns a heavily loaded agent to the local objective.
    AgentState bc = dcc;
    bc.options.use_bottleneck_criterion = true;
    bc.last_aggregate = 500.0;
    auto c = dcc_tick(bc, sensed, g, zeta, SignalView{PhaseId{2}, 10, 0}, 1);
    CHECK(c.mode == DelayMode::baseline);
    CHECK(scheduled_count(c.cf, PhaseId{1}) == 4.0);
}

TEST_CASE("emitted feedback uses local delays only") {
    const NetworkGraph g = load_network(kPair);
    const auto zeta = pair_zeta();
    std::vector<RoadClusterSequence> sensed{{RoadId{2}, {Cluster{3, 0, 6, RoadId{2}}}},
                                            {RoadId{6}, {Cluster{5, 0, 10, RoadId{6}}}}};
    AgentState a{IntersectionId{2}, {}, {}, 0.0, {}, {}};
    auto r = dcc_tick(a, sensed, g, zeta, SignalView{PhaseId{2}, 10, 0}, 3);
    REQUIRE(r.congestion.size() == 1);
    const auto& m = r.congestion[0];
    CHECK(m.to == IntersectionId{1});
    CHECK(m.phase == PhaseId{1});
    CHECK(m.issued_at == 3);
    CHECK(m.value == congestion_feedback(r.cf, PhaseId{1}));
    CHECK(m.aggregate == aggregate_feedback(r.cf));
    CHECK(m.value > 0.0);
}

TEST_CASE("messages arrive one tick after they are issued") {
    std::map<IntersectionId, AgentState> agents;
    agents[IntersectionId{1}] = AgentState{IntersectionId{1}, {}, {}, 0.0, {}, {}};
    MessageBus bus(true);
    bus.post(CongestionFeedbackMsg{IntersectionId{2}, IntersectionId{1}, PhaseId{1}, 4.0, 4.0, 5});
    bus.post(OutflowProjectionMsg{IntersectionId{2}, IntersectionId{1}, 5, {}});
    CHECK(bus.deliver(5, agents) == 0);
    CHECK(agents[IntersectionId{1}].feedback_inbox.empty());
    CHECK(bus.deliver(6, agents) == 2);
    CHECK(agents[IntersectionId{1}].feedback_inbox.size() == 1);
    bus.post(CongestionFeedbackMsg{IntersectionId{2}, IntersectionId{1}, PhaseId{1}, 9.0, 9.0, 6});
    CHECK(bus.deliver(7, agents) == 1);
    const auto& kept = agents[IntersectionId{1}].feedback_inbox.at({IntersectionId{2}, PhaseId{1}});
    CHECK(kept.value == 9.0);
    CHECK(kept.issued_at < 7);
    CHECK(bus.trace().size() == 3);
    CHECK(bus.trace()[0].rfind("6,2,1,", 0) == 0);
}
