#include "doctest.h"
#include "tsched/network.h"

using namespace tsched;

namespace {

const char* kTwoNodes = R"(
[network]
name = "pair"
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
lanes = 2
[[network.road]]
id = 3
from = 2
to = 1
length = 150
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
length = 200
[signals]
max_green = 50
[[signals.intersection]]
id = 1
[[signals.intersection.phase]]
entries = [1]
[[signals.intersection.phase]]
entries = [3]
[[signals.intersection]]
id = 2
[[signals.intersection.phase]]
movements = [[2, 5]]
[[signals.intersection.phase]]
movements = [[6, 3], [6, 5]]
)";

}  // namespace

TEST_CASE("explicit two-intersection network loads") {
    const NetworkGraph g = load_network(kTwoNodes);
    CHECK(g.intersections().size() == 2);
    CHECK(g.road_between(IntersectionId{1}, IntersectionId{2}) == RoadId{2});
    CHECK(g.road_between(IntersectionId{2}, IntersectionId{1}) == RoadId{3});
    CHECK(g.phase_of_entry(RoadId{3}) == PhaseId{2});
    CHECK(g.phase_of_neighbor(IntersectionId{1}, IntersectionId{2}) == PhaseId{1});
    CHECK(g.intersection(IntersectionId{1}).max_green == 50);
    CHECK(g.road(RoadId{2}).capacity == 42);
    CHECK(g.road(RoadId{2}).saturation_flow == doctest::Approx(1.0));
    // entries shorthand excludes the U-turn back onto the road it came from
    CHECK(g.exits_of(RoadId{3}) == std::vector<RoadId>{RoadId{4}});
    CHECK(g.exits_of(RoadId{1}) == std::vector<RoadId>{RoadId{2}, RoadId{4}});
}

TEST_CASE("neighbors are sorted and exclude external nodes") {
    const NetworkGraph g = load_network(kTwoNodes);
    const auto n = neighbors(g, IntersectionId{1});
    REQUIRE(n.size() == 2);
    CHECK(n[0] == Neighbor{IntersectionId{2}, Direction::upstream, RoadId{3}});
    CHECK(n[1] == Neighbor{IntersectionId{2}, Direction::downstream, RoadId{2}});
    CHECK_THROWS(neighbors(g, IntersectionId{9}));
}

TEST_CASE("bottleneck weight defaults to relative entry capacity") {
    const NetworkGraph g = load_network(kTwoNodes);
    double sum = 0.0;
    for (const auto& [id, ic] : g.intersections()) sum += ic.bottleneck_weight;
    CHECK(sum == doctest::Approx(2.0));
    const double c1 = g.road(RoadId{1}).capacity + g.road(RoadId{3}).capacity;
    const double c2 = g.road(RoadId{2}).capacity + g.road(RoadId{6}).capacity;
    CHECK(g.intersection(IntersectionId{1}).bottleneck_weight == doctest::Approx(2.0 * c1 / (c1 + c2)));
}

TEST_CASE("serialization round-trips") {
    const NetworkGraph g = load_network(kTwoNodes);
    const NetworkGraph again = load_network(serialize_network(g));
    CHECK(again == g);

    const NetworkGraph grid = load_network("[network]\ntemplate = \"grid\"\nrows = 2\ncols = 3\n");
    CHECK(load_network(serialize_network(grid)) == grid);
}

TEST_CASE("4x6 grid has 24 two-phase intersections") {
    const NetworkGraph g = load_network("[network]\ntemplate = \"grid\"\nrows = 4\ncols = 6\n");
    CHECK(g.intersections().size() == 24);
    for (const auto& [id, ic] : g.intersections()) CHECK(ic.phases.size() == 2);
    // interior node: four neighbors each way
    const auto n = neighbors(g, IntersectionId{8});
    CHECK(n.size() == 8);
    // corner: two each way
    CHECK(neighbors(g, IntersectionId{1}).size() == 4);
    for (const auto& [id, r] : g.roads()) CHECK(r.travel_time() > 0.0);
}

TEST_CASE("neighbor relation is symmetric and every internal road maps to one phase") {
    const NetworkGraph g = load_network("[network]\ntemplate = \"grid\"\nrows = 3\ncols = 3\n");
    for (const auto& [i, ic] : g.intersections()) {
        for (const Neighbor& n : neighbors(g, i)) {
            bool back = false;
            for (const Neighbor& m : neighbors(g, n.id)) back |= m.id == i;
            CHECK(back);
            if (n.direction == Direction::downstream) CHECK(g.phase_of_neighbor(i, n.id).has_value());
        }
    }
}

TEST_CASE("validation errors") {
    CHECK_THROWS_AS(load_network("[network]\n"), ScenarioError);
    CHECK_THROWS_AS(load_network("[network\n"), ScenarioError);
    // dangling intersection reference
    CHECK_THROWS_AS(load_network(R"(
[network]
[[network.intersection]]
id = 1
[[network.road]]
id = 1
from = "source"
to = 7
length = 10
)"),
                    ScenarioError);
    // entry not covered by any phase
    CHECK_THROWS_AS(load_network(R"(
[network]
[[network.intersection]]
id = 1
[[network.road]]
id = 1
from = "source"
to = 1
length = 10
[[network.road]]
id = 2
from = "source"
to = 1
length = 10
[[network.road]]
id = 3
from = 1
to = "sink"
length = 10
[[signals.intersection]]
id = 1
[[signals.intersection.phase]]
entries = [1]
)"),
                    ScenarioError);
    CHECK_THROWS_AS(load_network("[network]\ntemplate = \"grid\"\nrows = 1\ncols = 2\n[signals]\nmin_green = 70\n"),
                    ScenarioError);
}
