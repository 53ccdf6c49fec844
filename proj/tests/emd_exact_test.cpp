#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "roademd/emd_exact.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace roademd;
using testsupport::uniform_int;

namespace {

RoadMap square_map() {
  return RoadMap({"1", "2", "3", "4"}, {{"N", "1", "2", 1.0},
                                        {"E", "2", "3", 1.0},
                                        {"S", "3", "4", 1.0},
                                        {"W", "4", "1", 1.0}});
}

Measure square_supply() {
  return {{"E", Density::uniform(1.0, 0.4)}, {"S", Density::uniform(1.0, 0.6)}};
}

Measure square_demand() {
  return {{"N", Density::uniform(1.0, 0.2)}, {"W", Density::uniform(1.0, 0.8)}};
}

}  // namespace

TEST_CASE("road classification by carried mass") {
  RoadMap sq = square_map();
  Classification cls = classify_roads(sq, square_supply(), square_demand());
  CHECK(cls.kind[sq.road_index("E")] == RoadKind::Supply);
  CHECK(cls.kind[sq.road_index("S")] == RoadKind::Supply);
  CHECK(cls.kind[sq.road_index("N")] == RoadKind::Demand);
  CHECK(cls.kind[sq.road_index("W")] == RoadKind::Demand);
  CHECK(cls.imbalance[sq.road_index("E")] == Catch::Approx(0.4));
  CHECK(cls.imbalance[sq.road_index("W")] == Catch::Approx(-0.8));

  Classification empty = classify_roads(sq, {}, {});
  for (RoadKind k : empty.kind) CHECK(k == RoadKind::Transshipment);

  Measure both{{"E", Density::uniform(1.0, 0.1)}};
  CHECK_THROWS_AS(classify_roads(sq, both, both), ValidationError);
}

TEST_CASE("cracking splits a road where the carried measure switches") {
  RoadMap line({"u", "v"}, {{"a", "u", "v", 2.0}});
  Measure src{{"a", Density({0.0, 1.0, 2.0}, {1.0, 0.0})}};
  Measure dst{{"a", Density({0.0, 1.0, 2.0}, {0.0, 1.0})}};
  CrackedInstance inst = crack_roads(line, src, dst);

  REQUIRE(inst.splits.size() == 1);
  CHECK(inst.splits[0].cuts == std::vector<double>{1.0});
  REQUIRE(inst.splits[0].child_ids.size() == 2);
  CHECK(inst.map.num_vertices() == 3);
  CHECK(inst.map.num_roads() == 2);
  CHECK(road_mass(inst.src, inst.splits[0].child_ids[0]) == Catch::Approx(1.0));
  CHECK(road_mass(inst.dst, inst.splits[0].child_ids[1]) == Catch::Approx(1.0));
  // Children span the pieces and both carried densities are positive throughout.
  CHECK(inst.map.road(0).length == Catch::Approx(1.0));
  CHECK(inst.map.road(1).length == Catch::Approx(1.0));
}

TEST_CASE("cracking leaves pure full-support roads alone") {
  RoadMap sq = square_map();
  CrackedInstance inst = crack_roads(sq, square_supply(), square_demand());
  CHECK(inst.map.num_roads() == 4);
  CHECK(inst.map.num_vertices() == 4);
  for (const auto& split : inst.splits) {
    CHECK(split.cuts.empty());
    CHECK(split.child_ids.size() == 1);
  }
  CHECK(measures_equal(inst.src, square_supply()));
  CHECK(measures_equal(inst.dst, square_demand()));
}

TEST_CASE("cracking cuts out every zero stretch") {
  RoadMap line({"u", "v"}, {{"a", "u", "v", 4.0}});
  Measure src{{"a", Density({0.0, 1.0, 2.0, 3.0, 4.0}, {1.0, 0.0, 2.0, 0.0})}};
  CrackedInstance inst = crack_roads(line, src, {});
  CHECK(inst.splits[0].cuts == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(inst.map.num_roads() == 4);
  // Alternating children: carrying, empty, carrying, empty.
  CHECK(road_mass(inst.src, inst.splits[0].child_ids[0]) == Catch::Approx(1.0));
  CHECK(road_mass(inst.src, inst.splits[0].child_ids[1]) == 0.0);
  CHECK(road_mass(inst.src, inst.splits[0].child_ids[2]) == Catch::Approx(2.0));
  CHECK(road_mass(inst.src, inst.splits[0].child_ids[3]) == 0.0);
}

TEST_CASE("cracking preserves travel distances") {
  std::mt19937_64 g = make_stream(41, 0);
  for (int trial = 0; trial < 20; ++trial) {
    testsupport::RandomInstance ri = testsupport::random_instance(g);
    Measure overlap = pointwise_min(ri.src, ri.dst);
    CrackedInstance inst = crack_roads(ri.map, subtract(ri.src, overlap),
                                       subtract(ri.dst, overlap));
    auto dist_old = vertex_distances(ri.map);
    auto dist_new = vertex_distances(inst.map);
    for (int k = 0; k < 5; ++k) {
      Address a{uniform_int(g, 0, ri.map.num_roads() - 1), 0.0};
      a.offset = uniform01(g) * ri.map.road(a.road).length;
      Address b{uniform_int(g, 0, ri.map.num_roads() - 1), 0.0};
      b.offset = uniform01(g) * ri.map.road(b.road).length;
      double before = point_distance(ri.map, dist_old, a, b);
      double after = point_distance(inst.map, dist_new, inst.remap(ri.map, a),
                                    inst.remap(ri.map, b));
      CHECK(after == Catch::Approx(before).margin(1e-9));
    }
  }
}

TEST_CASE("preprocess rejects unequal totals and removes shared mass") {
  RoadMap sq = square_map();
  Measure small{{"E", Density::uniform(1.0, 0.1)}};
  CHECK_THROWS_AS(preprocess(sq, square_supply(), small), InfeasibleError);

  CrackedInstance same = preprocess(sq, square_supply(), square_supply());
  CHECK(same.src.empty());
  CHECK(same.dst.empty());
}

TEST_CASE("transport network has the promised shape") {
  RoadMap sq = square_map();
  WassersteinNetwork w = build_wasserstein_network(sq, square_supply(), square_demand());
  CHECK(w.net.num_vertices == 8);
  CHECK(w.net.num_edges() == 16);  // 8 decision + 8 routing
  int decision = 0, routing = 0;
  for (const auto& info : w.edge_info)
    (info.kind == WassersteinNetwork::EdgeKind::Routing ? routing : decision) += 1;
  CHECK(decision == 8);
  CHECK(routing == 8);

  // Supply roads point outward, demand roads inward.
  int e_road = sq.road_index("E");
  CHECK(w.net.edges[w.tconn[e_road]].tail == w.road_vertex(e_road, 4));
  CHECK(w.net.edges[w.tconn[e_road]].head == sq.vertex_index("2"));
  int n_road = sq.road_index("N");
  CHECK(w.net.edges[w.hconn[n_road]].tail == sq.vertex_index("2"));
  CHECK(w.net.edges[w.hconn[n_road]].head == w.road_vertex(n_road, 4));

  // Road vertices carry the signed imbalance.
  CHECK(w.net.supply[w.road_vertex(e_road, 4)] == Catch::Approx(0.4));
  CHECK(w.net.supply[w.road_vertex(n_road, 4)] == Catch::Approx(-0.2));
  for (int v = 0; v < 4; ++v) CHECK(w.net.supply[v] == 0.0);
}

TEST_CASE("parallel roads joined at both ends make the smallest nontrivial network") {
  RoadMap pair({"u", "v"}, {{"a", "u", "v", 1.0}, {"b", "u", "v", 1.0}});
  Measure src{{"a", Density::uniform(1.0, 1.0)}};
  Measure dst{{"b", Density::uniform(1.0, 1.0)}};
  WassersteinNetwork w = build_wasserstein_network(pair, src, dst);
  CHECK(w.net.num_vertices == 4);
  CHECK(w.net.num_edges() == 6);  // 4 decision + 2 routing

  RoadMap loopy({"u", "v"}, {{"a", "u", "v", 1.0}, {"b", "u", "v", 1.0}, {"c", "u", "u", 2.0}});
  WassersteinNetwork wt = build_wasserstein_network(loopy, {}, {});
  CHECK(wt.net.num_vertices == 5);
  CHECK(wt.net.num_edges() == 2);  // routing only; the loop joins nothing new
}

TEST_CASE("exact transport distance on the four-road square") {
  RoadMap sq = square_map();
  EmdExactResult res = emd_exact(sq, square_supply(), square_demand(), 1e-9);
  REQUIRE(res.converged);
  CHECK(res.value == Catch::Approx(31.0 / 30.0).margin(1e-7));
  CHECK(res.gap <= 1e-9);

  const RoadMap& cm = res.instance.map;
  auto flow_at = [&](const std::string& id, bool tail) {
    int r = cm.road_index(id);
    return res.flow[tail ? res.network.tconn[r] : res.network.hconn[r]];
  };
  CHECK(flow_at("E", true) == Catch::Approx(1.0 / 3.0).margin(1e-4));
  CHECK(flow_at("E", false) == Catch::Approx(1.0 / 15.0).margin(1e-4));
  CHECK(flow_at("S", true) == Catch::Approx(0.0).margin(1e-4));
  CHECK(flow_at("S", false) == Catch::Approx(3.0 / 5.0).margin(1e-4));
  CHECK(flow_at("N", true) == Catch::Approx(0.0).margin(1e-4));
  CHECK(flow_at("N", false) == Catch::Approx(1.0 / 5.0).margin(1e-4));
  CHECK(flow_at("W", true) == Catch::Approx(2.0 / 3.0).margin(1e-4));
  CHECK(flow_at("W", false) == Catch::Approx(2.0 / 15.0).margin(1e-4));
}

TEST_CASE("identical measures cost nothing to move") {
  RoadMap sq = square_map();
  EmdExactResult res = emd_exact(sq, square_supply(), square_supply());
  CHECK(res.converged);
  CHECK(res.value == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("half-supports on one road give the textbook quarter") {
  RoadMap line({"u", "v"}, {{"a", "u", "v", 1.0}});
  Measure src{{"a", Density({0.0, 0.5, 1.0}, {1.0, 0.0})}};
  Measure dst{{"a", Density({0.0, 0.5, 1.0}, {0.0, 1.0})}};
  EmdExactResult res = emd_exact(line, src, dst, 1e-9);
  REQUIRE(res.converged);
  CHECK(res.value == Catch::Approx(0.25).margin(1e-7));
}

TEST_CASE("transport distance is symmetric") {
  std::mt19937_64 g = make_stream(41, 1);
  for (int trial = 0; trial < 8; ++trial) {
    testsupport::RandomInstance ri = testsupport::random_instance(g);
    double ab = emd_exact(ri.map, ri.src, ri.dst, 1e-8).value;
    double ba = emd_exact(ri.map, ri.dst, ri.src, 1e-8).value;
    CHECK(ab == Catch::Approx(ba).margin(1e-6));
  }
}

TEST_CASE("adding a common measure does not change the distance") {
  RoadMap sq = square_map();
  Measure extra{{"N", Density::uniform(1.0, 0.3)}, {"S", Density::uniform(1.0, 0.5)}};
  double base = emd_exact(sq, square_supply(), square_demand(), 1e-9).value;
  double shifted = emd_exact(sq, add(square_supply(), extra), add(square_demand(), extra), 1e-9).value;
  CHECK(shifted == Catch::Approx(base).margin(1e-7));
}

TEST_CASE("network optimum matches the closed form on path graphs") {
  std::mt19937_64 g = make_stream(41, 2);
  for (int trial = 0; trial < 12; ++trial) {
    testsupport::RandomInstance ri = testsupport::random_path_instance(g);
    double oracle = testsupport::line_wasserstein(ri.map, ri.src, ri.dst);
    EmdExactResult res = emd_exact(ri.map, ri.src, ri.dst, 1e-9);
    REQUIRE(res.converged);
    CHECK(res.value == Catch::Approx(oracle).margin(1e-6));
  }
}

TEST_CASE("flow interpretation names the splits and routes") {
  RoadMap sq = square_map();
  EmdExactResult res = emd_exact(sq, square_supply(), square_demand(), 1e-9);
  FlowInterpretation fi =
      interpret_flow(res.network, res.instance.src, res.instance.dst, res.flow);

  REQUIRE(fi.roads.size() == 4);
  auto split_of = [&](const std::string& id) {
    for (const auto& s : fi.roads)
      if (s.road_id == id) return s;
    FAIL("road split missing: " << id);
    return fi.roads.front();
  };
  auto e_split = split_of("E");
  CHECK(e_split.kind == RoadKind::Supply);
  CHECK(e_split.split_coord == Catch::Approx(5.0 / 6.0).margin(1e-3));

  // Total routed volume accounts for the full unit of mass.
  double volume = 0.0;
  for (const auto& r : fi.routes) volume += r.volume;
  CHECK(volume == Catch::Approx(1.0).margin(1e-6));
  // Each route runs from a supply road to a demand road through vertex labels.
  for (const auto& r : fi.routes) {
    CHECK((r.from_road == "E" || r.from_road == "S"));
    CHECK((r.to_road == "N" || r.to_road == "W"));
    CHECK(r.waypoints.size() >= 3);
  }

  WassersteinNetwork idle = build_wasserstein_network(sq, {}, {});
  FlowInterpretation none = interpret_flow(idle, {}, {}, Flow(idle.net.num_edges(), 0.0));
  CHECK(none.roads.empty());
  CHECK(none.routes.empty());
}
