#pragma once

// Exact transport distance between two equal-mass measures on a road network,
// as the optimum of a convex-cost flow on a compact network:
//
//   - one flow vertex per roadmap vertex and one per road;
//   - a supply road sends its mass out through two "decision" edges, one to
//     its tail and one to its head, whose convex costs q(x) price draining x
//     units of the road's own density through that end (demand roads receive
//     through mirrored edges);
//   - pairs of vertices joined by at least one road get a "routing" edge in
//     each direction weighted by the shortest such road.
//
// With V vertices and R roads that is V + R flow vertices and at most 4R
// edges, independent of any discretization.

#include <cassert>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "roademd/mincost.hpp"
#include "roademd/preprocess.hpp"

namespace roademd {

struct WassersteinNetwork {
  enum class EdgeKind : char { TailConn, HeadConn, Routing };
  struct EdgeInfo {
    EdgeKind kind = EdgeKind::Routing;
    int road = -1;  // decision edges: the road they serve
  };

  FlowNetwork net;
  std::vector<EdgeCost> costs;
  std::vector<std::string> vertex_labels;  // vertex names, then road ids
  std::vector<EdgeInfo> edge_info;
  std::vector<int> tconn;  // per road: decision edge id or -1
  std::vector<int> hconn;

  int road_vertex(int r, int num_map_vertices) const { return num_map_vertices + r; }
};

// Requires measures already satisfying the road-purity assumption (use
// preprocess() first for raw inputs).
inline WassersteinNetwork build_wasserstein_network(const RoadMap& map, const Measure& src,
                                                    const Measure& dst) {
  Classification cls = classify_roads(map, src, dst);
  const int V = map.num_vertices();
  const int R = map.num_roads();

  WassersteinNetwork w;
  for (int v = 0; v < V; ++v) {
    w.net.add_vertex();
    w.vertex_labels.push_back(map.vertex_name(v));
  }
  for (int r = 0; r < R; ++r) {
    int rv = w.net.add_vertex();
    w.net.supply[rv] = cls.imbalance[r];
    w.vertex_labels.push_back(map.road(r).id);
  }
  w.tconn.assign(R, -1);
  w.hconn.assign(R, -1);

  auto qcost_edge = [](const Density& d) {
    auto dp = std::make_shared<Density>(d);
    return EdgeCost(ConvexCost{[dp](double x) { return dp->qcost(x); },
                               [dp](double x) { return dp->inverse_cdf(x); }});
  };

  for (int r = 0; r < R; ++r) {
    if (cls.kind[r] == RoadKind::Transshipment) continue;
    const Road& road = map.road(r);
    int rv = V + r;
    const Density& phi = cls.kind[r] == RoadKind::Supply ? src.at(road.id) : dst.at(road.id);
    bool supply = cls.kind[r] == RoadKind::Supply;
    int t = supply ? w.net.add_edge(rv, road.tail) : w.net.add_edge(road.tail, rv);
    w.costs.push_back(qcost_edge(phi));
    w.edge_info.push_back({WassersteinNetwork::EdgeKind::TailConn, r});
    int h = supply ? w.net.add_edge(rv, road.head) : w.net.add_edge(road.head, rv);
    w.costs.push_back(qcost_edge(phi.reverse()));
    w.edge_info.push_back({WassersteinNetwork::EdgeKind::HeadConn, r});
    w.tconn[r] = t;
    w.hconn[r] = h;
  }

  for (const auto& [pair, len] : joining_lengths(map)) {
    for (auto [u, v] : {std::pair(pair.first, pair.second), std::pair(pair.second, pair.first)}) {
      w.net.add_edge(u, v);
      w.costs.push_back(LinearCost{len});
      w.edge_info.push_back({WassersteinNetwork::EdgeKind::Routing, -1});
    }
  }

  assert(w.net.num_vertices == V + R);
  assert(w.net.num_edges() <= 4 * R);
  return w;
}

struct EmdExactResult {
  double value = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  CrackedInstance instance;    // preprocessed problem actually solved
  WassersteinNetwork network;  // network over instance.map
  Flow flow;
};

inline EmdExactResult emd_exact(const RoadMap& map, const Measure& src, const Measure& dst,
                                double tol = 1e-7, int max_iterations = 100000) {
  CrackedInstance inst = preprocess(map, src, dst);
  WassersteinNetwork w = build_wasserstein_network(inst.map, inst.src, inst.dst);
  ConvexFlowResult sol = min_cost_flow_convex(w.net, w.costs, tol, max_iterations);
  return EmdExactResult{sol.cost,        sol.gap,      sol.iterations, sol.converged,
                        std::move(inst), std::move(w), std::move(sol.flow)};
}

// Human-readable account of an optimal flow: how every road splits its mass
// between its two ends, and the routed volumes between roads.
struct FlowInterpretation {
  struct RoadSplit {
    std::string road_id;
    RoadKind kind = RoadKind::Transshipment;
    double tail_mass = 0.0;   // volume through the tail-side decision edge
    double head_mass = 0.0;
    double split_coord = 0.0;  // mass in [0, split_coord] uses the tail side
  };
  struct Route {
    std::string from_road;
    std::string to_road;
    std::vector<std::string> waypoints;  // vertex labels along the walk
    double volume = 0.0;
  };
  std::vector<RoadSplit> roads;
  std::vector<Route> routes;
};

inline FlowInterpretation interpret_flow(const WassersteinNetwork& w, const Measure& src,
                                         const Measure& dst, const Flow& flow) {
  FlowInterpretation out;
  int R = static_cast<int>(w.tconn.size());
  int V = w.net.num_vertices - R;
  for (int r = 0; r < R; ++r) {
    if (w.tconn[r] < 0) continue;
    FlowInterpretation::RoadSplit split;
    split.road_id = w.vertex_labels[V + r];
    double b = w.net.supply[V + r];
    split.kind = b > 0 ? RoadKind::Supply : RoadKind::Demand;
    split.tail_mass = flow[w.tconn[r]];
    split.head_mass = flow[w.hconn[r]];
    const Measure& m = split.kind == RoadKind::Supply ? src : dst;
    split.split_coord = m.at(split.road_id).inverse_cdf(
        std::min(split.tail_mass, m.at(split.road_id).total_mass()));
    out.roads.push_back(std::move(split));
  }
  for (const FlowPath& p : decompose_paths(w.net, flow)) {
    if (p.cycle || p.edges.empty()) continue;
    FlowInterpretation::Route route;
    route.volume = p.volume;
    route.waypoints.push_back(w.vertex_labels[w.net.edges[p.edges.front()].tail]);
    for (int e : p.edges) route.waypoints.push_back(w.vertex_labels[w.net.edges[e].head]);
    route.from_road = route.waypoints.front();
    route.to_road = route.waypoints.back();
    out.routes.push_back(std::move(route));
  }
  return out;
}

}  // namespace roademd
