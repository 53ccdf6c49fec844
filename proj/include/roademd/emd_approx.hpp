#pragma once

// Two discretizations that bracket and approximate the exact transport
// distance, both built on an epsilon-tessellation (every road cut into equal
// cells no longer than epsilon):
//
//   - a bipartite network from supply cells to demand cells, solved once with
//     optimistic (lower-bound) and once with pessimistic (upper-bound) cell
//     distances, sandwiching the true distance with a gap at most
//     2 * epsilon * total mass;
//   - a sparse "path" network threading each road's cells on a chain and
//     reusing the road graph for routing, whose optimum equals the bipartite
//     lower bound while growing only linearly in the cell count.
//
// Both run on the preprocessed (overlap-subtracted, cracked) instance, so the
// cell geometry matches across schemes and against the exact formulation.

#include <cmath>
#include <string>
#include <vector>

#include "roademd/mincost.hpp"
#include "roademd/preprocess.hpp"

namespace roademd {

struct Tessellation {
  struct Cell {
    int road = -1;
    int index = 0;     // 0-based position along the road, tail to head
    double lo = 0.0;   // cell spans [lo, hi] on its road
    double hi = 0.0;
  };
  std::vector<Cell> cells;      // road-major, ascending index
  std::vector<int> road_first;  // cells of road r: [road_first[r], road_first[r+1])
  std::vector<double> cell_length;  // per road
};

inline Tessellation tessellate(const RoadMap& map, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("tessellate: epsilon must be > 0");
  Tessellation t;
  t.road_first.assign(map.num_roads() + 1, 0);
  t.cell_length.assign(map.num_roads(), 0.0);
  for (int r = 0; r < map.num_roads(); ++r) {
    double L = map.road(r).length;
    int n = static_cast<int>(std::ceil(L / eps - 1e-12));
    n = std::max(n, 1);
    double cell = L / n;
    t.cell_length[r] = cell;
    t.road_first[r] = static_cast<int>(t.cells.size());
    for (int k = 0; k < n; ++k)
      t.cells.push_back({r, k, k * cell, k + 1 == n ? L : (k + 1) * cell});
    t.road_first[r + 1] = static_cast<int>(t.cells.size());
  }
  t.road_first[map.num_roads()] = static_cast<int>(t.cells.size());
  return t;
}

struct CellBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Exact min and a certified max of the point distance over two cells. The
// lower bound minimizes each candidate route separately (every route cost is
// separable in the two coordinates, so the minimum over the product of
// intervals is attained at per-route nearest corners); the upper bound is the
// smallest per-route maximum, which dominates the true maximum.
inline CellBounds cell_distance_bounds(const RoadMap& map,
                                       const std::vector<std::vector<double>>& dist,
                                       const Tessellation::Cell& a, const Tessellation::Cell& b) {
  const Road& ra = map.road(a.road);
  const Road& rb = map.road(b.road);
  CellBounds out;
  double lo = std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  if (a.road == b.road) {
    lo = std::max({0.0, a.lo - b.hi, b.lo - a.hi});
    hi = std::max(std::abs(a.lo - b.hi), std::abs(a.hi - b.lo));
  }
  const double exit_near[2] = {a.lo, ra.length - a.hi};
  const double exit_far[2] = {a.hi, ra.length - a.lo};
  const double enter_near[2] = {b.lo, rb.length - b.hi};
  const double enter_far[2] = {b.hi, rb.length - b.lo};
  const int ends_a[2] = {ra.tail, ra.head};
  const int ends_b[2] = {rb.tail, rb.head};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double mid = dist[ends_a[i]][ends_b[j]];
      lo = std::min(lo, exit_near[i] + mid + enter_near[j]);
      hi = std::min(hi, exit_far[i] + mid + enter_far[j]);
    }
  out.lower = lo;
  out.upper = std::max(hi, lo);
  return out;
}

struct ApproxBounds {
  double lower = 0.0;
  double upper = 0.0;
  int supply_cells = 0;
  int demand_cells = 0;
  int vertices = 0;
  int edges = 0;
};

namespace detail {

struct CellMasses {
  Tessellation tess;
  std::vector<double> src_mass;  // per cell
  std::vector<double> dst_mass;
};

inline CellMasses cell_masses(const RoadMap& map, const Measure& src, const Measure& dst,
                              double eps) {
  CellMasses cm{tessellate(map, eps), {}, {}};
  cm.src_mass.assign(cm.tess.cells.size(), 0.0);
  cm.dst_mass.assign(cm.tess.cells.size(), 0.0);
  for (std::size_t c = 0; c < cm.tess.cells.size(); ++c) {
    const auto& cell = cm.tess.cells[c];
    const std::string& id = map.road(cell.road).id;
    if (auto it = src.find(id); it != src.end())
      cm.src_mass[c] = it->second.cdf(cell.hi) - it->second.cdf(cell.lo);
    if (auto it = dst.find(id); it != dst.end())
      cm.dst_mass[c] = it->second.cdf(cell.hi) - it->second.cdf(cell.lo);
  }
  return cm;
}

}  // namespace detail

// Lower and upper bounds on the transport distance from the complete bipartite
// cell network. Zero-mass cells are pruned; the edge count is exactly
// (#supply cells) * (#demand cells).
inline ApproxBounds emd_bounds(const RoadMap& map, const Measure& src, const Measure& dst,
                               double eps) {
  CrackedInstance inst = preprocess(map, src, dst);
  detail::CellMasses cm = detail::cell_masses(inst.map, inst.src, inst.dst, eps);
  std::vector<std::vector<double>> dist = vertex_distances(inst.map);

  std::vector<int> supply_cells, demand_cells;
  for (std::size_t c = 0; c < cm.tess.cells.size(); ++c) {
    if (cm.src_mass[c] > 0.0) supply_cells.push_back(static_cast<int>(c));
    if (cm.dst_mass[c] > 0.0) demand_cells.push_back(static_cast<int>(c));
  }

  FlowNetwork net;
  for (int c : supply_cells) {
    int v = net.add_vertex();
    net.supply[v] = cm.src_mass[c];
  }
  for (int c : demand_cells) {
    int v = net.add_vertex();
    net.supply[v] = -cm.dst_mass[c];
  }
  std::vector<double> lower_w, upper_w;
  lower_w.reserve(supply_cells.size() * demand_cells.size());
  upper_w.reserve(lower_w.capacity());
  for (std::size_t i = 0; i < supply_cells.size(); ++i)
    for (std::size_t j = 0; j < demand_cells.size(); ++j) {
      net.add_edge(static_cast<int>(i), static_cast<int>(supply_cells.size() + j));
      CellBounds cb = cell_distance_bounds(inst.map, dist, cm.tess.cells[supply_cells[i]],
                                           cm.tess.cells[demand_cells[j]]);
      lower_w.push_back(cb.lower);
      upper_w.push_back(cb.upper);
    }

  ApproxBounds out;
  out.supply_cells = static_cast<int>(supply_cells.size());
  out.demand_cells = static_cast<int>(demand_cells.size());
  out.vertices = net.num_vertices;
  out.edges = net.num_edges();
  out.lower = min_cost_flow_linear(net, lower_w).cost;
  out.upper = min_cost_flow_linear(net, upper_w).cost;
  if (out.upper < out.lower) out.upper = out.lower;
  return out;
}

struct PathNetwork {
  struct Device {
    int road = -1;  // cracked road index
    bool supply = false;
    std::vector<int> cell_vertices;   // u^1..u^N, tail to head
    std::vector<int> forward_edges;   // gap k (0-based): u^{k+1} -> u^{k+2}
    std::vector<int> backward_edges;  // gap k: u^{k+2} -> u^{k+1}
    int tconn = -1;  // connector at the tail end (weight 0)
    int hconn = -1;
  };

  FlowNetwork net;
  std::vector<double> weights;
  std::vector<Device> devices;
  Tessellation tess;
  int map_vertices = 0;
};

// Sparse cell network: every non-transshipment road contributes a chain of
// cell vertices with two-way internal edges of the cell length and zero-weight
// connectors to the road's endpoints (pointing out of supply devices, into
// demand devices); routing edges mirror the exact network.
inline PathNetwork build_path_network(const RoadMap& map, const Measure& src, const Measure& dst,
                                      double eps) {
  Classification cls = classify_roads(map, src, dst);
  detail::CellMasses cm = detail::cell_masses(map, src, dst, eps);

  PathNetwork p;
  p.tess = cm.tess;
  p.map_vertices = map.num_vertices();
  for (int v = 0; v < map.num_vertices(); ++v) p.net.add_vertex();

  for (int r = 0; r < map.num_roads(); ++r) {
    if (cls.kind[r] == RoadKind::Transshipment) continue;
    PathNetwork::Device dev;
    dev.road = r;
    dev.supply = cls.kind[r] == RoadKind::Supply;
    int first = p.tess.road_first[r], last = p.tess.road_first[r + 1];
    for (int c = first; c < last; ++c) {
      int v = p.net.add_vertex();
      p.net.supply[v] = dev.supply ? cm.src_mass[c] : -cm.dst_mass[c];
      dev.cell_vertices.push_back(v);
    }
    double w = p.tess.cell_length[r];
    for (std::size_t k = 0; k + 1 < dev.cell_vertices.size(); ++k) {
      dev.forward_edges.push_back(p.net.add_edge(dev.cell_vertices[k], dev.cell_vertices[k + 1]));
      p.weights.push_back(w);
      dev.backward_edges.push_back(p.net.add_edge(dev.cell_vertices[k + 1], dev.cell_vertices[k]));
      p.weights.push_back(w);
    }
    const Road& road = map.road(r);
    if (dev.supply) {
      dev.tconn = p.net.add_edge(dev.cell_vertices.front(), road.tail);
      p.weights.push_back(0.0);
      dev.hconn = p.net.add_edge(dev.cell_vertices.back(), road.head);
      p.weights.push_back(0.0);
    } else {
      dev.tconn = p.net.add_edge(road.tail, dev.cell_vertices.front());
      p.weights.push_back(0.0);
      dev.hconn = p.net.add_edge(road.head, dev.cell_vertices.back());
      p.weights.push_back(0.0);
    }
    p.devices.push_back(std::move(dev));
  }

  for (const auto& [pair, len] : joining_lengths(map)) {
    for (auto [u, v] : {std::pair(pair.first, pair.second), std::pair(pair.second, pair.first)}) {
      p.net.add_edge(u, v);
      p.weights.push_back(len);
    }
  }
  return p;
}

struct DeviceReport {
  std::string road_id;
  bool supply = false;
  bool parted = false;
  int parting_index = 0;   // cells on the tail side
  double tail_mass = 0.0;  // connector volumes
  double head_mass = 0.0;
  double device_cost = 0.0;  // internal edge cost of this device
};

struct PathResult {
  double value = 0.0;
  int vertices = 0;
  int edges = 0;
  int cells = 0;
  bool all_parted = true;
  std::vector<DeviceReport> devices;
};

// Optimum of the path network, plus the per-device parting diagnostics: in an
// optimal flow every device splits at one index, tail-side cells shipping
// toward the tail connector and head-side cells toward the head connector.
inline PathResult emd_path(const RoadMap& map, const Measure& src, const Measure& dst,
                           double eps) {
  CrackedInstance inst = preprocess(map, src, dst);
  PathNetwork p = build_path_network(inst.map, inst.src, inst.dst, eps);
  LinearFlowResult sol = min_cost_flow_linear(p.net, p.weights);

  PathResult out;
  out.value = sol.cost;
  out.vertices = p.net.num_vertices;
  out.edges = p.net.num_edges();
  out.cells = static_cast<int>(p.tess.cells.size());

  constexpr double kFlowTol = 1e-9;
  for (const auto& dev : p.devices) {
    DeviceReport rep;
    rep.road_id = inst.map.road(dev.road).id;
    rep.supply = dev.supply;
    rep.tail_mass = sol.flow[dev.tconn];
    rep.head_mass = sol.flow[dev.hconn];
    // Tail-side traffic runs backward in supply devices and forward in demand
    // devices; the device is parted when tail-side gaps all precede head-side
    // gaps.
    const auto& low = dev.supply ? dev.backward_edges : dev.forward_edges;
    const auto& high = dev.supply ? dev.forward_edges : dev.backward_edges;
    int max_low = -1, min_high = static_cast<int>(low.size()) + 1;
    for (std::size_t k = 0; k < low.size(); ++k) {
      if (sol.flow[low[k]] > kFlowTol) max_low = std::max(max_low, static_cast<int>(k));
      if (sol.flow[high[k]] > kFlowTol) min_high = std::min(min_high, static_cast<int>(k));
    }
    rep.parted = max_low < min_high;
    rep.parting_index = max_low >= 0 ? max_low + 2 : (rep.tail_mass > kFlowTol ? 1 : 0);
    for (int e : dev.forward_edges) rep.device_cost += p.weights[e] * sol.flow[e];
    for (int e : dev.backward_edges) rep.device_cost += p.weights[e] * sol.flow[e];
    out.all_parted = out.all_parted && rep.parted;
    out.devices.push_back(std::move(rep));
  }
  return out;
}

}  // namespace roademd
