#pragma once

// Uncapacitated flow networks over directed multigraphs. A network is a vertex
// count, an edge list, and a per-vertex supply vector that must sum to zero
// (positive = source, negative = sink). A flow assigns a nonnegative volume to
// every edge; it is admissible when supply plus inflow equals outflow at every
// vertex. Edge costs are either linear weights or general convex functions
// given by value and subgradient oracles.

#include <cmath>
#include <functional>
#include <variant>
#include <vector>

#include "roademd/errors.hpp"

namespace roademd {

struct FlowEdge {
  int tail = -1;
  int head = -1;
};

struct FlowNetwork {
  int num_vertices = 0;
  std::vector<FlowEdge> edges;
  std::vector<double> supply;

  int add_vertex() {
    supply.push_back(0.0);
    return num_vertices++;
  }

  int add_edge(int tail, int head) {
    if (tail < 0 || tail >= num_vertices || head < 0 || head >= num_vertices)
      throw ValidationError("flow: edge endpoint out of range");
    edges.push_back({tail, head});
    return static_cast<int>(edges.size()) - 1;
  }

  int num_edges() const { return static_cast<int>(edges.size()); }
};

using Flow = std::vector<double>;

struct LinearCost {
  double weight = 0.0;
};

struct ConvexCost {
  std::function<double(double)> value;
  std::function<double(double)> subgradient;  // nondecreasing selection from the subdifferential
};

using EdgeCost = std::variant<LinearCost, ConvexCost>;

inline double edge_cost_value(const EdgeCost& c, double x) {
  if (const auto* lin = std::get_if<LinearCost>(&c)) return lin->weight * x;
  return std::get<ConvexCost>(c).value(x);
}

inline double edge_cost_subgradient(const EdgeCost& c, double x) {
  if (const auto* lin = std::get_if<LinearCost>(&c)) return lin->weight;
  return std::get<ConvexCost>(c).subgradient(x);
}

// Largest conservation violation |supply + inflow - outflow| over all
// vertices; also rejects negative flows via the violation value.
inline double conservation_violation(const FlowNetwork& net, const Flow& flow) {
  if (static_cast<int>(flow.size()) != net.num_edges())
    throw ValidationError("flow: wrong flow vector size");
  std::vector<double> residual = net.supply;
  double worst = 0.0;
  for (int e = 0; e < net.num_edges(); ++e) {
    if (flow[e] < 0.0) worst = std::max(worst, -flow[e]);
    residual[net.edges[e].tail] -= flow[e];
    residual[net.edges[e].head] += flow[e];
  }
  for (double r : residual) worst = std::max(worst, std::abs(r));
  return worst;
}

inline bool check_admissible(const FlowNetwork& net, const Flow& flow, double tol = 1e-9) {
  return conservation_violation(net, flow) <= tol;
}

inline double flow_cost(const FlowNetwork& net, const Flow& flow,
                        const std::vector<EdgeCost>& costs) {
  if (static_cast<int>(costs.size()) != net.num_edges())
    throw ValidationError("flow: wrong cost vector size");
  double total = 0.0;
  for (int e = 0; e < net.num_edges(); ++e) total += edge_cost_value(costs[e], flow[e]);
  return total;
}

inline double flow_cost(const FlowNetwork& net, const Flow& flow,
                        const std::vector<double>& weights) {
  if (static_cast<int>(weights.size()) != net.num_edges())
    throw ValidationError("flow: wrong weight vector size");
  double total = 0.0;
  for (int e = 0; e < net.num_edges(); ++e) total += weights[e] * flow[e];
  return total;
}

struct FlowPath {
  std::vector<int> edges;  // edge ids in walk order
  double volume = 0.0;
  bool cycle = false;
};

// Peels an admissible flow into source-to-sink paths plus circulation cycles.
// Walks always leave a vertex through its lowest-id positive edge, so the
// result is deterministic. The peeled paths re-induce the input flow up to
// O(1e-12) per edge.
inline std::vector<FlowPath> decompose_paths(const FlowNetwork& net, const Flow& flow) {
  if (!check_admissible(net, flow, 1e-9))
    throw ValidationError("decompose: flow is not admissible");
  constexpr double kPeelTol = 1e-12;
  std::vector<std::vector<int>> out_edges(net.num_vertices);
  for (int e = 0; e < net.num_edges(); ++e) out_edges[net.edges[e].tail].push_back(e);

  Flow g = flow;
  std::vector<double> rem = net.supply;
  std::vector<FlowPath> result;

  auto first_out = [&](int v) -> int {
    for (int e : out_edges[v])
      if (g[e] > kPeelTol) return e;
    return -1;
  };

  auto peel = [&](const std::vector<int>& edges, double volume, bool cycle) {
    FlowPath p;
    p.edges = edges;
    p.volume = volume;
    p.cycle = cycle;
    for (int e : edges) {
      g[e] -= volume;
      if (g[e] < kPeelTol) g[e] = 0.0;
    }
    result.push_back(std::move(p));
  };

  // Source-to-sink paths first.
  for (int s = 0; s < net.num_vertices; ++s) {
    while (rem[s] > kPeelTol) {
      std::vector<int> path;
      std::vector<int> pos(net.num_vertices, -1);
      int v = s;
      pos[v] = 0;
      while (true) {
        if (v != s && rem[v] < -kPeelTol) break;  // reached a sink
        int e = first_out(v);
        if (e < 0) throw ValidationError("decompose: walk stuck (inconsistent flow)");
        path.push_back(e);
        int w = net.edges[e].head;
        if (pos[w] >= 0) {
          // Found a cycle; peel it and restart the walk.
          std::vector<int> cyc(path.begin() + pos[w], path.end());
          double vol = g[cyc[0]];
          for (int ce : cyc) vol = std::min(vol, g[ce]);
          peel(cyc, vol, true);
          path.clear();
          std::fill(pos.begin(), pos.end(), -1);
          v = s;
          pos[v] = 0;
          continue;
        }
        pos[w] = static_cast<int>(path.size());
        v = w;
      }
      double vol = std::min(rem[s], -rem[v]);
      for (int e : path) vol = std::min(vol, g[e]);
      rem[s] -= vol;
      rem[v] += vol;
      peel(path, vol, false);
    }
  }

  // Whatever is left conserves flow everywhere: pure circulation.
  for (int e0 = 0; e0 < net.num_edges(); ++e0) {
    while (g[e0] > kPeelTol) {
      std::vector<int> path{e0};
      std::vector<int> pos(net.num_vertices, -1);
      pos[net.edges[e0].tail] = 0;
      int v = net.edges[e0].head;
      while (pos[v] < 0) {
        pos[v] = static_cast<int>(path.size());
        int e = first_out(v);
        if (e < 0) throw ValidationError("decompose: circulation walk stuck");
        path.push_back(e);
        v = net.edges[e].head;
      }
      std::vector<int> cyc(path.begin() + pos[v], path.end());
      double vol = g[cyc[0]];
      for (int ce : cyc) vol = std::min(vol, g[ce]);
      peel(cyc, vol, true);
    }
  }
  return result;
}

}  // namespace roademd
