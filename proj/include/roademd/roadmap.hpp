#pragma once

// Road networks as connected undirected multigraphs whose edges ("roads")
// carry an orientation and a positive length. A position on the network is an
// Address (road, offset) with offset in [0, length]; offset 0 coincides with
// the tail vertex, offset length with the head. Distances treat every road as
// traversable in both directions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "roademd/errors.hpp"

namespace roademd {

struct RoadSpec {
  std::string id;
  std::string tail;
  std::string head;
  double length = 0.0;
};

struct Road {
  std::string id;
  int tail = -1;
  int head = -1;
  double length = 0.0;
};

struct Address {
  int road = -1;
  double offset = 0.0;
};

class RoadMap {
 public:
  RoadMap(const std::vector<std::string>& vertices, const std::vector<RoadSpec>& roads) {
    if (vertices.empty()) throw ValidationError("roadmap: needs at least one vertex");
    vertex_names_ = vertices;
    for (int v = 0; v < static_cast<int>(vertex_names_.size()); ++v) {
      const std::string& name = vertex_names_[v];
      if (name.empty()) throw ValidationError("roadmap: empty vertex name");
      if (!vertex_index_.emplace(name, v).second)
        throw ValidationError("roadmap: duplicate vertex '" + name + "'");
    }
    roads_.reserve(roads.size());
    for (const RoadSpec& spec : roads) {
      if (spec.id.empty()) throw ValidationError("roadmap: empty road id");
      if (!(spec.length > 0.0) || !std::isfinite(spec.length))
        throw ValidationError("roadmap: road '" + spec.id + "' needs a positive finite length");
      Road road;
      road.id = spec.id;
      road.tail = vertex_index(spec.tail);
      road.head = vertex_index(spec.head);
      road.length = spec.length;
      if (!road_index_.emplace(spec.id, static_cast<int>(roads_.size())).second)
        throw ValidationError("roadmap: duplicate road '" + spec.id + "'");
      roads_.push_back(road);
    }
    neighbors_.assign(vertex_names_.size(), {});
    for (const Road& road : roads_) {
      neighbors_[road.tail].push_back({road.head, road.length});
      if (road.head != road.tail) neighbors_[road.head].push_back({road.tail, road.length});
    }
    check_connected();
  }

  int num_vertices() const { return static_cast<int>(vertex_names_.size()); }
  int num_roads() const { return static_cast<int>(roads_.size()); }
  const std::vector<std::string>& vertex_names() const { return vertex_names_; }
  const std::string& vertex_name(int v) const { return vertex_names_.at(v); }
  const std::vector<Road>& roads() const { return roads_; }
  const Road& road(int r) const { return roads_.at(r); }

  int vertex_index(const std::string& name) const {
    auto it = vertex_index_.find(name);
    if (it == vertex_index_.end()) throw ValidationError("roadmap: unknown vertex '" + name + "'");
    return it->second;
  }

  int road_index(const std::string& id) const {
    auto it = road_index_.find(id);
    if (it == road_index_.end()) throw ValidationError("roadmap: unknown road '" + id + "'");
    return it->second;
  }

  bool has_road(const std::string& id) const { return road_index_.count(id) > 0; }

  double total_length() const {
    double sum = 0.0;
    for (const Road& r : roads_) sum += r.length;
    return sum;
  }

  // Per-vertex list of (adjacent vertex, road length); loops appear once.
  const std::vector<std::vector<std::pair<int, double>>>& neighbors() const { return neighbors_; }

  // Checks the offset against [0, length] with a small slack and returns the
  // address with the offset clamped exactly into range.
  Address canonical(Address a) const {
    if (a.road < 0 || a.road >= num_roads()) throw ValidationError("address: road out of range");
    double len = roads_[a.road].length;
    if (!(a.offset >= -1e-12) || !(a.offset <= len + 1e-12))
      throw ValidationError("address: offset outside [0, length] on road '" + roads_[a.road].id + "'");
    a.offset = std::min(std::max(a.offset, 0.0), len);
    return a;
  }

 private:
  void check_connected() const {
    std::vector<char> seen(vertex_names_.size(), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
      int v = frontier.front();
      frontier.pop();
      for (auto [w, len] : neighbors_[v]) {
        (void)len;
        if (!seen[w]) {
          seen[w] = 1;
          ++reached;
          frontier.push(w);
        }
      }
    }
    if (reached != num_vertices()) throw ValidationError("roadmap: not connected");
  }

  std::vector<std::string> vertex_names_;
  std::vector<Road> roads_;
  std::vector<std::vector<std::pair<int, double>>> neighbors_;
  std::unordered_map<std::string, int> vertex_index_;
  std::unordered_map<std::string, int> road_index_;
};

// All-pairs shortest vertex distances over the undirected multigraph, by a
// Dijkstra sweep from every vertex. Instances are small; no need for anything
// smarter.
inline std::vector<std::vector<double>> vertex_distances(const RoadMap& map) {
  int n = map.num_vertices();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, std::numeric_limits<double>::infinity()));
  using Item = std::pair<double, int>;
  for (int s = 0; s < n; ++s) {
    auto& d = dist[s];
    d[s] = 0.0;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.push({0.0, s});
    while (!heap.empty()) {
      auto [dv, v] = heap.top();
      heap.pop();
      if (dv > d[v]) continue;
      for (auto [w, len] : map.neighbors()[v]) {
        double cand = dv + len;
        if (cand < d[w]) {
          d[w] = cand;
          heap.push({cand, w});
        }
      }
    }
  }
  return dist;
}

// Length of the shortest road joining each pair of distinct vertices, keyed
// with the smaller vertex index first. Loops join nothing.
inline std::map<std::pair<int, int>, double> joining_lengths(const RoadMap& map) {
  std::map<std::pair<int, int>, double> joins;
  for (const Road& road : map.roads()) {
    if (road.tail == road.head) continue;
    auto key = std::minmax(road.tail, road.head);
    auto [it, fresh] = joins.emplace(std::make_pair(key.first, key.second), road.length);
    if (!fresh) it->second = std::min(it->second, road.length);
  }
  return joins;
}

// Shortest travel distance between two addresses: the in-road segment when
// both lie on the same road, and the four routes that leave via either end of
// a's road and enter via either end of b's. `dist` must come from
// vertex_distances on the same map.
inline double point_distance(const RoadMap& map, const std::vector<std::vector<double>>& dist,
                             Address a, Address b) {
  a = map.canonical(a);
  b = map.canonical(b);
  // Evaluate with operands in a fixed order so D(a,b) == D(b,a) exactly.
  if (b.road < a.road || (b.road == a.road && b.offset < a.offset)) std::swap(a, b);
  const Road& ra = map.road(a.road);
  const Road& rb = map.road(b.road);
  double best = std::numeric_limits<double>::infinity();
  if (a.road == b.road) best = std::abs(a.offset - b.offset);
  const double exits_a[2] = {a.offset, ra.length - a.offset};          // via tail, via head
  const double enters_b[2] = {b.offset, rb.length - b.offset};
  const int ends_a[2] = {ra.tail, ra.head};
  const int ends_b[2] = {rb.tail, rb.head};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double through = exits_a[i] + dist[ends_a[i]][ends_b[j]] + enters_b[j];
      best = std::min(best, through);
    }
  return best;
}

}  // namespace roademd
