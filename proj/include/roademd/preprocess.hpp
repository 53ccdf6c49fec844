#pragma once

// Shared preprocessing for the transport solvers. The pipeline is
//
//   1. subtract the pointwise minimum from both measures (the transport
//      distance is invariant under adding a common measure, so removing the
//      shared part changes nothing and empties the overlap),
//   2. crack roads so every road carries positive mass of at most one measure
//      and that mass has positive density across the whole road,
//   3. classify roads as supply, demand, or transshipment.
//
// Cracking inserts degree-2 vertices, which leaves every travel distance
// unchanged. Cuts are placed wherever the pointwise classification of the two
// densities switches, including the boundaries of zero-density stretches;
// splitting zero stretches off keeps the per-road cost functions continuously
// differentiable, which the convex solver relies on.

#include <string>
#include <vector>

#include "roademd/measure.hpp"

namespace roademd {

constexpr double kSupportTol = 1e-12;   // density values below this count as zero
constexpr double kMassTol = 1e-9;       // total-mass comparisons

enum class RoadKind : char { Supply = 'S', Demand = 'D', Transshipment = 'T' };

struct Classification {
  std::vector<RoadKind> kind;       // per road index
  std::vector<double> imbalance;    // src mass - dst mass per road
};

// Requires every road to carry positive mass of at most one measure.
inline Classification classify_roads(const RoadMap& map, const Measure& src, const Measure& dst) {
  Classification out;
  out.kind.assign(map.num_roads(), RoadKind::Transshipment);
  out.imbalance.assign(map.num_roads(), 0.0);
  for (int r = 0; r < map.num_roads(); ++r) {
    const std::string& id = map.road(r).id;
    double ms = road_mass(src, id);
    double md = road_mass(dst, id);
    if (ms > kSupportTol && md > kSupportTol)
      throw ValidationError("classify: road '" + id + "' carries both measures");
    if (ms > kSupportTol) {
      out.kind[r] = RoadKind::Supply;
      out.imbalance[r] = ms;
    } else if (md > kSupportTol) {
      out.kind[r] = RoadKind::Demand;
      out.imbalance[r] = -md;
    }
  }
  return out;
}

struct CrackedInstance {
  RoadMap map;
  Measure src;
  Measure dst;
  // Per original road: cut coordinates (without 0 and L) and the child road
  // ids, one more than there are cuts.
  struct RoadSplit {
    std::vector<double> cuts;
    std::vector<std::string> child_ids;
  };
  std::vector<RoadSplit> splits;

  // Address on the original map -> address on the cracked map.
  Address remap(const RoadMap& original, Address a) const {
    a = original.canonical(a);
    const RoadSplit& split = splits.at(a.road);
    std::size_t seg = std::upper_bound(split.cuts.begin(), split.cuts.end(), a.offset) -
                      split.cuts.begin();
    double lo = seg == 0 ? 0.0 : split.cuts[seg - 1];
    return map.canonical({map.road_index(split.child_ids[seg]), a.offset - lo});
  }
};

namespace detail {

// Pointwise kind of one stretch of road.
enum class StretchKind : char { Zero, Src, Dst };

inline std::vector<std::pair<double, StretchKind>> classify_stretches(
    const std::string& road_id, double length, const Density* src, const Density* dst) {
  // Merged breakpoint grid of both densities over [0, length].
  std::vector<double> grid{0.0, length};
  for (const Density* d : {src, dst})
    if (d)
      for (double b : d->breakpoints()) grid.push_back(b);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double x, double y) { return std::abs(x - y) <= 1e-12; }),
             grid.end());
  std::vector<std::pair<double, StretchKind>> runs;  // (right end, kind), merged
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    double mid = 0.5 * (grid[i] + grid[i + 1]);
    double vs = src ? src->value_at(std::min(mid, src->length())) : 0.0;
    double vd = dst ? dst->value_at(std::min(mid, dst->length())) : 0.0;
    if (vs > kSupportTol && vd > kSupportTol)
      throw ValidationError("crack: supports overlap on road '" + road_id + "'");
    StretchKind kind = vs > kSupportTol   ? StretchKind::Src
                       : vd > kSupportTol ? StretchKind::Dst
                                          : StretchKind::Zero;
    if (!runs.empty() && runs.back().second == kind)
      runs.back().first = grid[i + 1];
    else
      runs.push_back({grid[i + 1], kind});
  }
  return runs;
}

}  // namespace detail

// Splits roads at every point where the pointwise classification of (src, dst)
// changes. Afterwards each road is all-supply, all-demand, or empty, with the
// carried density positive on every piece. Requires pointwise-disjoint
// supports; distances are preserved exactly.
inline CrackedInstance crack_roads(const RoadMap& map, const Measure& src, const Measure& dst) {
  validate_measure(map, src, "crack src");
  validate_measure(map, dst, "crack dst");

  std::vector<std::string> vertices = map.vertex_names();
  std::vector<RoadSpec> new_roads;
  std::vector<CrackedInstance::RoadSplit> splits(map.num_roads());
  Measure new_src, new_dst;

  for (int r = 0; r < map.num_roads(); ++r) {
    const Road& road = map.road(r);
    auto its = src.find(road.id);
    auto itd = dst.find(road.id);
    const Density* ds = its == src.end() ? nullptr : &its->second;
    const Density* dd = itd == dst.end() ? nullptr : &itd->second;
    auto runs = detail::classify_stretches(road.id, road.length, ds, dd);

    CrackedInstance::RoadSplit& split = splits[r];
    for (std::size_t k = 0; k + 1 < runs.size(); ++k) split.cuts.push_back(runs[k].first);

    std::string prev_vertex = map.vertex_name(road.tail);
    double prev_coord = 0.0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      bool last = k + 1 == runs.size();
      std::string child_id = split.cuts.empty() ? road.id : road.id + "#" + std::to_string(k);
      std::string next_vertex =
          last ? map.vertex_name(road.head) : road.id + "|" + std::to_string(k + 1);
      if (!last) vertices.push_back(next_vertex);
      double right = runs[k].first;
      new_roads.push_back({child_id, prev_vertex, next_vertex, right - prev_coord});
      split.child_ids.push_back(child_id);
      if (runs[k].second == detail::StretchKind::Src)
        new_src.emplace(child_id, ds->slice(prev_coord, right));
      else if (runs[k].second == detail::StretchKind::Dst)
        new_dst.emplace(child_id, dd->slice(prev_coord, right));
      prev_vertex = next_vertex;
      prev_coord = right;
    }
  }

  CrackedInstance out{RoadMap(vertices, new_roads), std::move(new_src), std::move(new_dst),
                      std::move(splits)};
  return out;
}

// Full pipeline: totals check, overlap subtraction, cracking.
inline CrackedInstance preprocess(const RoadMap& map, const Measure& src, const Measure& dst) {
  validate_measure(map, src, "src");
  validate_measure(map, dst, "dst");
  double ts = total_mass(src), td = total_mass(dst);
  if (std::abs(ts - td) > kMassTol)
    throw InfeasibleError("measures have unequal total mass (" + std::to_string(ts) + " vs " +
                          std::to_string(td) + ")");
  Measure overlap = pointwise_min(src, dst);
  Measure s = subtract(src, overlap);
  Measure d = subtract(dst, overlap);
  return crack_roads(map, s, d);
}

}  // namespace roademd
