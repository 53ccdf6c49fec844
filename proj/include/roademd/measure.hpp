#pragma once

// A measure on a road network: one piecewise-constant density per road, keyed
// by road id. Roads absent from the container carry zero density. The ordered
// map keeps iteration deterministic everywhere downstream.

#include <map>
#include <string>

#include "roademd/density.hpp"
#include "roademd/roadmap.hpp"

namespace roademd {

using Measure = std::map<std::string, Density>;

// Every referenced road must exist and its density must span exactly [0, L_r].
inline void validate_measure(const RoadMap& map, const Measure& m, const std::string& what) {
  for (const auto& [road_id, density] : m) {
    int r = -1;
    try {
      r = map.road_index(road_id);
    } catch (const ValidationError&) {
      throw ValidationError(what + ": unknown road '" + road_id + "'");
    }
    if (std::abs(density.length() - map.road(r).length) > 1e-9)
      throw ValidationError(what + ": density on road '" + road_id +
                            "' does not span the road length");
  }
}

inline double total_mass(const Measure& m) {
  double sum = 0.0;
  for (const auto& [id, d] : m) sum += d.total_mass();
  return sum;
}

inline double road_mass(const Measure& m, const std::string& road_id) {
  auto it = m.find(road_id);
  return it == m.end() ? 0.0 : it->second.total_mass();
}

// Pointwise minimum; roads carried by only one operand contribute nothing.
inline Measure pointwise_min(const Measure& a, const Measure& b) {
  Measure out;
  for (const auto& [id, da] : a) {
    auto it = b.find(id);
    if (it == b.end()) continue;
    Density m = Density::combine(da, it->second, Density::Combine::Min);
    if (m.total_mass() > 0.0) out.emplace(id, std::move(m));
  }
  return out;
}

// a - b pointwise; throws if b exceeds a anywhere it is defined.
inline Measure subtract(const Measure& a, const Measure& b) {
  for (const auto& [id, db] : b)
    if (a.find(id) == a.end() && db.total_mass() > 1e-12)
      throw ValidationError("measure: subtrahend carries mass on road '" + id +
                            "' absent from the minuend");
  Measure out;
  for (const auto& [id, da] : a) {
    auto it = b.find(id);
    if (it == b.end()) {
      if (da.total_mass() > 0.0) out.emplace(id, da);
      continue;
    }
    Density diff = Density::combine(da, it->second, Density::Combine::Subtract);
    if (diff.total_mass() > 0.0) out.emplace(id, std::move(diff));
  }
  return out;
}

inline Measure add(const Measure& a, const Measure& b) {
  Measure out = a;
  for (const auto& [id, db] : b) {
    auto it = out.find(id);
    if (it == out.end())
      out.emplace(id, db);
    else
      it->second = Density::combine(it->second, db, Density::Combine::Add);
  }
  return out;
}

// Equality of the underlying measures: cumulative functions agree at every
// breakpoint of either operand (both are piecewise linear, so that pins them
// everywhere), within tol.
inline bool measures_equal(const Measure& a, const Measure& b, double tol = 1e-12) {
  auto covers = [tol](const Measure& x, const Measure& y) {
    for (const auto& [id, dx] : x) {
      auto it = y.find(id);
      if (it == y.end()) {
        if (dx.total_mass() > tol) return false;
        continue;
      }
      const Density& dy = it->second;
      for (double bp : dx.breakpoints())
        if (std::abs(dx.cdf(bp) - dy.cdf(std::min(bp, dy.length()))) > tol) return false;
    }
    return true;
  };
  return covers(a, b) && covers(b, a);
}

}  // namespace roademd
