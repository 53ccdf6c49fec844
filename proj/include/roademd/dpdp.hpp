#pragma once

// Demand model and simulator for a one-way vehicle-sharing system. Demands
// arrive as a Poisson process; each demand draws a (pickup road, delivery
// road) pair from a fixed pmf and independent uniform coordinates on both
// roads. A fleet of unit-speed vehicles serves demands under a gated
// nearest-neighbor policy: batches are worked to completion, each batch
// consisting of the demands that arrived while the previous one was in
// progress, and a vehicle finishing a delivery takes the unassigned demand of
// the current batch whose pickup lies nearest.
//
// The steady-state prediction combines the mean pickup-to-delivery distance
// with the transport distance between the pickup and delivery marginals: each
// served demand costs its carry leg, and repositioning from deliveries back
// to pickups cannot beat the optimal transport between the two marginals.
// The system is stable while rate * predicted_time < fleet size.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "roademd/emd_exact.hpp"
#include "roademd/rng.hpp"

namespace roademd {

struct DemandEntry {
  std::string pickup;
  std::string delivery;
  double prob = 0.0;
};

using DemandPmf = std::vector<DemandEntry>;

inline void validate_pmf(const RoadMap& map, const DemandPmf& pmf) {
  if (pmf.empty()) throw ValidationError("pmf: empty");
  double sum = 0.0;
  for (const auto& e : pmf) {
    map.road_index(e.pickup);
    map.road_index(e.delivery);
    if (!(e.prob >= 0.0) || !std::isfinite(e.prob))
      throw ValidationError("pmf: probabilities must be nonnegative");
    sum += e.prob;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("pmf: probabilities must sum to 1");
}

// Pickup and delivery marginals as measures with uniform per-road densities.
inline std::pair<Measure, Measure> marginals(const RoadMap& map, const DemandPmf& pmf) {
  validate_pmf(map, pmf);
  std::map<std::string, double> pickup_mass, delivery_mass;
  for (const auto& e : pmf) {
    pickup_mass[e.pickup] += e.prob;
    delivery_mass[e.delivery] += e.prob;
  }
  auto build = [&](const std::map<std::string, double>& mass) {
    Measure m;
    for (const auto& [id, p] : mass) {
      if (p <= 0.0) continue;
      double L = map.road(map.road_index(id)).length;
      m.emplace(id, Density::uniform(L, p / L));
    }
    return m;
  };
  return {build(pickup_mass), build(delivery_mass)};
}

namespace detail {

// Exact integration of the pointwise minimum of affine functions over a convex
// polygon: each function's winning region is the polygon clipped by the
// halfplanes where it does not exceed the others, and the affine integral over
// a polygon has a closed form. Ties between identical functions go to the
// lower index so regions partition the domain.
using Polygon = std::vector<std::pair<double, double>>;

struct AffineFn {
  double c = 0.0, a = 0.0, b = 0.0;  // c + a*y1 + b*y2
};

inline Polygon clip_halfplane(const Polygon& poly, double g0, double g1, double g2) {
  // Keep the side g0 + g1*x + g2*y <= 0.
  Polygon out;
  auto value = [&](const std::pair<double, double>& p) {
    return g0 + g1 * p.first + g2 * p.second;
  };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& cur = poly[i];
    const auto& nxt = poly[(i + 1) % poly.size()];
    double vc = value(cur), vn = value(nxt);
    bool ci = vc <= 1e-12, ni = vn <= 1e-12;
    if (ci) out.push_back(cur);
    if (ci != ni) {
      double t = vc / (vc - vn);
      out.push_back({cur.first + t * (nxt.first - cur.first),
                     cur.second + t * (nxt.second - cur.second)});
    }
  }
  return out;
}

inline double integrate_affine(const Polygon& poly, const AffineFn& f) {
  if (poly.size() < 3) return 0.0;
  double area2 = 0.0, sx6 = 0.0, sy6 = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    auto [x0, y0] = poly[i];
    auto [x1, y1] = poly[(i + 1) % poly.size()];
    double cross = x0 * y1 - x1 * y0;
    area2 += cross;
    sx6 += (x0 + x1) * cross;
    sy6 += (y0 + y1) * cross;
  }
  double sign = area2 < 0 ? -1.0 : 1.0;
  return sign * (f.c * area2 / 2.0 + f.a * sx6 / 6.0 + f.b * sy6 / 6.0);
}

inline double integrate_min(const std::vector<AffineFn>& fns, const Polygon& domain) {
  double total = 0.0;
  for (std::size_t k = 0; k < fns.size(); ++k) {
    Polygon region = domain;
    for (std::size_t j = 0; j < fns.size() && region.size() >= 3; ++j) {
      if (j == k) continue;
      double dc = fns[k].c - fns[j].c;
      double da = fns[k].a - fns[j].a;
      double db = fns[k].b - fns[j].b;
      if (std::abs(da) + std::abs(db) <= 1e-12) {
        // Parallel candidates: one dominates everywhere; ties go to lower index.
        if (dc > 1e-12 || (std::abs(dc) <= 1e-12 && j < k)) region.clear();
      } else {
        region = clip_halfplane(region, dc, da, db);
      }
    }
    total += integrate_affine(region, fns[k]);
  }
  return total;
}

// The four endpoint routes between positions on roads r1 and r2 as affine
// functions of (y1, y2).
inline std::vector<AffineFn> route_candidates(const RoadMap& map,
                                              const std::vector<std::vector<double>>& dist,
                                              int r1, int r2) {
  const Road& a = map.road(r1);
  const Road& b = map.road(r2);
  std::vector<AffineFn> fns;
  const int ends_a[2] = {a.tail, a.head};
  const int ends_b[2] = {b.tail, b.head};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      AffineFn f;
      f.c = dist[ends_a[i]][ends_b[j]];
      if (i == 0) f.a = 1.0;          // exit via tail: + y1
      else { f.a = -1.0; f.c += a.length; }  // via head: + (L1 - y1)
      if (j == 0) f.b = 1.0;
      else { f.b = -1.0; f.c += b.length; }
      fns.push_back(f);
    }
  return fns;
}

// Mean of the point distance for uniform independent coordinates on the two
// roads. Exact: the distance is a minimum of affine functions once the
// same-road case is split along the diagonal.
inline double mean_pair_distance(const RoadMap& map,
                                 const std::vector<std::vector<double>>& dist, int r1, int r2) {
  double L1 = map.road(r1).length, L2 = map.road(r2).length;
  std::vector<AffineFn> routes = route_candidates(map, dist, r1, r2);
  double integral = 0.0;
  if (r1 == r2) {
    double L = L1;
    Polygon lower{{0.0, 0.0}, {L, 0.0}, {L, L}};   // y2 <= y1
    Polygon upper{{0.0, 0.0}, {L, L}, {0.0, L}};   // y2 >= y1
    std::vector<AffineFn> with_direct = routes;
    with_direct.push_back({0.0, 1.0, -1.0});  // y1 - y2 on the lower triangle
    integral += integrate_min(with_direct, lower);
    with_direct.back() = {0.0, -1.0, 1.0};    // y2 - y1 on the upper triangle
    integral += integrate_min(with_direct, upper);
  } else {
    Polygon rect{{0.0, 0.0}, {L1, 0.0}, {L1, L2}, {0.0, L2}};
    integral = integrate_min(routes, rect);
  }
  return integral / (L1 * L2);
}

}  // namespace detail

// E[D(P, Q)] by exact per-pair integration.
inline double expected_pd_distance(const RoadMap& map, const DemandPmf& pmf) {
  validate_pmf(map, pmf);
  std::vector<std::vector<double>> dist = vertex_distances(map);
  double total = 0.0;
  for (const auto& e : pmf) {
    if (e.prob <= 0.0) continue;
    total += e.prob *
             detail::mean_pair_distance(map, dist, map.road_index(e.pickup),
                                        map.road_index(e.delivery));
  }
  return total;
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double half_width_95 = 0.0;  // 1.96 * stderr
  long samples = 0;
};

inline MonteCarloEstimate expected_pd_distance_mc(const RoadMap& map, const DemandPmf& pmf,
                                                  long n, std::uint64_t seed) {
  validate_pmf(map, pmf);
  if (n <= 1) throw ValidationError("mc: need at least 2 samples");
  std::vector<std::vector<double>> dist = vertex_distances(map);
  std::mt19937_64 g = make_stream(seed, 1);
  std::vector<double> probs;
  for (const auto& e : pmf) probs.push_back(e.prob);
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < n; ++i) {
    const DemandEntry& e = pmf[pick_weighted(g, probs)];
    int r1 = map.road_index(e.pickup), r2 = map.road_index(e.delivery);
    Address p{r1, uniform_in(g, 0.0, map.road(r1).length)};
    Address q{r2, uniform_in(g, 0.0, map.road(r2).length)};
    double d = point_distance(map, dist, p, q);
    sum += d;
    sumsq += d * d;
  }
  MonteCarloEstimate est;
  est.samples = n;
  est.mean = sum / n;
  double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1));
  est.half_width_95 = 1.96 * std::sqrt(var / n);
  return est;
}

struct ServiceTimePrediction {
  double carry = 0.0;          // E[D(P, Q)]
  double reposition = 0.0;     // transport distance between the marginals
  double service_time = 0.0;   // carry + reposition
  bool emd_converged = true;
  double emd_gap = 0.0;
};

inline ServiceTimePrediction predicted_service_time(const RoadMap& map, const DemandPmf& pmf,
                                                    double tol = 1e-7) {
  ServiceTimePrediction out;
  out.carry = expected_pd_distance(map, pmf);
  auto [mu_p, mu_q] = marginals(map, pmf);
  EmdExactResult emd = emd_exact(map, mu_p, mu_q, tol);
  out.reposition = emd.value;
  out.emd_converged = emd.converged;
  out.emd_gap = emd.gap;
  out.service_time = out.carry + out.reposition;
  return out;
}

// Largest demand rate a fleet of m unit-speed vehicles can absorb.
inline double critical_rate(double service_time, int fleet) {
  if (!(service_time > 0.0)) throw ValidationError("critical rate: service time must be positive");
  if (fleet < 1) throw ValidationError("critical rate: fleet must be at least 1");
  return fleet / service_time;
}

struct SimParams {
  int fleet = 1;
  double rate = 1.0;
  double horizon = 1000.0;
  std::uint64_t seed = 0;
};

struct SimResult {
  long arrived = 0;
  long completed = 0;
  int max_outstanding = 0;
  int final_outstanding = 0;
  double completion_rate = 0.0;  // completed / horizon
  double mean_busy = 0.0;        // vehicle time per completed demand
  double mean_sojourn = 0.0;     // delivery time - arrival time
  std::vector<double> renewal_times;                    // moments the system empties
  std::vector<std::pair<double, int>> outstanding_series;  // (time, count) per event
};

// Event-driven simulation of the gated nearest-neighbor policy. Streams:
// 0 = interarrival times, 1 = demand locations, 2 = initial vehicle positions.
// Vehicles idle where they are between assignments; the first demand entering
// an empty system opens its batch immediately. Ties in the nearest-neighbor
// choice go to the earliest arrival, simultaneous events resolve in insertion
// order, and idle vehicles are assigned in index order at batch openings.
inline SimResult simulate(const RoadMap& map, const DemandPmf& pmf, const SimParams& params) {
  validate_pmf(map, pmf);
  if (params.fleet < 1) throw ValidationError("simulate: fleet must be at least 1");
  if (!(params.rate > 0.0)) throw ValidationError("simulate: rate must be positive");
  if (!(params.horizon >= 0.0)) throw ValidationError("simulate: horizon must be nonnegative");

  std::vector<std::vector<double>> dist = vertex_distances(map);
  std::mt19937_64 arrivals_rng = make_stream(params.seed, 0);
  std::mt19937_64 locations_rng = make_stream(params.seed, 1);
  std::mt19937_64 init_rng = make_stream(params.seed, 2);

  std::vector<double> pair_probs;
  for (const auto& e : pmf) pair_probs.push_back(e.prob);
  std::vector<double> road_lengths;
  for (const Road& r : map.roads()) road_lengths.push_back(r.length);

  auto draw_demand_location = [&]() {
    const DemandEntry& e = pmf[pick_weighted(locations_rng, pair_probs)];
    int r1 = map.road_index(e.pickup), r2 = map.road_index(e.delivery);
    Address p{r1, uniform_in(locations_rng, 0.0, map.road(r1).length)};
    Address q{r2, uniform_in(locations_rng, 0.0, map.road(r2).length)};
    return std::pair(p, q);
  };

  struct Demand {
    double arrival = 0.0;
    Address pickup, delivery;
  };
  struct Vehicle {
    Address pos;
    long demand = -1;      // current assignment
    double busy_since = 0.0;
  };

  std::vector<Demand> demands;
  std::vector<Vehicle> fleet(params.fleet);
  for (auto& v : fleet) {
    int r = static_cast<int>(pick_weighted(init_rng, road_lengths));
    v.pos = {r, uniform_in(init_rng, 0.0, map.road(r).length)};
  }

  enum class EventType { Arrival, Delivery };
  struct Event {
    double time = 0.0;
    long seq = 0;
    EventType type = EventType::Arrival;
    int vehicle = -1;
    bool operator>(const Event& o) const {
      if (time != o.time) return time > o.time;
      return seq > o.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
  long seq = 0;

  double first = exponential(arrivals_rng, params.rate);
  if (first <= params.horizon) events.push({first, seq++, EventType::Arrival, -1});

  std::vector<long> unassigned;   // current batch, arrival order
  std::vector<long> next_batch;
  long batch_remaining = 0;       // undelivered demands in the current batch
  std::set<int> idle;
  for (int i = 0; i < params.fleet; ++i) idle.insert(i);

  SimResult res;
  long outstanding = 0;
  double total_busy = 0.0, total_sojourn = 0.0;

  auto assign_vehicle = [&](int vi, double now) {
    // Nearest unassigned pickup; ties to the earliest arrival.
    std::size_t best = unassigned.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < unassigned.size(); ++i) {
      double d = point_distance(map, dist, fleet[vi].pos, demands[unassigned[i]].pickup);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    long di = unassigned[best];
    unassigned.erase(unassigned.begin() + best);
    fleet[vi].demand = di;
    fleet[vi].busy_since = now;
    double carry = point_distance(map, dist, demands[di].pickup, demands[di].delivery);
    events.push({now + best_d + carry, seq++, EventType::Delivery, vi});
  };

  auto open_next_batch = [&](double now) {
    unassigned = std::move(next_batch);
    next_batch.clear();
    batch_remaining = static_cast<long>(unassigned.size());
    std::vector<int> ready(idle.begin(), idle.end());
    for (int vi : ready) {
      if (unassigned.empty()) break;
      idle.erase(vi);
      assign_vehicle(vi, now);
    }
  };

  double now = 0.0;
  while (!events.empty()) {
    Event ev = events.top();
    events.pop();
    if (ev.time > params.horizon) break;
    now = ev.time;

    if (ev.type == EventType::Arrival) {
      auto [p, q] = draw_demand_location();
      demands.push_back({now, p, q});
      long id = static_cast<long>(demands.size()) - 1;
      ++res.arrived;
      ++outstanding;
      if (batch_remaining == 0) {
        // Empty system: this demand opens its own batch.
        next_batch.push_back(id);
        open_next_batch(now);
      } else {
        next_batch.push_back(id);
      }
      double gap = exponential(arrivals_rng, params.rate);
      if (now + gap <= params.horizon) events.push({now + gap, seq++, EventType::Arrival, -1});
    } else {
      int vi = ev.vehicle;
      long di = fleet[vi].demand;
      fleet[vi].pos = demands[di].delivery;
      fleet[vi].demand = -1;
      ++res.completed;
      --outstanding;
      --batch_remaining;
      total_busy += now - fleet[vi].busy_since;
      total_sojourn += now - demands[di].arrival;
      if (!unassigned.empty()) {
        assign_vehicle(vi, now);
      } else {
        idle.insert(vi);
        if (batch_remaining == 0) {
          if (!next_batch.empty())
            open_next_batch(now);
          else if (outstanding == 0)
            res.renewal_times.push_back(now);
        }
      }
    }
    res.max_outstanding = std::max(res.max_outstanding, static_cast<int>(outstanding));
    res.outstanding_series.push_back({now, static_cast<int>(outstanding)});
  }

  res.final_outstanding = static_cast<int>(outstanding);
  res.completion_rate = params.horizon > 0.0 ? res.completed / params.horizon : 0.0;
  if (res.completed > 0) {
    res.mean_busy = total_busy / res.completed;
    res.mean_sojourn = total_sojourn / res.completed;
  }
  return res;
}

}  // namespace roademd
