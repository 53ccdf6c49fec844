#pragma once

// Minimum-cost flow solvers for the uncapacitated networks this library
// builds. Everything is small (at most a few hundred vertices), so the
// implementations favor verifiable optimality over raw speed.
//
// Linear costs: successive shortest paths with vertex potentials. Residual
// arcs keep nonnegative reduced costs, each augmentation follows a Dijkstra
// shortest path, and the final (flow, potential) pair is checked against the
// complementary-slackness certificate before it is returned.
//
// Convex costs: Frank-Wolfe over the admissible polytope, using the linear
// solver as the linear-minimization oracle. Away steps over the atom set are
// taken when they promise more progress than the forward step, which avoids
// the zigzagging plain Frank-Wolfe suffers near faces; the reported duality
// gap max_s <grad, x - s> is a certified bound on the suboptimality of the
// returned flow whether or not the iteration cap was hit.

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "roademd/flow.hpp"

namespace roademd {

struct LinearFlowResult {
  Flow flow;
  double cost = 0.0;
  std::vector<double> potential;
  int augmentations = 0;
};

// Largest certificate violation of (flow, potential) for the given weights:
// reduced costs must be >= 0 on every edge and == 0 where flow is positive.
inline double certificate_violation(const FlowNetwork& net, const std::vector<double>& weights,
                                    const Flow& flow, const std::vector<double>& potential) {
  double worst = 0.0;
  for (int e = 0; e < net.num_edges(); ++e) {
    double rc = weights[e] + potential[net.edges[e].tail] - potential[net.edges[e].head];
    worst = std::max(worst, -rc);
    if (flow[e] > 1e-12) worst = std::max(worst, std::abs(rc));
  }
  return worst;
}

inline LinearFlowResult min_cost_flow_linear(const FlowNetwork& net,
                                             const std::vector<double>& weights) {
  const int n = net.num_vertices;
  const int m = net.num_edges();
  if (static_cast<int>(weights.size()) != m)
    throw ValidationError("mincost: wrong weight vector size");
  for (double w : weights)
    if (!std::isfinite(w) || w < 0.0)
      throw ValidationError("mincost: weights must be finite and nonnegative");
  if (static_cast<int>(net.supply.size()) != n)
    throw ValidationError("mincost: wrong supply vector size");

  // Balance check; small residue is repaired by scaling the demands.
  double sup = 0.0, dem = 0.0;
  for (double b : net.supply) (b > 0.0 ? sup : dem) += b;
  if (std::abs(sup + dem) > 1e-9)
    throw InfeasibleError("mincost: supplies and demands do not balance");
  std::vector<double> excess = net.supply;
  if (dem != 0.0) {
    double scale = -sup / dem;
    for (double& b : excess)
      if (b < 0.0) b *= scale;
  }

  const double active = 1e-12 * std::max(1.0, sup);
  std::vector<std::vector<int>> out_edges(n), in_edges(n);
  for (int e = 0; e < m; ++e) {
    out_edges[net.edges[e].tail].push_back(e);
    in_edges[net.edges[e].head].push_back(e);
  }

  LinearFlowResult res;
  res.flow.assign(m, 0.0);
  res.potential.assign(n, 0.0);
  std::vector<double>& pi = res.potential;
  Flow& f = res.flow;

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n);
  std::vector<int> parent_edge(n);      // edge used to reach the vertex
  std::vector<char> parent_back(n);     // 1 if traversed against its direction
  using Item = std::pair<double, int>;

  const int cap = 10 * (n + m) + 1000;
  int s = 0;
  while (true) {
    while (s < n && excess[s] <= active) ++s;
    if (s >= n) break;
    if (++res.augmentations > cap)
      throw SolverError("mincost: augmentation cap exceeded");

    std::fill(dist.begin(), dist.end(), inf);
    std::fill(parent_edge.begin(), parent_edge.end(), -1);
    dist[s] = 0.0;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.push({0.0, s});
    while (!heap.empty()) {
      auto [dv, v] = heap.top();
      heap.pop();
      if (dv > dist[v]) continue;
      for (int e : out_edges[v]) {
        double rc = std::max(0.0, weights[e] + pi[v] - pi[net.edges[e].head]);
        int w = net.edges[e].head;
        if (dv + rc < dist[w]) {
          dist[w] = dv + rc;
          parent_edge[w] = e;
          parent_back[w] = 0;
          heap.push({dist[w], w});
        }
      }
      for (int e : in_edges[v]) {
        if (f[e] <= 0.0) continue;
        double rc = std::max(0.0, -weights[e] + pi[v] - pi[net.edges[e].tail]);
        int w = net.edges[e].tail;
        if (dv + rc < dist[w]) {
          dist[w] = dv + rc;
          parent_edge[w] = e;
          parent_back[w] = 1;
          heap.push({dist[w], w});
        }
      }
    }

    int t = -1;
    for (int v = 0; v < n; ++v)
      if (excess[v] < -active && dist[v] < inf && (t < 0 || dist[v] < dist[t])) t = v;
    if (t < 0) throw InfeasibleError("mincost: demand unreachable from supply");

    for (int v = 0; v < n; ++v) pi[v] += std::min(dist[v], dist[t]);

    double delta = std::min(excess[s], -excess[t]);
    for (int v = t; v != s;) {
      int e = parent_edge[v];
      if (parent_back[v]) {
        delta = std::min(delta, f[e]);
        v = net.edges[e].head;
      } else {
        v = net.edges[e].tail;
      }
    }
    for (int v = t; v != s;) {
      int e = parent_edge[v];
      if (parent_back[v]) {
        f[e] -= delta;
        if (f[e] < 1e-15) f[e] = 0.0;
        v = net.edges[e].head;
      } else {
        f[e] += delta;
        v = net.edges[e].tail;
      }
    }
    excess[s] -= delta;
    excess[t] += delta;
    if (excess[s] > active) continue;  // more to push from s; rerun Dijkstra
    // Otherwise advance; the scan restarts from the next vertex in index order.
  }

  res.cost = flow_cost(net, f, weights);

  double wmax = 1.0;
  for (double w : weights) wmax = std::max(wmax, std::abs(w));
  if (conservation_violation(net, f) > 1e-9)
    throw SolverError("mincost: result violates conservation");
  if (certificate_violation(net, weights, f, pi) > 1e-9 * wmax)
    throw SolverError("mincost: optimality certificate failed");
  return res;
}

struct ConvexFlowResult {
  Flow flow;
  double cost = 0.0;
  double gap = 0.0;          // certified bound on cost - optimum
  double lower_bound = 0.0;  // cost - gap
  int iterations = 0;
  bool converged = false;
};

inline ConvexFlowResult min_cost_flow_convex(const FlowNetwork& net,
                                             const std::vector<EdgeCost>& costs,
                                             double tol = 1e-7, int max_iterations = 100000) {
  const int m = net.num_edges();
  if (static_cast<int>(costs.size()) != m)
    throw ValidationError("mincost: wrong cost vector size");

  auto gradient = [&](const Flow& x, std::vector<double>& g) {
    for (int e = 0; e < m; ++e) g[e] = std::max(0.0, edge_cost_subgradient(costs[e], x[e]));
  };

  std::vector<Flow> atoms;
  std::vector<double> lambda;
  std::vector<double> g(m, 0.0);

  Flow zero(m, 0.0);
  gradient(zero, g);
  atoms.push_back(min_cost_flow_linear(net, g).flow);
  lambda.push_back(1.0);
  Flow x = atoms[0];

  ConvexFlowResult res;
  auto directional = [&](const Flow& base, const std::vector<double>& dir, double gamma) {
    double d = 0.0;
    for (int e = 0; e < m; ++e)
      d += dir[e] * edge_cost_subgradient(costs[e], base[e] + gamma * dir[e]);
    return d;
  };

  std::vector<double> dir(m, 0.0);
  for (res.iterations = 1; res.iterations <= max_iterations; ++res.iterations) {
    gradient(x, g);
    Flow s = min_cost_flow_linear(net, g).flow;

    double fw_gap = 0.0;
    for (int e = 0; e < m; ++e) fw_gap += g[e] * (x[e] - s[e]);
    res.gap = std::max(fw_gap, 0.0);
    if (res.gap <= tol) {
      res.converged = true;
      break;
    }

    // Away atom: the active atom the gradient most wants to leave.
    std::size_t away = 0;
    double away_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      double sc = 0.0;
      for (int e = 0; e < m; ++e) sc += g[e] * atoms[a][e];
      if (sc > away_score) {
        away_score = sc;
        away = a;
      }
    }
    double away_gap = 0.0;
    for (int e = 0; e < m; ++e) away_gap += g[e] * (atoms[away][e] - x[e]);

    bool use_away = away_gap > fw_gap && lambda[away] < 1.0 - 1e-12;
    double gamma_max;
    if (use_away) {
      for (int e = 0; e < m; ++e) dir[e] = x[e] - atoms[away][e];
      gamma_max = lambda[away] / (1.0 - lambda[away]);
    } else {
      for (int e = 0; e < m; ++e) dir[e] = s[e] - x[e];
      gamma_max = 1.0;
    }

    double gamma;
    if (directional(x, dir, gamma_max) <= 0.0) {
      gamma = gamma_max;
    } else {
      double lo = 0.0, hi = gamma_max;
      for (int it = 0; it < 90 && hi - lo > 1e-16 * std::max(1.0, gamma_max); ++it) {
        double mid = 0.5 * (lo + hi);
        (directional(x, dir, mid) <= 0.0 ? lo : hi) = mid;
      }
      gamma = lo;
    }
    if (gamma <= 0.0) {
      // No progress along the chosen direction; fall back to the certified gap.
      res.converged = res.gap <= tol;
      break;
    }

    for (int e = 0; e < m; ++e) x[e] += gamma * dir[e];
    if (use_away) {
      for (double& l : lambda) l *= 1.0 + gamma;
      lambda[away] -= gamma;
      if (lambda[away] <= 1e-14) {
        atoms.erase(atoms.begin() + away);
        lambda.erase(lambda.begin() + away);
      }
    } else {
      for (double& l : lambda) l *= 1.0 - gamma;
      std::size_t hit = atoms.size();
      for (std::size_t a = 0; a < atoms.size(); ++a)
        if (atoms[a] == s) {
          hit = a;
          break;
        }
      if (hit == atoms.size()) {
        atoms.push_back(std::move(s));
        lambda.push_back(gamma);
      } else {
        lambda[hit] += gamma;
      }
    }

    if (res.iterations % 64 == 0) {
      // Counter float drift: renormalize the convex combination and rebuild x.
      double sum = 0.0;
      for (double l : lambda) sum += l;
      std::fill(x.begin(), x.end(), 0.0);
      for (std::size_t a = 0; a < atoms.size(); ++a) {
        double w = lambda[a] / sum;
        lambda[a] = w;
        for (int e = 0; e < m; ++e) x[e] += w * atoms[a][e];
      }
    }
  }
  if (res.iterations > max_iterations) res.iterations = max_iterations;

  if (!res.converged) {
    // Report the gap of the flow actually returned, not of an earlier iterate.
    gradient(x, g);
    Flow s = min_cost_flow_linear(net, g).flow;
    double fw_gap = 0.0;
    for (int e = 0; e < m; ++e) fw_gap += g[e] * (x[e] - s[e]);
    res.gap = std::max(fw_gap, 0.0);
    res.converged = res.gap <= tol;
  }

  res.flow = std::move(x);
  res.cost = flow_cost(net, res.flow, costs);
  res.lower_bound = res.cost - res.gap;
  return res;
}

}  // namespace roademd
