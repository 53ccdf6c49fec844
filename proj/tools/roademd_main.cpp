// Command-line front end for the road-network transport library.
//
//   roademd validate INSTANCE.json
//   roademd emd INSTANCE.json [--mode exact|lower|upper|path] [--epsilon E]
//           [--tol T] [--dump-flow FILE.csv]
//   roademd convergence INSTANCE.json [--epsilons 0.5,0.25,0.1] [--tol T]
//   roademd simulate INSTANCE.json [--m M] [--lambda L | --lambda-mult X |
//           --lambda-offset O] [--horizon T] [--seed S] [--out FILE.csv]
//
// Exit codes: 0 success, 1 bad input, 2 infeasible instance, 3 solver did not
// reach the requested tolerance.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "roademd/dpdp.hpp"
#include "roademd/emd_approx.hpp"
#include "roademd/emd_exact.hpp"
#include "roademd/instance_io.hpp"

namespace {

std::string fmt(double x) {
  std::ostringstream out;
  out << std::setprecision(9) << x;
  return out.str();
}

double default_tol() {
  if (const char* env = std::getenv("ROADEMD_TOL")) {
    try {
      return std::stod(env);
    } catch (const std::exception&) {
      throw roademd::ValidationError("ROADEMD_TOL is not a number");
    }
  }
  return 1e-7;
}

void require_measures(const roademd::Instance& inst) {
  if (inst.supply.empty() || inst.demand.empty())
    throw roademd::ValidationError("instance has no supply/demand measures");
}

void require_trips(const roademd::Instance& inst) {
  if (inst.trips.empty()) throw roademd::ValidationError("instance has no trip pmf");
}

int cmd_validate(const std::string& path) {
  roademd::Instance inst = roademd::load_instance(path);
  std::cout << "vertices " << inst.map.num_vertices() << "\n"
            << "roads " << inst.map.num_roads() << "\n"
            << "total-length " << fmt(inst.map.total_length()) << "\n"
            << "supply-mass " << fmt(roademd::total_mass(inst.supply)) << "\n"
            << "demand-mass " << fmt(roademd::total_mass(inst.demand)) << "\n"
            << "trip-pairs " << inst.trips.size() << "\n";
  return 0;
}

void dump_flow_csv(const std::string& path, const roademd::WassersteinNetwork& w,
                   const roademd::Flow& flow) {
  std::ofstream out(path);
  if (!out) throw roademd::ValidationError("cannot write '" + path + "'");
  out << "edge,kind,tail,head,flow,cost\n";
  const char* kind_names[] = {"tconn", "hconn", "routing"};
  for (int e = 0; e < w.net.num_edges(); ++e) {
    out << e << "," << kind_names[static_cast<int>(w.edge_info[e].kind)] << ","
        << w.vertex_labels[w.net.edges[e].tail] << "," << w.vertex_labels[w.net.edges[e].head]
        << "," << fmt(flow[e]) << "," << fmt(roademd::edge_cost_value(w.costs[e], flow[e]))
        << "\n";
  }
}

int cmd_emd(const std::string& path, const std::string& mode, double epsilon, double tol,
            const std::string& dump_flow) {
  roademd::Instance inst = roademd::load_instance(path);
  require_measures(inst);
  if (mode == "exact") {
    roademd::EmdExactResult res =
        roademd::emd_exact(inst.map, inst.supply, inst.demand, tol);
    std::cout << "value " << fmt(res.value) << "\n"
              << "gap " << fmt(res.gap) << "\n"
              << "iterations " << res.iterations << "\n"
              << "vertices " << res.network.net.num_vertices << "\n"
              << "edges " << res.network.net.num_edges() << "\n";
    if (!dump_flow.empty()) dump_flow_csv(dump_flow, res.network, res.flow);
    if (!res.converged) {
      std::cerr << "error: tolerance " << tol << " not reached (gap " << res.gap << ")\n";
      return 3;
    }
    return 0;
  }
  if (!dump_flow.empty())
    throw roademd::ValidationError("--dump-flow requires --mode exact");
  if (mode == "lower" || mode == "upper") {
    roademd::ApproxBounds b = roademd::emd_bounds(inst.map, inst.supply, inst.demand, epsilon);
    std::cout << "value " << fmt(mode == "lower" ? b.lower : b.upper) << "\n"
              << "lower " << fmt(b.lower) << "\n"
              << "upper " << fmt(b.upper) << "\n"
              << "supply-cells " << b.supply_cells << "\n"
              << "demand-cells " << b.demand_cells << "\n";
    return 0;
  }
  if (mode == "path") {
    roademd::PathResult res = roademd::emd_path(inst.map, inst.supply, inst.demand, epsilon);
    std::cout << "value " << fmt(res.value) << "\n"
              << "vertices " << res.vertices << "\n"
              << "edges " << res.edges << "\n"
              << "cells " << res.cells << "\n"
              << "all-parted " << (res.all_parted ? "yes" : "no") << "\n";
    return 0;
  }
  throw roademd::ValidationError("unknown mode '" + mode + "'");
}

int cmd_convergence(const std::string& path, const std::vector<double>& epsilons, double tol) {
  roademd::Instance inst = roademd::load_instance(path);
  require_measures(inst);
  roademd::EmdExactResult exact =
      roademd::emd_exact(inst.map, inst.supply, inst.demand, tol);
  std::cout << "epsilon,lower,upper,path,exact,width,bipartite_vertices,bipartite_edges,"
               "path_vertices,path_edges,exact_vertices,exact_edges\n";
  for (double eps : epsilons) {
    roademd::ApproxBounds b = roademd::emd_bounds(inst.map, inst.supply, inst.demand, eps);
    roademd::PathResult p = roademd::emd_path(inst.map, inst.supply, inst.demand, eps);
    std::cout << fmt(eps) << "," << fmt(b.lower) << "," << fmt(b.upper) << "," << fmt(p.value)
              << "," << fmt(exact.value) << "," << fmt(b.upper - b.lower) << "," << b.vertices
              << "," << b.edges << "," << p.vertices << "," << p.edges << ","
              << exact.network.net.num_vertices << "," << exact.network.net.num_edges() << "\n";
  }
  return exact.converged ? 0 : 3;
}

// The arrival rate comes from exactly one of: --lambda (absolute), --lambda-mult
// (multiple of the critical rate), --lambda-offset (critical rate plus offset).
struct RateSpec {
  double lambda = -1.0;
  double mult = -1.0;
  double offset = std::numeric_limits<double>::quiet_NaN();
};

int cmd_simulate(const std::string& path, int fleet, const RateSpec& spec, double horizon,
                 std::uint64_t seed, double tol, const std::string& series) {
  roademd::Instance inst = roademd::load_instance(path);
  require_trips(inst);
  roademd::ServiceTimePrediction pred =
      roademd::predicted_service_time(inst.map, inst.trips, tol);
  double lambda_star = roademd::critical_rate(pred.service_time, fleet);
  double rate = spec.lambda;
  if (spec.mult >= 0.0) rate = spec.mult * lambda_star;
  if (!std::isnan(spec.offset)) rate = lambda_star + spec.offset;
  if (rate < 0.0) rate = 1.0;
  std::cout << "carry " << fmt(pred.carry) << "\n"
            << "reposition " << fmt(pred.reposition) << "\n"
            << "service-time " << fmt(pred.service_time) << "\n"
            << "critical-rate " << fmt(lambda_star) << "\n"
            << "rate " << fmt(rate) << "\n";

  roademd::SimParams params;
  params.fleet = fleet;
  params.rate = rate;
  params.horizon = horizon;
  params.seed = seed;
  roademd::SimResult res = roademd::simulate(inst.map, inst.trips, params);
  std::cout << "arrived " << res.arrived << "\n"
            << "completed " << res.completed << "\n"
            << "completion-rate " << fmt(res.completion_rate) << "\n"
            << "observed-service "
            << fmt(res.completed > 0 ? fleet * horizon / res.completed : 0.0) << "\n"
            << "max-outstanding " << res.max_outstanding << "\n"
            << "final-outstanding " << res.final_outstanding << "\n"
            << "renewals " << res.renewal_times.size() << "\n"
            << "mean-busy " << fmt(res.mean_busy) << "\n"
            << "mean-sojourn " << fmt(res.mean_sojourn) << "\n";
  if (!series.empty()) {
    std::ofstream out(series);
    if (!out) throw roademd::ValidationError("cannot write '" + series + "'");
    out << "time,outstanding\n";
    for (const auto& [t, n] : res.outstanding_series) out << fmt(t) << "," << n << "\n";
  }
  return pred.emd_converged ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"earth mover's distance and vehicle-sharing simulation on road networks"};
  app.require_subcommand(1);

  std::string path, mode = "exact", dump_flow, series;
  double epsilon = 0.1, horizon = 1000.0;
  std::vector<double> epsilons = {0.5, 0.25, 0.1, 0.05};
  int fleet = 1;
  std::uint64_t seed = 0;
  double tol = 1e-7;
  RateSpec rate_spec;

  CLI::App* validate = app.add_subcommand("validate", "parse an instance and report sizes");
  validate->add_option("instance", path, "instance JSON file")->required();

  CLI::App* emd = app.add_subcommand("emd", "transport distance between supply and demand");
  emd->add_option("instance", path, "instance JSON file")->required();
  emd->add_option("--mode", mode, "exact, lower, upper, or path")
      ->check(CLI::IsMember({"exact", "lower", "upper", "path"}));
  emd->add_option("--epsilon", epsilon, "cell size for lower/upper/path modes");
  emd->add_option("--tol", tol, "duality-gap tolerance for exact mode");
  emd->add_option("--dump-flow", dump_flow, "write the optimal flow as CSV (exact mode)");

  CLI::App* conv = app.add_subcommand("convergence", "bounds against the exact value as CSV");
  conv->add_option("instance", path, "instance JSON file")->required();
  conv->add_option("--epsilons", epsilons, "cell sizes to sweep")->delimiter(',');
  conv->add_option("--tol", tol, "duality-gap tolerance for the exact solve");

  CLI::App* sim = app.add_subcommand("simulate", "event simulation of the sharing system");
  sim->add_option("instance", path, "instance JSON file")->required();
  sim->add_option("--m,--fleet", fleet, "number of vehicles");
  CLI::Option* olambda =
      sim->add_option("--lambda,--rate", rate_spec.lambda, "demand arrival rate (default 1)");
  CLI::Option* omult = sim->add_option("--lambda-mult", rate_spec.mult,
                                       "arrival rate as a multiple of the critical rate");
  CLI::Option* ooffset = sim->add_option("--lambda-offset", rate_spec.offset,
                                         "arrival rate as critical rate plus this offset");
  olambda->excludes(omult)->excludes(ooffset);
  omult->excludes(ooffset);
  sim->add_option("--horizon", horizon, "simulated time span");
  sim->add_option("--seed", seed, "master random seed");
  sim->add_option("--tol", tol, "duality-gap tolerance for the prediction");
  sim->add_option("--out,--series", series, "write (time, outstanding) per event as CSV");

  try {
    tol = default_tol();
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const roademd::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (validate->parsed()) return cmd_validate(path);
    if (emd->parsed()) return cmd_emd(path, mode, epsilon, tol, dump_flow);
    if (conv->parsed()) return cmd_convergence(path, epsilons, tol);
    if (sim->parsed()) return cmd_simulate(path, fleet, rate_spec, horizon, seed, tol, series);
  } catch (const roademd::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const roademd::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const roademd::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
