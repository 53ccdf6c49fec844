#pragma once

// JSON (de)serialization for problem instances. An instance bundles a road
// network with optional supply and demand measures and an optional trip pmf:
//
//   {
//     "vertices": ["1", "2"],
//     "roads": [{"id": "N", "tail": "1", "head": "2", "length": 1}],
//     "supply": {"N": {"breakpoints": [0, 1], "values": ["2/5"]}},
//     "demand": {...},
//     "trips": [{"pickup": "N", "delivery": "N", "prob": "1/5"}]
//   }
//
// Numbers may be JSON numbers or strings of the form "p/q" with integer p and
// positive integer q, so fixtures can state exact rationals. Parsing is
// strict: unknown keys are rejected to catch typos in hand-written files.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "roademd/dpdp.hpp"

namespace roademd {

struct Instance {
  RoadMap map;
  Measure supply;
  Measure demand;
  DemandPmf trips;
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, const char* what,
                         std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) known = true;
    if (!known) throw ValidationError(std::string(what) + ": unknown key '" + it.key() + "'");
  }
}

// JSON number, or "p/q" with integer p and positive integer q.
inline double parse_number(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    std::size_t slash = s.find('/');
    if (slash != std::string::npos) {
      try {
        std::size_t np = 0, dp = 0;
        long long num = std::stoll(s.substr(0, slash), &np);
        long long den = std::stoll(s.substr(slash + 1), &dp);
        if (np == slash && dp == s.size() - slash - 1 && den > 0)
          return static_cast<double>(num) / static_cast<double>(den);
      } catch (const std::exception&) {
      }
    }
    throw ValidationError(what + ": expected a number or \"p/q\", got '" + s + "'");
  }
  throw ValidationError(what + ": expected a number or \"p/q\"");
}

inline Density parse_density(const json& j, const std::string& what) {
  if (!j.is_object()) throw ValidationError(what + ": expected an object");
  require_keys(j, what.c_str(), {"breakpoints", "values"});
  if (!j.contains("breakpoints") || !j.contains("values"))
    throw ValidationError(what + ": needs 'breakpoints' and 'values'");
  std::vector<double> breaks, values;
  for (const json& b : j.at("breakpoints")) breaks.push_back(parse_number(b, what + ".breakpoints"));
  for (const json& v : j.at("values")) values.push_back(parse_number(v, what + ".values"));
  return Density(breaks, values);
}

inline Measure parse_measure(const json& j, const std::string& what) {
  if (!j.is_object()) throw ValidationError(what + ": expected an object keyed by road id");
  Measure m;
  for (auto it = j.begin(); it != j.end(); ++it)
    m.emplace(it.key(), parse_density(it.value(), what + "." + it.key()));
  return m;
}

}  // namespace detail

inline Instance parse_instance(const nlohmann::json& j) {
  using detail::json;
  if (!j.is_object()) throw ValidationError("instance: expected a JSON object");
  detail::require_keys(j, "instance", {"vertices", "roads", "supply", "demand", "trips"});
  if (!j.contains("vertices") || !j.contains("roads"))
    throw ValidationError("instance: needs 'vertices' and 'roads'");

  std::vector<std::string> vertices;
  for (const json& v : j.at("vertices")) {
    if (!v.is_string()) throw ValidationError("vertices: expected strings");
    vertices.push_back(v.get<std::string>());
  }

  std::vector<RoadSpec> roads;
  for (const json& r : j.at("roads")) {
    if (!r.is_object()) throw ValidationError("roads: expected objects");
    detail::require_keys(r, "road", {"id", "tail", "head", "length"});
    for (const char* key : {"id", "tail", "head", "length"})
      if (!r.contains(key))
        throw ValidationError(std::string("road: missing '") + key + "'");
    RoadSpec spec;
    spec.id = r.at("id").get<std::string>();
    spec.tail = r.at("tail").get<std::string>();
    spec.head = r.at("head").get<std::string>();
    spec.length = detail::parse_number(r.at("length"), "road '" + spec.id + "' length");
    roads.push_back(std::move(spec));
  }

  Instance inst{RoadMap(vertices, roads), {}, {}, {}};

  if (j.contains("supply")) inst.supply = detail::parse_measure(j.at("supply"), "supply");
  if (j.contains("demand")) inst.demand = detail::parse_measure(j.at("demand"), "demand");
  if (!inst.supply.empty()) validate_measure(inst.map, inst.supply, "supply");
  if (!inst.demand.empty()) validate_measure(inst.map, inst.demand, "demand");

  if (j.contains("trips")) {
    for (const json& t : j.at("trips")) {
      if (!t.is_object()) throw ValidationError("trips: expected objects");
      detail::require_keys(t, "trip", {"pickup", "delivery", "prob"});
      for (const char* key : {"pickup", "delivery", "prob"})
        if (!t.contains(key))
          throw ValidationError(std::string("trip: missing '") + key + "'");
      DemandEntry e;
      e.pickup = t.at("pickup").get<std::string>();
      e.delivery = t.at("delivery").get<std::string>();
      e.prob = detail::parse_number(t.at("prob"), "trip prob");
      inst.trips.push_back(std::move(e));
    }
    validate_pmf(inst.map, inst.trips);
  }
  return inst;
}

inline Instance parse_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("instance: invalid JSON: ") + e.what());
  }
  return parse_instance(j);
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

inline nlohmann::json instance_to_json(const Instance& inst) {
  using nlohmann::json;
  json j;
  j["vertices"] = json::array();
  for (int v = 0; v < inst.map.num_vertices(); ++v) j["vertices"].push_back(inst.map.vertex_name(v));
  j["roads"] = json::array();
  for (const Road& r : inst.map.roads()) {
    j["roads"].push_back({{"id", r.id},
                          {"tail", inst.map.vertex_name(r.tail)},
                          {"head", inst.map.vertex_name(r.head)},
                          {"length", r.length}});
  }
  auto measure_json = [](const Measure& m) {
    json out = json::object();
    for (const auto& [id, phi] : m)
      out[id] = {{"breakpoints", phi.breakpoints()}, {"values", phi.values()}};
    return out;
  };
  if (!inst.supply.empty()) j["supply"] = measure_json(inst.supply);
  if (!inst.demand.empty()) j["demand"] = measure_json(inst.demand);
  if (!inst.trips.empty()) {
    j["trips"] = json::array();
    for (const DemandEntry& e : inst.trips)
      j["trips"].push_back({{"pickup", e.pickup}, {"delivery", e.delivery}, {"prob", e.prob}});
  }
  return j;
}

}  // namespace roademd
