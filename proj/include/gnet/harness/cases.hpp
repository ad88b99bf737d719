#pragma once

// Built-in test nets.

#include "gnet/harness/spec_io.hpp"

namespace gnet::harness {

inline const std::vector<std::string>& case_names() {
  static const std::vector<std::string> names = {"honeycomb-torus", "sphere-theta", "sphere-equator", "flat-loop"};
  return names;
}

/// honeycomb-torus: hexagonal flat torus, vertices A=(0,0) and B=(1,0), three
/// unit edges from A along (1,0), (-1/2, +-sqrt3/2), each ending at a lattice
/// image of B.
/// sphere-theta: unit sphere projected from the equatorial point at longitude
/// 60 degrees; meridians at longitudes 0, 120, 240 from N to S.
/// sphere-equator: the equator, which is the unit circle in the chart.
/// flat-loop: the closed geodesic t -> (t, 1/2) on the unit square torus.
inline json generate_case(const std::string& name, int samples = kDefaultSamples) {
  const double s3 = std::sqrt(3.0) / 2.0;
  json j;
  j["options"] = {{"N_E", samples}};
  if (name == "honeycomb-torus") {
    j["graph"] = {{"vertices", {"A", "B"}},
                  {"edges",
                   {{{"id", "E1"}, {"v0", "A"}, {"v1", "B"}, {"multiplicity", 1}},
                    {{"id", "E2"}, {"v0", "A"}, {"v1", "B"}, {"multiplicity", 1}},
                    {{"id", "E3"}, {"v0", "A"}, {"v1", "B"}, {"multiplicity", 1}}}}};
    j["metric"] = {{"kind", "flat-torus"}, {"params", {{"lattice", {{1.5, s3}, {1.5, -s3}}}}}};
    j["net"]["edges"] = {{"E1", {{"generator", "straight"}, {"from", {0.0, 0.0}}, {"to", {1.0, 0.0}}}},
                         {"E2", {{"generator", "straight"}, {"from", {0.0, 0.0}}, {"to", {-0.5, s3}}}},
                         {"E3", {{"generator", "straight"}, {"from", {0.0, 0.0}}, {"to", {-0.5, -s3}}}}};
  } else if (name == "sphere-theta") {
    j["graph"] = {{"vertices", {"N", "S"}},
                  {"edges",
                   {{{"id", "M0"}, {"v0", "N"}, {"v1", "S"}, {"multiplicity", 1}},
                    {{"id", "M120"}, {"v0", "N"}, {"v1", "S"}, {"multiplicity", 1}},
                    {{"id", "M240"}, {"v0", "N"}, {"v1", "S"}, {"multiplicity", 1}}}}};
    j["metric"] = {{"kind", "stereographic-sphere"}, {"params", {{"radius", 1.0}}}};
    for (int lon : {0, 120, 240})
      j["net"]["edges"]["M" + std::to_string(lon)] = {
          {"generator", "meridian"}, {"longitude_deg", lon}, {"projection_longitude_deg", 60.0}};
  } else if (name == "sphere-equator") {
    j["graph"] = {{"vertices", {"v"}}, {"edges", {{{"id", "E"}, {"v0", "v"}, {"v1", "v"}, {"multiplicity", 1}}}}};
    j["metric"] = {{"kind", "stereographic-sphere"}, {"params", {{"radius", 1.0}}}};
    j["net"]["edges"] = {{"E",
                          {{"generator", "circle-arc"},
                           {"center", {0.0, 0.0}},
                           {"radius", 1.0},
                           {"angle0", 0.0},
                           {"angle1", 2.0 * std::numbers::pi}}}};
  } else if (name == "flat-loop") {
    j["graph"] = {{"vertices", {"v"}}, {"edges", {{{"id", "E"}, {"v0", "v"}, {"v1", "v"}, {"multiplicity", 1}}}}};
    j["metric"] = {{"kind", "flat-torus"}, {"params", {{"lattice", {{1.0, 0.0}, {0.0, 1.0}}}}}};
    j["net"]["edges"] = {{"E", {{"generator", "straight"}, {"from", {0.0, 0.5}}, {"to", {1.0, 0.5}}}}};
  } else {
    throw ValidationError("unknown case '" + name + "'");
  }
  return j;
}

inline Experiment load_case(const std::string& name, int samples = kDefaultSamples) {
  return parse_experiment(generate_case(name, samples));
}

}  // namespace gnet::harness
