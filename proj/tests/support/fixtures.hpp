#pragma once

#include <memory>
#include <string>
#include <vector>

#include "trumlsl/scenario.hpp"
#include "trumlsl/snapshot.hpp"

namespace fixtures {

using namespace trumlsl;

inline std::string scenario_path(const std::string& name) {
  return std::string(TRUMLSL_SCENARIO_DIR) + "/" + name;
}

inline Scenario load(const std::string& name) { return load_scenario(scenario_path(name)); }

inline SegmentId S(const std::string& s) { return SegmentId(s); }
inline CarId C(const std::string& s) { return CarId(s); }
inline ObjectKind O(const std::string& s) { return ObjectKind(s); }
inline Rational R(std::int64_t n, std::int64_t d = 1) { return Rational(n, d); }

inline PathSpec path(std::initializer_list<const char*> ids) {
  PathSpec p;
  for (const auto* s : ids) p.waypoints.emplace_back(s);
  return p;
}

/// A car whose rear sits `pos` into waypoint `index`, occupancy derived
/// from its body.
inline CarState car_on(const RoadNetwork& net, PathSpec p, Rational pos, Rational size, Rational spd = 0,
                       Rational acc = 0, std::size_t index = 0) {
  CarState c;
  c.path = std::move(p);
  c.path_index = index;
  c.pos = pos;
  c.size = size;
  c.spd = spd;
  c.acc = acc;
  normalize_occupancy(net, c);
  return c;
}

/// The fig1 street layout: lanes 0-7 and crossings c0-c3.
inline std::shared_ptr<const RoadNetwork> fig1_network() {
  std::vector<SegmentDecl> segs;
  for (int i = 0; i < 8; ++i) segs.push_back({SegmentId(std::to_string(i)), SegmentKind::Lane, Rational(100)});
  for (int i = 0; i < 4; ++i) segs.push_back({SegmentId("c" + std::to_string(i)), SegmentKind::Crossing, Rational(10)});
  std::vector<EdgeDecl> edges{{S("6"), S("c3")}, {S("c3"), S("c2")}, {S("c2"), S("c1")}, {S("c1"), S("1")},
                              {S("7"), S("c0")}, {S("c0"), S("0")},  {S("2"), S("c1")},  {S("c0"), S("3")},
                              {S("4"), S("c2")}, {S("c3"), S("5")}};
  std::vector<NeighbourDecl> nb{{S("6"), S("7")}, {S("c3"), S("c0")}, {S("c2"), S("c0")},
                                {S("c1"), S("c0")}, {S("1"), S("0")}, {S("2"), S("3")}};
  return std::make_shared<const RoadNetwork>(build_network(segs, edges, nb));
}

/// One straight road: lane a (la) -> crossing x (lx) -> lane b (lb).
inline std::shared_ptr<const RoadNetwork> straight(Rational la = 100, Rational lx = 10, Rational lb = 100) {
  return std::make_shared<const RoadNetwork>(build_network(
      {{S("a"), SegmentKind::Lane, la}, {S("x"), SegmentKind::Crossing, lx}, {S("b"), SegmentKind::Lane, lb}},
      {{S("a"), S("x")}, {S("x"), S("b")}}));
}

}  // namespace fixtures
