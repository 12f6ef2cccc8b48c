#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "trumlsl/error.hpp"
#include "trumlsl/ids.hpp"
#include "trumlsl/rational.hpp"
#include "trumlsl/road_network.hpp"

namespace trumlsl {

struct Placement {
  SegmentId segment;
  Rational position;

  friend bool operator==(const Placement&, const Placement&) = default;
  friend bool operator<(const Placement& a, const Placement& b) {
    if (a.segment != b.segment) return a.segment < b.segment;
    return a.position < b.position;
  }
};

/// Dynamic state of one road user. `path_index` locates the segment the
/// rear is on; `pos` is measured from that segment's start.
struct CarState {
  std::set<SegmentId> res;
  std::set<SegmentId> clm;
  std::set<SegmentId> cres;
  std::set<SegmentId> cclm;
  Rational pos;
  Rational spd;
  Rational acc;
  Rational size{1};
  PathSpec path;
  std::size_t path_index = 0;
  bool aut = true;

  friend bool operator==(const CarState&, const CarState&) = default;
};

/// Local interval [lo, hi] on one segment of a car's path.
struct SegmentInterval {
  std::size_t path_index;
  SegmentId segment;
  Rational lo;
  Rational hi;
};

class TrafficSnapshot {
 public:
  TrafficSnapshot() = default;
  explicit TrafficSnapshot(std::shared_ptr<const RoadNetwork> net) : net_(std::move(net)) {}

  const RoadNetwork& net() const { return *net_; }
  const std::shared_ptr<const RoadNetwork>& net_ptr() const { return net_; }

  const std::map<CarId, CarState>& cars() const { return cars_; }
  const std::map<ObjectKind, std::set<Placement>>& obj() const { return obj_; }

  bool has_car(const CarId& c) const { return cars_.count(c) != 0; }
  const CarState& car(const CarId& c) const {
    auto it = cars_.find(c);
    if (it == cars_.end()) throw Error(ErrorCode::UnknownCar, c.str());
    return it->second;
  }
  CarState& mutable_car(const CarId& c) {
    auto it = cars_.find(c);
    if (it == cars_.end()) throw Error(ErrorCode::UnknownCar, c.str());
    return it->second;
  }

  bool has_object_kind(const ObjectKind& o) const { return obj_.count(o) != 0; }
  const std::set<Placement>& placements(const ObjectKind& o) const {
    static const std::set<Placement> none;
    auto it = obj_.find(o);
    return it == obj_.end() ? none : it->second;
  }

  void declare_object_kind(const ObjectKind& o) { obj_[o]; }
  void insert_car(const CarId& id, CarState state) { cars_[id] = std::move(state); }
  std::set<Placement>& mutable_placements(const ObjectKind& o) { return obj_[o]; }
  void erase_placement(const ObjectKind& o, const Placement& p) {
    auto it = obj_.find(o);
    if (it != obj_.end()) it->second.erase(p);
  }

  friend bool operator==(const TrafficSnapshot& a, const TrafficSnapshot& b) {
    bool same_net = a.net_ == b.net_ || (a.net_ && b.net_ && *a.net_ == *b.net_);
    return same_net && a.cars_ == b.cars_ && a.obj_ == b.obj_;
  }

 private:
  std::shared_ptr<const RoadNetwork> net_;
  std::map<CarId, CarState> cars_;
  std::map<ObjectKind, std::set<Placement>> obj_;
};

// ---------------------------------------------------------------------------
// Path geometry

/// Cumulative start offsets of each waypoint; back() is the total length.
inline std::vector<Rational> path_offsets(const RoadNetwork& net, const PathSpec& path) {
  std::vector<Rational> off{Rational(0)};
  off.reserve(path.waypoints.size() + 1);
  for (const auto& s : path.waypoints) off.push_back(off.back() + net.length(s));
  return off;
}

inline Rational rear_coordinate(const RoadNetwork& net, const CarState& car) {
  Rational x = car.pos;
  for (std::size_t i = 0; i < car.path_index; ++i) x += net.length(car.path.waypoints[i]);
  return x;
}

/// Pieces of the path interval [from, to] (path coordinates) with positive
/// overlap on each waypoint, in path order.
inline std::vector<SegmentInterval> path_cover(const RoadNetwork& net, const PathSpec& path,
                                               const Rational& from, const Rational& to) {
  std::vector<SegmentInterval> out;
  Rational start(0);
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    Rational end = start + net.length(path.waypoints[i]);
    Rational lo = rmax(from, start), hi = rmin(to, end);
    if (lo < hi) out.push_back({i, path.waypoints[i], lo - start, hi - start});
    start = end;
    if (start >= to) break;
  }
  return out;
}

/// The car body [pos, pos + size] split over the segments it covers.
inline std::vector<SegmentInterval> body_intervals(const RoadNetwork& net, const CarState& car) {
  Rational rear = rear_coordinate(net, car);
  auto off = path_offsets(net, car.path);
  if (rear + car.size > off.back())
    throw Error(ErrorCode::PathExhausted, "body extends past the end of the declared path");
  return path_cover(net, car.path, rear, rear + car.size);
}

/// res = lane segments under the body; cres = crossings under the body plus
/// any previously reserved crossings still ahead on the path.
inline void normalize_occupancy(const RoadNetwork& net, CarState& car) {
  auto body = body_intervals(net, car);
  std::set<SegmentId> ahead;
  for (std::size_t i = car.path_index; i < car.path.waypoints.size(); ++i)
    ahead.insert(car.path.waypoints[i]);
  std::set<SegmentId> res, cres;
  for (const auto& piece : body)
    (net.kind(piece.segment) == SegmentKind::Lane ? res : cres).insert(piece.segment);
  for (const auto& s : car.cres)
    if (ahead.count(s) && net.kind(s) == SegmentKind::Crossing) cres.insert(s);
  std::set<SegmentId> cclm;
  for (const auto& s : car.cclm)
    if (ahead.count(s)) cclm.insert(s);
  car.res = std::move(res);
  car.cres = std::move(cres);
  car.cclm = std::move(cclm);
}

/// Where a car's reservation lies on one segment, in local coordinates.
/// Reserved crossings are held as a whole; lane reservations follow the body.
inline std::vector<SegmentInterval> reservation_extents(const RoadNetwork& net,
                                                        const CarState& car) {
  std::vector<SegmentInterval> out;
  for (const auto& piece : body_intervals(net, car))
    if (car.res.count(piece.segment)) out.push_back(piece);
  for (const auto& s : car.cres) out.push_back({0, s, Rational(0), net.length(s)});
  return out;
}

/// Lane claims mirror the body onto the claimed neighbour lane; crossing
/// claims cover whole segments.
inline std::vector<SegmentInterval> claim_extents(const RoadNetwork& net, const CarState& car) {
  std::vector<SegmentInterval> out;
  if (!car.clm.empty()) {
    auto body = body_intervals(net, car);
    for (const auto& s : car.clm) {
      for (const auto& piece : body) {
        if (!net.are_neighbours(s, piece.segment)) continue;
        Rational hi = rmin(piece.hi, net.length(s));
        if (piece.lo < hi) out.push_back({0, s, piece.lo, hi});
      }
    }
  }
  for (const auto& s : car.cclm) out.push_back({0, s, Rational(0), net.length(s)});
  return out;
}

/// First maximal run of crossing segments at or after the rear segment.
inline std::vector<SegmentId> crossing_run_ahead(const RoadNetwork& net, const CarState& car) {
  std::vector<SegmentId> run;
  const auto& wp = car.path.waypoints;
  std::size_t i = car.path_index;
  while (i < wp.size() && net.kind(wp[i]) != SegmentKind::Crossing) ++i;
  while (i < wp.size() && net.kind(wp[i]) == SegmentKind::Crossing) run.push_back(wp[i++]);
  return run;
}

// ---------------------------------------------------------------------------
// Evolution transitions. All are pure: they return a new snapshot.

/// Distance covered and final speed after `t` under constant acceleration,
/// with speed clamped at zero.
inline std::pair<Rational, Rational> advance_kinematics(const Rational& spd, const Rational& acc,
                                                        const Rational& t) {
  if (acc < 0 && spd + acc * t < 0) {
    // Stops at spd / -acc and holds position.
    Rational stop_time = spd / -acc;
    return {spd * stop_time + acc * stop_time * stop_time / 2, Rational(0)};
  }
  return {spd * t + acc * t * t / 2, spd + acc * t};
}

inline TrafficSnapshot time_transition(const TrafficSnapshot& ts, const Rational& t) {
  if (t <= 0) throw Error(ErrorCode::NonPositiveDuration, to_string(t));
  TrafficSnapshot out = ts;
  const auto& net = ts.net();
  for (const auto& [id, car] : ts.cars()) {
    CarState next = car;
    auto [dist, spd] = advance_kinematics(car.spd, car.acc, t);
    next.spd = spd;
    auto off = path_offsets(net, car.path);
    Rational rear = off[car.path_index] + car.pos + dist;
    if (rear + car.size > off.back())
      throw Error(ErrorCode::PathExhausted, id.str());
    std::size_t j = car.path_index;
    while (j + 1 < car.path.waypoints.size() && rear >= off[j + 1]) ++j;
    next.path_index = j;
    next.pos = rear - off[j];
    normalize_occupancy(net, next);
    out.insert_car(id, std::move(next));
  }
  return out;
}

inline TrafficSnapshot claim_crossing(const TrafficSnapshot& ts, const CarId& c) {
  TrafficSnapshot out = ts;
  CarState& car = out.mutable_car(c);
  auto run = crossing_run_ahead(ts.net(), car);
  if (run.empty()) throw Error(ErrorCode::NoCrossingAhead, c.str());
  car.cclm = std::set<SegmentId>(run.begin(), run.end());
  return out;
}

inline TrafficSnapshot withdraw_crossing_claim(const TrafficSnapshot& ts, const CarId& c) {
  TrafficSnapshot out = ts;
  out.mutable_car(c).cclm.clear();
  return out;
}

inline TrafficSnapshot reserve_crossing(const TrafficSnapshot& ts, const CarId& c) {
  TrafficSnapshot out = ts;
  CarState& car = out.mutable_car(c);
  if (car.cclm.empty()) throw Error(ErrorCode::NothingToPromote, c.str());
  car.cres.insert(car.cclm.begin(), car.cclm.end());
  car.cclm.clear();
  return out;
}

/// Drops reservations ahead; crossings under the body stay reserved.
inline TrafficSnapshot withdraw_crossing_reservation(const TrafficSnapshot& ts, const CarId& c) {
  TrafficSnapshot out = ts;
  CarState& car = out.mutable_car(c);
  car.cres.clear();
  for (const auto& piece : body_intervals(ts.net(), car))
    if (ts.net().kind(piece.segment) == SegmentKind::Crossing) car.cres.insert(piece.segment);
  return out;
}

inline TrafficSnapshot set_lane_claim(const TrafficSnapshot& ts, const CarId& c,
                                      const SegmentId& s) {
  TrafficSnapshot out = ts;
  CarState& car = out.mutable_car(c);
  const auto& net = ts.net();
  if (!net.contains(s)) throw Error(ErrorCode::UnknownSegment, s.str());
  bool ok = net.kind(s) == SegmentKind::Lane;
  if (ok) {
    ok = false;
    for (const auto& r : car.res) ok = ok || net.are_neighbours(r, s);
  }
  if (!ok) throw Error(ErrorCode::NotNeighbouring, s.str() + " for car " + c.str());
  car.clm = {s};
  return out;
}

inline TrafficSnapshot withdraw_lane_claim(const TrafficSnapshot& ts, const CarId& c) {
  TrafficSnapshot out = ts;
  out.mutable_car(c).clm.clear();
  return out;
}

inline TrafficSnapshot place(const TrafficSnapshot& ts, const ObjectKind& o, const SegmentId& s,
                             const Rational& p) {
  const auto& net = ts.net();
  if (!net.contains(s)) throw Error(ErrorCode::UnknownSegment, s.str());
  if (p < 0 || p > net.length(s))
    throw Error(ErrorCode::PositionOutOfRange, to_string(p) + " on " + s.str());
  TrafficSnapshot out = ts;
  out.mutable_placements(o).insert({s, p});
  return out;
}

inline TrafficSnapshot remove(const TrafficSnapshot& ts, const ObjectKind& o, const SegmentId& s,
                              const Rational& p) {
  TrafficSnapshot out = ts;
  out.erase_placement(o, {s, p});
  return out;
}

/// Toggles the autonomy flag.
inline TrafficSnapshot switch_autonomy(const TrafficSnapshot& ts, const CarId& c) {
  TrafficSnapshot out = ts;
  CarState& car = out.mutable_car(c);
  car.aut = !car.aut;
  return out;
}

inline TrafficSnapshot set_acceleration(const TrafficSnapshot& ts, const CarId& c,
                                        const Rational& a) {
  TrafficSnapshot out = ts;
  out.mutable_car(c).acc = a;
  return out;
}

// ---------------------------------------------------------------------------
// Canonical text and digest, used by the trace writer.

inline std::string canonical_string(const TrafficSnapshot& ts) {
  std::ostringstream os;
  auto set_str = [](const std::set<SegmentId>& s) {
    std::string r = "{";
    bool first = true;
    for (const auto& x : s) {
      if (!first) r += ",";
      r += x.str();
      first = false;
    }
    return r + "}";
  };
  for (const auto& [id, c] : ts.cars()) {
    os << "car " << id << " idx=" << c.path_index << " pos=" << to_string(c.pos)
       << " spd=" << to_string(c.spd) << " acc=" << to_string(c.acc)
       << " size=" << to_string(c.size) << " aut=" << c.aut << " res=" << set_str(c.res)
       << " cres=" << set_str(c.cres) << " clm=" << set_str(c.clm) << " cclm=" << set_str(c.cclm)
       << "\n";
  }
  for (const auto& [o, ps] : ts.obj()) {
    os << "obj " << o << " {";
    for (const auto& p : ps) os << "(" << p.segment << "," << to_string(p.position) << ")";
    os << "}\n";
  }
  return os.str();
}

inline std::string digest(const TrafficSnapshot& ts) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical_string(ts)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace trumlsl
