#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "trumlsl/error.hpp"
#include "trumlsl/ids.hpp"
#include "trumlsl/rational.hpp"

namespace trumlsl {

enum class SegmentKind { Lane, Crossing };

inline const char* to_string(SegmentKind kind) {
  return kind == SegmentKind::Lane ? "lane" : "crossing";
}

struct SegmentDecl {
  SegmentId id;
  SegmentKind kind = SegmentKind::Lane;
  Rational length;
};

using EdgeDecl = std::pair<SegmentId, SegmentId>;
using NeighbourDecl = std::pair<SegmentId, SegmentId>;

/// A travel route: the finite window of pth(C) a scenario declares.
struct PathSpec {
  std::vector<SegmentId> waypoints;

  friend bool operator==(const PathSpec&, const PathSpec&) = default;
};

/// Directed graph of lane and crossing segments plus the undirected
/// neighbour relation used for vertical stacking. Immutable once built.
class RoadNetwork {
 public:
  struct Segment {
    SegmentKind kind;
    Rational length;
    friend bool operator==(const Segment&, const Segment&) = default;
  };

  bool contains(const SegmentId& s) const { return segments_.count(s) != 0; }

  SegmentKind kind(const SegmentId& s) const { return at(s).kind; }
  Rational length(const SegmentId& s) const { return at(s).length; }

  bool has_edge(const SegmentId& from, const SegmentId& to) const {
    return edges_.count({from, to}) != 0;
  }

  std::vector<SegmentId> successors(const SegmentId& s) const {
    at(s);
    std::vector<SegmentId> out;
    for (auto it = edges_.lower_bound({s, SegmentId{}}); it != edges_.end() && it->first == s; ++it)
      out.push_back(it->second);
    return out;
  }

  /// Neighbours of `s` in declaration order.
  const std::vector<SegmentId>& neighbours(const SegmentId& s) const {
    static const std::vector<SegmentId> none;
    at(s);
    auto it = neighbours_.find(s);
    return it == neighbours_.end() ? none : it->second;
  }

  bool are_neighbours(const SegmentId& a, const SegmentId& b) const {
    const auto& n = neighbours(a);
    return std::find(n.begin(), n.end(), b) != n.end();
  }

  const std::map<SegmentId, Segment>& segments() const { return segments_; }
  const std::set<EdgeDecl>& edges() const { return edges_; }

  friend bool operator==(const RoadNetwork&, const RoadNetwork&) = default;

 private:
  friend RoadNetwork build_network(const std::vector<SegmentDecl>&, const std::vector<EdgeDecl>&,
                                   const std::vector<NeighbourDecl>&);

  const Segment& at(const SegmentId& s) const {
    auto it = segments_.find(s);
    if (it == segments_.end()) throw Error(ErrorCode::UnknownSegment, s.str());
    return it->second;
  }

  std::map<SegmentId, Segment> segments_;
  std::set<EdgeDecl> edges_;
  std::map<SegmentId, std::vector<SegmentId>> neighbours_;
};

inline RoadNetwork build_network(const std::vector<SegmentDecl>& segment_decls,
                                 const std::vector<EdgeDecl>& edge_decls,
                                 const std::vector<NeighbourDecl>& neighbour_decls = {}) {
  RoadNetwork net;
  for (const auto& d : segment_decls) {
    if (net.segments_.count(d.id)) throw Error(ErrorCode::DuplicateSegment, d.id.str());
    if (d.length <= 0) throw Error(ErrorCode::NonPositiveLength, d.id.str());
    net.segments_.emplace(d.id, RoadNetwork::Segment{d.kind, d.length});
  }
  for (const auto& [from, to] : edge_decls) {
    if (!net.contains(from) || !net.contains(to))
      throw Error(ErrorCode::DanglingEdge, "(" + from.str() + ", " + to.str() + ")");
    net.edges_.insert({from, to});
  }
  auto add_neighbour = [&](const SegmentId& a, const SegmentId& b) {
    auto& list = net.neighbours_[a];
    if (std::find(list.begin(), list.end(), b) == list.end()) list.push_back(b);
  };
  for (const auto& [a, b] : neighbour_decls) {
    if (!net.contains(a) || !net.contains(b))
      throw Error(ErrorCode::DanglingEdge, "neighbour (" + a.str() + ", " + b.str() + ")");
    if (a == b) continue;
    add_neighbour(a, b);
    add_neighbour(b, a);
  }
  return net;
}

class IllegalStepError : public Error {
 public:
  IllegalStepError(std::size_t step, const std::string& message)
      : Error(ErrorCode::IllegalStep, message), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Index of the first pair (i, i+1) that is not an edge, if any.
inline std::optional<std::size_t> first_illegal_step(const RoadNetwork& net, const PathSpec& p) {
  for (std::size_t i = 0; i + 1 < p.waypoints.size(); ++i)
    if (!net.has_edge(p.waypoints[i], p.waypoints[i + 1])) return i;
  return std::nullopt;
}

inline void validate_path(const RoadNetwork& net, const PathSpec& p) {
  if (p.waypoints.empty()) throw Error(ErrorCode::EmptyPath, "path has no waypoints");
  for (const auto& s : p.waypoints)
    if (!net.contains(s)) throw Error(ErrorCode::UnknownSegment, s.str());
  if (auto i = first_illegal_step(net, p))
    throw IllegalStepError(*i, std::to_string(*i) + ": (" + p.waypoints[*i].str() + ", " +
                                            p.waypoints[*i + 1].str() + ")");
}

inline SegmentKind segment_kind(const RoadNetwork& net, const SegmentId& s) { return net.kind(s); }
inline Rational segment_length(const RoadNetwork& net, const SegmentId& s) { return net.length(s); }

}  // namespace trumlsl
