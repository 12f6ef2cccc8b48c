#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "trumlsl/error.hpp"
#include "trumlsl/ids.hpp"
#include "trumlsl/rational.hpp"
#include "trumlsl/road_network.hpp"
#include "trumlsl/snapshot.hpp"

namespace trumlsl {

/// One segment as it appears on a virtual lane: it occupies [lo, hi] on the
/// view axis, and axis coordinate x maps to local position x - origin.
struct Piece {
  SegmentId segment;
  Rational origin;
  Rational lo;
  Rational hi;

  friend bool operator==(const Piece&, const Piece&) = default;
};

struct VirtualLane {
  std::vector<Piece> pieces;

  std::vector<SegmentId> segs() const {
    std::vector<SegmentId> out;
    for (const auto& p : pieces) out.push_back(p.segment);
    return out;
  }

  friend bool operator==(const VirtualLane&, const VirtualLane&) = default;
};

/// V(E) = (L, X, E). Lane 0 is the ego's own path; neighbour runs follow.
struct VirtualView {
  std::vector<VirtualLane> lanes;
  Rational lo;
  Rational hi;
  CarId ego;

  Rational length() const { return hi - lo; }

  friend bool operator==(const VirtualView&, const VirtualView&) = default;
};

/// Maps a local interval on `piece.segment` onto the axis, clipped to the
/// piece's visible span.
inline std::optional<std::pair<Rational, Rational>> project(const Piece& piece,
                                                            const Rational& local_lo,
                                                            const Rational& local_hi) {
  Rational lo = rmax(piece.origin + local_lo, piece.lo);
  Rational hi = rmin(piece.origin + local_hi, piece.hi);
  if (lo > hi) return std::nullopt;
  return std::make_pair(lo, hi);
}

namespace detail {

inline VirtualLane clip_lane(const VirtualLane& lane, const Rational& lo, const Rational& hi) {
  VirtualLane out;
  for (const auto& p : lane.pieces) {
    Rational a = rmax(p.lo, lo), b = rmin(p.hi, hi);
    bool keep = lo < hi ? a < b : (p.lo <= lo && lo <= p.hi);
    if (keep) out.pieces.push_back({p.segment, p.origin, a, b});
  }
  return out;
}

}  // namespace detail

/// Builds the view around `ego` reaching `back` behind its rear and `ahead`
/// beyond its front. With `clamp` the extension is cut to the declared path
/// instead of failing.
inline VirtualView build_view(const TrafficSnapshot& ts, const CarId& ego, const Rational& back,
                              const Rational& ahead, bool clamp = false) {
  const CarState& car = ts.car(ego);
  const auto& net = ts.net();
  auto off = path_offsets(net, car.path);
  Rational rear = off[car.path_index] + car.pos;
  VirtualView v;
  v.ego = ego;
  v.lo = rear - back;
  v.hi = rear + car.size + ahead;
  if (v.lo < 0 || v.hi > off.back()) {
    if (!clamp) throw Error(ErrorCode::PathExhausted, "view horizon exceeds the path of " + ego.str());
    v.lo = rmax(v.lo, Rational(0));
    v.hi = rmin(v.hi, off.back());
  }

  const auto& wp = car.path.waypoints;
  std::set<SegmentId> on_path(wp.begin(), wp.end());
  struct Counterpart {
    Rational start, end;
    const std::vector<SegmentId>* neighbours;
  };
  std::vector<Counterpart> ego_segments;
  VirtualLane ego_lane;
  for (std::size_t i = 0; i < wp.size(); ++i) {
    Rational a = rmax(off[i], v.lo), b = rmin(off[i + 1], v.hi);
    if (a < b) {
      ego_lane.pieces.push_back({wp[i], off[i], a, b});
      ego_segments.push_back({off[i], off[i + 1], &net.neighbours(wp[i])});
    }
  }
  v.lanes.push_back(ego_lane);

  // One virtual lane per slot and maximal run of neighbouring segments.
  std::size_t slots = 0;
  std::vector<std::vector<SegmentId>> candidates;
  for (const auto& cp : ego_segments) {
    std::vector<SegmentId> off_path;
    for (const auto& n : *cp.neighbours)
      if (!on_path.count(n)) off_path.push_back(n);
    slots = std::max(slots, off_path.size());
    candidates.push_back(std::move(off_path));
  }
  for (std::size_t slot = 0; slot < slots; ++slot) {
    struct RunPiece {
      SegmentId seg;
      Rational start, end;
    };
    std::vector<RunPiece> run;
    auto flush = [&] {
      VirtualLane lane;
      for (const auto& rp : run) {
        Rational span_hi = rmin(rp.start + net.length(rp.seg), rp.end);
        Rational a = rmax(rp.start, v.lo), b = rmin(span_hi, v.hi);
        if (a < b) lane.pieces.push_back({rp.seg, rp.start, a, b});
      }
      if (!lane.pieces.empty()) v.lanes.push_back(std::move(lane));
      run.clear();
    };
    bool previous_mapped = false;
    for (std::size_t i = 0; i < ego_segments.size(); ++i) {
      if (slot >= candidates[i].size()) {
        if (previous_mapped) flush();
        previous_mapped = false;
        continue;
      }
      const SegmentId& n = candidates[i][slot];
      if (previous_mapped && run.back().seg == n)
        run.back().end = ego_segments[i].end;
      else
        run.push_back({n, ego_segments[i].start, ego_segments[i].end});
      previous_mapped = true;
    }
    if (previous_mapped) flush();
  }
  return v;
}

inline std::pair<VirtualView, VirtualView> hsplit(const VirtualView& v, const Rational& p) {
  if (p < v.lo || p > v.hi) throw Error(ErrorCode::SplitOutOfRange, to_string(p));
  VirtualView left{{}, v.lo, p, v.ego}, right{{}, p, v.hi, v.ego};
  for (const auto& lane : v.lanes) {
    left.lanes.push_back(detail::clip_lane(lane, v.lo, p));
    right.lanes.push_back(detail::clip_lane(lane, p, v.hi));
  }
  return {left, right};
}

/// Bottom gets lanes [0, k), top gets lanes [k, n).
inline std::pair<VirtualView, VirtualView> vsplit(const VirtualView& v, std::size_t k) {
  if (k > v.lanes.size()) throw Error(ErrorCode::IndexOutOfRange, std::to_string(k));
  VirtualView bottom{{v.lanes.begin(), v.lanes.begin() + static_cast<long>(k)}, v.lo, v.hi, v.ego};
  VirtualView top{{v.lanes.begin() + static_cast<long>(k), v.lanes.end()}, v.lo, v.hi, v.ego};
  return {bottom, top};
}

/// Every axis coordinate in [lo, hi] where the truth of a spatial atom can
/// change: view bounds, segment boundaries, reservation and claim endpoints
/// of every car, and object positions.
inline std::set<Rational> candidate_splits(const TrafficSnapshot& ts, const VirtualView& v) {
  std::set<Rational> pts{v.lo, v.hi};
  auto add = [&](const Rational& x) {
    if (v.lo <= x && x <= v.hi) pts.insert(x);
  };
  const auto& net = ts.net();
  for (const auto& lane : v.lanes) {
    for (const auto& piece : lane.pieces) {
      add(piece.lo);
      add(piece.hi);
      for (const auto& [id, car] : ts.cars()) {
        auto res = reservation_extents(net, car);
        auto clm = claim_extents(net, car);
        for (const auto* list : {&res, &clm}) {
          for (const auto& e : *list) {
            if (e.segment != piece.segment) continue;
            if (auto iv = project(piece, e.lo, e.hi)) {
              add(iv->first);
              add(iv->second);
            }
          }
        }
      }
      for (const auto& [kind, placements] : ts.obj()) {
        for (const auto& pl : placements) {
          if (pl.segment != piece.segment) continue;
          Rational x = piece.origin + pl.position;
          if (piece.lo <= x && x <= piece.hi) add(x);
        }
      }
    }
  }
  return pts;
}

}  // namespace trumlsl
