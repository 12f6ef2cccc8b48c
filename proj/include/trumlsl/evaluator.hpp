#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "trumlsl/error.hpp"
#include "trumlsl/formula.hpp"
#include "trumlsl/snapshot.hpp"
#include "trumlsl/view.hpp"

namespace trumlsl {

namespace detail {

using Coord = std::int64_t;

struct IntInterval {
  Coord lo, hi;
};

inline std::vector<IntInterval> merge_intervals(std::vector<IntInterval> v) {
  std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.lo < y.lo; });
  std::vector<IntInterval> out;
  for (const auto& iv : v) {
    if (!out.empty() && iv.lo <= out.back().hi)
      out.back().hi = std::max(out.back().hi, iv.hi);
    else
      out.push_back(iv);
  }
  return out;
}

inline bool contains(const std::vector<IntInterval>& merged, Coord a, Coord b) {
  for (const auto& iv : merged)
    if (iv.lo <= a && b <= iv.hi) return true;
  return false;
}

inline bool overlaps_open(const std::vector<IntInterval>& merged, Coord a, Coord b) {
  for (const auto& iv : merged)
    if (iv.lo < b && iv.hi > a) return true;
  return false;
}

struct IntPiece {
  Coord lo, hi;
  bool crossing;
  std::vector<char> reserved;  // per car index: segment in res or cres
  std::vector<char> claimed;   // per car index: segment in clm or cclm
};

struct LaneData {
  std::vector<IntPiece> pieces;  // sorted by lo
  std::vector<IntInterval> cover;
  std::vector<std::vector<IntInterval>> res;  // per car, merged
  std::vector<std::vector<IntInterval>> clm;  // per car, merged
  std::vector<IntInterval> blocked;           // what makes `free` fail
  std::map<ObjectKind, std::vector<Coord>> objects;
};

struct MemoKey {
  const Formula* node;
  Coord a, b;
  std::size_t l0, l1;
  int env;
  bool operator==(const MemoKey&) const = default;
};

struct MemoHash {
  std::size_t operator()(const MemoKey& k) const noexcept {
    std::size_t h = std::hash<const void*>()(k.node);
    auto mix = [&](std::uint64_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(static_cast<std::uint64_t>(k.a));
    mix(static_cast<std::uint64_t>(k.b));
    mix(k.l0);
    mix(k.l1);
    mix(static_cast<std::uint64_t>(k.env));
    return h;
  }
};

/// The view, snapshot and valuation translated to integer coordinates so
/// that chop search runs on exact machine arithmetic. Every rational that
/// matters is a multiple of 1 / (lcd * 2^depth), which also keeps the
/// midpoints taken at each chop nesting level integral.
class Scene {
 public:
  Scene(const TrafficSnapshot& ts, const VirtualView& v, const Valuation& nu, FormulaPtr root)
      : ts_(ts), nu_(nu), root_(std::move(root)) {
    check_valuation();
    auto structural = candidate_splits(ts, v);
    std::int64_t lcd = 1;
    auto fold = [&](const Rational& r) {
      lcd = std::lcm(lcd, r.denominator());
      if (lcd > (std::int64_t(1) << 40)) throw Error(ErrorCode::Overflow, "coordinate denominators too large");
    };
    for (const auto& x : structural) fold(x);
    collect_constants(root_.get(), fold);
    int depth = chop_depth(root_.get());
    if (depth > 20) throw Error(ErrorCode::Overflow, "chop nesting too deep");
    scale_ = Rational(lcd) * Rational(std::int64_t(1) << depth);
    Rational bound = rmax(abs_r(v.lo), abs_r(v.hi));
    if (to_double(bound) * to_double(scale_) > 4e18 / 4) throw Error(ErrorCode::Overflow, "view too large");

    lo_ = to_int(v.lo);
    hi_ = to_int(v.hi);
    for (const auto& x : structural) structural_.push_back(to_int(x));

    for (const auto& [id, car] : ts.cars()) {
      car_index_[id] = static_cast<int>(cars_.size());
      cars_.push_back(id);
      aut_.push_back(car.aut);
    }
    const auto& net = ts.net();
    std::vector<std::vector<SegmentInterval>> res_ext, clm_ext;
    for (const auto& [id, car] : ts.cars()) {
      res_ext.push_back(reservation_extents(net, car));
      clm_ext.push_back(claim_extents(net, car));
    }
    std::vector<char> in_view(cars_.size(), 0);
    for (const auto& lane : v.lanes) {
      LaneData ld;
      ld.res.resize(cars_.size());
      ld.clm.resize(cars_.size());
      std::vector<IntInterval> blocked;
      for (const auto& p : lane.pieces) {
        IntPiece ip{to_int(p.lo), to_int(p.hi), net.kind(p.segment) == SegmentKind::Crossing, {}, {}};
        ld.cover.push_back({ip.lo, ip.hi});
        for (std::size_t c = 0; c < cars_.size(); ++c) {
          const auto& st = ts.car(cars_[c]);
          ip.reserved.push_back(st.res.count(p.segment) || st.cres.count(p.segment));
          ip.claimed.push_back(st.clm.count(p.segment) || st.cclm.count(p.segment));
          auto project_all = [&](const std::vector<SegmentInterval>& ext, std::vector<IntInterval>& into,
                                 bool block) {
            for (const auto& e : ext) {
              if (e.segment != p.segment) continue;
              if (auto iv = project(p, e.lo, e.hi)) {
                IntInterval ii{to_int(iv->first), to_int(iv->second)};
                into.push_back(ii);
                if (block) blocked.push_back(ii);
                if (ii.lo < ii.hi) in_view[c] = 1;
              }
            }
          };
          project_all(res_ext[c], ld.res[c], true);
          project_all(clm_ext[c], ld.clm[c], cars_[c] != v.ego);
        }
        for (const auto& [kind, placements] : ts.obj()) {
          auto& pts = ld.objects[kind];
          for (const auto& pl : placements) {
            if (pl.segment != p.segment) continue;
            Rational x = p.origin + pl.position;
            if (p.lo <= x && x <= p.hi) pts.push_back(to_int(x));
          }
        }
        ld.pieces.push_back(std::move(ip));
      }
      std::sort(ld.pieces.begin(), ld.pieces.end(), [](const auto& x, const auto& y) { return x.lo < y.lo; });
      ld.cover = merge_intervals(std::move(ld.cover));
      for (auto& r : ld.res) r = merge_intervals(std::move(r));
      for (auto& c : ld.clm) c = merge_intervals(std::move(c));
      ld.blocked = merge_intervals(std::move(blocked));
      lanes_.push_back(std::move(ld));
    }
    for (std::size_t c = 0; c < cars_.size(); ++c)
      if (in_view[c]) domain_.push_back(static_cast<int>(c));
    prepare_sums(root_.get());
  }

  bool run() { return eval(root_.get(), lo_, hi_, 0, lanes_.size(), intern({})); }

 private:
  static Rational abs_r(const Rational& r) { return r < 0 ? -r : r; }

  Coord to_int(const Rational& x) const {
    Rational y = x * scale_;
    if (y.denominator() != 1) throw Error(ErrorCode::InvalidState, "coordinate off the scaled grid");
    return y.numerator();
  }

  void check_valuation() const {
    auto fv = free_vars(root_);
    for (const auto& c : fv.cars) {
      if (nu_.cars.count(c)) continue;
      if (nu_.objects.count(c) || nu_.reals.count(c))
        throw Error(ErrorCode::SortMismatch, "'" + c + "' is used as a car variable");
      throw Error(ErrorCode::UnboundVariable, c);
    }
    for (const auto& o : fv.objects) {
      if (nu_.objects.count(o)) continue;
      if (nu_.cars.count(o) || nu_.reals.count(o))
        throw Error(ErrorCode::SortMismatch, "'" + o + "' is used as an object variable");
      throw Error(ErrorCode::UnboundVariable, o);
    }
    for (const auto& r : fv.reals) {
      if (nu_.reals.count(r)) continue;
      if (nu_.cars.count(r) || nu_.objects.count(r))
        throw Error(ErrorCode::SortMismatch, "'" + r + "' is used as a real variable");
      throw Error(ErrorCode::UnboundVariable, r);
    }
    check_object_kinds(root_.get());
  }

  void check_object_kinds(const Formula* x) const {
    if (x->op == Op::Om && !x->a.is_var && !ts_.has_object_kind(ObjectKind(x->a.name)))
      throw Error(ErrorCode::UnknownObjectKind, x->a.name);
    if (x->op == Op::Om && x->a.is_var && !ts_.has_object_kind(nu_.objects.at(x->a.name)))
      throw Error(ErrorCode::UnknownObjectKind, nu_.objects.at(x->a.name).str());
    if (x->lhs) check_object_kinds(x->lhs.get());
    if (x->rhs) check_object_kinds(x->rhs.get());
  }

  Rational len_value(const Formula* x) const {
    return x->r.literal ? *x->r.literal : nu_.reals.at(x->r.var);
  }

  template <typename F>
  void collect_constants(const Formula* x, F& fold) const {
    if (x->op == Op::Len) fold(len_value(x));
    if (x->lhs) collect_constants(x->lhs.get(), fold);
    if (x->rhs) collect_constants(x->rhs.get(), fold);
  }

  static int chop_depth(const Formula* x) {
    int d = 0;
    if (x->lhs) d = std::max(d, chop_depth(x->lhs.get()));
    if (x->rhs) d = std::max(d, chop_depth(x->rhs.get()));
    return d + (x->op == Op::HChop ? 1 : 0);
  }

  // For a chop, a sub-formula's length constraint can pin a split at a
  // structural point shifted by a constant, or by a sum of constants.
  std::vector<Coord> prepare_sums(const Formula* x) {
    std::vector<Coord> consts;
    if (x->op == Op::Len) {
      Coord c = to_int(len_value(x));
      if (c > 0) consts.push_back(c);
    }
    for (const auto* child : {x->lhs.get(), x->rhs.get()}) {
      if (!child) continue;
      auto sub = prepare_sums(child);
      consts.insert(consts.end(), sub.begin(), sub.end());
    }
    std::sort(consts.begin(), consts.end());
    consts.erase(std::unique(consts.begin(), consts.end()), consts.end());
    if (x->op == Op::HChop) {
      std::vector<Coord> sums{0};
      std::size_t limit = std::min<std::size_t>(consts.size(), 6);
      for (std::size_t i = 0; i < limit; ++i) {
        std::size_t n = sums.size();
        for (std::size_t k = 0; k < n; ++k) sums.push_back(sums[k] + consts[i]);
      }
      std::sort(sums.begin(), sums.end());
      sums.erase(std::unique(sums.begin(), sums.end()), sums.end());
      sums.erase(sums.begin());  // drop 0
      shifts_[x] = std::move(sums);
    }
    return consts;
  }

  using Env = std::vector<std::pair<std::string, int>>;

  int intern(const Env& env) {
    auto [it, fresh] = env_ids_.try_emplace(env, static_cast<int>(env_ids_.size()));
    if (fresh) envs_.push_back(env);
    return it->second;
  }

  int resolve_car(const Term& t, int env) const {
    if (t.is_var) {
      const auto& values = envs_[env];
      for (std::size_t k = values.size(); k-- > 0;)
        if (values[k].first == t.name) return values[k].second;
      const auto& id = nu_.cars.at(t.name);
      auto it = car_index_.find(id);
      return it == car_index_.end() ? -1 : it->second;
    }
    auto it = car_index_.find(CarId(t.name));
    return it == car_index_.end() ? -1 : it->second;
  }

  std::string car_name(const Term& t, int env) const {
    int idx = resolve_car(t, env);
    if (idx >= 0) return cars_[idx].str();
    return t.is_var ? nu_.cars.at(t.name).str() : t.name;
  }

  ObjectKind resolve_object(const Term& t) const {
    return t.is_var ? nu_.objects.at(t.name) : ObjectKind(t.name);
  }

  bool all_pieces(const LaneData& ld, Coord a, Coord b, auto pred) const {
    for (const auto& p : ld.pieces)
      if (p.lo < b && p.hi > a && !pred(p)) return false;
    return true;
  }

  bool eval_atom(const Formula* x, Coord a, Coord b, std::size_t l0, std::size_t l1, int env) const {
    switch (x->op) {
      case Op::True: return true;
      case Op::Len: return compare(x->cmp, b - a, to_int(len_value(x)));
      case Op::VarEq: return car_name(x->a, env) == car_name(x->b, env);
      default: break;
    }
    if (l1 - l0 != 1) return false;
    const LaneData& ld = lanes_[l0];
    switch (x->op) {
      case Op::Re:
      case Op::Ru: {
        if (a >= b) return false;
        int c = resolve_car(x->a, env);
        if (c < 0 || aut_[c] != (x->op == Op::Re)) return false;
        return all_pieces(ld, a, b, [&](const IntPiece& p) { return p.reserved[c] != 0; }) &&
               contains(ld.res[c], a, b);
      }
      case Op::Cl: {
        if (a >= b) return false;
        int c = resolve_car(x->a, env);
        if (c < 0) return false;
        return all_pieces(ld, a, b, [&](const IntPiece& p) { return p.claimed[c] != 0; }) &&
               contains(ld.clm[c], a, b);
      }
      case Op::Free:
        return a < b && contains(ld.cover, a, b) && !overlaps_open(ld.blocked, a, b);
      case Op::Cs:
        return a < b && contains(ld.cover, a, b) &&
               all_pieces(ld, a, b, [](const IntPiece& p) { return p.crossing; });
      case Op::Offcs:
        return a < b && contains(ld.cover, a, b) &&
               all_pieces(ld, a, b, [](const IntPiece& p) { return !p.crossing; });
      case Op::Om: {
        if (a != b) return false;
        auto it = ld.objects.find(resolve_object(x->a));
        if (it == ld.objects.end()) return false;
        return std::find(it->second.begin(), it->second.end(), a) != it->second.end();
      }
      default: return false;
    }
  }

  std::vector<Coord> splits(const Formula* x, Coord a, Coord b) const {
    std::vector<Coord> base{a, b};
    auto first = std::lower_bound(structural_.begin(), structural_.end(), a);
    for (auto it = first; it != structural_.end() && *it <= b; ++it) base.push_back(*it);
    std::vector<Coord> pts = base;
    auto sit = shifts_.find(x);
    if (sit != shifts_.end()) {
      for (Coord p : base) {
        for (Coord s : sit->second) {
          if (p + s <= b) pts.push_back(p + s);
          if (p - s >= a) pts.push_back(p - s);
        }
      }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::size_t n = pts.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
      if ((pts[i] + pts[i + 1]) % 2 == 0) pts.push_back((pts[i] + pts[i + 1]) / 2);
    return pts;
  }

  bool eval(const Formula* x, Coord a, Coord b, std::size_t l0, std::size_t l1, int env) {
    switch (x->op) {
      case Op::Not: return !eval(x->lhs.get(), a, b, l0, l1, env);
      case Op::And: return eval(x->lhs.get(), a, b, l0, l1, env) && eval(x->rhs.get(), a, b, l0, l1, env);
      case Op::Or: return eval(x->lhs.get(), a, b, l0, l1, env) || eval(x->rhs.get(), a, b, l0, l1, env);
      case Op::Impl: return !eval(x->lhs.get(), a, b, l0, l1, env) || eval(x->rhs.get(), a, b, l0, l1, env);
      case Op::HChop:
      case Op::VStack:
      case Op::Exists: break;
      case Op::Somewhere: throw Error(ErrorCode::InvalidState, "somewhere must be desugared");
      default: return eval_atom(x, a, b, l0, l1, env);
    }
    MemoKey key{x, a, b, l0, l1, env};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    bool result = false;
    if (x->op == Op::HChop) {
      for (Coord p : splits(x, a, b)) {
        if (eval(x->lhs.get(), a, p, l0, l1, env) && eval(x->rhs.get(), p, b, l0, l1, env)) {
          result = true;
          break;
        }
      }
    } else if (x->op == Op::VStack) {
      for (std::size_t k = l0; k <= l1 && !result; ++k)
        result = eval(x->rhs.get(), a, b, l0, k, env) && eval(x->lhs.get(), a, b, k, l1, env);
    } else {
      for (int c : domain_) {
        Env extended = envs_[env];
        extended.emplace_back(x->var, c);
        if (eval(x->lhs.get(), a, b, l0, l1, intern(extended))) {
          result = true;
          break;
        }
      }
    }
    memo_[key] = result;
    return result;
  }

  const TrafficSnapshot& ts_;
  const Valuation& nu_;
  FormulaPtr root_;
  Rational scale_;
  Coord lo_ = 0, hi_ = 0;
  std::vector<Coord> structural_;
  std::vector<CarId> cars_;
  std::vector<bool> aut_;
  std::map<CarId, int> car_index_;
  std::vector<int> domain_;
  std::vector<LaneData> lanes_;
  std::unordered_map<const Formula*, std::vector<Coord>> shifts_;
  std::map<Env, int> env_ids_;
  std::vector<Env> envs_;
  std::unordered_map<MemoKey, bool, MemoHash> memo_;
};

}  // namespace detail

/// ts, V, nu |= f. Chop splits are searched over a finite set that is
/// exact for rational data.
inline bool evaluate(const TrafficSnapshot& ts, const VirtualView& v, const Valuation& nu,
                     const FormulaPtr& f) {
  detail::Scene scene(ts, v, nu, desugar(f));
  return scene.run();
}

}  // namespace trumlsl
