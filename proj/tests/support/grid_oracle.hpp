#pragma once

// Brute-force reference for the spatial evaluator. The view is cut into
// 1000 equal cells; atom truth is sampled per cell and every chop tries
// every one of the 1001 grid points. Body and extent arithmetic is done
// here from raw car state, independently of the library.

#include <bitset>
#include <map>
#include <random>
#include <unordered_map>

#include "support/fixtures.hpp"
#include "trumlsl/evaluator.hpp"
#include "trumlsl/formula.hpp"
#include "trumlsl/view.hpp"

namespace oracle {

using namespace trumlsl;

constexpr int N = 1000;
using Row = std::bitset<N + 1>;

struct Span {
  Rational lo, hi;
  bool contains(const Rational& x) const { return lo < x && x < hi; }
};

// Local body spans per segment, walked along the car's own path.
inline std::map<SegmentId, Span> body_spans(const RoadNetwork& net, const CarState& car) {
  Rational offset = 0, rear = 0;
  for (std::size_t i = 0; i < car.path_index; ++i) offset += net.length(car.path.waypoints[i]);
  rear = offset + car.pos;
  std::map<SegmentId, Span> out;
  Rational o = 0;
  for (const auto& s : car.path.waypoints) {
    Rational lo = std::max(rear, o), hi = std::min(rear + car.size, o + net.length(s));
    if (lo < hi) out[s] = {lo - o, hi - o};
    o += net.length(s);
  }
  return out;
}

class GridOracle {
 public:
  GridOracle(const TrafficSnapshot& ts, const VirtualView& v, const Valuation& nu) : ts_(ts), v_(v), nu_(nu) {
    const auto& net = ts.net();
    for (const auto& [id, car] : ts.cars()) {
      ids_.push_back(id);
      aut_.push_back(car.aut);
    }
    std::size_t nc = ids_.size();
    std::vector<char> touches(nc, 0);
    std::vector<std::map<SegmentId, Span>> bodies;
    for (const auto& id : ids_) bodies.push_back(body_spans(net, ts.car(id)));
    for (const auto& lane : v.lanes) {
      Lane ld;
      ld.covered.assign(N, 0);
      ld.crossing.assign(N, 0);
      ld.blocked.assign(N, 0);
      ld.reserved.assign(nc, std::vector<char>(N, 0));
      ld.claimed.assign(nc, std::vector<char>(N, 0));
      for (int k = 0; k < N; ++k) {
        Rational mid = v.lo + (Rational(k) + Rational(1, 2)) * v.length() / N;
        for (const auto& p : lane.pieces) {
          if (!(p.lo < mid && mid < p.hi)) continue;
          ld.covered[k] = 1;
          ld.crossing[k] = net.kind(p.segment) == SegmentKind::Crossing;
          Rational local = mid - p.origin;
          for (std::size_t c = 0; c < nc; ++c) {
            const CarState& car = ts.car(ids_[c]);
            const auto& body = bodies[c];
            bool res = car.cres.count(p.segment) ||
                       (car.res.count(p.segment) && body.count(p.segment) && body.at(p.segment).contains(local));
            bool clm = car.cclm.count(p.segment) != 0;
            if (car.clm.count(p.segment)) {
              for (const auto& [q, span] : body) {
                Span mirrored{span.lo, std::min(span.hi, net.length(p.segment))};
                if (net.are_neighbours(q, p.segment) && mirrored.contains(local)) clm = true;
              }
            }
            ld.reserved[c][k] = res;
            ld.claimed[c][k] = clm;
            if (res || (clm && ids_[c] != v.ego)) ld.blocked[k] = 1;
            if (res || clm) touches[c] = 1;
          }
        }
      }
      for (const auto& [kind, placements] : ts.obj()) {
        for (const auto& pl : placements) {
          for (const auto& p : lane.pieces) {
            if (p.segment != pl.segment) continue;
            Rational x = p.origin + pl.position;
            if (x < p.lo || x > p.hi) continue;
            Rational g = (x - v.lo) * N / v.length();
            if (g.denominator() == 1) ld.objects[kind].insert(static_cast<int>(g.numerator()));
          }
        }
      }
      lanes_.push_back(std::move(ld));
    }
    for (std::size_t c = 0; c < nc; ++c)
      if (touches[c]) domain_.push_back(static_cast<int>(c));
    for (int i = 0; i <= N; ++i) {
      Row r;
      for (int j = i; j <= N; ++j) r.set(j);
      ge_.push_back(r);
    }
  }

  bool holds(const FormulaPtr& f) { return row(f.get(), 0, lanes_.size(), intern({}), 0)[N]; }

 private:
  struct Lane {
    std::vector<char> covered, crossing, blocked;
    std::vector<std::vector<char>> reserved, claimed;
    std::map<ObjectKind, std::set<int>> objects;
  };
  using Env = std::vector<std::pair<std::string, int>>;
  struct Key {
    const Formula* f;
    std::size_t l0, l1;
    int env;
    bool aux;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<const void*>()(k.f) ^ (k.l0 * 31 + k.l1 * 1009 + static_cast<std::size_t>(k.env) * 7919 + k.aux);
    }
  };
  struct Table {
    std::vector<Row> rows = std::vector<Row>(N + 1);
    std::vector<char> done = std::vector<char>(N + 1, 0);
  };

  int intern(const Env& e) {
    auto [it, fresh] = env_ids_.try_emplace(e, static_cast<int>(envs_.size()));
    if (fresh) envs_.push_back(e);
    return it->second;
  }

  std::string car_of(const Term& t, int env) const {
    if (!t.is_var) return t.name;
    const auto& e = envs_[env];
    for (std::size_t k = e.size(); k-- > 0;)
      if (e[k].first == t.name) return ids_[e[k].second].str();
    return nu_.cars.at(t.name).str();
  }

  int car_index(const Term& t, int env) const {
    std::string name = car_of(t, env);
    for (std::size_t c = 0; c < ids_.size(); ++c)
      if (ids_[c].str() == name) return static_cast<int>(c);
    return -1;
  }

  Rational len_value(const Formula* f) const { return f->r.literal ? *f->r.literal : nu_.reals.at(f->r.var); }

  // Bits j > i for which every cell in [i, j) satisfies ok.
  template <typename P>
  Row run_from(int i, P ok) const {
    Row r;
    for (int j = i + 1; j <= N && ok(j - 1); ++j) r.set(j);
    return r;
  }

  Row atom(const Formula* f, std::size_t l0, std::size_t l1, int env, int i) const {
    switch (f->op) {
      case Op::True: return ge_[i];
      case Op::VarEq: return car_of(f->a, env) == car_of(f->b, env) ? ge_[i] : Row();
      case Op::Len: {
        // Depends on j - i only, so one row shifted serves every start.
        auto it = len_rows_.find(f);
        if (it == len_rows_.end()) {
          Row base;
          Rational target = len_value(f);
          for (int j = 0; j <= N; ++j)
            if (compare(f->cmp, Rational(j) * v_.length() / N, target)) base.set(j);
          it = len_rows_.emplace(f, base).first;
        }
        return it->second << i;
      }
      default: break;
    }
    if (l1 - l0 != 1) return Row();
    const Lane& ld = lanes_[l0];
    switch (f->op) {
      case Op::Cs: return run_from(i, [&](int k) { return ld.covered[k] && ld.crossing[k]; });
      case Op::Offcs: return run_from(i, [&](int k) { return ld.covered[k] && !ld.crossing[k]; });
      case Op::Free: return run_from(i, [&](int k) { return ld.covered[k] && !ld.blocked[k]; });
      case Op::Re:
      case Op::Ru: {
        int c = car_index(f->a, env);
        if (c < 0 || aut_[c] != (f->op == Op::Re)) return Row();
        return run_from(i, [&](int k) { return ld.reserved[c][k] != 0; });
      }
      case Op::Cl: {
        int c = car_index(f->a, env);
        if (c < 0) return Row();
        return run_from(i, [&](int k) { return ld.claimed[c][k] != 0; });
      }
      case Op::Om: {
        ObjectKind kind = f->a.is_var ? nu_.objects.at(f->a.name) : ObjectKind(f->a.name);
        Row r;
        auto it = ld.objects.find(kind);
        if (it != ld.objects.end() && it->second.count(i)) r.set(i);
        return r;
      }
      default: return Row();
    }
  }

  Table& table(const Formula* f, std::size_t l0, std::size_t l1, int env, bool aux = false) {
    return memo_[Key{f, l0, l1, env, aux}];
  }

  const Row& row(const Formula* f, std::size_t l0, std::size_t l1, int env, int i) {
    return row(table(f, l0, l1, env), f, l0, l1, env, i);
  }

  const Row& row(Table& t, const Formula* f, std::size_t l0, std::size_t l1, int env, int i) {
    if (t.done[i]) return t.rows[i];
    Row r;
    switch (f->op) {
      case Op::Not: r = ~row(f->lhs.get(), l0, l1, env, i) & ge_[i]; break;
      case Op::And: r = row(f->lhs.get(), l0, l1, env, i) & row(f->rhs.get(), l0, l1, env, i); break;
      case Op::Or: r = row(f->lhs.get(), l0, l1, env, i) | row(f->rhs.get(), l0, l1, env, i); break;
      case Op::Impl: r = (~row(f->lhs.get(), l0, l1, env, i) & ge_[i]) | row(f->rhs.get(), l0, l1, env, i); break;
      case Op::HChop: {
        Row left = row(f->lhs.get(), l0, l1, env, i);
        Table& right = table(f->rhs.get(), l0, l1, env);
        for (std::size_t k = left._Find_first(); k <= N; k = left._Find_next(k))
          r |= row(right, f->rhs.get(), l0, l1, env, static_cast<int>(k));
        break;
      }
      case Op::VStack:
        for (std::size_t k = l0; k <= l1; ++k)
          r |= row(f->rhs.get(), l0, k, env, i) & row(f->lhs.get(), k, l1, env, i);
        break;
      case Op::Exists:
        for (int c : domain_) {
          Env e = envs_[env];
          e.emplace_back(f->var, c);
          r |= row(f->lhs.get(), l0, l1, intern(e), i);
        }
        break;
      case Op::Somewhere: {
        // Some sub-interval [c, d] of [i, j] and some lane range inside
        // [l0, l1) satisfy the body. reach(i) collects every d reachable
        // from a start c >= i.
        Table& reach = table(f, l0, l1, env, true);
        if (!reach.done[N]) {
          Row acc;
          for (int c = N; c >= 0; --c) {
            for (std::size_t m = l0; m <= l1; ++m)
              for (std::size_t k = m; k <= l1; ++k) acc |= row(f->lhs.get(), m, k, env, c);
            reach.rows[c] = acc;
            reach.done[c] = 1;
          }
        }
        std::size_t d = reach.rows[i]._Find_first();
        if (d <= N) r = ge_[d];
        break;
      }
      default: r = atom(f, l0, l1, env, i);
    }
    t.rows[i] = r;
    t.done[i] = 1;
    return t.rows[i];
  }

  const TrafficSnapshot& ts_;
  const VirtualView& v_;
  const Valuation& nu_;
  std::vector<CarId> ids_;
  std::vector<bool> aut_;
  std::vector<Lane> lanes_;
  std::vector<int> domain_;
  std::vector<Row> ge_;
  std::map<Env, int> env_ids_;
  std::vector<Env> envs_;
  std::unordered_map<Key, Table, KeyHash> memo_;
  mutable std::unordered_map<const Formula*, Row> len_rows_;
};

// ---------------------------------------------------------------------------
// Random instances: two parallel chains with random neighbour pairing and
// integer geometry, so every structural point lands on the grid.

struct Instance {
  TrafficSnapshot ts;
  VirtualView view;
  Valuation nu;
};

inline Instance random_instance(std::mt19937_64& rng, std::int64_t L) {
  using fixtures::S;
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); };
  std::vector<SegmentDecl> segs;
  std::vector<EdgeDecl> edges;
  std::vector<NeighbourDecl> nb;
  PathSpec p_path, q_path;
  std::int64_t total = 0;
  int n = 0;
  while (total < L + 10) {
    std::string id = "p" + std::to_string(n);
    bool crossing = n > 0 && pick(0, 2) == 0;
    std::int64_t len = crossing ? pick(2, 6) : pick(3, static_cast<int>(std::max<std::int64_t>(4, L / 2)));
    segs.push_back({S(id), crossing ? SegmentKind::Crossing : SegmentKind::Lane, Rational(len)});
    if (n > 0) edges.push_back({p_path.waypoints.back(), S(id)});
    p_path.waypoints.push_back(S(id));
    total += len;
    ++n;
  }
  segs.push_back({S("pend"), SegmentKind::Lane, Rational(1000)});
  edges.push_back({p_path.waypoints.back(), S("pend")});
  p_path.waypoints.push_back(S("pend"));
  int qn = pick(1, n);
  for (int i = 0; i < qn; ++i) {
    std::string id = "q" + std::to_string(i);
    bool crossing = pick(0, 3) == 0;
    segs.push_back({S(id), crossing ? SegmentKind::Crossing : SegmentKind::Lane, Rational(pick(3, 20))});
    if (i > 0) edges.push_back({q_path.waypoints.back(), S(id)});
    q_path.waypoints.push_back(S(id));
  }
  segs.push_back({S("qend"), SegmentKind::Lane, Rational(1000)});
  edges.push_back({q_path.waypoints.back(), S("qend")});
  q_path.waypoints.push_back(S("qend"));
  for (int i = 0; i < n; ++i) {
    if (pick(0, 3) == 0) continue;
    nb.push_back({S("p" + std::to_string(i)), S("q" + std::to_string(std::min(qn - 1, i * qn / n + pick(0, 1))))});
  }
  std::sort(nb.begin(), nb.end());
  nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  auto net = std::make_shared<const RoadNetwork>(build_network(segs, edges, nb));
  TrafficSnapshot ts(net);
  for (const char* kind : {"Ped", "Stop"}) ts.declare_object_kind(ObjectKind(kind));

  std::int64_t ego_size = pick(1, 3);
  ts.insert_car(CarId("E"), fixtures::car_on(*net, p_path, 0, ego_size));
  int others = pick(1, 3);
  for (int c = 0; c < others; ++c) {
    bool on_p = pick(0, 1) == 0;
    const PathSpec& path = on_p ? p_path : q_path;
    std::size_t idx = static_cast<std::size_t>(pick(0, static_cast<int>(path.waypoints.size()) - 2));
    std::int64_t seg_len = net->length(path.waypoints[idx]).numerator();
    CarState car = fixtures::car_on(*net, path, pick(0, static_cast<int>(seg_len) - 1), pick(1, 4), 0, 0, idx);
    car.aut = pick(0, 3) != 0;
    ts.insert_car(CarId(std::string(1, static_cast<char>('A' + c))), car);
  }
  for (const auto& [id, car] : std::map<CarId, CarState>(ts.cars())) {
    // Transitions that do not apply to this car are simply skipped.
    try {
      if (pick(0, 2) == 0) {
        ts = claim_crossing(ts, id);
        if (pick(0, 1) == 0) ts = reserve_crossing(ts, id);
      }
    } catch (const Error&) {
    }
    const auto& here = ts.net().neighbours(car.path.waypoints[car.path_index]);
    try {
      if (!here.empty() && pick(0, 2) == 0) ts = set_lane_claim(ts, id, here[0]);
    } catch (const Error&) {
    }
  }
  for (int k = pick(0, 3); k > 0; --k) {
    const auto& seg = segs[static_cast<std::size_t>(pick(0, static_cast<int>(segs.size()) - 1))];
    std::int64_t len = std::min<std::int64_t>(seg.length.numerator(), 30);
    ts = place(ts, ObjectKind(pick(0, 1) ? "Ped" : "Stop"), seg.id, pick(0, static_cast<int>(len)));
  }
  auto view = build_view(ts, CarId("E"), 0, Rational(L - ego_size));
  Valuation nu;
  nu.cars["ego"] = CarId("E");
  nu.cars["other"] = CarId("A");
  nu.objects["o"] = ObjectKind("Ped");
  nu.reals["d"] = Rational(pick(1, static_cast<int>(L)), 2);
  return {std::move(ts), std::move(view), std::move(nu)};
}

/// Random formula over every atom and connective; `chops` bounds the
/// horizontal chop nesting (somewhere counts as two).
class FormulaGen {
 public:
  FormulaGen(std::mt19937_64& rng, std::int64_t L) : rng_(rng), L_(L) {}

  FormulaPtr operator()(int depth, int chops) {
    if (depth <= 0) return leaf();
    switch (rng_() % 11) {
      case 0: return f::neg((*this)(depth - 1, chops));
      case 1: return f::conj((*this)(depth - 1, chops), (*this)(depth - 1, chops));
      case 2: return f::disj((*this)(depth - 1, chops), (*this)(depth - 1, chops));
      case 3: return f::impl((*this)(depth - 1, chops), (*this)(depth - 1, chops));
      case 4:
      case 5:
        if (chops > 0) return f::chop((*this)(depth - 1, chops - 1), (*this)(depth - 1, chops - 1));
        return leaf();
      case 6:
      case 7: return f::vstack((*this)(depth - 1, chops), (*this)(depth - 1, chops));
      case 8: {
        std::string var = rng_() % 2 ? "x" : "y";
        Term t{var, true};
        FormulaPtr body = rng_() % 2 ? f::re(t) : f::cl(t);
        if (rng_() % 2) body = f::conj(body, (*this)(depth - 1, chops));
        if (rng_() % 3 == 0) body = f::conj(body, f::neg(f::eq(t, Term{"ego", true})));
        return f::exists(var, body);
      }
      case 9:
        if (chops >= 2) return f::somewhere((*this)(depth - 1, 0));
        return leaf();
      default: return leaf();
    }
  }

 private:
  FormulaPtr leaf() {
    static const Cmp cmps[] = {Cmp::Eq, Cmp::Lt, Cmp::Le, Cmp::Gt, Cmp::Ge};
    Term cars[] = {{"E", false}, {"A", false}, {"B", false}, {"ego", true}, {"other", true}};
    switch (rng_() % 13) {
      case 0: return f::tt();
      case 1: return f::cs();
      case 2: return f::offcs();
      case 3:
      case 4: return f::free();
      case 5: return f::re(cars[rng_() % 5]);
      case 6: return f::ru(cars[rng_() % 5]);
      case 7: return f::cl(cars[rng_() % 5]);
      case 8: return f::om(rng_() % 2 ? Term{"Stop", false} : Term{"o", true});
      case 9: return f::len(cmps[rng_() % 5], "d");
      case 10: return f::eq(cars[rng_() % 5], cars[rng_() % 5]);
      default:
        return f::len(cmps[rng_() % 5], Rational(static_cast<std::int64_t>(rng_() % static_cast<unsigned>(L_ + 1))));
    }
  }

  std::mt19937_64& rng_;
  std::int64_t L_;
};

struct Agreement {
  int cases = 0;
  int agree = 0;
  int trues = 0;
  std::set<Op> ops_seen;
  std::string first_mismatch;
};

inline void collect_ops(const FormulaPtr& x, std::set<Op>& out) {
  out.insert(x->op);
  if (x->lhs) collect_ops(x->lhs, out);
  if (x->rhs) collect_ops(x->rhs, out);
}

inline Agreement run_agreement(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  const std::int64_t lengths[] = {10, 20, 25, 50};
  Agreement a;
  for (int i = 0; i < cases; ++i) {
    std::int64_t L = lengths[i % 4];
    auto inst = random_instance(rng, L);
    FormulaGen gen(rng, L);
    auto formula = gen(1 + static_cast<int>(rng() % 4), 2);
    collect_ops(formula, a.ops_seen);
    bool got = evaluate(inst.ts, inst.view, inst.nu, formula);
    GridOracle oracle(inst.ts, inst.view, inst.nu);
    bool want = oracle.holds(formula);
    ++a.cases;
    if (got == want) {
      ++a.agree;
    } else if (a.first_mismatch.empty()) {
      a.first_mismatch = "case " + std::to_string(i) + " L=" + std::to_string(L) + ": " + to_string(formula) +
                         " evaluator=" + (got ? "true" : "false") + " grid=" + (want ? "true" : "false");
    }
    a.trues += want;
  }
  return a;
}

}  // namespace oracle
