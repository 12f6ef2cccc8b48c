#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trumlsl/error.hpp"
#include "trumlsl/evaluator.hpp"
#include "trumlsl/rules.hpp"
#include "trumlsl/snapshot.hpp"
#include "trumlsl/view.hpp"

namespace trumlsl {

struct ClockConstraint {
  std::string clock;
  Cmp cmp = Cmp::Ge;
  Rational bound{0};
};

struct SpeedConstraint {
  Cmp cmp = Cmp::Eq;
  Rational bound{0};
};

struct Guard {
  FormulaPtr formula;  // null means no spatial condition
  std::vector<ClockConstraint> clocks;
  std::optional<SpeedConstraint> speed;
  bool max_priority = false;  // ego outranks every car contending for its crossings
  bool on_main_road = false;
};

enum class ActionKind {
  Accel,
  ClaimCrossing,
  ReserveCrossing,
  WithdrawClaim,
  SetLaneClaim,
  Emit,
  PriorityPenalty,
  PriorityBonus,
};

struct ControllerAction {
  ActionKind kind;
  Rational value{0};
  std::string arg;

  static ControllerAction accel(Rational a) { return {ActionKind::Accel, a, {}}; }
  static ControllerAction claim() { return {ActionKind::ClaimCrossing, 0, {}}; }
  static ControllerAction reserve() { return {ActionKind::ReserveCrossing, 0, {}}; }
  static ControllerAction withdraw_claim() { return {ActionKind::WithdrawClaim, 0, {}}; }
  static ControllerAction lane_claim(std::string s) { return {ActionKind::SetLaneClaim, 0, std::move(s)}; }
  static ControllerAction emit(std::string e) { return {ActionKind::Emit, 0, std::move(e)}; }
  static ControllerAction penalty() { return {ActionKind::PriorityPenalty, 0, {}}; }
  static ControllerAction bonus() { return {ActionKind::PriorityBonus, 0, {}}; }

  friend bool operator==(const ControllerAction&, const ControllerAction&) = default;
};

inline std::string to_string(const ControllerAction& a) {
  switch (a.kind) {
    case ActionKind::Accel: return "accel(" + to_string(a.value) + ")";
    case ActionKind::ClaimCrossing: return "claimCrossing";
    case ActionKind::ReserveCrossing: return "reserveCrossing";
    case ActionKind::WithdrawClaim: return "withdrawClaim";
    case ActionKind::SetLaneClaim: return "setLaneClaim(" + a.arg + ")";
    case ActionKind::Emit: return "emit(" + a.arg + ")";
    case ActionKind::PriorityPenalty: return "priorityPenalty";
    case ActionKind::PriorityBonus: return "priorityBonus";
  }
  return "?";
}

struct Edge {
  std::string source;
  std::string target;
  Guard guard;
  std::vector<ControllerAction> actions;
  std::vector<std::string> resets;
};

struct Invariant {
  FormulaPtr formula;
  std::vector<ClockConstraint> clocks;
};

struct RuleAutomaton {
  std::string name;
  std::vector<std::string> locations;
  std::string initial;
  std::set<std::string> clocks;
  std::map<std::string, Invariant> invariants;
  std::vector<Edge> edges;
  std::set<std::string> waiting;  // locations that earn one priority point per step

  bool has_location(const std::string& l) const {
    return std::find(locations.begin(), locations.end(), l) != locations.end();
  }

  void validate() const {
    auto fail = [&](const std::string& m) { throw Error(ErrorCode::ValidationError, name + ": " + m); };
    if (!has_location(initial)) fail("initial location '" + initial + "' is not declared");
    auto check_formula = [&](const FormulaPtr& x) {
      if (!x) return;
      auto fv = free_vars(x);
      for (const auto& c : fv.cars)
        if (c != "ego") fail("free car variable '" + c + "' other than ego");
      if (!fv.objects.empty()) fail("free object variable '" + *fv.objects.begin() + "'");
    };
    auto check_clocks = [&](const std::vector<ClockConstraint>& cs) {
      for (const auto& c : cs)
        if (!clocks.count(c.clock)) fail("undeclared clock '" + c.clock + "'");
    };
    for (const auto& e : edges) {
      if (!has_location(e.source)) fail("edge source '" + e.source + "' is not declared");
      if (!has_location(e.target)) fail("edge target '" + e.target + "' is not declared");
      check_formula(e.guard.formula);
      check_clocks(e.guard.clocks);
      for (const auto& r : e.resets)
        if (!clocks.count(r)) fail("undeclared clock '" + r + "'");
    }
    for (const auto& [loc, inv] : invariants) {
      if (!has_location(loc)) fail("invariant on undeclared location '" + loc + "'");
      check_formula(inv.formula);
      check_clocks(inv.clocks);
    }
    for (const auto& w : waiting)
      if (!has_location(w)) fail("waiting location '" + w + "' is not declared");
  }
};

struct ControllerState {
  std::string location;
  std::map<std::string, Rational> clocks;

  friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

inline ControllerState initial_state(const RuleAutomaton& a) {
  ControllerState s{a.initial, {}};
  for (const auto& c : a.clocks) s.clocks[c] = 0;
  return s;
}

inline ControllerState advance_clocks(ControllerState s, const Rational& dt) {
  for (auto& [name, value] : s.clocks) value += dt;
  return s;
}

enum class PriorityKind { Penalty, Bonus, WaitTick };

struct PriorityState {
  std::map<CarId, std::int64_t> prio;
  std::int64_t penalty = 10;
  std::int64_t bonus = 10;

  std::int64_t of(const CarId& c) const {
    auto it = prio.find(c);
    return it == prio.end() ? 0 : it->second;
  }
};

inline PriorityState make_priority_state(const TrafficSnapshot& ts, std::int64_t penalty, std::int64_t bonus) {
  if (penalty <= 0 || bonus <= 0) throw Error(ErrorCode::ValidationError, "penalty and bonus must be positive");
  PriorityState ps{{}, penalty, bonus};
  for (const auto& [id, car] : ts.cars()) ps.prio[id] = 0;
  return ps;
}

inline PriorityState priority_update(const PriorityState& ps, const CarId& c, PriorityKind kind) {
  auto it = ps.prio.find(c);
  if (it == ps.prio.end()) throw Error(ErrorCode::UnknownCar, c.str());
  PriorityState out = ps;
  auto& p = out.prio[c];
  switch (kind) {
    case PriorityKind::Penalty: p -= ps.penalty; break;
    case PriorityKind::Bonus: p += ps.bonus; break;
    case PriorityKind::WaitTick: p += 1; break;
  }
  return out;
}

/// Other cars whose crossing claims or reservations meet the ego's next
/// crossing run.
inline std::vector<CarId> contenders(const TrafficSnapshot& ts, const CarId& ego) {
  auto run = crossing_run_ahead(ts.net(), ts.car(ego));
  std::set<SegmentId> mine(run.begin(), run.end());
  std::vector<CarId> out;
  for (const auto& [id, car] : ts.cars()) {
    if (id == ego) continue;
    bool meets = false;
    for (const auto* s : {&car.cclm, &car.cres})
      for (const auto& seg : *s) meets = meets || mine.count(seg);
    if (meets) out.push_back(id);
  }
  return out;
}

/// Strictly higher priority than every contender; equal priorities go to
/// the smaller id.
inline bool has_max_priority(const TrafficSnapshot& ts, const PriorityState& ps, const CarId& ego) {
  for (const auto& other : contenders(ts, ego)) {
    auto mine = ps.of(ego), theirs = ps.of(other);
    if (mine < theirs || (mine == theirs && other < ego)) return false;
  }
  return true;
}

struct ControllerContext {
  RuleConfig rules;
  Rational back{0};
  Rational ahead{50};
  const PriorityState* priorities = nullptr;
  std::set<SegmentId> main_road;
};

struct StepResult {
  ControllerState state;
  std::vector<ControllerAction> actions;
  std::optional<std::size_t> edge;  // index into automaton edges
};

namespace detail {

inline bool clocks_hold(const std::vector<ClockConstraint>& cs, const ControllerState& s) {
  for (const auto& c : cs) {
    auto it = s.clocks.find(c.clock);
    Rational v = it == s.clocks.end() ? Rational(0) : it->second;
    if (!compare(c.cmp, v, c.bound)) return false;
  }
  return true;
}

}  // namespace detail

/// Evaluates the outgoing edges in declaration order on the ego's view of
/// `ts` and takes the first enabled one. The location invariant is checked
/// only when the automaton stays put.
inline StepResult step_controller(const RuleAutomaton& aut, const ControllerState& state,
                                  const TrafficSnapshot& ts, const CarId& ego, const ControllerContext& ctx) {
  const CarState& car = ts.car(ego);
  std::optional<VirtualView> view;
  Valuation nu = standard_valuation(ts, ego);
  auto holds = [&](const FormulaPtr& x) {
    if (!x) return true;
    if (!view) view = build_view(ts, ego, ctx.back, ctx.ahead, true);
    return evaluate(ts, *view, nu, x);
  };
  for (std::size_t i = 0; i < aut.edges.size(); ++i) {
    const Edge& e = aut.edges[i];
    if (e.source != state.location) continue;
    const Guard& g = e.guard;
    if (!detail::clocks_hold(g.clocks, state)) continue;
    if (g.speed && !compare(g.speed->cmp, car.spd, g.speed->bound)) continue;
    if (g.on_main_road) {
      bool on = false;
      for (const auto& s : car.res) on = on || ctx.main_road.count(s);
      if (!on) continue;
    }
    if (g.max_priority) {
      if (!ctx.priorities) throw Error(ErrorCode::InvalidState, "priority guard without a priority state");
      if (!has_max_priority(ts, *ctx.priorities, ego)) continue;
    }
    if (!holds(g.formula)) continue;
    StepResult out{state, e.actions, i};
    out.state.location = e.target;
    for (const auto& r : e.resets) out.state.clocks[r] = 0;
    return out;
  }
  if (auto it = aut.invariants.find(state.location); it != aut.invariants.end()) {
    const Invariant& inv = it->second;
    if (!detail::clocks_hold(inv.clocks, state) || !holds(inv.formula))
      throw Error(ErrorCode::InvariantViolation,
                  aut.name + " at " + state.location + ": " + (inv.formula ? to_string(inv.formula) : "clocks"));
  }
  return {state, {}, std::nullopt};
}

/// Folds the snapshot-level actions through the corresponding transitions.
/// Events and priority changes leave the snapshot alone.
inline TrafficSnapshot apply_actions(const TrafficSnapshot& ts, const CarId& ego,
                                     const std::vector<ControllerAction>& actions) {
  TrafficSnapshot out = ts;
  for (const auto& a : actions) {
    switch (a.kind) {
      case ActionKind::Accel: out = set_acceleration(out, ego, a.value); break;
      case ActionKind::ClaimCrossing: out = claim_crossing(out, ego); break;
      case ActionKind::ReserveCrossing: out = reserve_crossing(out, ego); break;
      case ActionKind::WithdrawClaim: out = withdraw_crossing_claim(out, ego); break;
      case ActionKind::SetLaneClaim: out = set_lane_claim(out, ego, SegmentId(a.arg)); break;
      case ActionKind::Emit:
      case ActionKind::PriorityPenalty:
      case ActionKind::PriorityBonus: break;
    }
  }
  return out;
}

inline PriorityState apply_priority_actions(const PriorityState& ps, const CarId& ego,
                                            const std::vector<ControllerAction>& actions) {
  PriorityState out = ps;
  for (const auto& a : actions) {
    if (a.kind == ActionKind::PriorityPenalty) out = priority_update(out, ego, PriorityKind::Penalty);
    if (a.kind == ActionKind::PriorityBonus) out = priority_update(out, ego, PriorityKind::Bonus);
  }
  return out;
}

namespace detail {

inline Guard when(FormulaPtr x) { return Guard{std::move(x), {}, std::nullopt, false, false}; }

}  // namespace detail

inline RuleAutomaton build_a170(const RuleConfig& cfg) {
  Term ego{"ego", true};
  auto pa = rules::pa(cfg, ego);
  RuleAutomaton a;
  a.name = "a170";
  a.locations = {"q0", "q1"};
  a.initial = "q0";
  a.invariants["q1"] = {pa, {}};
  a.edges.push_back({"q0", "q1", detail::when(pa),
                     {ControllerAction::accel(-cfg.brake_a), ControllerAction::emit("giveWay")}, {}});
  a.edges.push_back({"q1", "q0", detail::when(f::neg(pa)), {ControllerAction::accel(cfg.brake_a)}, {}});
  a.validate();
  return a;
}

inline RuleAutomaton build_a171(const RuleConfig& cfg) {
  Term ego{"ego", true};
  RuleAutomaton a;
  a.name = "a171";
  a.locations = {"approach", "braking", "stopped", "entering"};
  a.initial = "approach";
  a.edges.push_back({"approach", "braking", detail::when(rules::sta(cfg, ego)),
                     {ControllerAction::claim(), ControllerAction::accel(-cfg.brake_a)}, {}});
  Guard halted = detail::when(nullptr);
  halted.speed = SpeedConstraint{Cmp::Eq, 0};
  a.edges.push_back({"braking", "stopped", halted, {ControllerAction::emit("stopped")}, {}});
  a.edges.push_back({"stopped", "entering", detail::when(f::conj(rules::sg_i(ego), f::neg(rules::exists_pc(ego)))),
                     {ControllerAction::claim(), ControllerAction::reserve(), ControllerAction::accel(cfg.brake_a),
                      ControllerAction::emit("enter")},
                     {}});
  a.validate();
  return a;
}

inline RuleAutomaton build_a172(const RuleConfig& cfg) {
  Term ego{"ego", true};
  RuleAutomaton a;
  a.name = "a172";
  a.locations = {"approach", "yield", "ready", "entered"};
  a.initial = "approach";
  a.waiting = {"yield", "ready"};
  a.edges.push_back({"approach", "yield", detail::when(rules::gwa(cfg, ego)),
                     {ControllerAction::penalty(), ControllerAction::accel(-cfg.brake_a),
                      ControllerAction::emit("giveWay")},
                     {}});
  Guard main = detail::when(rules::ca(cfg, ego));
  main.on_main_road = true;
  a.edges.push_back({"approach", "ready", main,
                     {ControllerAction::bonus(), ControllerAction::claim(), ControllerAction::accel(-cfg.brake_a)}, {}});
  a.edges.push_back({"approach", "ready", detail::when(rules::ca(cfg, ego)), {ControllerAction::claim()}, {}});
  for (const char* from : {"yield", "ready"}) {
    Guard go = detail::when(rules::sg_i(ego));
    go.max_priority = true;
    a.edges.push_back({from, "entered", go,
                       {ControllerAction::claim(), ControllerAction::reserve(), ControllerAction::accel(cfg.brake_a),
                        ControllerAction::emit("enter")},
                       {}});
  }
  a.validate();
  return a;
}

inline RuleAutomaton build_controller(const std::string& name, const RuleConfig& cfg) {
  if (name == "a170") return build_a170(cfg);
  if (name == "a171") return build_a171(cfg);
  if (name == "a172") return build_a172(cfg);
  throw Error(ErrorCode::ValidationError, "unknown controller '" + name + "'");
}

}  // namespace trumlsl
