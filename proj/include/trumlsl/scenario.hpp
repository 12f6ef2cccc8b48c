#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "trumlsl/controller.hpp"
#include "trumlsl/error.hpp"
#include "trumlsl/ltl.hpp"
#include "trumlsl/parser.hpp"
#include "trumlsl/rules.hpp"
#include "trumlsl/snapshot.hpp"

namespace trumlsl {

/// Carries every problem found in a scenario, not only the first.
class ScenarioError : public Error {
 public:
  ScenarioError(ErrorCode code, std::vector<std::string> issues)
      : Error(code, join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : "; ") + s;
    return out;
  }
  std::vector<std::string> issues_;
};

struct ScenarioConfig {
  RuleConfig rules;
  Rational dt{1, 10};
  Rational back{0};
  Rational ahead{50};
  std::size_t steps = 100;
  std::int64_t penalty = 10;
  std::int64_t bonus = 10;
};

enum class EventOp { Place, Remove, Switch, SetLaneClaim, Accel };

struct ScriptedEvent {
  std::size_t step = 0;
  EventOp op = EventOp::Place;
  ObjectKind kind;
  SegmentId segment;
  Rational position{0};
  CarId car;
  Rational value{0};
};

struct MonitorDecl {
  std::string name;
  TemporalPtr formula;
  CarId ego;
  BindingTable bindings;
};

struct Scenario {
  std::string name;
  TrafficSnapshot initial;
  std::vector<CarId> car_order;                // declaration order
  std::map<CarId, std::string> controller_of;  // only controlled cars
  std::map<std::string, RuleAutomaton> automata;
  ScenarioConfig config;
  std::vector<ScriptedEvent> events;
  std::vector<MonitorDecl> monitors;
  std::set<SegmentId> main_road;

  std::vector<CarId> controlled_cars() const {
    std::vector<CarId> out;
    for (const auto& c : car_order)
      if (controller_of.count(c)) out.push_back(c);
    return out;
  }
};

/// Values that replace the file's rule constants, e.g. from the environment.
struct ConfigOverrides {
  std::optional<Rational> d_c, d_p, d_st, d_gw, brake_a;

  static ConfigOverrides from_env() {
    ConfigOverrides o;
    auto read = [](const char* name, std::optional<Rational>& into) {
      if (const char* v = std::getenv(name)) {
        auto r = try_parse_rational(v);
        if (!r) throw Error(ErrorCode::ParseError, std::string(name) + "='" + v + "' is not a number");
        into = *r;
      }
    };
    read("TRUMLSL_D_C", o.d_c);
    read("TRUMLSL_D_P", o.d_p);
    read("TRUMLSL_D_ST", o.d_st);
    read("TRUMLSL_D_GW", o.d_gw);
    read("TRUMLSL_BRAKE_A", o.brake_a);
    return o;
  }
};

namespace detail {

using nlohmann::json;

class ScenarioReader {
 public:
  ScenarioReader(const json& doc, std::string name, const ConfigOverrides& overrides)
      : doc_(doc), overrides_(overrides) {
    sc_.name = std::move(name);
  }

  Scenario read() {
    if (!doc_.is_object()) throw ScenarioError(ErrorCode::ParseError, {"scenario must be a JSON object"});
    for (const auto& [key, value] : doc_.items()) {
      static const std::set<std::string> known{"name", "network", "objects", "placements", "cars", "config",
                                               "events", "monitors", "mainRoad", "automata"};
      if (!known.count(key)) issue("unknown key '" + key + "'");
    }
    if (doc_.contains("name") && doc_["name"].is_string()) sc_.name = doc_["name"];
    read_config();
    read_network();
    if (net_) {
      TrafficSnapshot ts(net_);
      read_objects(ts);
      read_automata();
      read_cars(ts);
      sc_.initial = std::move(ts);
      read_main_road();
      read_events();
      read_monitors();
    }
    if (!issues_.empty()) throw ScenarioError(ErrorCode::ValidationError, issues_);
    return std::move(sc_);
  }

 private:
  void issue(std::string s) { issues_.push_back(std::move(s)); }

  std::optional<Rational> number(const json& j, const std::string& where) {
    std::optional<Rational> r;
    if (j.is_number_integer()) r = Rational(j.get<std::int64_t>());
    else if (j.is_number()) r = try_parse_rational(j.dump());
    else if (j.is_string()) r = try_parse_rational(j.get<std::string>());
    if (!r) issue(where + ": expected a number");
    return r;
  }

  template <typename T>
  std::optional<T> field(const json& obj, const char* key, const std::string& where, bool required = true) {
    if (!obj.is_object() || !obj.contains(key)) {
      if (required) issue(where + ": missing '" + key + "'");
      return std::nullopt;
    }
    try {
      return obj.at(key).get<T>();
    } catch (const json::exception&) {
      issue(where + ": bad value for '" + key + "'");
      return std::nullopt;
    }
  }

  std::optional<Rational> rational_field(const json& obj, const char* key, const std::string& where,
                                         bool required = true) {
    if (!obj.is_object() || !obj.contains(key)) {
      if (required) issue(where + ": missing '" + key + "'");
      return std::nullopt;
    }
    return number(obj.at(key), where + "." + key);
  }

  void read_config() {
    ScenarioConfig& c = sc_.config;
    if (doc_.contains("config")) {
      const json& j = doc_["config"];
      auto set = [&](const char* key, Rational& into) {
        if (auto r = rational_field(j, key, "config", false)) into = *r;
      };
      set("d_c", c.rules.d_c);
      set("d_p", c.rules.d_p);
      set("d_st", c.rules.d_st);
      set("d_gw", c.rules.d_gw);
      set("brake_a", c.rules.brake_a);
      set("dt", c.dt);
      set("back", c.back);
      set("ahead", c.ahead);
      if (auto s = field<std::int64_t>(j, "steps", "config", false)) {
        if (*s < 0) issue("config: steps must be non-negative");
        else c.steps = static_cast<std::size_t>(*s);
      }
      if (auto p = field<std::int64_t>(j, "penalty", "config", false)) c.penalty = *p;
      if (auto b = field<std::int64_t>(j, "bonus", "config", false)) c.bonus = *b;
    }
    if (overrides_.d_c) c.rules.d_c = *overrides_.d_c;
    if (overrides_.d_p) c.rules.d_p = *overrides_.d_p;
    if (overrides_.d_st) c.rules.d_st = *overrides_.d_st;
    if (overrides_.d_gw) c.rules.d_gw = *overrides_.d_gw;
    if (overrides_.brake_a) c.rules.brake_a = *overrides_.brake_a;
    try {
      c.rules.validate();
    } catch (const Error& e) {
      issue(std::string("config: ") + e.what());
    }
    if (c.dt <= 0) issue("config: dt must be positive");
    if (c.back < 0 || c.ahead < 0) issue("config: back and ahead must be non-negative");
    if (c.penalty <= 0 || c.bonus <= 0) issue("config: penalty and bonus must be positive");
  }

  void read_network() {
    if (!doc_.contains("network")) return issue("missing 'network'");
    const json& n = doc_["network"];
    std::vector<SegmentDecl> segs;
    std::set<SegmentId> seen;
    bool ok = true;
    if (n.contains("segments") && n["segments"].is_array()) {
      for (std::size_t i = 0; i < n["segments"].size(); ++i) {
        const json& s = n["segments"][i];
        std::string where = "network.segments[" + std::to_string(i) + "]";
        auto id = field<std::string>(s, "id", where);
        auto kind = field<std::string>(s, "kind", where);
        auto len = rational_field(s, "length", where);
        if (!id || !kind || !len) {
          ok = false;
          continue;
        }
        if (*kind != "lane" && *kind != "crossing") {
          issue(where + ": kind must be lane or crossing");
          ok = false;
          continue;
        }
        if (!seen.insert(SegmentId(*id)).second) {
          issue(where + ": duplicate segment '" + *id + "'");
          ok = false;
        }
        if (*len <= 0) {
          issue(where + ": length must be positive");
          ok = false;
        }
        segs.push_back({SegmentId(*id), *kind == "lane" ? SegmentKind::Lane : SegmentKind::Crossing, *len});
      }
    } else {
      issue("network: missing 'segments' array");
      ok = false;
    }
    auto pairs = [&](const char* key) {
      std::vector<std::pair<SegmentId, SegmentId>> out;
      if (!n.contains(key)) return out;
      if (!n[key].is_array()) {
        issue(std::string("network.") + key + ": expected an array of pairs");
        ok = false;
        return out;
      }
      for (const auto& e : n[key]) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
          issue(std::string("network.") + key + ": expected [from, to] string pairs");
          ok = false;
          continue;
        }
        SegmentId a(e[0].get<std::string>()), b(e[1].get<std::string>());
        for (const auto& s : {a, b}) {
          if (!seen.count(s)) {
            issue(std::string("network.") + key + ": undeclared segment '" + s.str() + "'");
            ok = false;
          }
        }
        out.emplace_back(a, b);
      }
      return out;
    };
    auto edges = pairs("edges");
    auto neighbours = pairs("neighbours");
    if (!ok) return;
    try {
      net_ = std::make_shared<const RoadNetwork>(build_network(segs, edges, neighbours));
    } catch (const Error& e) {
      issue(std::string("network: ") + e.what());
    }
  }

  bool segment_known(const std::string& s, const std::string& where) {
    if (net_->contains(SegmentId(s))) return true;
    issue(where + ": unknown segment '" + s + "'");
    return false;
  }

  void read_objects(TrafficSnapshot& ts) {
    if (doc_.contains("objects")) {
      if (auto kinds = field<std::vector<std::string>>(doc_, "objects", "scenario"))
        for (const auto& k : *kinds) ts.declare_object_kind(ObjectKind(k));
    }
    if (!doc_.contains("placements")) return;
    if (!doc_["placements"].is_array()) return issue("placements: expected an array");
    for (std::size_t i = 0; i < doc_["placements"].size(); ++i) {
      const json& p = doc_["placements"][i];
      std::string where = "placements[" + std::to_string(i) + "]";
      auto kind = field<std::string>(p, "kind", where);
      auto seg = field<std::string>(p, "segment", where);
      auto pos = rational_field(p, "pos", where);
      if (!kind || !seg || !pos) continue;
      if (!ts.has_object_kind(ObjectKind(*kind))) {
        issue(where + ": undeclared object kind '" + *kind + "'");
        continue;
      }
      if (!segment_known(*seg, where)) continue;
      try {
        ts = place(ts, ObjectKind(*kind), SegmentId(*seg), *pos);
      } catch (const Error& e) {
        issue(where + ": " + e.what());
      }
    }
  }

  std::set<SegmentId> segment_set(const json& car, const char* key, const std::string& where) {
    std::set<SegmentId> out;
    if (!car.contains(key)) return out;
    if (auto v = field<std::vector<std::string>>(car, key, where))
      for (const auto& s : *v)
        if (segment_known(s, where + "." + key)) out.insert(SegmentId(s));
    return out;
  }

  void read_cars(TrafficSnapshot& ts) {
    if (!doc_.contains("cars")) return;
    if (!doc_["cars"].is_array()) return issue("cars: expected an array");
    const auto& net = *net_;
    for (std::size_t i = 0; i < doc_["cars"].size(); ++i) {
      const json& c = doc_["cars"][i];
      std::string where = "cars[" + std::to_string(i) + "]";
      auto id = field<std::string>(c, "id", where);
      auto path = field<std::vector<std::string>>(c, "path", where);
      if (!id || !path) continue;
      where += " (" + *id + ")";
      CarId cid(*id);
      if (ts.has_car(cid)) {
        issue(where + ": duplicate car id");
        continue;
      }
      CarState car;
      bool ok = true;
      for (const auto& s : *path) ok = segment_known(s, where + ".path") && ok;
      if (!ok) continue;
      for (const auto& s : *path) car.path.waypoints.push_back(SegmentId(s));
      try {
        validate_path(net, car.path);
      } catch (const Error& e) {
        issue(where + ": " + e.what());
        continue;
      }
      car.pos = rational_field(c, "pos", where).value_or(0);
      car.size = rational_field(c, "size", where, false).value_or(1);
      car.spd = rational_field(c, "speed", where, false).value_or(0);
      car.acc = rational_field(c, "acc", where, false).value_or(0);
      car.aut = field<bool>(c, "aut", where, false).value_or(true);
      car.path_index = static_cast<std::size_t>(field<std::int64_t>(c, "index", where, false).value_or(0));
      if (car.path_index >= car.path.waypoints.size()) {
        issue(where + ": index beyond the path");
        continue;
      }
      if (car.size <= 0) issue(where + ": size must be positive"), ok = false;
      if (car.spd < 0) issue(where + ": speed must be non-negative"), ok = false;
      if (car.pos < 0 || car.pos > net.length(car.path.waypoints[car.path_index])) {
        issue(where + ": pos outside its segment");
        ok = false;
      }
      if (!ok) continue;
      try {
        normalize_occupancy(net, car);
      } catch (const Error& e) {
        issue(where + ": " + e.what());
        continue;
      }
      auto declared_res = segment_set(c, "res", where);
      if (c.contains("res") && declared_res != car.res) issue(where + ": declared res does not match the body");
      auto ahead = crossing_run_ahead(net, car);
      std::set<SegmentId> on_path(car.path.waypoints.begin() + static_cast<long>(car.path_index),
                                  car.path.waypoints.end());
      for (const auto& s : segment_set(c, "cres", where)) {
        if (net.kind(s) != SegmentKind::Crossing || !on_path.count(s))
          issue(where + ": cres member '" + s.str() + "' is not a crossing on the path ahead");
        else
          car.cres.insert(s);
      }
      for (const auto& s : segment_set(c, "cclm", where)) {
        if (net.kind(s) != SegmentKind::Crossing || !on_path.count(s))
          issue(where + ": cclm member '" + s.str() + "' is not a crossing on the path ahead");
        else
          car.cclm.insert(s);
      }
      for (const auto& s : segment_set(c, "clm", where)) {
        bool neighbouring = false;
        for (const auto& r : car.res) neighbouring = neighbouring || net.are_neighbours(r, s);
        if (net.kind(s) != SegmentKind::Lane || !neighbouring)
          issue(where + ": clm member '" + s.str() + "' is not a neighbouring lane");
        else
          car.clm.insert(s);
      }
      if (auto ctl = field<std::string>(c, "controller", where, false); ctl && *ctl != "none") {
        if (*ctl == "a170" || *ctl == "a171" || *ctl == "a172") {
          if (!sc_.automata.count(*ctl)) {
            try {
              sc_.automata[*ctl] = build_controller(*ctl, sc_.config.rules);
            } catch (const Error& e) {
              issue(where + ": " + e.what());
            }
          }
        } else if (!sc_.automata.count(*ctl)) {
          issue(where + ": unknown controller '" + *ctl + "'");
        }
        sc_.controller_of[cid] = *ctl;
      }
      ts.insert_car(cid, std::move(car));
      sc_.car_order.push_back(cid);
    }
  }

  std::optional<std::pair<Cmp, Rational>> constraint(const std::string& text, const std::string& where) {
    TokenStream t(tokenize(text));
    Cmp c;
    switch (t.peek().kind) {
      case Tok::Eq: c = Cmp::Eq; break;
      case Tok::Lt: c = Cmp::Lt; break;
      case Tok::Le: c = Cmp::Le; break;
      case Tok::Gt: c = Cmp::Gt; break;
      case Tok::Ge: c = Cmp::Ge; break;
      default: issue(where + ": expected a comparison like '= 0'"); return std::nullopt;
    }
    t.next();
    if (!t.at(Tok::Number)) {
      issue(where + ": expected a number");
      return std::nullopt;
    }
    auto r = try_parse_rational(t.next().text);
    if (!r || !t.at(Tok::End)) {
      issue(where + ": malformed constraint");
      return std::nullopt;
    }
    return std::make_pair(c, *r);
  }

  std::optional<ClockConstraint> clock_constraint(const std::string& text, const std::string& where) {
    auto sp = text.find_first_of("<>=");
    if (sp == std::string::npos) {
      issue(where + ": malformed clock constraint");
      return std::nullopt;
    }
    std::string clock = text.substr(0, sp);
    while (!clock.empty() && clock.back() == ' ') clock.pop_back();
    auto c = constraint(text.substr(sp), where);
    if (!c) return std::nullopt;
    return ClockConstraint{clock, c->first, c->second};
  }

  FormulaPtr formula(const std::string& text, const std::string& where) {
    try {
      return parse_rule_formula(text, sc_.config.rules);
    } catch (const Error& e) {
      issue(where + ": " + e.what());
      return nullptr;
    }
  }

  std::optional<ControllerAction> action(const std::string& text, const std::string& where) {
    const Rational a = sc_.config.rules.brake_a;
    if (text == "claimCrossing") return ControllerAction::claim();
    if (text == "reserveCrossing") return ControllerAction::reserve();
    if (text == "withdrawClaim") return ControllerAction::withdraw_claim();
    if (text == "priorityPenalty") return ControllerAction::penalty();
    if (text == "priorityBonus") return ControllerAction::bonus();
    auto call = [&](const std::string& head) -> std::optional<std::string> {
      if (text.rfind(head + "(", 0) == 0 && text.back() == ')')
        return text.substr(head.size() + 1, text.size() - head.size() - 2);
      return std::nullopt;
    };
    if (auto arg = call("accel")) {
      if (*arg == "+a" || *arg == "a") return ControllerAction::accel(a);
      if (*arg == "-a") return ControllerAction::accel(-a);
      if (auto r = try_parse_rational(*arg)) return ControllerAction::accel(*r);
    }
    if (auto arg = call("emit"); arg && !arg->empty()) return ControllerAction::emit(*arg);
    if (auto arg = call("setLaneClaim"); arg && net_->contains(SegmentId(*arg)))
      return ControllerAction::lane_claim(*arg);
    issue(where + ": unknown action '" + text + "'");
    return std::nullopt;
  }

  void read_automata() {
    if (!doc_.contains("automata")) return;
    if (!doc_["automata"].is_object()) return issue("automata: expected an object");
    for (const auto& [name, a] : doc_["automata"].items()) {
      std::string where = "automata." + name;
      RuleAutomaton aut;
      aut.name = name;
      aut.locations = field<std::vector<std::string>>(a, "locations", where).value_or(std::vector<std::string>{});
      aut.initial = field<std::string>(a, "initial", where).value_or("");
      for (const auto& c : field<std::vector<std::string>>(a, "clocks", where, false).value_or(std::vector<std::string>{}))
        aut.clocks.insert(c);
      for (const auto& w : field<std::vector<std::string>>(a, "waiting", where, false).value_or(std::vector<std::string>{}))
        aut.waiting.insert(w);
      if (a.contains("invariants") && a["invariants"].is_object()) {
        for (const auto& [loc, text] : a["invariants"].items()) {
          if (!text.is_string()) {
            issue(where + ".invariants." + loc + ": expected formula text");
            continue;
          }
          aut.invariants[loc] = {formula(text.get<std::string>(), where + ".invariants." + loc), {}};
        }
      }
      if (a.contains("edges") && a["edges"].is_array()) {
        for (std::size_t i = 0; i < a["edges"].size(); ++i) {
          const json& e = a["edges"][i];
          std::string ew = where + ".edges[" + std::to_string(i) + "]";
          Edge edge;
          edge.source = field<std::string>(e, "from", ew).value_or("");
          edge.target = field<std::string>(e, "to", ew).value_or("");
          if (auto g = field<std::string>(e, "guard", ew, false)) edge.guard.formula = formula(*g, ew + ".guard");
          if (auto s = field<std::string>(e, "speed", ew, false))
            if (auto c = constraint(*s, ew + ".speed")) edge.guard.speed = SpeedConstraint{c->first, c->second};
          for (const auto& cc : field<std::vector<std::string>>(e, "clocks", ew, false).value_or(std::vector<std::string>{}))
            if (auto k = clock_constraint(cc, ew + ".clocks")) edge.guard.clocks.push_back(*k);
          edge.guard.max_priority = field<bool>(e, "maxPriority", ew, false).value_or(false);
          edge.guard.on_main_road = field<bool>(e, "onMainRoad", ew, false).value_or(false);
          for (const auto& act : field<std::vector<std::string>>(e, "actions", ew, false).value_or(std::vector<std::string>{}))
            if (auto x = action(act, ew + ".actions")) edge.actions.push_back(*x);
          edge.resets = field<std::vector<std::string>>(e, "resets", ew, false).value_or(std::vector<std::string>{});
          aut.edges.push_back(std::move(edge));
        }
      }
      try {
        aut.validate();
      } catch (const Error& e) {
        issue(where + ": " + e.what());
      }
      sc_.automata[name] = std::move(aut);
    }
  }

  void read_main_road() {
    if (!doc_.contains("mainRoad")) return;
    for (const auto& s : field<std::vector<std::string>>(doc_, "mainRoad", "scenario").value_or(std::vector<std::string>{})) {
      if (!segment_known(s, "mainRoad")) continue;
      if (net_->kind(SegmentId(s)) != SegmentKind::Lane) issue("mainRoad: '" + s + "' is not a lane");
      sc_.main_road.insert(SegmentId(s));
    }
  }

  void read_events() {
    if (!doc_.contains("events")) return;
    if (!doc_["events"].is_array()) return issue("events: expected an array");
    const auto& ts = sc_.initial;
    for (std::size_t i = 0; i < doc_["events"].size(); ++i) {
      const json& e = doc_["events"][i];
      std::string where = "events[" + std::to_string(i) + "]";
      ScriptedEvent ev;
      auto step = field<std::int64_t>(e, "step", where);
      auto op = field<std::string>(e, "op", where);
      if (!step || !op) continue;
      if (*step < 0 || static_cast<std::size_t>(*step) > sc_.config.steps) {
        issue(where + ": step outside the run");
        continue;
      }
      ev.step = static_cast<std::size_t>(*step);
      auto need_car = [&] {
        auto c = field<std::string>(e, "car", where);
        if (!c) return false;
        ev.car = CarId(*c);
        if (!ts.has_car(ev.car)) {
          issue(where + ": unknown car '" + *c + "'");
          return false;
        }
        return true;
      };
      if (*op == "place" || *op == "remove") {
        ev.op = *op == "place" ? EventOp::Place : EventOp::Remove;
        auto kind = field<std::string>(e, "kind", where);
        auto seg = field<std::string>(e, "segment", where);
        auto pos = rational_field(e, "pos", where);
        if (!kind || !seg || !pos) continue;
        if (!ts.has_object_kind(ObjectKind(*kind))) {
          issue(where + ": undeclared object kind '" + *kind + "'");
          continue;
        }
        if (!segment_known(*seg, where)) continue;
        ev.kind = ObjectKind(*kind);
        ev.segment = SegmentId(*seg);
        ev.position = *pos;
        if (ev.position < 0 || ev.position > net_->length(ev.segment)) {
          issue(where + ": position outside the segment");
          continue;
        }
      } else if (*op == "switch") {
        ev.op = EventOp::Switch;
        if (!need_car()) continue;
      } else if (*op == "setLaneClaim") {
        ev.op = EventOp::SetLaneClaim;
        auto seg = field<std::string>(e, "segment", where);
        if (!need_car() || !seg || !segment_known(*seg, where)) continue;
        ev.segment = SegmentId(*seg);
      } else if (*op == "accel") {
        ev.op = EventOp::Accel;
        auto v = rational_field(e, "value", where);
        if (!need_car() || !v) continue;
        ev.value = *v;
      } else {
        issue(where + ": unknown op '" + *op + "'");
        continue;
      }
      sc_.events.push_back(ev);
    }
  }

  void read_monitors() {
    if (!doc_.contains("monitors")) return;
    if (!doc_["monitors"].is_array()) return issue("monitors: expected an array");
    auto encodings = rule_encodings();
    for (std::size_t i = 0; i < doc_["monitors"].size(); ++i) {
      const json& m = doc_["monitors"][i];
      std::string where = "monitors[" + std::to_string(i) + "]";
      MonitorDecl md;
      auto ego = field<std::string>(m, "ego", where);
      if (!ego) continue;
      md.ego = CarId(*ego);
      if (!sc_.initial.has_car(md.ego)) issue(where + ": unknown ego '" + *ego + "'");
      std::string text;
      if (auto rule = field<std::string>(m, "rule", where, false)) {
        auto it = encodings.find(*rule);
        if (it == encodings.end()) {
          issue(where + ": unknown rule '" + *rule + "'");
          continue;
        }
        md.name = *rule;
        text = it->second;
      } else if (auto ltl = field<std::string>(m, "ltl", where, false)) {
        text = *ltl;
        md.name = field<std::string>(m, "name", where, false).value_or("ltl" + std::to_string(i));
      } else {
        issue(where + ": needs 'rule' or 'ltl'");
        continue;
      }
      try {
        md.formula = parse_ltl(text);
      } catch (const Error& e) {
        issue(where + ": " + e.what());
        continue;
      }
      md.bindings = default_bindings(sc_.config.rules);
      if (m.contains("bindings") && m["bindings"].is_object()) {
        for (const auto& [prop, b] : m["bindings"].items()) {
          PropositionBinding pb;
          if (b.is_string()) {
            pb.formula = formula(b.get<std::string>(), where + ".bindings." + prop);
          } else if (b.is_object() && b.contains("event") && b["event"].is_string()) {
            pb.event = b["event"].get<std::string>();
          } else {
            issue(where + ".bindings." + prop + ": expected formula text or {\"event\": name}");
            continue;
          }
          md.bindings[prop] = pb;
        }
      }
      std::set<std::string> props;
      collect_props(md.formula, props);
      for (const auto& p : props)
        if (!md.bindings.count(p)) issue(where + ": unbound proposition '" + p + "'");
      sc_.monitors.push_back(std::move(md));
    }
  }

  const json& doc_;
  const ConfigOverrides& overrides_;
  Scenario sc_;
  std::shared_ptr<const RoadNetwork> net_;
  std::vector<std::string> issues_;
};

}  // namespace detail

inline Scenario parse_scenario(const std::string& text, const std::string& name = "scenario",
                               const ConfigOverrides& overrides = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(ErrorCode::ParseError, {e.what()});
  }
  return detail::ScenarioReader(doc, name, overrides).read();
}

inline Scenario load_scenario(const std::string& path, const ConfigOverrides& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(ErrorCode::ParseError, {"cannot read '" + path + "'"});
  std::stringstream buf;
  buf << in.rdbuf();
  auto stem = path.substr(path.find_last_of('/') + 1);
  return parse_scenario(buf.str(), stem.substr(0, stem.find('.')), overrides);
}

}  // namespace trumlsl
