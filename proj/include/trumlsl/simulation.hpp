#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "trumlsl/controller.hpp"
#include "trumlsl/ltl.hpp"
#include "trumlsl/scenario.hpp"
#include "trumlsl/snapshot.hpp"

namespace trumlsl {

struct CollisionViolation {
  std::size_t step;
  CarId first;
  CarId second;
  SegmentId segment;
};

/// Distinct bodies must not share a stretch of positive length on any segment.
inline std::optional<CollisionViolation> check_collision_freedom(const Trace& trace) {
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& ts = trace[k].snapshot;
    std::vector<std::pair<CarId, std::vector<SegmentInterval>>> bodies;
    for (const auto& [id, car] : ts.cars()) bodies.emplace_back(id, body_intervals(ts.net(), car));
    for (std::size_t i = 0; i < bodies.size(); ++i)
      for (std::size_t j = i + 1; j < bodies.size(); ++j)
        for (const auto& x : bodies[i].second)
          for (const auto& y : bodies[j].second)
            if (x.segment == y.segment && rmax(x.lo, y.lo) < rmin(x.hi, y.hi))
              return CollisionViolation{k, bodies[i].first, bodies[j].first, x.segment};
  }
  return std::nullopt;
}

struct MonitorResult {
  std::string name;
  CarId ego;
  Verdict verdict;
  bool grounding_default = false;
};

struct CrossingEntry {
  CarId car;
  std::size_t step;
};

struct RunError {
  std::size_t step;
  std::string message;
  ErrorCode code;
};

struct RunReport {
  Trace trace;
  std::vector<std::string> jsonl;
  std::vector<MonitorResult> verdicts;
  std::optional<CollisionViolation> collision;
  std::vector<std::string> invariant_violations;
  std::optional<RunError> error;
  std::vector<CrossingEntry> entries;  // reserveCrossing steps, in order
  std::vector<std::map<CarId, std::string>> locations;  // controller location per step

  bool ok() const {
    if (error || collision || !invariant_violations.empty()) return false;
    for (const auto& v : verdicts)
      if (v.verdict.kind == VerdictKind::Fail) return false;
    return true;
  }

  std::string text() const {
    std::string out;
    for (const auto& line : jsonl) out += line + "\n";
    return out;
  }
};

/// How controlled cars are ordered when their actions are applied.
struct Schedule {
  std::optional<std::uint64_t> seed;            // per-step shuffle
  std::optional<std::vector<CarId>> fixed;      // explorer-chosen order
};

namespace detail {

using nlohmann::json;

inline json car_json(const CarId& c) { return c.str(); }

class Simulator {
 public:
  Simulator(const Scenario& sc, const Schedule& schedule) : sc_(sc), schedule_(schedule) {
    if (schedule.seed) rng_.seed(*schedule.seed);
  }

  RunReport run() {
    const auto& cfg = sc_.config;
    TrafficSnapshot ts = sc_.initial;
    auto controlled = sc_.controlled_cars();
    std::map<CarId, ControllerState> states;
    for (const auto& c : controlled) states[c] = initial_state(sc_.automata.at(sc_.controller_of.at(c)));
    PriorityState prio = make_priority_state(ts, cfg.penalty, cfg.bonus);
    log(0, "init", json::object(), ts);

    std::size_t k = 0;
    try {
      for (;; ++k) {
        ts = apply_events(k, ts);
        report_.trace.push_back({ts, {}});
        report_.locations.emplace_back();
        for (const auto& [c, s] : states) report_.locations.back()[c] = s.location;
        if (k == cfg.steps) break;

        ControllerContext ctx{cfg.rules, cfg.back, cfg.ahead, &prio, sc_.main_road};
        std::map<CarId, StepResult> results;
        for (const auto& c : controlled) {
          try {
            results.emplace(c, step_controller(sc_.automata.at(sc_.controller_of.at(c)), states.at(c), ts, c, ctx));
          } catch (const Error& e) {
            if (e.code() == ErrorCode::InvariantViolation)
              report_.invariant_violations.push_back("step " + std::to_string(k) + " " + c.str() + ": " + e.what());
            throw;
          }
        }
        for (const auto& c : order(controlled)) {
          const StepResult& r = results.at(c);
          states[c] = r.state;
          for (const auto& a : r.actions) {
            if (a.kind == ActionKind::Emit) {
              report_.trace.back().events.push_back({c, a.arg});
              log(k, "emit", {{"car", c.str()}, {"event", a.arg}}, ts);
              continue;
            }
            if (a.kind == ActionKind::PriorityPenalty || a.kind == ActionKind::PriorityBonus) {
              prio = apply_priority_actions(prio, c, {a});
              log(k, a.kind == ActionKind::PriorityPenalty ? "priority_penalty" : "priority_bonus",
                  {{"car", c.str()}, {"prio", prio.of(c)}}, ts);
              continue;
            }
            ts = apply_actions(ts, c, {a});
            if (a.kind == ActionKind::ReserveCrossing) report_.entries.push_back({c, k});
            json args{{"car", c.str()}};
            if (a.kind == ActionKind::Accel) args["acc"] = to_string(a.value);
            if (a.kind == ActionKind::SetLaneClaim) args["segment"] = a.arg;
            log(k, transition_name(a.kind), args, ts);
          }
        }
        for (const auto& c : controlled) {
          if (sc_.automata.at(sc_.controller_of.at(c)).waiting.count(states[c].location))
            prio = priority_update(prio, c, PriorityKind::WaitTick);
          states[c] = advance_clocks(states[c], cfg.dt);
        }
        ts = time_transition(ts, cfg.dt);
        log(k, "time_transition", {{"dt", to_string(cfg.dt)}}, ts);
      }
    } catch (const Error& e) {
      report_.error = RunError{k, e.what(), e.code()};
    }

    for (const auto& m : sc_.monitors) {
      MonitorContext mctx{cfg.rules, cfg.back, cfg.ahead};
      MonitorResult mr{m.name, m.ego, evaluate_trace(m.formula, m.bindings, report_.trace, m.ego, mctx), false};
      std::set<std::string> props;
      collect_props(m.formula, props);
      for (const auto& p : props) mr.grounding_default = mr.grounding_default || m.bindings.at(p).grounding_default;
      report_.verdicts.push_back(std::move(mr));
    }
    report_.collision = check_collision_freedom(report_.trace);
    write_summary();
    return std::move(report_);
  }

 private:
  static const char* transition_name(ActionKind k) {
    switch (k) {
      case ActionKind::Accel: return "set_acceleration";
      case ActionKind::ClaimCrossing: return "claim_crossing";
      case ActionKind::ReserveCrossing: return "reserve_crossing";
      case ActionKind::WithdrawClaim: return "withdraw_crossing_claim";
      case ActionKind::SetLaneClaim: return "set_lane_claim";
      default: return "noop";
    }
  }

  std::vector<CarId> order(const std::vector<CarId>& controlled) {
    if (schedule_.fixed) return *schedule_.fixed;
    std::vector<CarId> out = controlled;
    if (schedule_.seed) {
      // Fisher-Yates with the raw engine so the order does not depend on
      // the standard library's distribution implementation.
      for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng_() % i]);
    }
    return out;
  }

  TrafficSnapshot apply_events(std::size_t k, TrafficSnapshot ts) {
    for (const auto& e : sc_.events) {
      if (e.step != k) continue;
      switch (e.op) {
        case EventOp::Place:
          ts = place(ts, e.kind, e.segment, e.position);
          log(k, "place", {{"kind", e.kind.str()}, {"segment", e.segment.str()}, {"pos", to_string(e.position)}}, ts);
          break;
        case EventOp::Remove:
          ts = remove(ts, e.kind, e.segment, e.position);
          log(k, "remove", {{"kind", e.kind.str()}, {"segment", e.segment.str()}, {"pos", to_string(e.position)}}, ts);
          break;
        case EventOp::Switch:
          ts = switch_autonomy(ts, e.car);
          log(k, "switch", {{"car", e.car.str()}}, ts);
          break;
        case EventOp::SetLaneClaim:
          ts = set_lane_claim(ts, e.car, e.segment);
          log(k, "set_lane_claim", {{"car", e.car.str()}, {"segment", e.segment.str()}}, ts);
          break;
        case EventOp::Accel:
          ts = set_acceleration(ts, e.car, e.value);
          log(k, "set_acceleration", {{"car", e.car.str()}, {"acc", to_string(e.value)}}, ts);
          break;
      }
    }
    return ts;
  }

  void log(std::size_t k, const std::string& transition, const json& args, const TrafficSnapshot& ts) {
    json line{{"step", k}, {"transition", transition}, {"args", args}, {"digest", digest(ts)}};
    report_.jsonl.push_back(line.dump());
  }

  void write_summary() {
    for (const auto& mr : report_.verdicts) {
      json v{{"type", "verdict"}, {"rule", mr.name}, {"ego", mr.ego.str()}, {"verdict", to_string(mr.verdict.kind)}};
      v["witness"] = mr.verdict.witness ? json(*mr.verdict.witness) : json(nullptr);
      if (mr.grounding_default) v["grounding"] = "default";
      report_.jsonl.push_back(v.dump());
    }
    json c{{"type", "collision"}};
    if (report_.collision) {
      c["result"] = "violation";
      c["step"] = report_.collision->step;
      c["cars"] = {report_.collision->first.str(), report_.collision->second.str()};
    } else {
      c["result"] = "ok";
    }
    report_.jsonl.push_back(c.dump());
    for (const auto& iv : report_.invariant_violations)
      report_.jsonl.push_back(json{{"type", "invariant_violation"}, {"message", iv}}.dump());
    if (report_.error)
      report_.jsonl.push_back(
          json{{"type", "error"}, {"step", report_.error->step}, {"message", report_.error->message}}.dump());
  }

  const Scenario& sc_;
  Schedule schedule_;
  std::mt19937_64 rng_;
  RunReport report_;
};

}  // namespace detail

inline RunReport run(const Scenario& sc, std::optional<std::uint64_t> seed = std::nullopt) {
  return detail::Simulator(sc, Schedule{seed, std::nullopt}).run();
}

inline RunReport run_with_order(const Scenario& sc, const std::vector<CarId>& order) {
  return detail::Simulator(sc, Schedule{std::nullopt, order}).run();
}

struct ExploreRun {
  std::vector<CarId> order;
  RunReport report;
};

struct ExploreReport {
  std::vector<ExploreRun> runs;

  bool all_ok() const {
    return std::all_of(runs.begin(), runs.end(), [](const auto& r) { return r.report.ok(); });
  }
};

/// Runs the scenario once per scheduler permutation of the controlled cars,
/// in lexicographic order, up to `max_orders` runs.
inline ExploreReport explore_interleavings(const Scenario& sc, std::size_t max_orders) {
  auto cars = sc.controlled_cars();
  if (cars.size() < 2) throw Error(ErrorCode::ValidationError, "exploration needs at least two controlled cars");
  std::sort(cars.begin(), cars.end());
  ExploreReport out;
  do {
    if (out.runs.size() >= max_orders) break;
    out.runs.push_back({cars, run_with_order(sc, cars)});
  } while (std::next_permutation(cars.begin(), cars.end()));
  return out;
}

inline void write_jsonl(const RunReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
  out << r.text();
}

}  // namespace trumlsl
