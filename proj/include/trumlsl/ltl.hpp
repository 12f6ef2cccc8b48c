#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "trumlsl/error.hpp"
#include "trumlsl/evaluator.hpp"
#include "trumlsl/lexer.hpp"
#include "trumlsl/rules.hpp"
#include "trumlsl/snapshot.hpp"
#include "trumlsl/view.hpp"

namespace trumlsl {

enum class TOp { Prop, True, Not, And, Or, Impl, Always, Eventually, Next, Until };

struct TemporalFormula;
using TemporalPtr = std::shared_ptr<const TemporalFormula>;

struct TemporalFormula {
  TOp op = TOp::True;
  std::string name{};
  TemporalPtr lhs{};
  TemporalPtr rhs{};
};

namespace t {

inline TemporalPtr make(TemporalFormula x) { return std::make_shared<const TemporalFormula>(std::move(x)); }
inline TemporalPtr prop(std::string n) { return make({.op = TOp::Prop, .name = std::move(n)}); }
inline TemporalPtr tt() { return make({.op = TOp::True}); }
inline TemporalPtr neg(TemporalPtr x) { return make({.op = TOp::Not, .lhs = std::move(x)}); }
inline TemporalPtr conj(TemporalPtr x, TemporalPtr y) { return make({.op = TOp::And, .lhs = std::move(x), .rhs = std::move(y)}); }
inline TemporalPtr disj(TemporalPtr x, TemporalPtr y) { return make({.op = TOp::Or, .lhs = std::move(x), .rhs = std::move(y)}); }
inline TemporalPtr impl(TemporalPtr x, TemporalPtr y) { return make({.op = TOp::Impl, .lhs = std::move(x), .rhs = std::move(y)}); }
inline TemporalPtr always(TemporalPtr x) { return make({.op = TOp::Always, .lhs = std::move(x)}); }
inline TemporalPtr eventually(TemporalPtr x) { return make({.op = TOp::Eventually, .lhs = std::move(x)}); }
inline TemporalPtr next(TemporalPtr x) { return make({.op = TOp::Next, .lhs = std::move(x)}); }
inline TemporalPtr until(TemporalPtr x, TemporalPtr y) { return make({.op = TOp::Until, .lhs = std::move(x), .rhs = std::move(y)}); }

}  // namespace t

inline std::string to_string(const TemporalPtr& x) {
  switch (x->op) {
    case TOp::Prop: return x->name;
    case TOp::True: return "true";
    case TOp::Not: return "!" + to_string(x->lhs);
    case TOp::And: return "(" + to_string(x->lhs) + " & " + to_string(x->rhs) + ")";
    case TOp::Or: return "(" + to_string(x->lhs) + " | " + to_string(x->rhs) + ")";
    case TOp::Impl: return "(" + to_string(x->lhs) + " -> " + to_string(x->rhs) + ")";
    case TOp::Always: return "G " + to_string(x->lhs);
    case TOp::Eventually: return "F " + to_string(x->lhs);
    case TOp::Next: return "X " + to_string(x->lhs);
    case TOp::Until: return "(" + to_string(x->lhs) + " U " + to_string(x->rhs) + ")";
  }
  return "?";
}

inline bool structurally_equal(const TemporalPtr& x, const TemporalPtr& y) {
  if (!x || !y) return !x && !y;
  return x->op == y->op && x->name == y->name && structurally_equal(x->lhs, y->lhs) &&
         structurally_equal(x->rhs, y->rhs);
}

inline void collect_props(const TemporalPtr& x, std::set<std::string>& out) {
  if (x->op == TOp::Prop) out.insert(x->name);
  if (x->lhs) collect_props(x->lhs, out);
  if (x->rhs) collect_props(x->rhs, out);
}

namespace detail {

// impl := or ('->' impl)? ; or := and ('|' and)* ; and := until ('&' until)* ;
// until := unary ('U' until)? ; unary := ('!' | 'G' | 'F' | 'X') unary | primary
class LtlParser {
 public:
  explicit LtlParser(TokenStream& ts) : ts_(ts) {}

  TemporalPtr implication() {
    auto x = disjunction();
    if (ts_.accept(Tok::Arrow)) return t::impl(x, implication());
    return x;
  }

 private:
  TemporalPtr disjunction() {
    auto x = conjunction();
    while (ts_.accept(Tok::Pipe)) x = t::disj(x, conjunction());
    return x;
  }
  TemporalPtr conjunction() {
    auto x = until();
    while (ts_.accept(Tok::Amp)) x = t::conj(x, until());
    return x;
  }
  TemporalPtr until() {
    auto x = unary();
    if (ts_.at_ident("U")) {
      ts_.next();
      return t::until(x, until());
    }
    return x;
  }
  TemporalPtr unary() {
    if (ts_.accept(Tok::Bang)) return t::neg(unary());
    if (ts_.at_ident("G")) return ts_.next(), t::always(unary());
    if (ts_.at_ident("F")) return ts_.next(), t::eventually(unary());
    if (ts_.at_ident("X")) return ts_.next(), t::next(unary());
    if (ts_.accept(Tok::LParen)) {
      auto x = implication();
      ts_.expect(Tok::RParen, "')'");
      return x;
    }
    if (ts_.at_ident("U")) ts_.fail("proposition");
    auto tok = ts_.expect(Tok::Ident, "proposition");
    if (tok.text == "true") return t::tt();
    if (tok.text == "false") return t::neg(t::tt());
    return t::prop(tok.text);
  }

  TokenStream& ts_;
};

}  // namespace detail

inline TemporalPtr parse_ltl(std::string_view text) {
  TokenStream ts(tokenize(text));
  detail::LtlParser p(ts);
  auto x = p.implication();
  if (!ts.at(Tok::End)) ts.fail("end of input");
  return x;
}

// ---------------------------------------------------------------------------
// Traces and grounding

struct TraceEvent {
  CarId car;
  std::string name;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct TraceStep {
  TrafficSnapshot snapshot;
  std::vector<TraceEvent> events;  // emitted by controllers at this step
};

using Trace = std::vector<TraceStep>;

/// A proposition holds at a step when every configured part holds: the
/// state predicate, the spatial formula on the ego view, and the event.
struct PropositionBinding {
  FormulaPtr formula{};
  std::string event{};
  std::function<bool(const TrafficSnapshot&, const CarId&)> predicate{};
  bool grounding_default = false;
  std::string description{};
};

using BindingTable = std::map<std::string, PropositionBinding>;

struct MonitorContext {
  RuleConfig rules;
  Rational back{0};
  Rational ahead{50};
};

inline bool has_crossing_reservation(const TrafficSnapshot& ts, const CarId& ego) {
  return !ts.car(ego).cres.empty();
}

inline BindingTable default_bindings(const RuleConfig& cfg) {
  Term ego{"ego", true};
  BindingTable b;
  b["watch"] = {f::impl(rules::ca(cfg, ego), f::neg(rules::exists_pc(ego))), {}, {}, true,
                "no path conflict while a crossing is ahead"};
  b["cross"] = {f::exists("c", f::conj(f::neg(f::eq(Term{"c", true}, ego)),
                                       f::somewhere(f::conj(f::disj(f::re(Term{"c", true}), f::ru(Term{"c", true})),
                                                            f::cs())))),
                {}, {}, false, "another road user on a crossing in view"};
  b["sg"] = {rules::sg_i(ego), {}, {}, false, "safe gap on the crossing ahead"};
  b["enter"] = {nullptr, {}, has_crossing_reservation, false, "ego holds a crossing reservation"};
  b["stop"] = {rules::sta(cfg, ego), {}, [](const TrafficSnapshot& ts, const CarId& c) { return ts.car(c).spd == Rational(0); },
               false, "standing within stop-sign range"};
  b["st"] = {rules::sta(cfg, ego), {}, {}, false, "stop sign ahead"};
  b["gw"] = {rules::gwa(cfg, ego), {}, {}, false, "give-way sign ahead"};
  b["giveWay"] = {nullptr, "giveWay", {}, false, "controller requested to give way"};
  return b;
}

inline std::map<std::string, std::string> rule_encodings() {
  return {
      {"r170_enter", "G ((watch & !cross & sg) -> ((sg & !cross) U enter))"},
      {"r170_giveway", "G ((watch & cross) -> giveWay)"},
      {"r171", "G ((st & !enter) -> (!enter U (stop & (stop U (sg & (sg U enter))))))"},
      {"r172", "(F gw) -> (!enter U giveWay)"},
  };
}

inline bool proposition_holds(const PropositionBinding& b, const TraceStep& step, const CarId& ego,
                              const MonitorContext& ctx) {
  if (!step.snapshot.has_car(ego)) return false;
  if (b.predicate && !b.predicate(step.snapshot, ego)) return false;
  if (!b.event.empty()) {
    bool seen = false;
    for (const auto& e : step.events) seen = seen || (e.car == ego && e.name == b.event);
    if (!seen) return false;
  }
  if (b.formula) {
    auto view = build_view(step.snapshot, ego, ctx.back, ctx.ahead, true);
    return evaluate(step.snapshot, view, standard_valuation(step.snapshot, ego), b.formula);
  }
  return true;
}

// ---------------------------------------------------------------------------
// Three-valued finite-trace evaluation

enum class Truth { False, True, Unknown };

enum class VerdictKind { Pass, Fail, Inconclusive };

inline const char* to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::Pass: return "pass";
    case VerdictKind::Fail: return "fail";
    case VerdictKind::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Verdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  std::optional<std::size_t> witness;  // earliest step at which a fail is determined
  std::map<std::string, std::vector<bool>> propositions;
};

namespace detail {

/// Truth value together with the step by which the trace prefix fixes it.
struct Judged {
  Truth v;
  std::size_t at;
};

inline Judged kleene_and(Judged x, Judged y) {
  if (x.v == Truth::False && y.v == Truth::False) return {Truth::False, std::min(x.at, y.at)};
  if (x.v == Truth::False) return x;
  if (y.v == Truth::False) return y;
  if (x.v == Truth::True && y.v == Truth::True) return {Truth::True, std::max(x.at, y.at)};
  return {Truth::Unknown, std::max(x.at, y.at)};
}

inline Judged kleene_not(Judged x) {
  if (x.v == Truth::Unknown) return x;
  return {x.v == Truth::True ? Truth::False : Truth::True, x.at};
}

inline Judged kleene_or(Judged x, Judged y) { return kleene_not(kleene_and(kleene_not(x), kleene_not(y))); }

class TraceEvaluator {
 public:
  TraceEvaluator(const std::map<std::string, std::vector<bool>>& props, std::size_t n) : props_(props), n_(n) {}

  Judged at(const TemporalFormula* x, std::size_t i) {
    auto& column = memo_[x];
    if (column.empty()) column = compute(x);
    return column[i];
  }

 private:
  // Values for all positions 0..n-1 at once; future operators fold from the end.
  std::vector<Judged> compute(const TemporalFormula* x) {
    std::vector<Judged> out(n_);
    switch (x->op) {
      case TOp::Prop: {
        const auto& v = props_.at(x->name);
        for (std::size_t i = 0; i < n_; ++i) out[i] = {v[i] ? Truth::True : Truth::False, i};
        break;
      }
      case TOp::True:
        for (std::size_t i = 0; i < n_; ++i) out[i] = {Truth::True, i};
        break;
      case TOp::Not:
        for (std::size_t i = 0; i < n_; ++i) out[i] = kleene_not(at(x->lhs.get(), i));
        break;
      case TOp::And:
        for (std::size_t i = 0; i < n_; ++i) out[i] = kleene_and(at(x->lhs.get(), i), at(x->rhs.get(), i));
        break;
      case TOp::Or:
        for (std::size_t i = 0; i < n_; ++i) out[i] = kleene_or(at(x->lhs.get(), i), at(x->rhs.get(), i));
        break;
      case TOp::Impl:
        for (std::size_t i = 0; i < n_; ++i)
          out[i] = kleene_or(kleene_not(at(x->lhs.get(), i)), at(x->rhs.get(), i));
        break;
      case TOp::Next:
        for (std::size_t i = 0; i < n_; ++i)
          out[i] = i + 1 < n_ ? at(x->lhs.get(), i + 1) : Judged{Truth::Unknown, n_ - 1};
        break;
      case TOp::Always: {
        // Never violated within the trace counts as a pass.
        Judged rest{Truth::True, n_ - 1};
        for (std::size_t i = n_; i-- > 0;) out[i] = rest = kleene_and(at(x->lhs.get(), i), rest);
        break;
      }
      case TOp::Eventually: {
        Judged rest{Truth::Unknown, n_ - 1};
        for (std::size_t i = n_; i-- > 0;) out[i] = rest = kleene_or(at(x->lhs.get(), i), rest);
        break;
      }
      case TOp::Until: {
        Judged rest{Truth::Unknown, n_ - 1};
        for (std::size_t i = n_; i-- > 0;)
          out[i] = rest = kleene_or(at(x->rhs.get(), i), kleene_and(at(x->lhs.get(), i), rest));
        break;
      }
    }
    return out;
  }

  const std::map<std::string, std::vector<bool>>& props_;
  std::size_t n_;
  std::map<const TemporalFormula*, std::vector<Judged>> memo_;
};

}  // namespace detail

/// Grounds every proposition of `tf` along the trace for `ego`, then
/// evaluates the formula at position 0.
inline Verdict evaluate_trace(const TemporalPtr& tf, const BindingTable& bindings, const Trace& trace,
                              const CarId& ego, const MonitorContext& ctx = {}) {
  if (trace.empty()) throw Error(ErrorCode::InvalidState, "empty trace");
  std::set<std::string> names;
  collect_props(tf, names);
  Verdict verdict;
  for (const auto& n : names) {
    auto it = bindings.find(n);
    if (it == bindings.end()) throw Error(ErrorCode::UnboundProposition, n);
    auto& column = verdict.propositions[n];
    for (const auto& step : trace) column.push_back(proposition_holds(it->second, step, ego, ctx));
  }
  detail::TraceEvaluator ev(verdict.propositions, trace.size());
  auto j = ev.at(tf.get(), 0);
  switch (j.v) {
    case Truth::True: verdict.kind = VerdictKind::Pass; break;
    case Truth::False:
      verdict.kind = VerdictKind::Fail;
      verdict.witness = j.at;
      break;
    case Truth::Unknown: verdict.kind = VerdictKind::Inconclusive; break;
  }
  return verdict;
}

}  // namespace trumlsl
