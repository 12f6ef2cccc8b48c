#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trumlsl/error.hpp"
#include "trumlsl/formula.hpp"
#include "trumlsl/parser.hpp"
#include "trumlsl/snapshot.hpp"

namespace trumlsl {

struct RuleConfig {
  Rational d_c{50};
  Rational d_p{50};
  Rational d_st{50};
  Rational d_gw{50};
  Rational brake_a{5};

  void validate() const {
    auto positive = [](const Rational& r, const char* name) {
      if (r <= 0) throw Error(ErrorCode::ValidationError, std::string(name) + " must be positive");
    };
    positive(d_c, "d_c");
    positive(d_p, "d_p");
    positive(d_st, "d_st");
    positive(d_gw, "d_gw");
    positive(brake_a, "brake_a");
  }
};

/// Name of the real variable carrying a car's length inside sg.
inline std::string size_var(const Term& ego) { return "size_" + ego.name; }

namespace rules {

inline FormulaPtr ca(const RuleConfig& cfg, const Term& ego) {
  return f::somewhere(f::chop(f::re(ego), f::conj(f::conj(f::free(), f::len(Cmp::Lt, cfg.d_c)), f::offcs()),
                              f::cs()));
}

inline FormulaPtr sg(const Term& ego) { return f::conj(f::free(), f::len(Cmp::Ge, size_var(ego))); }

inline FormulaPtr sg_i(const Term& ego) {
  return f::somewhere(f::chop(f::conj(f::re(ego), f::offcs()), f::conj(f::free(), f::offcs()),
                              f::conj(sg(ego), f::cs())));
}

// Human-driven road users hold their space through ru, so it joins re here.
inline FormulaPtr pc(const Term& ego, const Term& other) {
  auto held = f::disj(f::disj(f::re(other), f::ru(other)), f::cl(other));
  return f::conj(f::neg(f::eq(other, ego)), f::somewhere(f::conj(f::cl(ego), held)));
}

inline FormulaPtr object_ahead(const Term& ego, const Rational& d, const std::string& kind) {
  return f::somewhere(f::chop(f::re(ego), f::conj(f::free(), f::len(Cmp::Lt, d)), f::om(Term{kind, false})));
}

inline FormulaPtr pa(const RuleConfig& cfg, const Term& ego) { return object_ahead(ego, cfg.d_p, "Ped"); }
inline FormulaPtr sta(const RuleConfig& cfg, const Term& ego) { return object_ahead(ego, cfg.d_st, "Stop"); }
inline FormulaPtr gwa(const RuleConfig& cfg, const Term& ego) { return object_ahead(ego, cfg.d_gw, "GiveWay"); }

/// Picks a bound name that cannot capture the ego term.
inline std::string other_var(const Term& ego) { return ego.name == "c" ? "c1" : "c"; }

inline FormulaPtr exists_pc(const Term& ego) {
  auto c = other_var(ego);
  return f::exists(c, pc(ego, Term{c, true}));
}

inline FormulaPtr look(const RuleConfig& cfg, const Term& ego) {
  return f::conj(f::conj(f::somewhere(f::chop(f::conj(f::re(ego), f::cs()), f::conj(f::offcs(), sg(ego)))),
                         f::neg(exists_pc(ego))),
                 f::neg(pa(cfg, ego)));
}

inline FormulaPtr ca(const RuleConfig& cfg, const std::string& ego) { return rules::ca(cfg, term(ego)); }
inline FormulaPtr sg(const std::string& ego) { return rules::sg(term(ego)); }
inline FormulaPtr sg_i(const std::string& ego) { return rules::sg_i(term(ego)); }
inline FormulaPtr pc(const std::string& ego, const std::string& other) { return rules::pc(term(ego), term(other)); }
inline FormulaPtr pa(const RuleConfig& cfg, const std::string& ego) { return rules::pa(cfg, term(ego)); }
inline FormulaPtr sta(const RuleConfig& cfg, const std::string& ego) { return rules::sta(cfg, term(ego)); }
inline FormulaPtr gwa(const RuleConfig& cfg, const std::string& ego) { return rules::gwa(cfg, term(ego)); }
inline FormulaPtr look(const RuleConfig& cfg, const std::string& ego) { return rules::look(cfg, term(ego)); }

}  // namespace rules

/// Lets formula text call the rule checks by name, e.g. `sta(ego) & !pa(ego)`.
inline MacroExpander rule_macros(const RuleConfig& cfg) {
  return [cfg](const std::string& name, const std::vector<Term>& args) -> std::optional<FormulaPtr> {
    auto arity = [&](std::size_t n) {
      if (args.size() != n)
        throw Error(ErrorCode::SyntaxError, name + " takes " + std::to_string(n) + " argument(s)");
    };
    if (name == "ca") return arity(1), rules::ca(cfg, args[0]);
    if (name == "sg") return arity(1), rules::sg(args[0]);
    if (name == "sg_i") return arity(1), rules::sg_i(args[0]);
    if (name == "pc") return arity(2), rules::pc(args[0], args[1]);
    if (name == "pa") return arity(1), rules::pa(cfg, args[0]);
    if (name == "sta") return arity(1), rules::sta(cfg, args[0]);
    if (name == "gwa") return arity(1), rules::gwa(cfg, args[0]);
    if (name == "look") return arity(1), rules::look(cfg, args[0]);
    return std::nullopt;
  };
}

inline FormulaPtr parse_rule_formula(std::string_view text, const RuleConfig& cfg) {
  return parse_formula(text, rule_macros(cfg));
}

/// Binds `ego` to the given car and every size variable sg may refer to.
inline Valuation standard_valuation(const TrafficSnapshot& ts, const CarId& ego) {
  Valuation nu;
  nu.cars["ego"] = ego;
  nu.reals["size_ego"] = ts.car(ego).size;
  for (const auto& [id, car] : ts.cars()) nu.reals["size_" + id.str()] = car.size;
  return nu;
}

}  // namespace trumlsl
