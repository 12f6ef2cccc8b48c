#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trumlsl/error.hpp"
#include "trumlsl/ids.hpp"
#include "trumlsl/rational.hpp"

namespace trumlsl {

enum class Op {
  True,
  Cs,
  Offcs,
  Free,
  Re,
  Cl,
  Ru,
  Om,
  VarEq,
  Len,
  Not,
  And,
  Or,
  Impl,
  Exists,
  HChop,
  VStack,
  Somewhere,
};

enum class Cmp { Eq, Lt, Le, Gt, Ge };

inline const char* to_string(Cmp c) {
  switch (c) {
    case Cmp::Eq: return "=";
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
  }
  return "?";
}

template <typename T>
bool compare(Cmp c, const T& a, const T& b) {
  switch (c) {
    case Cmp::Eq: return a == b;
    case Cmp::Lt: return a < b;
    case Cmp::Le: return a <= b;
    case Cmp::Gt: return a > b;
    case Cmp::Ge: return a >= b;
  }
  return false;
}

/// A car or object argument. Identifiers starting with a lowercase letter
/// are variables, anything else names a car id or object kind directly.
struct Term {
  std::string name;
  bool is_var = false;

  friend bool operator==(const Term&, const Term&) = default;
};

inline bool is_variable_name(const std::string& s) {
  return !s.empty() && s[0] >= 'a' && s[0] <= 'z';
}

inline Term term(const std::string& s) { return {s, is_variable_name(s)}; }

struct RealTerm {
  std::optional<Rational> literal;
  std::string var;

  friend bool operator==(const RealTerm&, const RealTerm&) = default;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  Op op = Op::True;
  Term a{};  // car argument of re/cl/ru, object of om, left of varEq
  Term b{};  // right of varEq
  Cmp cmp = Cmp::Eq;
  RealTerm r{};
  std::string var{};  // bound by Exists
  // Binary connectives use both; VStack stores top in lhs, bottom in rhs.
  FormulaPtr lhs{};
  FormulaPtr rhs{};
};

namespace f {

inline FormulaPtr make(Formula x) { return std::make_shared<const Formula>(std::move(x)); }
inline FormulaPtr atom(Op op) { return make({.op = op}); }
inline FormulaPtr tt() { return atom(Op::True); }
inline FormulaPtr cs() { return atom(Op::Cs); }
inline FormulaPtr offcs() { return atom(Op::Offcs); }
inline FormulaPtr free() { return atom(Op::Free); }
inline FormulaPtr re(Term c) { return make({.op = Op::Re, .a = std::move(c)}); }
inline FormulaPtr cl(Term c) { return make({.op = Op::Cl, .a = std::move(c)}); }
inline FormulaPtr ru(Term c) { return make({.op = Op::Ru, .a = std::move(c)}); }
inline FormulaPtr om(Term o) { return make({.op = Op::Om, .a = std::move(o)}); }
inline FormulaPtr eq(Term u, Term v) { return make({.op = Op::VarEq, .a = std::move(u), .b = std::move(v)}); }
inline FormulaPtr len(Cmp c, Rational r) { return make({.op = Op::Len, .cmp = c, .r = {r, {}}}); }
inline FormulaPtr len(Cmp c, std::string var) { return make({.op = Op::Len, .cmp = c, .r = {std::nullopt, std::move(var)}}); }
inline FormulaPtr neg(FormulaPtr x) { return make({.op = Op::Not, .lhs = std::move(x)}); }
inline FormulaPtr conj(FormulaPtr x, FormulaPtr y) { return make({.op = Op::And, .lhs = std::move(x), .rhs = std::move(y)}); }
inline FormulaPtr disj(FormulaPtr x, FormulaPtr y) { return make({.op = Op::Or, .lhs = std::move(x), .rhs = std::move(y)}); }
inline FormulaPtr impl(FormulaPtr x, FormulaPtr y) { return make({.op = Op::Impl, .lhs = std::move(x), .rhs = std::move(y)}); }
inline FormulaPtr exists(std::string v, FormulaPtr body) { return make({.op = Op::Exists, .var = std::move(v), .lhs = std::move(body)}); }
inline FormulaPtr chop(FormulaPtr x, FormulaPtr y) { return make({.op = Op::HChop, .lhs = std::move(x), .rhs = std::move(y)}); }
inline FormulaPtr vstack(FormulaPtr top, FormulaPtr bottom) { return make({.op = Op::VStack, .lhs = std::move(top), .rhs = std::move(bottom)}); }
inline FormulaPtr somewhere(FormulaPtr x) { return make({.op = Op::Somewhere, .lhs = std::move(x)}); }

template <typename... Fs>
FormulaPtr chop(FormulaPtr x, FormulaPtr y, Fs... rest) {
  return chop(chop(std::move(x), std::move(y)), std::move(rest)...);
}

}  // namespace f

inline bool structurally_equal(const FormulaPtr& x, const FormulaPtr& y) {
  if (!x || !y) return !x && !y;
  if (x->op != y->op) return false;
  switch (x->op) {
    case Op::Re:
    case Op::Cl:
    case Op::Ru:
    case Op::Om: return x->a == y->a;
    case Op::VarEq: return x->a == y->a && x->b == y->b;
    case Op::Len: return x->cmp == y->cmp && x->r == y->r;
    case Op::Exists: return x->var == y->var && structurally_equal(x->lhs, y->lhs);
    default: return structurally_equal(x->lhs, y->lhs) && structurally_equal(x->rhs, y->rhs);
  }
}

inline std::string to_string(const FormulaPtr& x) {
  switch (x->op) {
    case Op::True: return "true";
    case Op::Cs: return "cs";
    case Op::Offcs: return "offcs";
    case Op::Free: return "free";
    case Op::Re: return "re(" + x->a.name + ")";
    case Op::Cl: return "cl(" + x->a.name + ")";
    case Op::Ru: return "ru(" + x->a.name + ")";
    case Op::Om: return "om(" + x->a.name + ")";
    case Op::VarEq: return x->a.name + " = " + x->b.name;
    case Op::Len:
      return std::string("len ") + to_string(x->cmp) + " " +
             (x->r.literal ? to_string(*x->r.literal) : x->r.var);
    case Op::Not: return "!" + to_string(x->lhs);
    case Op::And: return "(" + to_string(x->lhs) + " & " + to_string(x->rhs) + ")";
    case Op::Or: return "(" + to_string(x->lhs) + " | " + to_string(x->rhs) + ")";
    case Op::Impl: return "(" + to_string(x->lhs) + " -> " + to_string(x->rhs) + ")";
    case Op::Exists: return "(exists " + x->var + " . " + to_string(x->lhs) + ")";
    case Op::HChop: return "(" + to_string(x->lhs) + " ; " + to_string(x->rhs) + ")";
    case Op::VStack: return "[" + to_string(x->lhs) + " / " + to_string(x->rhs) + "]";
    case Op::Somewhere: return "somewhere(" + to_string(x->lhs) + ")";
  }
  return "?";
}

struct FreeVars {
  std::set<std::string> cars;
  std::set<std::string> objects;
  std::set<std::string> reals;

  friend bool operator==(const FreeVars&, const FreeVars&) = default;
};

namespace detail {

inline void collect_free(const FormulaPtr& x, std::set<std::string>& bound, FreeVars& out) {
  auto car = [&](const Term& t) {
    if (t.is_var && !bound.count(t.name)) out.cars.insert(t.name);
  };
  switch (x->op) {
    case Op::Re:
    case Op::Cl:
    case Op::Ru: car(x->a); return;
    case Op::Om:
      if (x->a.is_var) out.objects.insert(x->a.name);
      return;
    case Op::VarEq:
      car(x->a);
      car(x->b);
      return;
    case Op::Len:
      if (!x->r.literal) out.reals.insert(x->r.var);
      return;
    case Op::Exists: {
      bool fresh = bound.insert(x->var).second;
      collect_free(x->lhs, bound, out);
      if (fresh) bound.erase(x->var);
      return;
    }
    default:
      if (x->lhs) collect_free(x->lhs, bound, out);
      if (x->rhs) collect_free(x->rhs, bound, out);
  }
}

}  // namespace detail

inline FreeVars free_vars(const FormulaPtr& x) {
  FreeVars out;
  std::set<std::string> bound;
  detail::collect_free(x, bound, out);
  return out;
}

struct Valuation {
  std::map<std::string, CarId> cars;
  std::map<std::string, ObjectKind> objects;
  std::map<std::string, Rational> reals;
};

namespace detail {

inline FormulaPtr subst(const FormulaPtr& x, const Valuation& nu, std::set<std::string>& bound) {
  auto car = [&](const Term& t) -> Term {
    if (!t.is_var || bound.count(t.name)) return t;
    if (auto it = nu.cars.find(t.name); it != nu.cars.end()) return {it->second.str(), false};
    if (nu.objects.count(t.name) || nu.reals.count(t.name))
      throw Error(ErrorCode::SortMismatch, "'" + t.name + "' is not a car variable");
    return t;
  };
  Formula y = *x;
  switch (x->op) {
    case Op::Re:
    case Op::Cl:
    case Op::Ru: y.a = car(x->a); break;
    case Op::Om:
      if (x->a.is_var) {
        if (auto it = nu.objects.find(x->a.name); it != nu.objects.end())
          y.a = {it->second.str(), false};
        else if (nu.cars.count(x->a.name) || nu.reals.count(x->a.name))
          throw Error(ErrorCode::SortMismatch, "'" + x->a.name + "' is not an object variable");
      }
      break;
    case Op::VarEq:
      y.a = car(x->a);
      y.b = car(x->b);
      break;
    case Op::Len:
      if (!x->r.literal) {
        if (auto it = nu.reals.find(x->r.var); it != nu.reals.end())
          y.r = {it->second, {}};
        else if (nu.cars.count(x->r.var) || nu.objects.count(x->r.var))
          throw Error(ErrorCode::SortMismatch, "'" + x->r.var + "' is not a real variable");
      }
      break;
    case Op::Exists: {
      bool fresh = bound.insert(x->var).second;
      y.lhs = subst(x->lhs, nu, bound);
      if (fresh) bound.erase(x->var);
      break;
    }
    default:
      if (x->lhs) y.lhs = subst(x->lhs, nu, bound);
      if (x->rhs) y.rhs = subst(x->rhs, nu, bound);
  }
  return f::make(std::move(y));
}

}  // namespace detail

/// Replaces free variables bound by `nu` with literals; bound occurrences
/// are left alone.
inline FormulaPtr substitute(const FormulaPtr& x, const Valuation& nu) {
  std::set<std::string> bound;
  return detail::subst(x, nu, bound);
}

/// somewhere(p) becomes true ; [true / [p / true]] ; true.
inline FormulaPtr desugar(const FormulaPtr& x) {
  if (x->op == Op::Somewhere) {
    auto body = desugar(x->lhs);
    return f::chop(f::tt(), f::vstack(f::tt(), f::vstack(body, f::tt())), f::tt());
  }
  if (!x->lhs && !x->rhs) return x;
  Formula y = *x;
  if (x->lhs) y.lhs = desugar(x->lhs);
  if (x->rhs) y.rhs = desugar(x->rhs);
  return f::make(std::move(y));
}

}  // namespace trumlsl
