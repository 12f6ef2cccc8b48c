#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "trumlsl/formula.hpp"
#include "trumlsl/lexer.hpp"

namespace trumlsl {

/// Called for `name(args...)` when `name` is not a built-in atom. Returning
/// nullopt makes the call a syntax error.
using MacroExpander =
    std::function<std::optional<FormulaPtr>(const std::string& name, const std::vector<Term>& args)>;

namespace detail {

inline const std::set<std::string, std::less<>>& formula_keywords() {
  static const std::set<std::string, std::less<>> k{"true", "false", "cs",  "offcs", "free", "re",
                                                    "cl",   "ru",    "om",  "len",   "exists", "somewhere"};
  return k;
}

class FormulaParser {
 public:
  FormulaParser(TokenStream& ts, const MacroExpander* macros) : ts_(ts), macros_(macros) {}

  // chop := impl (';' impl)*
  FormulaPtr chop() {
    auto x = implication();
    while (ts_.accept(Tok::Semi)) x = f::chop(x, implication());
    return x;
  }

 private:
  FormulaPtr implication() {
    auto x = disjunction();
    if (ts_.accept(Tok::Arrow)) return f::impl(x, implication());
    return x;
  }

  FormulaPtr disjunction() {
    auto x = conjunction();
    while (ts_.accept(Tok::Pipe)) x = f::disj(x, conjunction());
    return x;
  }

  FormulaPtr conjunction() {
    auto x = unary();
    while (ts_.accept(Tok::Amp)) x = f::conj(x, unary());
    return x;
  }

  FormulaPtr unary() {
    if (ts_.accept(Tok::Bang)) return f::neg(unary());
    if (ts_.at_ident("exists")) {
      ts_.next();
      auto v = ts_.expect(Tok::Ident, "variable name");
      if (!is_variable_name(v.text) || formula_keywords().count(v.text))
        throw SyntaxError(v.line, v.column, "lowercase variable name");
      ts_.expect(Tok::Dot, "'.'");
      return f::exists(v.text, chop());
    }
    return primary();
  }

  Term term_arg() {
    auto t = ts_.expect(Tok::Ident, "identifier");
    return term(t.text);
  }

  FormulaPtr unary_atom(Op op) {
    ts_.next();
    ts_.expect(Tok::LParen, "'('");
    auto t = term_arg();
    ts_.expect(Tok::RParen, "')'");
    return f::make({.op = op, .a = t});
  }

  FormulaPtr primary() {
    if (ts_.accept(Tok::LParen)) {
      auto x = chop();
      ts_.expect(Tok::RParen, "')'");
      return x;
    }
    if (ts_.accept(Tok::LBracket)) {
      auto top = chop();
      ts_.expect(Tok::Slash, "'/'");
      auto bottom = chop();
      ts_.expect(Tok::RBracket, "']'");
      return f::vstack(top, bottom);
    }
    if (!ts_.at(Tok::Ident)) ts_.fail("formula");
    const std::string word = ts_.peek().text;
    if (word == "true") return ts_.next(), f::tt();
    if (word == "false") return ts_.next(), f::neg(f::tt());
    if (word == "cs") return ts_.next(), f::cs();
    if (word == "offcs") return ts_.next(), f::offcs();
    if (word == "free") return ts_.next(), f::free();
    if (word == "re") return unary_atom(Op::Re);
    if (word == "cl") return unary_atom(Op::Cl);
    if (word == "ru") return unary_atom(Op::Ru);
    if (word == "om") return unary_atom(Op::Om);
    if (word == "somewhere") {
      ts_.next();
      ts_.expect(Tok::LParen, "'('");
      auto x = chop();
      ts_.expect(Tok::RParen, "')'");
      return f::somewhere(x);
    }
    if (word == "len") {
      ts_.next();
      Cmp c;
      switch (ts_.peek().kind) {
        case Tok::Eq: c = Cmp::Eq; break;
        case Tok::Lt: c = Cmp::Lt; break;
        case Tok::Le: c = Cmp::Le; break;
        case Tok::Gt: c = Cmp::Gt; break;
        case Tok::Ge: c = Cmp::Ge; break;
        default: ts_.fail("comparison operator");
      }
      ts_.next();
      if (ts_.at(Tok::Number)) {
        auto t = ts_.next();
        auto r = try_parse_rational(t.text);
        if (!r) throw SyntaxError(t.line, t.column, "number");
        return f::len(c, *r);
      }
      auto t = ts_.expect(Tok::Ident, "number or real variable");
      return f::len(c, t.text);
    }
    if (word == "exists") ts_.fail("formula");
    auto head = ts_.next();
    if (ts_.at(Tok::LParen)) {
      ts_.next();
      std::vector<Term> args;
      if (!ts_.at(Tok::RParen)) {
        args.push_back(term_arg());
        while (ts_.accept(Tok::Comma)) args.push_back(term_arg());
      }
      ts_.expect(Tok::RParen, "')'");
      if (macros_ && *macros_)
        if (auto x = (*macros_)(head.text, args)) return *x;
      throw SyntaxError(head.line, head.column, "known predicate");
    }
    if (ts_.at(Tok::Eq) || ts_.at(Tok::Neq)) {
      bool negated = ts_.next().kind == Tok::Neq;
      auto rhs = term_arg();
      auto x = f::eq(term(head.text), rhs);
      return negated ? f::neg(x) : x;
    }
    throw SyntaxError(ts_.peek().line, ts_.peek().column, "'=' or '(' after identifier");
  }

  TokenStream& ts_;
  const MacroExpander* macros_;
};

}  // namespace detail

inline FormulaPtr parse_formula(std::string_view text, const MacroExpander& macros = {}) {
  TokenStream ts(tokenize(text));
  detail::FormulaParser p(ts, &macros);
  auto x = p.chop();
  if (!ts.at(Tok::End)) ts.fail("end of input");
  return x;
}

}  // namespace trumlsl
