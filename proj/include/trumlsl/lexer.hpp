#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "trumlsl/error.hpp"

namespace trumlsl {

enum class Tok {
  Ident,
  Number,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Slash,
  Semi,
  Bang,
  Amp,
  Pipe,
  Arrow,
  Dot,
  Comma,
  Eq,
  Neq,
  Lt,
  Le,
  Gt,
  Ge,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

/// Shared by the spatial and temporal parsers.
inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  auto digit = [&](std::size_t k) { return k < src.size() && std::isdigit(static_cast<unsigned char>(src[k])); };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token t{Tok::End, {}, line, col};
    std::size_t start = i, n = 1;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (start + n < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[start + n])) || src[start + n] == '_'))
        ++n;
      t.kind = Tok::Ident;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '-' && digit(i + 1))) {
      std::size_t k = i + 1;
      while (digit(k)) ++k;
      if (k < src.size() && src[k] == '.' && digit(k + 1)) {
        ++k;
        while (digit(k)) ++k;
      }
      if (k < src.size() && (src[k] == 'e' || src[k] == 'E') &&
          (digit(k + 1) || ((k + 1 < src.size()) && (src[k + 1] == '-' || src[k + 1] == '+') && digit(k + 2)))) {
        k += 2;
        while (digit(k)) ++k;
      }
      // p/q only when the slash sits directly between digits.
      if (k < src.size() && src[k] == '/' && digit(k + 1) && digit(k - 1)) {
        ++k;
        while (digit(k)) ++k;
      }
      n = k - i;
      t.kind = Tok::Number;
    } else {
      auto two = src.substr(i, 2);
      if (two == "->") t.kind = Tok::Arrow, n = 2;
      else if (two == "!=") t.kind = Tok::Neq, n = 2;
      else if (two == "<=") t.kind = Tok::Le, n = 2;
      else if (two == ">=") t.kind = Tok::Ge, n = 2;
      else {
        switch (c) {
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case '[': t.kind = Tok::LBracket; break;
          case ']': t.kind = Tok::RBracket; break;
          case '/': t.kind = Tok::Slash; break;
          case ';': t.kind = Tok::Semi; break;
          case '!': t.kind = Tok::Bang; break;
          case '&': t.kind = Tok::Amp; break;
          case '|': t.kind = Tok::Pipe; break;
          case '.': t.kind = Tok::Dot; break;
          case ',': t.kind = Tok::Comma; break;
          case '=': t.kind = Tok::Eq; break;
          case '<': t.kind = Tok::Lt; break;
          case '>': t.kind = Tok::Gt; break;
          default: throw SyntaxError(line, col, "a token, found '" + std::string(1, c) + "'");
        }
      }
    }
    t.text = std::string(src.substr(start, n));
    out.push_back(std::move(t));
    advance(n);
  }
  out.push_back({Tok::End, {}, line, col});
  return out;
}

/// Cursor over a token list with positioned failures.
class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_ident(std::string_view s) const { return at(Tok::Ident) && peek().text == s; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (!at(k)) return false;
    next();
    return true;
  }
  Token expect(Tok k, const std::string& what) {
    if (!at(k)) fail(what);
    return next();
  }
  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    throw SyntaxError(t.line, t.column, what);
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace trumlsl
