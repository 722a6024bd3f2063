#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "milnor/polynomial.hpp"

namespace milnor {

namespace detail {

// Recursive descent over
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' ['-'] integer)?
//   primary := integer | identifier | '(' expr ')'
// Division is only allowed by a nonzero constant, so "x/3" and "1/3*x" work.
class PolynomialParser {
 public:
  PolynomialParser(std::string_view text, const VariableList& vars) : text_(text), vars_(vars) {}

  Polynomial parse() {
    skip_space();
    if (at_end()) syntax_error("empty expression");
    Polynomial p = expr();
    skip_space();
    if (!at_end()) syntax_error(std::string("unexpected '") + text_[pos_] + "'");
    return p;
  }

 private:
  Polynomial expr() {
    Polynomial acc = term();
    for (;;) {
      skip_space();
      if (accept('+'))
        acc = acc + term();
      else if (accept('-'))
        acc = acc - term();
      else
        return acc;
    }
  }

  Polynomial term() {
    Polynomial acc = unary();
    for (;;) {
      skip_space();
      if (accept('*')) {
        acc = acc * unary();
      } else if (peek() == '/') {
        const std::size_t at = pos_;
        ++pos_;
        Polynomial divisor = unary();
        if (!divisor.is_constant() || divisor.is_zero())
          throw Error(ErrorKind::SyntaxError, "division by a non-constant or zero expression at position " +
                                                  std::to_string(at),
                      at);
        acc = Rational(1 / divisor.constant_term()) * acc;
      } else {
        return acc;
      }
    }
  }

  Polynomial unary() {
    skip_space();
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Polynomial power() {
    Polynomial base = primary();
    skip_space();
    if (!accept('^')) return base;
    skip_space();
    const std::size_t at = pos_;
    if (accept('-')) {
      skip_space();
      if (std::isdigit(static_cast<unsigned char>(peek())))
        throw Error(ErrorKind::NegativeExponent, "negative exponent at position " + std::to_string(at), at);
      syntax_error("expected exponent");
    }
    if (accept('(')) {
      // Allow "x^(3)" but still reject negative exponents written as "x^(-2)".
      skip_space();
      const std::size_t inner = pos_;
      if (accept('-'))
        throw Error(ErrorKind::NegativeExponent, "negative exponent at position " + std::to_string(inner), inner);
      const unsigned long n = integer_literal_value();
      skip_space();
      if (!accept(')')) syntax_error("expected ')'");
      return base.pow(static_cast<unsigned>(n));
    }
    return base.pow(static_cast<unsigned>(integer_literal_value()));
  }

  Polynomial primary() {
    skip_space();
    const char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      return Polynomial::constant(vars_, Rational(std::string(text_.substr(start, pos_ - start))));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
      const std::string name(text_.substr(start, pos_ - start));
      if (std::find(vars_.begin(), vars_.end(), name) == vars_.end())
        throw Error(ErrorKind::UnknownVariable, "unknown variable '" + name + "'", start);
      return Polynomial::variable(vars_, name);
    }
    if (accept('(')) {
      Polynomial inner = expr();
      skip_space();
      if (!accept(')')) syntax_error("expected ')'");
      return inner;
    }
    if (at_end()) syntax_error("unexpected end of input");
    syntax_error(std::string("unexpected '") + c + "'");
  }

  unsigned long integer_literal_value() {
    skip_space();
    const std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (pos_ == start) syntax_error("expected non-negative integer exponent");
    const std::string digits(text_.substr(start, pos_ - start));
    if (digits.size() > 6) syntax_error("exponent too large");
    return std::stoul(digits);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void syntax_error(const std::string& what) const {
    throw Error(ErrorKind::SyntaxError, what + " at position " + std::to_string(pos_), pos_);
  }

  std::string_view text_;
  const VariableList& vars_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parse `text` into a canonical polynomial over `variables`. Explicit `*` is
/// required between factors; whitespace is ignored.
inline Polynomial parse_polynomial(std::string_view text, const VariableList& variables) {
  return detail::PolynomialParser(text, variables).parse();
}

}  // namespace milnor
