#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "milnor/error.hpp"

namespace milnor {

using Rational = mpq_class;
using Exponents = std::vector<std::uint32_t>;
using VariableList = std::vector<std::string>;

inline std::uint32_t degree_of(const Exponents& e) {
  return std::accumulate(e.begin(), e.end(), std::uint32_t{0});
}

/// Graded lexicographic order, largest first: higher total degree wins, ties
/// are broken lexicographically with the first variable most significant.
struct GrlexGreater {
  bool operator()(const Exponents& a, const Exponents& b) const {
    const auto da = degree_of(a);
    const auto db = degree_of(b);
    if (da != db) return da > db;
    return a > b;
  }
};

inline std::string rational_to_string(const Rational& q) { return q.get_str(); }

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// The term map never stores a zero coefficient, so two polynomials over the
/// same variable list are equal iff their term maps are equal. Values are
/// immutable once built; every operation returns a new polynomial.
class Polynomial {
 public:
  using TermMap = std::map<Exponents, Rational, GrlexGreater>;

  Polynomial() = default;
  explicit Polynomial(VariableList vars) : vars_(std::move(vars)) {}

  static Polynomial constant(VariableList vars, const Rational& c) {
    Polynomial p(std::move(vars));
    if (c != 0) p.terms_.emplace(Exponents(p.vars_.size(), 0), c);
    return p;
  }

  static Polynomial variable(VariableList vars, std::string_view name) {
    Polynomial p(std::move(vars));
    Exponents e(p.vars_.size(), 0);
    e[p.index_of(name)] = 1;
    p.terms_.emplace(std::move(e), Rational(1));
    return p;
  }

  static Polynomial monomial(VariableList vars, Exponents e, const Rational& c) {
    Polynomial p(std::move(vars));
    if (e.size() != p.vars_.size())
      fail(ErrorKind::DimensionMismatch, "exponent vector length differs from variable count");
    if (c != 0) p.terms_.emplace(std::move(e), c);
    return p;
  }

  static Polynomial from_terms(VariableList vars, const TermMap& terms) {
    Polynomial p(std::move(vars));
    for (const auto& [e, c] : terms) {
      if (e.size() != p.vars_.size())
        fail(ErrorKind::DimensionMismatch, "exponent vector length differs from variable count");
      if (c != 0) p.terms_.emplace(e, c);
    }
    return p;
  }

  const VariableList& variables() const noexcept { return vars_; }
  std::size_t nvars() const noexcept { return vars_.size(); }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t term_count() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && degree_of(terms_.begin()->first) == 0);
  }

  Rational constant_term() const {
    auto it = terms_.find(Exponents(vars_.size(), 0));
    return it == terms_.end() ? Rational(0) : it->second;
  }

  /// Total degree; -1 for the zero polynomial.
  int total_degree() const {
    return terms_.empty() ? -1 : static_cast<int>(degree_of(terms_.begin()->first));
  }

  /// Smallest total degree among the terms; -1 for the zero polynomial.
  int order() const {
    if (terms_.empty()) return -1;
    std::uint32_t best = degree_of(terms_.begin()->first);
    for (const auto& [e, c] : terms_) best = std::min(best, degree_of(e));
    return static_cast<int>(best);
  }

  /// Leading coefficient in grlex order (zero for the zero polynomial).
  Rational leading_coefficient() const {
    return terms_.empty() ? Rational(0) : terms_.begin()->second;
  }

  std::size_t index_of(std::string_view name) const {
    auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it == vars_.end())
      fail(ErrorKind::UnknownVariable, "unknown variable '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - vars_.begin());
  }

  Polynomial operator-() const {
    Polynomial r(vars_);
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
    return r;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    check_same_space(a, b);
    Polynomial r = a;
    for (const auto& [e, c] : b.terms_) r.add_term(e, c);
    return r;
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    check_same_space(a, b);
    Polynomial r = a;
    for (const auto& [e, c] : b.terms_) r.add_term(e, -c);
    return r;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    check_same_space(a, b);
    Polynomial r(a.vars_);
    Exponents e(a.vars_.size());
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
        r.add_term(e, ca * cb);
      }
    }
    return r;
  }

  friend Polynomial operator*(const Rational& s, const Polynomial& p) {
    Polynomial r(p.vars_);
    if (s == 0) return r;
    for (const auto& [e, c] : p.terms_) r.terms_.emplace(e, s * c);
    return r;
  }

  Polynomial pow(unsigned n) const {
    Polynomial result = constant(vars_, 1);
    Polynomial base = *this;
    while (n > 0) {
      if (n & 1u) result = result * base;
      n >>= 1u;
      if (n > 0) base = base * base;
    }
    return result;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.vars_ == b.vars_ && a.terms_ == b.terms_;
  }

  Polynomial derivative(std::size_t index) const {
    if (index >= vars_.size())
      fail(ErrorKind::UnknownVariable, "variable index out of range");
    Polynomial r(vars_);
    for (const auto& [e, c] : terms_) {
      if (e[index] == 0) continue;
      Exponents d = e;
      d[index] -= 1;
      r.terms_.emplace(std::move(d), c * e[index]);
    }
    return r;
  }

  Polynomial derivative(std::string_view name) const { return derivative(index_of(name)); }

  Rational evaluate(std::span<const Rational> point) const {
    return evaluate_impl<Rational>(point);
  }

  double evaluate(std::span<const double> point) const {
    const double v = evaluate_impl<double>(point);
    if (!std::isfinite(v)) fail(ErrorKind::NonFinite, "floating evaluation overflowed");
    return v;
  }

  /// Substitute `images[i]` for variable i. All images share one variable list,
  /// which becomes the variable list of the result.
  Polynomial substitute(std::span<const Polynomial> images) const {
    if (images.size() != vars_.size())
      fail(ErrorKind::DimensionMismatch, "substitution needs one image per variable");
    if (images.empty()) return constant({}, constant_term());
    const VariableList& out_vars = images.front().variables();
    for (const auto& img : images)
      if (img.variables() != out_vars)
        fail(ErrorKind::DimensionMismatch, "substitution images use different variable lists");

    std::vector<std::vector<Polynomial>> powers(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) powers[i].push_back(constant(out_vars, 1));
    auto power = [&](std::size_t i, std::uint32_t k) -> const Polynomial& {
      auto& cache = powers[i];
      while (cache.size() <= k) cache.push_back(cache.back() * images[i]);
      return cache[k];
    };

    Polynomial result(out_vars);
    for (const auto& [e, c] : terms_) {
      Polynomial term = constant(out_vars, c);
      for (std::size_t i = 0; i < e.size(); ++i)
        if (e[i] > 0) term = term * power(i, e[i]);
      result = result + term;
    }
    return result;
  }

  /// Same terms over a relabelled variable list of equal length.
  Polynomial with_variables(VariableList vars) const {
    if (vars.size() != vars_.size())
      fail(ErrorKind::DimensionMismatch, "relabelling must keep the variable count");
    Polynomial r(std::move(vars));
    r.terms_ = terms_;
    return r;
  }

  /// Printed form uses the parser grammar, grlex-descending term order.
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [e, c] : terms_) {
      const bool negative = c < 0;
      const Rational mag = negative ? Rational(-c) : c;
      if (negative)
        out += "-";
      else if (!first)
        out += "+";
      first = false;

      std::string mono;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (!mono.empty()) mono += "*";
        mono += vars_[i];
        if (e[i] > 1) mono += "^" + std::to_string(e[i]);
      }
      if (mono.empty())
        out += rational_to_string(mag);
      else if (mag == 1)
        out += mono;
      else
        out += rational_to_string(mag) + "*" + mono;
    }
    return out;
  }

 private:
  static void check_same_space(const Polynomial& a, const Polynomial& b) {
    if (a.vars_ != b.vars_)
      fail(ErrorKind::DimensionMismatch, "polynomials live over different variable lists");
  }

  void add_term(const Exponents& e, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  template <typename T>
  T evaluate_impl(std::span<const T> point) const {
    if (point.size() != vars_.size())
      fail(ErrorKind::DimensionMismatch, "point dimension differs from variable count");
    std::vector<std::vector<T>> powers(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) powers[i].push_back(T(1));
    T acc(0);
    for (const auto& [e, c] : terms_) {
      T term = to_value<T>(c);
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        auto& cache = powers[i];
        while (cache.size() <= e[i]) cache.push_back(cache.back() * point[i]);
        term *= cache[e[i]];
      }
      acc += term;
    }
    return acc;
  }

  template <typename T>
  static T to_value(const Rational& c) {
    if constexpr (std::is_same_v<T, double>)
      return c.get_d();
    else
      return c;
  }

  VariableList vars_;
  TermMap terms_;
};

inline Polynomial differentiate(const Polynomial& p, std::string_view var) {
  return p.derivative(var);
}

inline Rational evaluate_exact(const Polynomial& p, std::span<const Rational> point) {
  return p.evaluate(point);
}

inline double evaluate_float(const Polynomial& p, std::span<const double> point) {
  return p.evaluate(point);
}

/// Sum of squares of the variables, the Euclidean distance-squared function.
inline Polynomial euclidean_rho(const VariableList& vars) {
  Polynomial r(vars);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    Exponents e(vars.size(), 0);
    e[i] = 2;
    r = r + Polynomial::monomial(vars, e, 1);
  }
  return r;
}

}  // namespace milnor
