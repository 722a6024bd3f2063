#pragma once

#include <string>
#include <vector>

#include "milnor/parse.hpp"
#include "milnor/polynomial.hpp"

namespace milnor {

/// A polynomial map germ F:(R^M,0) -> (R^N,0): N components over M shared
/// source variables, each with zero constant term.
class PolyMap {
 public:
  PolyMap() = default;

  PolyMap(VariableList source, std::vector<Polynomial> components)
      : source_(std::move(source)), components_(std::move(components)) {
    if (source_.empty()) fail(ErrorKind::DimensionMismatch, "a map germ needs at least one source variable");
    if (components_.empty()) fail(ErrorKind::DimensionMismatch, "a map germ needs at least one component");
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if (components_[i].variables() != source_)
        fail(ErrorKind::DimensionMismatch, "component " + std::to_string(i) + " uses a different variable list");
      if (components_[i].constant_term() != 0)
        fail(ErrorKind::InvalidInput,
             "component " + std::to_string(i) + " has a nonzero constant term; germs must map 0 to 0");
    }
  }

  static PolyMap parse(const VariableList& source, const std::vector<std::string>& texts) {
    std::vector<Polynomial> comps;
    comps.reserve(texts.size());
    for (const auto& t : texts) comps.push_back(parse_polynomial(t, source));
    return PolyMap(source, std::move(comps));
  }

  static PolyMap identity(const VariableList& vars) {
    std::vector<Polynomial> comps;
    for (const auto& v : vars) comps.push_back(Polynomial::variable(vars, v));
    return PolyMap(vars, std::move(comps));
  }

  /// Linear map x -> A x with rational matrix A (rows = components).
  static PolyMap linear(const VariableList& vars, const std::vector<std::vector<Rational>>& matrix) {
    std::vector<Polynomial> comps;
    for (const auto& row : matrix) {
      if (row.size() != vars.size()) fail(ErrorKind::DimensionMismatch, "linear map row length mismatch");
      Polynomial p(vars);
      for (std::size_t j = 0; j < vars.size(); ++j)
        p = p + row[j] * Polynomial::variable(vars, vars[j]);
      comps.push_back(std::move(p));
    }
    return PolyMap(vars, std::move(comps));
  }

  std::size_t source_dim() const noexcept { return source_.size(); }
  std::size_t target_dim() const noexcept { return components_.size(); }
  const VariableList& source() const noexcept { return source_; }
  const std::vector<Polynomial>& components() const noexcept { return components_; }
  const Polynomial& operator[](std::size_t i) const { return components_.at(i); }

  /// Always true for a constructed map; kept so reports can echo the check.
  bool origin_check() const noexcept { return true; }

  std::vector<double> evaluate(std::span<const double> x) const {
    std::vector<double> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c.evaluate(x));
    return out;
  }

  std::vector<Rational> evaluate(std::span<const Rational> x) const {
    std::vector<Rational> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c.evaluate(x));
    return out;
  }

  /// Pull a polynomial over this map's target variables back to the source.
  Polynomial pullback(const Polynomial& p) const {
    if (p.nvars() != components_.size())
      fail(ErrorKind::DimensionMismatch, "pullback needs a polynomial over the target space");
    return p.substitute(components_);
  }

  std::vector<std::string> to_strings() const {
    std::vector<std::string> out;
    for (const auto& c : components_) out.push_back(c.to_string());
    return out;
  }

  friend bool operator==(const PolyMap& a, const PolyMap& b) {
    return a.source_ == b.source_ && a.components_ == b.components_;
  }

 private:
  VariableList source_;
  std::vector<Polynomial> components_;
};

/// g o f by exact substitution.
inline PolyMap compose(const PolyMap& g, const PolyMap& f) {
  if (f.target_dim() != g.source_dim())
    fail(ErrorKind::DimensionMismatch, "compose: f.target_dim must equal g.source_dim");
  std::vector<Polynomial> comps;
  comps.reserve(g.target_dim());
  for (const auto& gi : g.components()) comps.push_back(gi.substitute(f.components()));
  return PolyMap(f.source(), std::move(comps));
}

}  // namespace milnor
