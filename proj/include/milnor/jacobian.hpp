#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "milnor/poly_map.hpp"
#include "milnor/polynomial.hpp"

namespace milnor {

class PolyMatrix {
 public:
  PolyMatrix(std::size_t rows, std::size_t cols, std::vector<Polynomial> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows_ == 0 || cols_ == 0) fail(ErrorKind::DimensionMismatch, "matrix needs positive dimensions");
    if (entries_.size() != rows_ * cols_) fail(ErrorKind::DimensionMismatch, "entry count differs from rows*cols");
    for (const auto& e : entries_)
      if (e.variables() != entries_.front().variables())
        fail(ErrorKind::DimensionMismatch, "matrix entries use different variable lists");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const Polynomial& operator()(std::size_t i, std::size_t j) const { return entries_.at(i * cols_ + j); }
  const VariableList& variables() const { return entries_.front().variables(); }

  /// Append the rows of `other` below this matrix.
  PolyMatrix stacked(const PolyMatrix& other) const {
    if (other.cols_ != cols_) fail(ErrorKind::DimensionMismatch, "stacking needs equal column counts");
    std::vector<Polynomial> e = entries_;
    e.insert(e.end(), other.entries_.begin(), other.entries_.end());
    return PolyMatrix(rows_ + other.rows_, cols_, std::move(e));
  }

  /// Exact determinant of the submatrix on the given sorted rows and columns
  /// (Laplace expansion along the first row, memoized on index masks).
  Polynomial minor(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) const {
    if (rows.size() != cols.size() || rows.empty()) fail(ErrorKind::DimensionMismatch, "minor must be square");
    std::map<std::pair<unsigned, unsigned>, Polynomial> memo;
    unsigned rmask = 0, cmask = 0;
    for (auto r : rows) rmask |= 1u << r;
    for (auto c : cols) cmask |= 1u << c;
    return det_masked(rmask, cmask, memo);
  }

  /// All k x k minors, row subsets outermost, each subset in lexicographic order.
  std::vector<Polynomial> minors(std::size_t k) const {
    if (k == 0 || k > rows_ || k > cols_) fail(ErrorKind::DimensionMismatch, "minor size out of range");
    std::map<std::pair<unsigned, unsigned>, Polynomial> memo;
    std::vector<Polynomial> out;
    for (const auto& rs : subsets(rows_, k)) {
      unsigned rmask = 0;
      for (auto r : rs) rmask |= 1u << r;
      for (const auto& cs : subsets(cols_, k)) {
        unsigned cmask = 0;
        for (auto c : cs) cmask |= 1u << c;
        out.push_back(det_masked(rmask, cmask, memo));
      }
    }
    return out;
  }

 private:
  static std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur;
    auto rec = [&](auto&& self, std::size_t start) -> void {
      if (cur.size() == k) {
        out.push_back(cur);
        return;
      }
      for (std::size_t i = start; i < n; ++i) {
        cur.push_back(i);
        self(self, i + 1);
        cur.pop_back();
      }
    };
    rec(rec, 0);
    return out;
  }

  Polynomial det_masked(unsigned rmask, unsigned cmask,
                        std::map<std::pair<unsigned, unsigned>, Polynomial>& memo) const {
    auto key = std::make_pair(rmask, cmask);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const auto first_row = static_cast<std::size_t>(__builtin_ctz(rmask));
    const unsigned rest = rmask & (rmask - 1);
    Polynomial acc(variables());
    if (rest == 0) {
      acc = (*this)(first_row, static_cast<std::size_t>(__builtin_ctz(cmask)));
    } else {
      int sign = 1;
      for (std::size_t c = 0; c < cols_; ++c) {
        if (!(cmask & (1u << c))) continue;
        const Polynomial& a = (*this)(first_row, c);
        if (!a.is_zero()) {
          Polynomial sub = a * det_masked(rest, cmask & ~(1u << c), memo);
          acc = sign > 0 ? acc + sub : acc - sub;
        }
        sign = -sign;
      }
    }
    memo.emplace(key, acc);
    return acc;
  }

  std::size_t rows_, cols_;
  std::vector<Polynomial> entries_;
};

inline PolyMatrix jacobian(const PolyMap& f) {
  std::vector<Polynomial> e;
  e.reserve(f.target_dim() * f.source_dim());
  for (const auto& c : f.components())
    for (std::size_t j = 0; j < f.source_dim(); ++j) e.push_back(c.derivative(j));
  return PolyMatrix(f.target_dim(), f.source_dim(), std::move(e));
}

inline PolyMatrix gradient_row(const Polynomial& p) {
  std::vector<Polynomial> e;
  for (std::size_t j = 0; j < p.nvars(); ++j) e.push_back(p.derivative(j));
  return PolyMatrix(1, p.nvars(), std::move(e));
}

/// Generators whose common zero locus is the set of interest.
struct IdealGenerators {
  VariableList variables;
  std::vector<Polynomial> generators;

  /// True when some generator is a nonzero constant, so the locus is empty.
  bool is_empty_set() const {
    return std::any_of(generators.begin(), generators.end(),
                       [](const Polynomial& p) { return p.is_constant() && !p.is_zero(); });
  }

  /// True when there are no generators left, so the locus is everything.
  bool is_whole_space() const { return generators.empty(); }

  bool vanishes_at(std::span<const Rational> x) const {
    return std::all_of(generators.begin(), generators.end(), [&](const Polynomial& p) { return p.evaluate(x) == 0; });
  }

  std::vector<std::string> to_strings() const {
    std::vector<std::string> out;
    for (const auto& g : generators) out.push_back(g.to_string());
    return out;
  }
};

/// Scale so the grlex-leading coefficient is 1; used for dedup up to scalars.
inline Polynomial monic(const Polynomial& p) {
  if (p.is_zero()) return p;
  return Rational(1 / p.leading_coefficient()) * p;
}

/// Lowers each variable power shared by all terms to at most 1: w^6 q -> w q.
/// Same zero set, but no spurious near-roots along the factored hyperplanes.
inline Polynomial reduce_monomial_content(const Polynomial& p) {
  if (p.is_zero()) return p;
  Exponents lo = p.terms().begin()->first;
  for (const auto& [e, c] : p.terms())
    for (std::size_t i = 0; i < lo.size(); ++i) lo[i] = std::min(lo[i], e[i]);
  bool any = false;
  for (auto& v : lo) {
    v = v > 1 ? v - 1 : 0;
    any = any || v > 0;
  }
  if (!any) return p;
  Polynomial::TermMap out;
  for (const auto& [e, c] : p.terms()) {
    Exponents r = e;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= lo[i];
    out.emplace(std::move(r), c);
  }
  return Polynomial::from_terms(p.variables(), out);
}

/// Drop zeros and scalar duplicates, keep first-seen order. A nonzero constant
/// collapses the whole list to {1}.
inline IdealGenerators make_ideal(VariableList vars, const std::vector<Polynomial>& polys) {
  IdealGenerators out{std::move(vars), {}};
  std::vector<Polynomial> seen;
  for (const auto& p : polys) {
    if (p.is_zero()) continue;
    if (p.is_constant()) {
      out.generators = {Polynomial::constant(out.variables, 1)};
      return out;
    }
    Polynomial m = monic(reduce_monomial_content(p));
    if (std::find(seen.begin(), seen.end(), m) != seen.end()) continue;
    seen.push_back(m);
    out.generators.push_back(m);
  }
  return out;
}

inline IdealGenerators singular_set_ideal(const PolyMap& f) {
  const std::size_t k = std::min(f.source_dim(), f.target_dim());
  return make_ideal(f.source(), jacobian(f).minors(k));
}

/// Minimal coordinate index sets I such that every generator vanishes
/// identically on {x_i = 0 for i in I}, i.e. every monomial touches I.
inline std::vector<std::vector<std::size_t>> coordinate_pieces(const IdealGenerators& s) {
  std::vector<std::vector<std::size_t>> out;
  if (s.is_empty_set() || s.is_whole_space()) return out;
  const std::size_t n = s.variables.size();
  if (n > 20) return out;
  std::vector<unsigned> found;
  std::vector<unsigned> masks(std::size_t{1} << n);
  for (unsigned m = 1; m < (1u << n); ++m) masks[m] = m;
  std::stable_sort(masks.begin() + 1, masks.end(),
                   [](unsigned a, unsigned b) { return __builtin_popcount(a) < __builtin_popcount(b); });
  for (std::size_t k = 1; k < masks.size(); ++k) {
    const unsigned m = masks[k];
    if (std::any_of(found.begin(), found.end(), [m](unsigned f) { return (f & m) == f; })) continue;
    bool all = true;
    for (const auto& g : s.generators) {
      for (const auto& [e, c] : g.terms()) {
        bool touches = false;
        for (std::size_t i = 0; i < n && !touches; ++i) touches = (m >> i & 1u) && e[i] > 0;
        if (!touches) {
          all = false;
          break;
        }
      }
      if (!all) break;
    }
    if (all) found.push_back(m);
  }
  for (unsigned m : found) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (m >> i & 1u) idx.push_back(i);
    out.push_back(std::move(idx));
  }
  return out;
}

/// Proper function used by Milnor sets. `pullback` marks rho obtained as
/// rho1 o phi, which skips the syntactic check.
struct Rho {
  Polynomial poly;
  bool pullback = false;
};

/// Every term an even monomial with positive coefficient, and each variable
/// present as some pure even power.
inline void validate_rho(const Polynomial& rho) {
  if (rho.is_zero()) fail(ErrorKind::InvalidRho, "rho is the zero polynomial");
  if (rho.constant_term() != 0) fail(ErrorKind::InvalidRho, "rho must vanish at the origin");
  std::vector<bool> pure(rho.nvars(), false);
  for (const auto& [e, c] : rho.terms()) {
    if (c <= 0) fail(ErrorKind::InvalidRho, "rho has a non-positive coefficient");
    std::size_t nonzero = 0, idx = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] % 2 != 0) fail(ErrorKind::InvalidRho, "rho has an odd exponent in " + rho.to_string());
      if (e[i] > 0) {
        ++nonzero;
        idx = i;
      }
    }
    if (nonzero == 1) pure[idx] = true;
  }
  for (std::size_t i = 0; i < pure.size(); ++i)
    if (!pure[i])
      fail(ErrorKind::InvalidRho, "variable '" + rho.variables()[i] + "' has no pure even power in rho");
}

inline void validate_rho(const Rho& rho) {
  if (!rho.pullback) validate_rho(rho.poly);
}

inline IdealGenerators milnor_set_ideal(const PolyMap& f, const Polynomial& rho) {
  if (rho.variables() != f.source()) fail(ErrorKind::DimensionMismatch, "rho must live on the source space");
  if (rho.constant_term() != 0) fail(ErrorKind::InvalidRho, "rho must vanish at the origin");
  const PolyMatrix stack = jacobian(f).stacked(gradient_row(rho));
  const std::size_t k = std::min(f.source_dim(), f.target_dim() + 1);
  return make_ideal(f.source(), stack.minors(k));
}

inline IdealGenerators milnor_set_ideal(const PolyMap& f) { return milnor_set_ideal(f, euclidean_rho(f.source())); }

}  // namespace milnor
