#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "milnor/poly_map.hpp"
#include "milnor/polynomial.hpp"

namespace milnor {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Flattened binary64 copy of a Polynomial for hot loops.
class CompiledPoly {
 public:
  CompiledPoly() = default;

  explicit CompiledPoly(const Polynomial& p) : nvars_(p.nvars()) {
    for (const auto& [e, c] : p.terms()) {
      Term t;
      t.coef = c.get_d();
      t.exps.assign(e.begin(), e.end());
      t.degree = static_cast<int>(degree_of(e));
      max_exp_ = std::max<unsigned>(max_exp_, *std::max_element(e.begin(), e.end()));
      abs_coef_sum_ += std::abs(t.coef);
      terms_.push_back(std::move(t));
    }
  }

  std::size_t nvars() const noexcept { return nvars_; }
  bool empty() const noexcept { return terms_.empty(); }

  double value(const Vec& x) const {
    fill_powers(x);
    double acc = 0.0;
    for (const auto& t : terms_) {
      double m = t.coef;
      for (std::size_t i = 0; i < nvars_; ++i) m *= pow_(i, t.exps[i]);
      acc += m;
    }
    return acc;
  }

  /// Value and gradient in one pass.
  double value_grad(const Vec& x, Eigen::Ref<Vec> grad) const {
    fill_powers(x);
    grad.setZero();
    double acc = 0.0;
    for (const auto& t : terms_) {
      double m = t.coef;
      for (std::size_t i = 0; i < nvars_; ++i) m *= pow_(i, t.exps[i]);
      acc += m;
      for (std::size_t j = 0; j < nvars_; ++j) {
        if (t.exps[j] == 0) continue;
        double d = t.coef * t.exps[j];
        for (std::size_t i = 0; i < nvars_; ++i) d *= pow_(i, i == j ? t.exps[i] - 1 : t.exps[i]);
        grad[static_cast<Eigen::Index>(j)] += d;
      }
    }
    return acc;
  }

  /// Sum of |c_a| r^|a|: the natural size of this polynomial on the sphere of radius r.
  double scale_at(double r) const {
    double s = 0.0;
    for (const auto& t : terms_) s += std::abs(t.coef) * std::pow(r, t.degree);
    return s > 0.0 ? s : 1.0;
  }

 private:
  struct Term {
    double coef = 0.0;
    std::vector<unsigned> exps;
    int degree = 0;
  };

  void fill_powers(const Vec& x) const {
    const std::size_t w = max_exp_ + 1;
    powers_.resize(nvars_ * w);
    for (std::size_t i = 0; i < nvars_; ++i) {
      powers_[i * w] = 1.0;
      for (std::size_t k = 1; k < w; ++k) powers_[i * w + k] = powers_[i * w + k - 1] * x[static_cast<Eigen::Index>(i)];
    }
  }

  double pow_(std::size_t i, unsigned k) const { return powers_[i * (max_exp_ + 1) + k]; }

  std::size_t nvars_ = 0;
  unsigned max_exp_ = 0;
  double abs_coef_sum_ = 0.0;
  std::vector<Term> terms_;
  mutable std::vector<double> powers_;
};

/// Compiled list of polynomials over one variable list; evaluates values and the Jacobian.
class CompiledSystem {
 public:
  CompiledSystem() = default;

  explicit CompiledSystem(const std::vector<Polynomial>& polys) {
    for (const auto& p : polys) polys_.emplace_back(p);
    if (!polys.empty()) nvars_ = polys.front().nvars();
  }

  explicit CompiledSystem(const PolyMap& f) : CompiledSystem(f.components()) { nvars_ = f.source_dim(); }

  std::size_t size() const noexcept { return polys_.size(); }
  std::size_t nvars() const noexcept { return nvars_; }
  const CompiledPoly& operator[](std::size_t i) const { return polys_[i]; }

  Vec values(const Vec& x) const {
    Vec v(static_cast<Eigen::Index>(polys_.size()));
    for (std::size_t i = 0; i < polys_.size(); ++i) v[static_cast<Eigen::Index>(i)] = polys_[i].value(x);
    return v;
  }

  void values_jacobian(const Vec& x, Vec& v, Mat& jac) const {
    const auto m = static_cast<Eigen::Index>(polys_.size());
    const auto n = static_cast<Eigen::Index>(nvars_);
    v.resize(m);
    jac.resize(m, n);
    Vec g(n);
    for (Eigen::Index i = 0; i < m; ++i) {
      v[i] = polys_[static_cast<std::size_t>(i)].value_grad(x, g);
      jac.row(i) = g.transpose();
    }
  }

  Mat jacobian(const Vec& x) const {
    Vec v;
    Mat j;
    values_jacobian(x, v, j);
    return j;
  }

 private:
  std::vector<CompiledPoly> polys_;
  std::size_t nvars_ = 0;
};

inline Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace milnor
