#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "milnor/composite.hpp"
#include "milnor/tameness.hpp"

namespace milnor {

/// A diffeomorphism germ with a declared polynomial inverse jet.
struct DiffeoPair {
  PolyMap forward;
  PolyMap inverse_jet;
  double validation_radius = 0.1;
  double jet_tol = 1e-6;

  /// Square, invertible linear part, and |inv(fwd(x)) - x| <= jet_tol |x|^2 on samples.
  void validate(std::uint64_t seed = 1) const {
    if (forward.source_dim() != forward.target_dim())
      fail(ErrorKind::DimensionMismatch, "diffeomorphism must be square");
    if (inverse_jet.source_dim() != forward.source_dim() || inverse_jet.target_dim() != forward.source_dim())
      fail(ErrorKind::DimensionMismatch, "inverse jet dimensions differ from forward map");
    if (jacobian_det_at_origin(forward) == 0) fail(ErrorKind::PreconditionNotMet, "d forward(0) is singular");
    const std::size_t m = forward.source_dim();
    for (int k = 0; k < 64; ++k) {
      Rng rng(sub_seed(seed, 0xD1FF, static_cast<std::uint64_t>(k)));
      const double r = validation_radius * std::pow(2.0, -(k % 8));
      const Vec x = r * rng.direction(m);
      const auto y = forward.evaluate(to_std(x));
      const Vec back = to_vec(inverse_jet.evaluate(y));
      if ((back - x).norm() > jet_tol * r * r)
        fail(ErrorKind::PreconditionNotMet, "inverse jet misses the forward map by " + std::to_string((back - x).norm()) +
                                                " at radius " + std::to_string(r));
    }
  }

  bool is_linear() const {
    for (const auto* f : {&forward, &inverse_jet})
      for (const auto& c : f->components())
        if (c.total_degree() > 1) return false;
    return true;
  }
};

/// Linear isomorphism x -> A x with its exact rational inverse.
inline DiffeoPair linear_diffeo(const VariableList& vars, const std::vector<std::vector<Rational>>& a) {
  const std::size_t n = vars.size();
  if (a.size() != n) fail(ErrorKind::DimensionMismatch, "matrix must be square");
  std::vector<std::vector<Rational>> aug(n, std::vector<Rational>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) fail(ErrorKind::DimensionMismatch, "matrix must be square");
    for (std::size_t j = 0; j < n; ++j) aug[i][j] = a[i][j];
    aug[i][n + i] = 1;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && aug[p][c] == 0) ++p;
    if (p == n) fail(ErrorKind::PreconditionNotMet, "linear map is singular");
    std::swap(aug[p], aug[c]);
    const Rational piv = aug[c][c];
    for (auto& v : aug[c]) v /= piv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || aug[r][c] == 0) continue;
      const Rational fct = aug[r][c];
      for (std::size_t k = 0; k < 2 * n; ++k) aug[r][k] -= fct * aug[c][k];
    }
  }
  std::vector<std::vector<Rational>> inv(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv[i][j] = aug[i][n + j];
  return DiffeoPair{PolyMap::linear(vars, a), PolyMap::linear(vars, inv)};
}

struct LeftInvariance {
  CheckStatus status = CheckStatus::Vacuous;
  CheckResult milnor;
  CheckResult sing;
  std::string diagnostics;
};

namespace detail {

inline CheckStatus combine(CheckStatus a, CheckStatus b) {
  if (a == CheckStatus::PreconditionNotMet || b == CheckStatus::PreconditionNotMet) return CheckStatus::PreconditionNotMet;
  if (a == CheckStatus::Fails || b == CheckStatus::Fails) return CheckStatus::Fails;
  if (a == CheckStatus::Holds || b == CheckStatus::Holds) return CheckStatus::Holds;
  return CheckStatus::Vacuous;
}

}  // namespace detail

/// M(g o f) = M(f) and Sing(g o f) = Sing(f) for a target diffeomorphism g.
inline LeftInvariance check_left_invariance(const PolyMap& f, const DiffeoPair& g, const CompositeConfig& cfg = {}) {
  cfg.validate();
  LeftInvariance out;
  if (g.forward.source_dim() != f.target_dim() || g.forward.target_dim() != f.target_dim())
    fail(ErrorKind::DimensionMismatch, "left diffeomorphism must act on the target of f");
  if (jacobian_det_at_origin(g.forward) == 0) {
    out.status = out.milnor.status = out.sing.status = CheckStatus::PreconditionNotMet;
    out.diagnostics = "dG(0) is singular";
    return out;
  }
  const PolyMap h = compose(g.forward, f);
  if (h == f) {
    out.milnor = {"left_milnor", CheckStatus::Holds, std::nullopt, cfg.radii, 0, "syntactic equality"};
    out.sing = {"left_sing", CheckStatus::Holds, std::nullopt, cfg.radii, 0, "syntactic equality"};
    out.status = CheckStatus::Holds;
    return out;
  }
  out.milnor = detail::bidirectional("left_milnor", detail::milnor_set(h), detail::milnor_set(f), cfg, 0x7100);
  out.sing = detail::bidirectional("left_sing", detail::sing_set(h), detail::sing_set(f), cfg, 0x7200);
  out.status = detail::combine(out.milnor.status, out.sing.status);
  return out;
}

/// rho o forward, flagged as a pullback and checked positive on sampled punctured balls.
inline Rho pullback_rho(const DiffeoPair& d, const Polynomial& rho, std::uint64_t seed = 1) {
  if (rho.variables().size() != d.forward.target_dim())
    fail(ErrorKind::DimensionMismatch, "rho must live on the target of the diffeomorphism");
  const Polynomial p = rho.substitute(d.forward.components());
  for (int k = 0; k < 64; ++k) {
    Rng rng(sub_seed(seed, 0x9B0, static_cast<std::uint64_t>(k)));
    const double r = d.validation_radius * std::pow(2.0, -(k % 8));
    const Vec x = r * rng.direction(d.forward.source_dim());
    const auto xs = to_std(x);
    if (!(p.evaluate(std::span<const double>(xs)) > 0))
      fail(ErrorKind::InvalidRho, "pullback rho is not positive near the origin");
  }
  return Rho{p, true};
}

struct RightTransfer {
  CheckResult identity;  // M_{rho2}(g2) = forward^{-1}(M_{rho1}(g1))
  PolyMap g2;
  Rho rho2;
  std::optional<TamenessVerdict> tame_g1, tame_g2;
  bool statuses_agree = true;
};

/// Milnor-set transfer for g2 = g1 o forward with the pullback rho.
inline RightTransfer check_right_transfer(const PolyMap& g1, const DiffeoPair& d, const Polynomial& rho1,
                                          const CompositeConfig& cfg = {}, const TameConfig* tame = nullptr) {
  cfg.validate();
  if (d.forward.target_dim() != g1.source_dim()) fail(ErrorKind::DimensionMismatch, "diffeomorphism target differs from g1 source");
  if (jacobian_det_at_origin(d.forward) == 0) fail(ErrorKind::PreconditionNotMet, "d forward(0) is singular");
  const Rho rho2 = pullback_rho(d, rho1, cfg.seed);
  RightTransfer out{{}, compose(g1, d.forward), rho2, std::nullopt, std::nullopt, true};
  const auto m2 = ConstructibleSet::from_ideal(milnor_set_ideal(out.g2, rho2.poly));
  const auto m1 = ConstructibleSet::from_ideal(milnor_set_ideal(g1, rho1)).preimage(d.forward);
  out.identity = detail::bidirectional("right_transfer", m2, m1, cfg, 0x7300);
  if (tame) {
    out.tame_g1 = check_tame(g1, Rho{rho1, false}, *tame);
    out.tame_g2 = check_tame(out.g2, rho2, *tame);
    const auto a = out.tame_g1->status, b = out.tame_g2->status;
    out.statuses_agree = a == TameStatus::Inconclusive || b == TameStatus::Inconclusive || a == b;
  }
  return out;
}

/// Exact memberships (x in M_{rho2}(g2), forward(x) in M_{rho1}(g1)); equal for a valid transfer.
inline std::pair<bool, bool> transfer_membership(const PolyMap& g1, const DiffeoPair& d, const Polynomial& rho1,
                                                 std::span<const Rational> x) {
  const PolyMap g2 = compose(g1, d.forward);
  const Polynomial rho2 = rho1.substitute(d.forward.components());
  const auto m2 = ConstructibleSet::from_ideal(milnor_set_ideal(g2, rho2));
  const auto m1 = ConstructibleSet::from_ideal(milnor_set_ideal(g1, rho1));
  const auto y = d.forward.evaluate(x);
  return {member_exact(m2, x), member_exact(m1, y)};
}

}  // namespace milnor
