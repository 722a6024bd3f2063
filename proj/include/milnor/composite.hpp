#pragma once

#include <Eigen/SVD>

#include <optional>
#include <string>
#include <vector>

#include "milnor/jacobian.hpp"
#include "milnor/semialg.hpp"

namespace milnor {

struct CompositeConfig {
  std::vector<double> radii{0.2, 0.1, 0.05, 0.025};
  std::size_t samples = 24;
  double member_tol = 1e-8;
  double image_tol = 1e-6;
  int order_floor = 1;
  std::uint64_t seed = 1;
  SamplerConfig sampler{};

  void validate() const {
    sampler.validate();
    if (radii.empty()) fail(ErrorKind::InvalidInput, "radius ladder is empty");
    for (double r : radii)
      if (!(r > 0)) fail(ErrorKind::InvalidInput, "radii must be positive");
    if (!(member_tol > 0) || !(image_tol > 0)) fail(ErrorKind::InvalidTolerance, "composite tolerances must be positive");
  }
};

enum class CheckStatus { Holds, Fails, Vacuous, PreconditionNotMet };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Holds: return "Holds";
    case CheckStatus::Fails: return "Fails";
    case CheckStatus::Vacuous: return "Vacuous";
    case CheckStatus::PreconditionNotMet: return "PreconditionNotMet";
  }
  return "Vacuous";
}

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Vacuous;
  std::optional<std::vector<double>> witness;
  std::vector<double> radii;
  std::size_t samples = 0;
  std::string diagnostics;
};

enum class DiscStatus { OriginOnly, NontrivialValue, Inconclusive };

inline const char* to_string(DiscStatus s) {
  switch (s) {
    case DiscStatus::OriginOnly: return "OriginOnly";
    case DiscStatus::NontrivialValue: return "NontrivialValue";
    case DiscStatus::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

struct DiscEvidence {
  DiscStatus status = DiscStatus::Inconclusive;
  std::optional<std::vector<double>> witness;
  bool exact = false;    // decided by substitution on linear pieces of Sing
  bool vacuous = false;  // Sing has no points off the origin near 0, so Disc is empty or {0}
  std::size_t samples = 0;
  std::string diagnostics;
};

namespace detail {

/// Samples of a set over the radius ladder, one stream per radius.
inline std::vector<std::vector<double>> ladder_samples(const ConstructibleSet& s, const CompositeConfig& cfg,
                                                       std::uint64_t stream) {
  std::vector<std::vector<double>> out;
  if (s.pieces().empty()) return out;
  const auto lin = linearized(s, cfg.seed, cfg.sampler);
  for (std::size_t i = 0; i < cfg.radii.size(); ++i) {
    auto c = try_sample_on_sphere(lin, cfg.radii[i], cfg.samples, sub_seed(cfg.seed, stream, i), cfg.sampler);
    out.insert(out.end(), c.points.begin(), c.points.end());
  }
  return out;
}

inline std::vector<std::vector<double>> ladder_difference(const ConstructibleSet& a, const ConstructibleSet& b,
                                                          const CompositeConfig& cfg, std::uint64_t stream) {
  std::vector<std::vector<double>> out;
  if (a.pieces().empty()) return out;
  const auto lin = linearized(a, cfg.seed, cfg.sampler);
  for (std::size_t i = 0; i < cfg.radii.size(); ++i) {
    auto c = try_set_difference_samples(lin, b, cfg.radii[i], cfg.samples, sub_seed(cfg.seed, stream, i), cfg.sampler);
    out.insert(out.end(), c.points.begin(), c.points.end());
  }
  return out;
}

inline bool within(const ConstructibleSet& s, const std::vector<double>& x, double reach, const SamplerConfig& cfg) {
  if (s.pieces().empty()) return false;
  try {
    return nearest_distance(s, x, cfg) <= reach;
  } catch (const Error&) {
    return false;
  }
}

/// Relative rank test on a polynomial matrix: sigma_min <= tol * sigma_max.
inline bool rank_deficient(const PolyMatrix& m, const std::vector<double>& x, double tol) {
  Eigen::MatrixXd a(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) a(i, j) = m(i, j).evaluate(std::span<const double>(x));
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
  return sv(0) == 0.0 || sv(sv.size() - 1) <= tol * sv(0);
}

inline PolyMatrix milnor_matrix(const PolyMap& f) { return jacobian(f).stacked(gradient_row(euclidean_rho(f.source()))); }

inline ConstructibleSet sing_set(const PolyMap& f) { return ConstructibleSet::from_ideal(singular_set_ideal(f)); }
inline ConstructibleSet milnor_set(const PolyMap& f) { return ConstructibleSet::from_ideal(milnor_set_ideal(f)); }
inline ConstructibleSet zero_set(const PolyMap& f) { return ConstructibleSet(f.source(), {BasicPiece{f.components(), {}}}); }

inline std::vector<double> image(const PolyMap& f, const std::vector<double>& x) { return f.evaluate(x); }

inline bool origin_in(const IdealGenerators& ideal) {
  std::vector<Rational> zero(ideal.variables.size(), Rational(0));
  return !ideal.is_empty_set() && ideal.vanishes_at(zero);
}

/// Samples of a must lie in b and samples of b in a.
inline CheckResult bidirectional(std::string name, const ConstructibleSet& a, const ConstructibleSet& b,
                                 const CompositeConfig& cfg, std::uint64_t stream) {
  CheckResult r;
  r.name = std::move(name);
  r.radii = cfg.radii;
  const auto sa = ladder_samples(a, cfg, stream);
  const auto sb = ladder_samples(b, cfg, stream + 1);
  r.samples = sa.size() + sb.size();
  if (sa.empty() && sb.empty()) {
    r.status = CheckStatus::Vacuous;
    r.diagnostics = "both sides empty at every radius";
    return r;
  }
  for (const auto& x : sa)
    if (!member_float(b, x, cfg.member_tol)) {
      r.status = CheckStatus::Fails;
      r.witness = x;
      r.diagnostics = "left sample not in right set";
      return r;
    }
  for (const auto& x : sb)
    if (!member_float(a, x, cfg.member_tol)) {
      r.status = CheckStatus::Fails;
      r.witness = x;
      r.diagnostics = "right sample not in left set";
      return r;
    }
  r.status = CheckStatus::Holds;
  return r;
}

inline void require_composable(const PolyMap& f, const PolyMap& g) {
  if (f.target_dim() != g.source_dim()) fail(ErrorKind::DimensionMismatch, "F target dimension differs from G source dimension");
}

}  // namespace detail

/// Disc f = {0} evidence: exact on linear pieces of Sing f, sampled otherwise.
inline DiscEvidence disc_evidence(const PolyMap& f, const CompositeConfig& cfg = {}) {
  cfg.validate();
  DiscEvidence ev;
  const auto sing = singular_set_ideal(f);
  if (sing.is_empty_set()) {
    ev.status = DiscStatus::OriginOnly;
    ev.exact = true;
    ev.vacuous = true;
    ev.diagnostics = "Sing is empty";
    return ev;
  }
  const auto zero = detail::zero_set(f);
  const auto cover = sing.is_whole_space() ? std::vector<std::vector<std::size_t>>{}
                                           : coordinate_cover(sing, cfg.seed, cfg.sampler);
  if (!cover.empty()) {
    bool all_vanish = true;
    for (const auto& I : cover) {
      std::vector<Polynomial> images;
      for (std::size_t j = 0; j < f.source_dim(); ++j)
        images.push_back(std::find(I.begin(), I.end(), j) != I.end()
                             ? Polynomial(f.source())
                             : Polynomial::variable(f.source(), f.source()[j]));
      bool piece_vanishes = true;
      for (const auto& c : f.components())
        if (!c.substitute(images).is_zero()) piece_vanishes = false;
      if (piece_vanishes) continue;
      all_vanish = false;
      BasicPiece b;
      for (auto i : I) b.equations.push_back(Polynomial::variable(f.source(), f.source()[i]));
      const ConstructibleSet lin(f.source(), {b});
      for (std::size_t k = 0; k < cfg.radii.size() && !ev.witness; ++k) {
        auto c = try_sample_on_sphere(lin, cfg.radii[k], cfg.samples, sub_seed(cfg.seed, 0xD15C, k), cfg.sampler);
        for (const auto& x : c.points) {
          if (to_vec(f.evaluate(x)).norm() > cfg.image_tol && !member_float(zero, x, cfg.member_tol)) {
            ev.witness = x;
            break;
          }
        }
      }
      if (ev.witness) break;
    }
    ev.exact = true;
    if (all_vanish) {
      ev.status = DiscStatus::OriginOnly;
      ev.diagnostics = "every component vanishes on each linear piece of Sing";
      return ev;
    }
    if (ev.witness) {
      ev.status = DiscStatus::NontrivialValue;
      ev.diagnostics = "a component is nonzero on a linear piece of Sing";
      return ev;
    }
    ev.exact = false;
  }
  const auto set = ConstructibleSet::from_ideal(sing);
  std::size_t radii_hit = 0;
  for (std::size_t k = 0; k < cfg.radii.size(); ++k) {
    auto c = try_sample_on_sphere(set, cfg.radii[k], cfg.samples, sub_seed(cfg.seed, 0xD15D, k), cfg.sampler);
    if (!c.empty()) ++radii_hit;
    ev.samples += c.size();
    for (const auto& x : c.points) {
      const double fx = to_vec(f.evaluate(x)).norm();
      const double bound = cfg.image_tol * std::pow(to_vec(x).norm(), cfg.order_floor);
      if (fx > bound && fx > cfg.image_tol && !member_float(zero, x, cfg.member_tol)) {
        ev.status = DiscStatus::NontrivialValue;
        ev.witness = x;
        ev.diagnostics = "Sing sample with nonzero image";
        return ev;
      }
    }
  }
  if (radii_hit == 0) {
    ev.status = DiscStatus::OriginOnly;
    ev.vacuous = true;
    ev.diagnostics = detail::origin_in(sing) ? "Sing meets the sampled spheres nowhere; Sing is {0} near the origin"
                                             : "Sing does not meet the sampled spheres nor the origin";
    return ev;
  }
  if (2 * radii_hit < cfg.radii.size()) {
    ev.status = DiscStatus::Inconclusive;
    ev.diagnostics = "Sing samples found on too few radii";
    return ev;
  }
  ev.status = DiscStatus::OriginOnly;
  ev.diagnostics = "sampling evidence only";
  return ev;
}

/// Sing H in Sing F union F^{-1}(Sing G).
inline CheckResult check_sing_inclusion(const PolyMap& f, const PolyMap& g, const CompositeConfig& cfg = {}) {
  cfg.validate();
  detail::require_composable(f, g);
  const PolyMap h = compose(g, f);
  CheckResult r;
  r.name = "sing_inclusion";
  r.radii = cfg.radii;
  const auto sing_f = detail::sing_set(f), sing_g = detail::sing_set(g);
  const auto pts = detail::ladder_samples(detail::sing_set(h), cfg, 0x5100);
  r.samples = pts.size();
  if (pts.empty()) {
    r.status = CheckStatus::Vacuous;
    r.diagnostics = "no Sing H samples at any radius";
    return r;
  }
  std::optional<ConstructibleSet> pulled;
  const auto jf = jacobian(f), jg = jacobian(g);
  for (const auto& x : pts) {
    if (member_float(sing_f, x, cfg.member_tol) || detail::rank_deficient(jf, x, cfg.member_tol)) continue;
    if (sing_g.pieces().empty()) {
      r.status = CheckStatus::Fails;
      r.witness = x;
      return r;
    }
    const auto y = f.evaluate(x);
    if (member_float(sing_g, y, cfg.member_tol) || detail::rank_deficient(jg, y, cfg.member_tol)) continue;
    // F(x) near 0 loses relative accuracy; test x against F^-1(Sing G) at its own scale.
    if (!pulled) pulled = sing_g.preimage(f);
    if (member_float(*pulled, x, cfg.member_tol)) continue;
    // Samples at multiple points of Sing H are only accurate to sqrt(tol).
    const double reach = std::sqrt(cfg.sampler.tol) * std::max(Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size())).norm(), 1e-12);
    if (detail::within(sing_f, x, reach, cfg.sampler) || detail::within(*pulled, x, reach, cfg.sampler)) continue;
    r.status = CheckStatus::Fails;
    r.witness = x;
    return r;
  }
  r.status = CheckStatus::Holds;
  return r;
}

/// Sing H = F^{-1}(Sing G) under Disc F = {0} and 0 in Sing G.
inline CheckResult check_lemma_l0(const PolyMap& f, const PolyMap& g, const CompositeConfig& cfg = {}) {
  cfg.validate();
  detail::require_composable(f, g);
  const auto disc = disc_evidence(f, cfg);
  const auto sing_g = singular_set_ideal(g);
  if (disc.status != DiscStatus::OriginOnly || !detail::origin_in(sing_g)) {
    CheckResult r;
    r.name = "lemma_l0";
    r.radii = cfg.radii;
    r.status = CheckStatus::PreconditionNotMet;
    r.diagnostics = disc.status != DiscStatus::OriginOnly ? "Disc F = {0} not established" : "origin not in Sing G";
    return r;
  }
  const PolyMap h = compose(g, f);
  return detail::bidirectional("lemma_l0", detail::sing_set(h), ConstructibleSet::from_ideal(sing_g).preimage(f), cfg,
                               0x5200);
}

/// M(H) \ Sing H inside M(F), and outside V_F when 0 is in Sing G.
inline CheckResult check_lemma_l1(const PolyMap& f, const PolyMap& g, const CompositeConfig& cfg = {}) {
  cfg.validate();
  detail::require_composable(f, g);
  CheckResult r;
  r.name = "lemma_l1";
  r.radii = cfg.radii;
  if (disc_evidence(f, cfg).status != DiscStatus::OriginOnly) {
    r.status = CheckStatus::PreconditionNotMet;
    r.diagnostics = "Disc F = {0} not established";
    return r;
  }
  const bool avoid_zero = detail::origin_in(singular_set_ideal(g));
  const PolyMap h = compose(g, f);
  const auto pts = detail::ladder_difference(detail::milnor_set(h), detail::sing_set(h), cfg, 0x5300);
  r.samples = pts.size();
  if (pts.empty()) {
    r.status = CheckStatus::Vacuous;
    r.diagnostics = "M(H) \\ Sing H empty at every radius";
    return r;
  }
  const auto m_f = detail::milnor_set(f);
  const auto v_f = detail::zero_set(f);
  const auto stack = detail::milnor_matrix(f);
  for (const auto& x : pts) {
    const bool in_m = member_float(m_f, x, cfg.member_tol) || detail::rank_deficient(stack, x, cfg.member_tol);
    const bool in_v = avoid_zero && member_float(v_f, x, cfg.member_tol);
    if (!in_m || in_v) {
      r.status = CheckStatus::Fails;
      r.witness = x;
      r.diagnostics = !in_m ? "sample outside M(F)" : "sample inside V_F";
      return r;
    }
  }
  r.status = CheckStatus::Holds;
  if (!avoid_zero) r.diagnostics = "origin not in Sing G: checked M(H) \\ Sing H in M(F) only";
  return r;
}

/// Exact determinant of dg(0); zero when g is not square.
inline Rational jacobian_det_at_origin(const PolyMap& g) {
  if (g.source_dim() != g.target_dim()) return Rational(0);
  const auto J = jacobian(g);
  std::vector<std::size_t> idx(g.source_dim());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return J.minor(idx, idx).constant_term();
}

/// M(H) = M(F) when G is a local diffeomorphism at 0.
inline CheckResult check_prop_p1_equality(const PolyMap& f, const PolyMap& g, const CompositeConfig& cfg = {}) {
  cfg.validate();
  detail::require_composable(f, g);
  if (g.source_dim() != g.target_dim() || jacobian_det_at_origin(g) == 0) {
    CheckResult r;
    r.name = "prop_p1_equality";
    r.radii = cfg.radii;
    r.status = CheckStatus::PreconditionNotMet;
    r.diagnostics = g.source_dim() != g.target_dim() ? "G is not square" : "dG(0) is singular";
    return r;
  }
  return detail::bidirectional("prop_p1_equality", detail::milnor_set(compose(g, f)), detail::milnor_set(f), cfg, 0x5400);
}

/// V_H = F^{-1}(V_G).
inline CheckResult check_zero_preimage(const PolyMap& f, const PolyMap& g, const CompositeConfig& cfg = {}) {
  cfg.validate();
  detail::require_composable(f, g);
  return detail::bidirectional("zero_preimage", detail::zero_set(compose(g, f)), detail::zero_set(g).preimage(f), cfg,
                               0x5500);
}

/// Push samples of a \ b forward through f over the radius ladder.
inline SampleCloud image_cloud(const PolyMap& f, const ConstructibleSet& a, const ConstructibleSet& b,
                               const CompositeConfig& cfg = {}, VariableList target_vars = {}) {
  cfg.validate();
  if (a.variables() != f.source()) fail(ErrorKind::DimensionMismatch, "image_cloud set must live on the source of F");
  if (target_vars.empty())
    for (std::size_t i = 0; i < f.target_dim(); ++i) target_vars.push_back("y" + std::to_string(i + 1));
  if (target_vars.size() != f.target_dim()) fail(ErrorKind::DimensionMismatch, "target variable count differs from N");
  SampleCloud out;
  out.variables = std::move(target_vars);
  out.radius = cfg.radii.front();
  out.seed = cfg.seed;
  out.tol = cfg.sampler.tol;
  out.sep_tol = cfg.sampler.sep_tol;
  if (a.pieces().empty()) {
    out.diagnostics = "empty set";
    return out;
  }
  const auto lin = linearized(a, cfg.seed, cfg.sampler);
  for (std::size_t i = 0; i < cfg.radii.size(); ++i) {
    auto c = try_set_difference_samples(lin, b, cfg.radii[i], cfg.samples, sub_seed(cfg.seed, 0x1A6E, i), cfg.sampler);
    out.starts_used += c.starts_used;
    for (std::size_t k = 0; k < c.points.size(); ++k) {
      out.points.push_back(f.evaluate(c.points[k]));
      out.residuals.push_back(c.residuals[k]);
    }
  }
  if (out.points.empty()) out.diagnostics = "difference empty at every radius";
  return out;
}

struct NamedSet {
  std::string name;
  ConstructibleSet set;
};

struct CompositeReport {
  PolyMap F, G, H;
  std::vector<NamedSet> sets;
  std::vector<CheckResult> lattice_checks;
  DiscEvidence disc_F, disc_G, disc_H;
  SampleCloud image_cloud;
  CompositeConfig config;

  const ConstructibleSet& set(const std::string& name) const {
    for (const auto& s : sets)
      if (s.name == name) return s.set;
    fail(ErrorKind::InvalidInput, "no set named " + name);
  }

  const CheckResult& check(const std::string& name) const {
    for (const auto& c : lattice_checks)
      if (c.name == name) return c;
    fail(ErrorKind::InvalidInput, "no check named " + name);
  }
};

inline CompositeReport analyze_composite(const PolyMap& f, const PolyMap& g, const CompositeConfig& cfg = {}) {
  cfg.validate();
  detail::require_composable(f, g);
  const PolyMap h = compose(g, f);
  CompositeReport rep{f, g, h, {}, {}, {}, {}, {}, {}, cfg};
  rep.sets = {{"Sing F", detail::sing_set(f)}, {"Sing G", detail::sing_set(g)}, {"Sing H", detail::sing_set(h)},
              {"M_F", detail::milnor_set(f)},  {"M_G", detail::milnor_set(g)},  {"M_H", detail::milnor_set(h)},
              {"V_F", detail::zero_set(f)},    {"V_G", detail::zero_set(g)},    {"V_H", detail::zero_set(h)}};
  rep.lattice_checks = {check_sing_inclusion(f, g, cfg), check_lemma_l0(f, g, cfg), check_lemma_l1(f, g, cfg),
                        check_prop_p1_equality(f, g, cfg), check_zero_preimage(f, g, cfg)};
  rep.disc_F = disc_evidence(f, cfg);
  rep.disc_G = disc_evidence(g, cfg);
  rep.disc_H = disc_evidence(h, cfg);
  rep.image_cloud = image_cloud(f, rep.set("M_H"), rep.set("Sing H"), cfg, g.source());
  return rep;
}

}  // namespace milnor
