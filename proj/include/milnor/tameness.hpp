#pragma once

#include <optional>
#include <string>
#include <vector>

#include "milnor/composite.hpp"
#include "milnor/polar_field.hpp"

namespace milnor {

enum class TameStatus { Tame, NotTame, Inconclusive };

inline const char* to_string(TameStatus s) {
  switch (s) {
    case TameStatus::Tame: return "Tame";
    case TameStatus::NotTame: return "NotTame";
    case TameStatus::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

struct TamenessVerdict {
  TameStatus status = TameStatus::Inconclusive;
  std::optional<Witness> witness;
  std::vector<SliceEvidence> evidence;
  std::vector<std::string> flags;  // "vacuous_sing", "vacuous_milnor", "cloud_margin", ...
  std::string mode = "direct";     // "direct" or "composite"
  std::string diagnostics;
  TameConfig config;

  bool has_flag(const std::string& f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }

  /// Check the verdict against its own evidence. Returns an empty string when consistent.
  std::string invariant_violation() const {
    if (status == TameStatus::NotTame) {
      if (!witness) return "NotTame without witness";
      const auto& l = witness->ladder;
      if (l.empty()) return "empty witness ladder";
      for (std::size_t i = 1; i < l.size(); ++i)
        if (!(l[i].distance < l[i - 1].distance)) return "ladder distances not strictly decreasing";
      if (l.back().distance > config.witness_tol * (1 + 1e-6)) return "final ladder distance above witness_tol";
      const double excl = mode == "composite" ? config.composite_exclusion : config.exclusion_radius;
      if (to_vec(witness->accumulation_point).norm() < excl) return "accumulation point inside exclusion ball";
    }
    if (status == TameStatus::Tame && !has_flag("vacuous_sing") && !has_flag("vacuous_milnor")) {
      for (const auto& ev : evidence) {
        if (ev.seeds == 0 || ev.target_samples == 0) continue;
        const double measure = mode == "composite" ? ev.min_distance / ev.max_distance : ev.min_relative;
        if (!(measure >= config.margin)) return "Tame with evidence below margin";
      }
    }
    return {};
  }
};

namespace detail {

inline TamenessVerdict decide(const polar::Engine::Result& r, const TameConfig& cfg, const std::string& mode) {
  TamenessVerdict v;
  v.config = cfg;
  v.mode = mode;
  v.evidence = r.slices;
  if (r.witness) {
    v.status = TameStatus::NotTame;
    v.witness = r.witness;
    return v;
  }
  if (r.targets_empty) {
    v.status = TameStatus::Tame;
    v.flags.push_back("vacuous_sing");
    return v;
  }
  if (r.seeds_empty) {
    v.status = TameStatus::Tame;
    v.flags.push_back("vacuous_milnor");
    return v;
  }
  bool ok = true;
  for (const auto& ev : r.slices) {
    if (ev.seeds == 0 || ev.target_samples == 0) continue;
    const double measure = mode == "composite" ? ev.min_distance / ev.max_distance : ev.min_relative;
    if (!(measure >= cfg.margin)) ok = false;
  }
  if (ok) {
    v.status = TameStatus::Tame;
    if (mode == "composite") v.flags.push_back("cloud_margin");
  } else {
    v.status = TameStatus::Inconclusive;
    v.diagnostics = "evidence below margin but no witness ladder completed";
  }
  return v;
}

}  // namespace detail

/// Condition (2) via the equivalent form closure(M \ Sing) meets Sing only at 0.
inline TamenessVerdict check_tame(const PolyMap& f, const Rho& rho, const TameConfig& cfg = {}) {
  cfg.validate();
  validate_rho(rho);
  if (rho.poly.variables() != f.source()) fail(ErrorKind::DimensionMismatch, "rho must live on the source space");
  if (f.target_dim() >= f.source_dim()) {
    // Off Sing the stacked matrix already has full rank M, so M \ Sing is empty.
    TamenessVerdict v;
    v.config = cfg;
    v.status = TameStatus::Tame;
    v.flags.push_back("vacuous_milnor");
    return v;
  }
  const auto sing = singular_set_ideal(f);
  if (sing.is_empty_set() || sing.is_whole_space()) {
    TamenessVerdict v;
    v.config = cfg;
    v.status = TameStatus::Tame;
    v.flags.push_back(sing.is_empty_set() ? "vacuous_sing" : "vacuous_milnor");
    return v;
  }
  polar::Engine engine(f, rho.poly, PolyMap::identity(f.source()), sing, cfg, true);
  return detail::decide(engine.run(), cfg, "direct");
}

inline TamenessVerdict check_tame(const PolyMap& f, const Polynomial& rho, const TameConfig& cfg = {}) {
  return check_tame(f, Rho{rho, false}, cfg);
}

inline TamenessVerdict check_tame(const PolyMap& f, const TameConfig& cfg = {}) {
  return check_tame(f, Rho{euclidean_rho(f.source()), false}, cfg);
}

/// Outcome of the composite criterion for H = G o F.
struct CompositeVerdict {
  bool precondition_met = false;
  std::string failed_precondition;  // empty when met
  TamenessVerdict verdict;          // H via the image condition
  TamenessVerdict f_verdict;
  DiscEvidence disc_f;
  std::optional<TamenessVerdict> direct;  // check_tame(H), the cross-check
  bool cross_check_failed = false;
};

/// closure(F(M(H) \ Sing H)) meets Sing G only at 0, decided for H = G o F.
inline CompositeVerdict check_composite_condition(const PolyMap& f, const PolyMap& g, const Rho& rho,
                                                  const TameConfig& cfg = {}, const CompositeConfig& ccfg = {}) {
  cfg.validate();
  if (f.target_dim() != g.source_dim()) fail(ErrorKind::DimensionMismatch, "F target dimension differs from G source dimension");
  CompositeVerdict out;
  out.verdict.config = cfg;
  out.verdict.mode = "composite";
  out.f_verdict = check_tame(f, rho, cfg);
  out.disc_f = disc_evidence(f, ccfg);
  const auto sing_g = singular_set_ideal(g);
  if (out.f_verdict.status != TameStatus::Tame) {
    out.failed_precondition = std::string("F is not tame (") + to_string(out.f_verdict.status) + ")";
  } else if (out.disc_f.status != DiscStatus::OriginOnly) {
    out.failed_precondition = std::string("Disc F = {0} not established (") + to_string(out.disc_f.status) + ")";
  } else if (!detail::origin_in(sing_g)) {
    out.failed_precondition = "origin not in Sing G";
  }
  if (!out.failed_precondition.empty()) {
    out.verdict.diagnostics = out.failed_precondition;
    return out;
  }
  out.precondition_met = true;
  const PolyMap h = compose(g, f);
  if (sing_g.is_whole_space()) {
    // Sing G is everything, so the image condition reduces to M(H) \ Sing H being empty near 0.
    out.verdict.status = TameStatus::Inconclusive;
    out.verdict.diagnostics = "Sing G is the whole target space";
  } else {
    polar::Engine engine(h, rho.poly, f, sing_g, cfg, false);
    out.verdict = detail::decide(engine.run(), cfg, "composite");
  }
  out.direct = check_tame(h, rho, cfg);
  const auto a = out.verdict.status, b = out.direct->status;
  if (a != TameStatus::Inconclusive && b != TameStatus::Inconclusive && a != b) {
    out.cross_check_failed = true;
    out.verdict.diagnostics += (out.verdict.diagnostics.empty() ? "" : "; ") +
                               std::string("cross-check disagreement: direct check gives ") + to_string(b);
  }
  return out;
}

inline CompositeVerdict check_composite_condition(const PolyMap& f, const PolyMap& g, const TameConfig& cfg = {},
                                                  const CompositeConfig& ccfg = {}) {
  return check_composite_condition(f, g, Rho{euclidean_rho(f.source()), false}, cfg, ccfg);
}

/// F(M(H)) inside M(G), plus the reverse inclusion for the equality variant.
struct InclusionVerdict {
  CheckResult inclusion;
  CheckResult equality;
  std::optional<TameStatus> g_status;
  std::optional<TameStatus> derived_h;  // set when a sufficient condition fires
  std::string derived;
};

namespace detail {

/// Some x in `set` with f(x) = y, by multi-start Gauss-Newton on the scaled system.
inline std::optional<Vec> preimage_point(const PolyMap& f, const ConstructibleSet& set, const Vec& y,
                                         const CompositeConfig& cfg, std::uint64_t stream) {
  const CompiledSystem fc(f);
  const auto pieces = compile(set);
  const double yn = std::max(y.norm(), 1e-12);
  int max_deg = 1;
  for (const auto& c : f.components()) max_deg = std::max(max_deg, c.total_degree());
  const auto opt = cfg.sampler.solver();
  for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
    for (int k = 0; k < 8 * max_deg; ++k) {
      Rng rng(sub_seed(cfg.seed, stream + pi, static_cast<std::uint64_t>(k)));
      const double scale = std::pow(yn, 1.0 / (1 + k % max_deg));
      Vec x0 = scale * rng.direction(f.source_dim());
      std::vector<double> scales;
      for (const auto& e : pieces[pi].eqs) scales.push_back(e.scale_at(scale));
      ResidualFn fn = [&](const Vec& x, Vec& r, Mat& jac) {
        const auto ne = static_cast<Eigen::Index>(pieces[pi].eqs.size());
        const auto n = static_cast<Eigen::Index>(f.target_dim());
        r.resize(ne + n);
        jac.resize(ne + n, x.size());
        Vec g(x.size());
        for (Eigen::Index i = 0; i < ne; ++i) {
          r[i] = pieces[pi].eqs[static_cast<std::size_t>(i)].value_grad(x, g) / scales[static_cast<std::size_t>(i)];
          jac.row(i) = g.transpose() / scales[static_cast<std::size_t>(i)];
        }
        Vec v;
        Mat j;
        fc.values_jacobian(x, v, j);
        r.tail(n) = (v - y) / yn;
        jac.bottomRows(n) = j / yn;
      };
      auto sol = gauss_newton(fn, x0, opt, &rng);
      if (sol.converged) return sol.x;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Sufficient condition for H tame: F tame with Disc F = {0}, F(M(H)) in M(G), and G tame.
inline InclusionVerdict check_sufficient_inclusion(const PolyMap& f, const PolyMap& g, const TameConfig& cfg = {},
                                                   const CompositeConfig& ccfg = {}) {
  ccfg.validate();
  if (f.target_dim() != g.source_dim()) fail(ErrorKind::DimensionMismatch, "F target dimension differs from G source dimension");
  InclusionVerdict out;
  out.inclusion.name = "image_inclusion";
  out.equality.name = "image_equality";
  out.inclusion.radii = out.equality.radii = ccfg.radii;
  const auto fv = check_tame(f, cfg);
  const auto disc = disc_evidence(f, ccfg);
  if (fv.status != TameStatus::Tame || disc.status != DiscStatus::OriginOnly) {
    out.inclusion.status = out.equality.status = CheckStatus::PreconditionNotMet;
    out.inclusion.diagnostics = out.equality.diagnostics =
        fv.status != TameStatus::Tame ? "F is not tame" : "Disc F = {0} not established";
    return out;
  }
  const PolyMap h = compose(g, f);
  const auto m_h = detail::milnor_set(h), m_g = detail::milnor_set(g);
  const auto src = detail::ladder_samples(m_h, ccfg, 0x6100);
  out.inclusion.samples = src.size();
  out.inclusion.status = src.empty() ? CheckStatus::Vacuous : CheckStatus::Holds;
  for (const auto& x : src) {
    const auto y = f.evaluate(x);
    if (to_vec(y).norm() == 0.0) continue;
    if (!member_float(m_g, y, ccfg.member_tol)) {
      out.inclusion.status = CheckStatus::Fails;
      out.inclusion.witness = x;
      out.inclusion.diagnostics = "F-image of an M(H) sample lies off M(G)";
      break;
    }
  }
  const auto tgt = detail::ladder_samples(m_g, ccfg, 0x6200);
  out.equality.samples = tgt.size();
  if (out.inclusion.status == CheckStatus::Fails) {
    out.equality.status = CheckStatus::Fails;
    out.equality.witness = out.inclusion.witness;
    out.equality.diagnostics = "forward inclusion fails";
  } else {
    out.equality.status = tgt.empty() ? out.inclusion.status : CheckStatus::Holds;
    for (std::size_t i = 0; i < tgt.size(); ++i) {
      if (!detail::preimage_point(f, m_h, to_vec(tgt[i]), ccfg, 0x6300 + 16 * i)) {
        out.equality.status = CheckStatus::Fails;
        out.equality.witness = tgt[i];
        out.equality.diagnostics = "M(G) sample without a preimage in M(H)";
        break;
      }
    }
  }
  const auto gv = check_tame(g, cfg);
  out.g_status = gv.status;
  if (out.inclusion.status != CheckStatus::Fails && gv.status == TameStatus::Tame) {
    out.derived_h = TameStatus::Tame;
    out.derived = "H tame: F(M(H)) in M(G) and G tame";
  } else if (out.equality.status == CheckStatus::Holds && gv.status == TameStatus::NotTame) {
    out.derived_h = TameStatus::NotTame;
    out.derived = "H not tame: F(M(H)) = M(G) and G not tame";
  }
  return out;
}

enum class IcisStatus { Icis, NotIcis, Inconclusive };

inline const char* to_string(IcisStatus s) {
  switch (s) {
    case IcisStatus::Icis: return "Icis";
    case IcisStatus::NotIcis: return "NotIcis";
    case IcisStatus::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

struct IcisVerdict {
  IcisStatus status = IcisStatus::Inconclusive;
  std::optional<std::vector<double>> witness;
  bool exact = false;
  std::size_t samples = 0;
  std::string diagnostics;

  bool holds() const noexcept { return status == IcisStatus::Icis; }
};

/// Sing f meets V_f only at the origin.
inline IcisVerdict check_icis(const PolyMap& f, const CompositeConfig& cfg = {}) {
  cfg.validate();
  IcisVerdict out;
  const auto sing = singular_set_ideal(f);
  if (sing.is_empty_set()) {
    out.status = IcisStatus::Icis;
    out.exact = true;
    out.diagnostics = "Sing is empty";
    return out;
  }
  auto gens = sing.generators;
  gens.insert(gens.end(), f.components().begin(), f.components().end());
  const auto meet = make_ideal(f.source(), gens);
  const auto cover = coordinate_cover(meet, cfg.seed, cfg.sampler);
  if (!cover.empty()) {
    out.exact = true;
    for (const auto& I : cover) {
      if (I.size() == f.source_dim()) continue;
      BasicPiece b;
      for (auto i : I) b.equations.push_back(Polynomial::variable(f.source(), f.source()[i]));
      auto c = try_sample_on_sphere(ConstructibleSet(f.source(), {b}), cfg.radii.front(), 1, cfg.seed, cfg.sampler);
      if (!c.empty()) out.witness = c.points.front();
      out.status = IcisStatus::NotIcis;
      out.diagnostics = "Sing and V share a linear piece of positive dimension";
      return out;
    }
    out.status = IcisStatus::Icis;
    out.diagnostics = "Sing meets V only at the origin";
    return out;
  }
  const auto set = ConstructibleSet::from_ideal(meet);
  for (std::size_t k = 0; k < cfg.radii.size(); ++k) {
    auto c = try_sample_on_sphere(set, cfg.radii[k], cfg.samples, sub_seed(cfg.seed, 0x1C15, k), cfg.sampler);
    out.samples += c.size();
    if (!c.empty()) {
      out.status = IcisStatus::NotIcis;
      out.witness = c.points.front();
      out.diagnostics = "sampled point of Sing and V away from the origin";
      return out;
    }
  }
  out.status = IcisStatus::Icis;
  out.diagnostics = "no point of Sing and V on any sampled sphere";
  return out;
}

}  // namespace milnor
