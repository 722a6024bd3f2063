#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "milnor/compiled.hpp"
#include "milnor/jacobian.hpp"
#include "milnor/rng.hpp"
#include "milnor/solver.hpp"

namespace milnor {

/// {equations = 0, inequations != 0}
struct BasicPiece {
  std::vector<Polynomial> equations;
  std::vector<Polynomial> inequations;
};

/// Finite union of basic pieces over one variable list.
class ConstructibleSet {
 public:
  ConstructibleSet() = default;
  ConstructibleSet(VariableList vars, std::vector<BasicPiece> pieces) : vars_(std::move(vars)), pieces_(std::move(pieces)) {
    for (const auto& p : pieces_) {
      for (const auto& e : p.equations) check(e);
      for (const auto& e : p.inequations) check(e);
    }
  }

  static ConstructibleSet empty(VariableList vars) { return ConstructibleSet(std::move(vars), {}); }
  static ConstructibleSet whole(VariableList vars) { return ConstructibleSet(std::move(vars), {BasicPiece{}}); }

  static ConstructibleSet from_ideal(const IdealGenerators& ideal) {
    if (ideal.is_empty_set()) return empty(ideal.variables);
    return ConstructibleSet(ideal.variables, {BasicPiece{ideal.generators, {}}});
  }

  /// Parse pieces given as lists of equation strings.
  static ConstructibleSet parse(const VariableList& vars, const std::vector<std::vector<std::string>>& pieces) {
    std::vector<BasicPiece> out;
    for (const auto& eqs : pieces) {
      BasicPiece p;
      for (const auto& t : eqs) p.equations.push_back(parse_polynomial(t, vars));
      out.push_back(std::move(p));
    }
    return ConstructibleSet(vars, std::move(out));
  }

  const VariableList& variables() const noexcept { return vars_; }
  const std::vector<BasicPiece>& pieces() const noexcept { return pieces_; }
  std::size_t dim() const noexcept { return vars_.size(); }
  bool is_empty_syntactically() const noexcept { return pieces_.empty(); }

  ConstructibleSet united(const ConstructibleSet& other) const {
    if (other.vars_ != vars_) fail(ErrorKind::DimensionMismatch, "union of sets over different spaces");
    auto p = pieces_;
    p.insert(p.end(), other.pieces_.begin(), other.pieces_.end());
    return ConstructibleSet(vars_, std::move(p));
  }

  /// Each piece gains the extra inequation (remove the zero set of h).
  ConstructibleSet minus_hypersurface(const Polynomial& h) const {
    auto p = pieces_;
    for (auto& piece : p) piece.inequations.push_back(h);
    return ConstructibleSet(vars_, std::move(p));
  }

  /// Preimage under a polynomial map whose target is this set's space.
  ConstructibleSet preimage(const PolyMap& f) const {
    if (f.target_dim() != vars_.size()) fail(ErrorKind::DimensionMismatch, "preimage needs f.target_dim = set dimension");
    std::vector<BasicPiece> out;
    for (const auto& piece : pieces_) {
      BasicPiece q;
      for (const auto& e : piece.equations) q.equations.push_back(f.pullback(e));
      for (const auto& e : piece.inequations) q.inequations.push_back(f.pullback(e));
      out.push_back(std::move(q));
    }
    return ConstructibleSet(f.source(), std::move(out));
  }

  std::vector<std::vector<std::string>> to_strings() const {
    std::vector<std::vector<std::string>> out;
    for (const auto& p : pieces_) {
      std::vector<std::string> s;
      for (const auto& e : p.equations) s.push_back(e.to_string());
      for (const auto& e : p.inequations) s.push_back("(" + e.to_string() + ")!=0");
      out.push_back(std::move(s));
    }
    return out;
  }

 private:
  void check(const Polynomial& p) const {
    if (p.variables() != vars_) fail(ErrorKind::DimensionMismatch, "piece polynomial over a different space");
  }

  VariableList vars_;
  std::vector<BasicPiece> pieces_;
};

struct SamplerConfig {
  double tol = 1e-10;
  double sep_tol = 1e-6;
  double cluster_factor = 1e-3;
  int starts_per_point = 64;
  int empty_probe = 512;
  int max_iter = 80;
  int max_halvings = 30;
  int polish_iters = 40;  // keeps improving near multiple roots, stops at once on simple ones
  double reject_tol = 1e-6;
  int nearest_starts = 32;

  void validate() const {
    if (!(tol > 0) || !(sep_tol > 0) || !(reject_tol > 0) || !(cluster_factor > 0))
      fail(ErrorKind::InvalidTolerance, "sampler tolerances must be positive");
  }

  SolverOptions solver() const {
    SolverOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    o.max_halvings = max_halvings;
    o.polish_iters = polish_iters;
    return o;
  }
};

struct SampleCloud {
  VariableList variables;
  std::vector<std::vector<double>> points;
  std::vector<double> residuals;
  double radius = 0.0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  double sep_tol = 0.0;
  int starts_used = 0;
  std::string diagnostics;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

namespace detail {

struct CompiledPiece {
  std::vector<CompiledPoly> eqs;
  std::vector<CompiledPoly> ineqs;
};

inline std::vector<CompiledPiece> compile(const ConstructibleSet& s) {
  std::vector<CompiledPiece> out;
  for (const auto& p : s.pieces()) {
    CompiledPiece c;
    for (const auto& e : p.equations)
      if (!e.is_zero()) c.eqs.emplace_back(e);
    for (const auto& e : p.inequations) c.ineqs.emplace_back(e);
    out.push_back(std::move(c));
  }
  return out;
}

inline double normalized(const CompiledPoly& p, const Vec& x, double r) { return std::abs(p.value(x)) / p.scale_at(r); }

/// Max normalized equation residual and min normalized inequation size of x on a piece.
inline std::pair<double, double> piece_residuals(const CompiledPiece& piece, const Vec& x, double r) {
  double res = 0.0, sep = INFINITY;
  for (const auto& e : piece.eqs) res = std::max(res, normalized(e, x, r));
  for (const auto& h : piece.ineqs) sep = std::min(sep, normalized(h, x, r));
  return {res, sep};
}

/// Residual of {eqs / scale(r); optional (level_poly - level) / level}.
inline ResidualFn piece_system(const CompiledPiece& piece, double r, const CompiledPoly* level_poly, double level) {
  std::vector<double> scales;
  for (const auto& e : piece.eqs) scales.push_back(e.scale_at(r));
  return [&piece, scales, level_poly, level](const Vec& x, Vec& out, Mat& jac) {
    const auto n = x.size();
    const auto m = static_cast<Eigen::Index>(piece.eqs.size() + (level_poly ? 1 : 0));
    out.resize(m);
    jac.resize(m, n);
    Vec g(n);
    for (std::size_t i = 0; i < piece.eqs.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      out[k] = piece.eqs[i].value_grad(x, g) / scales[i];
      jac.row(k) = g.transpose() / scales[i];
    }
    if (level_poly) {
      out[m - 1] = (level_poly->value_grad(x, g) - level) / level;
      jac.row(m - 1) = g.transpose() / level;
    }
  };
}

inline bool near_existing(const std::vector<std::vector<double>>& pts, const Vec& x, double radius) {
  for (const auto& p : pts) {
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) d2 += (p[static_cast<std::size_t>(i)] - x[i]) * (p[static_cast<std::size_t>(i)] - x[i]);
    if (d2 <= radius * radius) return true;
  }
  return false;
}

/// Sample a set on the level {level_poly = level}; starts are scale*direction.
/// `scale_radius` sets the normalization of equations. Never throws on empty results.
inline SampleCloud sample_on_level(const ConstructibleSet& s, const CompiledPoly& level_poly, double level,
                                   double start_scale, double scale_radius, std::size_t count, std::uint64_t seed,
                                   const SamplerConfig& cfg, std::uint64_t stream = 0x51) {
  cfg.validate();
  SampleCloud cloud;
  cloud.variables = s.variables();
  cloud.radius = scale_radius;
  cloud.seed = seed;
  cloud.tol = cfg.tol;
  cloud.sep_tol = cfg.sep_tol;
  if (s.pieces().empty() || count == 0) {
    cloud.diagnostics = "empty set";
    return cloud;
  }
  const auto pieces = compile(s);
  std::vector<ResidualFn> systems;
  for (const auto& p : pieces) systems.push_back(piece_system(p, scale_radius, &level_poly, level));
  const auto opt = cfg.solver();
  const std::size_t max_starts = static_cast<std::size_t>(cfg.starts_per_point) * count;
  const double cluster = scale_radius * cfg.cluster_factor;
  const std::size_t n = s.dim();
  std::size_t starts = 0;
  for (; starts < max_starts && cloud.points.size() < count; ++starts) {
    if (cloud.points.empty() && starts >= static_cast<std::size_t>(cfg.empty_probe)) break;
    const std::size_t pi = starts % pieces.size();
    Rng rng(sub_seed(seed, stream, starts));
    Vec x0 = start_scale * rng.direction(n);
    auto sol = gauss_newton(systems[pi], x0, opt, &rng);
    if (!sol.converged) continue;
    auto [res, sep] = piece_residuals(pieces[pi], sol.x, scale_radius);
    if (res > cfg.tol || sep < cfg.sep_tol) continue;
    if (near_existing(cloud.points, sol.x, cluster)) continue;
    cloud.points.push_back(to_std(sol.x));
    cloud.residuals.push_back(res);
  }
  cloud.starts_used = static_cast<int>(starts);
  if (cloud.points.empty()) cloud.diagnostics = "no acceptances after " + std::to_string(starts) + " starts";
  return cloud;
}

}  // namespace detail

inline bool member_exact(const ConstructibleSet& s, std::span<const Rational> point) {
  if (point.size() != s.dim()) fail(ErrorKind::DimensionMismatch, "point dimension differs from set dimension");
  for (const auto& piece : s.pieces()) {
    bool ok = true;
    for (const auto& e : piece.equations)
      if (e.evaluate(point) != 0) {
        ok = false;
        break;
      }
    if (!ok) continue;
    for (const auto& h : piece.inequations)
      if (h.evaluate(point) == 0) {
        ok = false;
        break;
      }
    if (ok) return true;
  }
  return false;
}

/// Residuals are normalized by sum |c_a| ||x||^|a| so the test is scale-free near 0.
inline bool member_float(const ConstructibleSet& s, std::span<const double> point, double tol) {
  if (point.size() != s.dim()) fail(ErrorKind::DimensionMismatch, "point dimension differs from set dimension");
  if (!(tol > 0)) fail(ErrorKind::InvalidTolerance, "membership tolerance must be positive");
  const Vec x = Eigen::Map<const Vec>(point.data(), static_cast<Eigen::Index>(point.size()));
  const double r = x.norm();
  for (const auto& piece : detail::compile(s)) {
    auto [res, sep] = detail::piece_residuals(piece, x, r);
    if (res <= tol && sep > tol) return true;
  }
  return false;
}

/// Smallest normalized residual over pieces (inequations ignored).
inline double membership_residual(const ConstructibleSet& s, std::span<const double> point) {
  const Vec x = Eigen::Map<const Vec>(point.data(), static_cast<Eigen::Index>(point.size()));
  double best = INFINITY;
  for (const auto& piece : detail::compile(s)) best = std::min(best, detail::piece_residuals(piece, x, x.norm()).first);
  return best;
}

inline SampleCloud try_sample_on_sphere(const ConstructibleSet& s, double radius, std::size_t count, std::uint64_t seed,
                                        const SamplerConfig& cfg = {}) {
  if (!(radius > 0)) fail(ErrorKind::InvalidInput, "radius must be positive");
  const CompiledPoly sphere(euclidean_rho(s.variables()));
  return detail::sample_on_level(s, sphere, radius * radius, radius, radius, count, seed, cfg);
}

inline SampleCloud sample_on_sphere(const ConstructibleSet& s, double radius, std::size_t count, std::uint64_t seed,
                                    const SamplerConfig& cfg = {}) {
  if (count < 1) fail(ErrorKind::InvalidInput, "count must be at least 1");
  auto cloud = try_sample_on_sphere(s, radius, count, seed, cfg);
  if (cloud.empty()) throw Error(ErrorKind::NoConvergence, "sample_on_sphere: " + cloud.diagnostics);
  return cloud;
}

namespace detail {

/// Slides a feasible x along the tangent space toward a critical point of |x - t|.
inline Vec descend_to_nearest(const CompiledPiece& piece, const ResidualFn& sys, Vec x, const Vec& t,
                              const SolverOptions& opt, double r, const SamplerConfig& cfg) {
  const auto n = x.size();
  Vec g(n);
  for (int it = 0; it < 200; ++it) {
    Mat jt(n, static_cast<Eigen::Index>(piece.eqs.size()));
    for (std::size_t i = 0; i < piece.eqs.size(); ++i) {
      piece.eqs[i].value_grad(x, g);
      jt.col(static_cast<Eigen::Index>(i)) = g;
    }
    Vec d = x - t;
    if (jt.cols() > 0) {
      Eigen::ColPivHouseholderQR<Mat> qr(jt);
      const Mat q = qr.householderQ() * Mat::Identity(n, qr.rank());
      d -= q * (q.transpose() * d);
    }
    if (d.norm() <= 1e-13 * std::max(r, (x - t).norm())) break;
    auto sol = gauss_newton(sys, x - d, opt);
    if (!sol.converged || (sol.x - t).norm() >= (x - t).norm()) break;
    if (piece_residuals(piece, sol.x, r).second < cfg.sep_tol) break;
    x = sol.x;
  }
  return x;
}

}  // namespace detail

/// Upper bound on dist(target, s) by multi-start projection, refined along tangent spaces.
inline double nearest_distance(const ConstructibleSet& s, std::span<const double> target, const SamplerConfig& cfg = {},
                               std::uint64_t seed = 0) {
  cfg.validate();
  if (target.size() != s.dim()) fail(ErrorKind::DimensionMismatch, "target dimension differs from set dimension");
  const Vec t = Eigen::Map<const Vec>(target.data(), static_cast<Eigen::Index>(target.size()));
  if (!t.allFinite()) fail(ErrorKind::NonFinite, "target is not finite");
  const auto pieces = detail::compile(s);
  const double r0 = std::max(t.norm(), 1e-3);
  const auto opt = cfg.solver();
  double best = INFINITY;
  for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
    auto sys = detail::piece_system(pieces[pi], r0, nullptr, 0.0);
    for (int k = 0; k < cfg.nearest_starts; ++k) {
      Rng rng(sub_seed(seed, 0xD1 + pi, static_cast<std::uint64_t>(k)));
      Vec x0 = t;
      if (k > 0) x0 += r0 * std::pow(10.0, -3.0 + 3.0 * (k % 8) / 7.0) * rng.direction(s.dim());
      auto sol = gauss_newton(sys, x0, opt, &rng);
      if (!sol.converged) continue;
      auto [res, sep] = detail::piece_residuals(pieces[pi], sol.x, r0);
      if (sep < cfg.sep_tol) continue;
      const Vec x = detail::descend_to_nearest(pieces[pi], sys, sol.x, t, opt, r0, cfg);
      best = std::min(best, (x - t).norm());
    }
  }
  if (!std::isfinite(best)) fail(ErrorKind::NoConvergence, "nearest_distance: no feasible point found");
  return best;
}

/// Coordinate pieces of the ideal, returned only when sampled points of the
/// zero set all lie near one of them (relative distance <= 0.05).
inline std::vector<std::vector<std::size_t>> coordinate_cover(const IdealGenerators& ideal, std::uint64_t seed,
                                                              const SamplerConfig& cfg = {}) {
  auto pieces = coordinate_pieces(ideal);
  if (pieces.empty() || (pieces.size() == 1 && pieces[0].size() == ideal.variables.size())) return {};
  const auto set = ConstructibleSet::from_ideal(ideal);
  for (double r : {0.1, 1.0})
    for (std::uint64_t j = 0; j < 8; ++j) {
      // One point per call, so a point off every piece ends the search early.
      auto cloud = try_sample_on_sphere(set, r, 1, sub_seed(seed, 0xC0DE, static_cast<std::uint64_t>(r * 1000) * 16 + j), cfg);
      if (cloud.empty()) break;
      for (const auto& p : cloud.points) {
        double best = INFINITY;
        for (const auto& I : pieces) {
          double d = 0.0;
          for (auto i : I) d += p[i] * p[i];
          best = std::min(best, std::sqrt(d));
        }
        if (best > 0.05 * r) return {};
      }
    }
  return pieces;
}

/// Replace every inequation-free piece that is a union of coordinate subspaces
/// by those linear pieces. High-multiplicity generators otherwise cap the
/// positional accuracy of samples at roughly tol^(1/multiplicity).
inline ConstructibleSet linearized(const ConstructibleSet& s, std::uint64_t seed, const SamplerConfig& cfg = {}) {
  std::vector<BasicPiece> out;
  for (const auto& piece : s.pieces()) {
    auto cover = piece.equations.empty()
                     ? std::vector<std::vector<std::size_t>>{}
                     : coordinate_cover(make_ideal(s.variables(), piece.equations), seed, cfg);
    if (cover.empty()) {
      out.push_back(piece);
      continue;
    }
    for (const auto& I : cover) {
      BasicPiece b;
      for (auto i : I) b.equations.push_back(Polynomial::variable(s.variables(), s.variables()[i]));
      b.inequations = piece.inequations;
      out.push_back(std::move(b));
    }
  }
  return ConstructibleSet(s.variables(), std::move(out));
}

/// Points of a (on the sphere) that are not members of b at reject_tol; may be empty.
inline SampleCloud try_set_difference_samples(const ConstructibleSet& a, const ConstructibleSet& b, double radius,
                                              std::size_t count, std::uint64_t seed, const SamplerConfig& cfg = {}) {
  auto cloud = try_sample_on_sphere(a, radius, 2 * count, seed, cfg);
  SampleCloud out = cloud;
  out.points.clear();
  out.residuals.clear();
  for (std::size_t i = 0; i < cloud.points.size() && out.points.size() < count; ++i) {
    if (member_float(b, cloud.points[i], cfg.reject_tol)) continue;
    out.points.push_back(cloud.points[i]);
    out.residuals.push_back(cloud.residuals[i]);
  }
  if (out.points.empty() && cloud.diagnostics.empty()) out.diagnostics = "all samples of the first set lie in the second";
  return out;
}

/// Points of a (on the sphere) that are not members of b at reject_tol.
inline SampleCloud set_difference_samples(const ConstructibleSet& a, const ConstructibleSet& b, double radius,
                                          std::size_t count, std::uint64_t seed, const SamplerConfig& cfg = {}) {
  auto cloud = sample_on_sphere(a, radius, 2 * count, seed, cfg);
  SampleCloud out = cloud;
  out.points.clear();
  out.residuals.clear();
  for (std::size_t i = 0; i < cloud.points.size() && out.points.size() < count; ++i) {
    if (member_float(b, cloud.points[i], cfg.reject_tol)) continue;
    out.points.push_back(cloud.points[i]);
    out.residuals.push_back(cloud.residuals[i]);
  }
  if (out.points.empty()) out.diagnostics = "all samples of the first set lie in the second";
  return out;
}

inline void write_cloud_csv(const SampleCloud& cloud, const std::string& path) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::InvalidInput, "cannot open " + path + " for writing");
  for (std::size_t i = 0; i < cloud.variables.size(); ++i) os << (i ? "," : "") << cloud.variables[i];
  os << "\n";
  os.precision(17);
  for (const auto& p : cloud.points) {
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
    os << "\n";
  }
}

inline nlohmann::json cloud_sidecar(const SampleCloud& cloud) {
  double max_res = 0.0, mean_res = 0.0;
  for (double r : cloud.residuals) {
    max_res = std::max(max_res, r);
    mean_res += r;
  }
  if (!cloud.residuals.empty()) mean_res /= static_cast<double>(cloud.residuals.size());
  return {{"variables", cloud.variables},
          {"count", cloud.points.size()},
          {"radius", cloud.radius},
          {"seed", cloud.seed},
          {"tol", cloud.tol},
          {"sep_tol", cloud.sep_tol},
          {"starts_used", cloud.starts_used},
          {"residual_max", max_res},
          {"residual_mean", mean_res},
          {"diagnostics", cloud.diagnostics}};
}

}  // namespace milnor
