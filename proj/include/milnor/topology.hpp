#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "milnor/compiled.hpp"
#include "milnor/jacobian.hpp"
#include "milnor/rng.hpp"
#include "milnor/semialg.hpp"
#include "milnor/solver.hpp"

namespace milnor {

struct DegreeConfig {
  int directions = 7;
  int starts = 0;  // 0: 64 + 32 * M
  double dedup_factor = 1e-4;
  double tol = 1e-12;
  std::uint64_t seed = 1;
  bool quadrature = true;  // cross-check for M <= 3
  int quad_panels = 64;

  int start_count(std::size_t m) const { return starts > 0 ? starts : 64 + 32 * static_cast<int>(m); }
};

struct DegreeResult {
  int degree = 0;
  std::vector<int> per_direction;
  std::optional<double> quadrature;  // Kronecker integral, before rounding
  bool methods_agree = true;
  std::string diagnostics;
};

/// chi(S^n) = 1 + (-1)^n.
inline int chi_sphere(long n) { return n % 2 == 0 ? 2 : 0; }

namespace detail {

/// Orthonormal basis of the complement of the unit vector u (columns).
inline Mat complement_basis(const Vec& u) {
  const Mat um = u;
  Eigen::HouseholderQR<Mat> qr(um);
  const Mat Q = qr.householderQ();
  return Q.rightCols(u.size() - 1);
}

class GradientField {
 public:
  explicit GradientField(const Polynomial& f) {
    std::vector<Polynomial> g;
    for (std::size_t i = 0; i < f.nvars(); ++i) g.push_back(f.derivative(i));
    grad_ = CompiledSystem(g);
    m_ = f.nvars();
  }

  std::size_t dim() const noexcept { return m_; }
  void eval(const Vec& x, Vec& g, Mat& hess) const { grad_.values_jacobian(x, g, hess); }
  Vec value(const Vec& x) const { return grad_.values(x); }

  double scale(double r) const {
    double s = 0.0;
    for (std::size_t i = 0; i < grad_.size(); ++i) s += grad_[i].scale_at(r);
    return s > 0 ? s : 1.0;
  }

 private:
  CompiledSystem grad_;
  std::size_t m_ = 0;
};

/// Solve grad f(x) = 0 on the sphere; true when some start converges.
inline bool gradient_zero_on_sphere(const GradientField& gf, double r, std::uint64_t seed) {
  const double s = gf.scale(r);
  ResidualFn fn = [&](const Vec& x, Vec& res, Mat& jac) {
    const auto m = static_cast<Eigen::Index>(gf.dim());
    Vec g;
    Mat h;
    gf.eval(x, g, h);
    res.resize(m + 1);
    jac.resize(m + 1, m);
    res.head(m) = g / s;
    jac.topRows(m) = h / s;
    res[m] = (x.squaredNorm() - r * r) / (r * r);
    jac.row(m) = 2.0 * x.transpose() / (r * r);
  };
  SolverOptions opt;
  opt.tol = 1e-10;
  for (int k = 0; k < 32; ++k) {
    Rng rng(sub_seed(seed, 0x6A0, static_cast<std::uint64_t>(k)));
    auto sol = gauss_newton(fn, r * rng.direction(gf.dim()), opt, &rng);
    if (sol.converged) return true;
  }
  return false;
}

/// Signed count of preimages of the unit vector u under grad f / |grad f| on the sphere.
inline int preimage_count(const GradientField& gf, double r, const Vec& u, const DegreeConfig& cfg, std::uint64_t stream,
                          std::size_t* found = nullptr) {
  const auto m = static_cast<Eigen::Index>(gf.dim());
  const Mat W = complement_basis(u);
  const double s = gf.scale(r);
  ResidualFn fn = [&](const Vec& x, Vec& res, Mat& jac) {
    Vec g;
    Mat h;
    gf.eval(x, g, h);
    res.resize(m);
    jac.resize(m, m);
    res.head(m - 1) = W.transpose() * g / s;
    jac.topRows(m - 1) = W.transpose() * h / s;
    res[m - 1] = (x.squaredNorm() - r * r) / (r * r);
    jac.row(m - 1) = 2.0 * x.transpose() / (r * r);
  };
  SolverOptions opt;
  opt.tol = cfg.tol;
  opt.max_iter = 100;
  std::vector<Vec> sols;
  int total = 0;
  const int starts = cfg.start_count(gf.dim());
  for (int k = 0; k < starts; ++k) {
    Rng rng(sub_seed(cfg.seed, stream, static_cast<std::uint64_t>(k)));
    auto sol = gauss_newton(fn, r * rng.direction(gf.dim()), opt, &rng);
    if (!sol.converged) continue;
    Vec g;
    Mat h;
    gf.eval(sol.x, g, h);
    if (u.dot(g) <= 0) continue;
    bool dup = false;
    for (const auto& p : sols)
      if ((p - sol.x).norm() <= r * cfg.dedup_factor) dup = true;
    if (dup) continue;
    sols.push_back(sol.x);
    const Vec xh = sol.x.normalized();
    const Mat T = complement_basis(xh);
    Mat A(m, m), B(m, m);
    A << u, h * T;
    B << xh, T;
    const double da = A.determinant(), db = B.determinant();
    total += (da > 0) == (db > 0) ? 1 : -1;
  }
  if (found) *found = sols.size();
  return total;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return {x, w};
}

/// Composite Gauss-Legendre nodes/weights on [a, b].
inline std::vector<std::pair<double, double>> panel_rule(double a, double b, int panels, int order = 8) {
  const auto [x, w] = gauss_legendre(order);
  std::vector<std::pair<double, double>> out;
  const double hpan = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * hpan;
    for (std::size_t i = 0; i < x.size(); ++i) out.emplace_back(lo + 0.5 * hpan * (x[i] + 1.0), 0.5 * hpan * w[i]);
  }
  return out;
}

/// Kronecker integral of grad f / |grad f| over the sphere, M = 2 or 3.
inline double kronecker_integral(const GradientField& gf, double r, int panels) {
  const double pi = std::numbers::pi;
  if (gf.dim() == 2) {
    double acc = 0.0;
    for (auto [t, w] : panel_rule(0.0, 2 * pi, panels)) {
      Vec x(2), dx(2), g;
      Mat h;
      x << r * std::cos(t), r * std::sin(t);
      dx << -r * std::sin(t), r * std::cos(t);
      gf.eval(x, g, h);
      const Vec dg = h * dx;
      acc += w * (g[0] * dg[1] - g[1] * dg[0]) / g.squaredNorm();
    }
    return acc / (2 * pi);
  }
  double acc = 0.0;
  const auto th = panel_rule(0.0, pi, panels / 2);
  const auto ph = panel_rule(0.0, 2 * pi, panels);
  for (auto [t, wt] : th) {
    for (auto [p, wp] : ph) {
      Vec x(3), xt(3), xp(3), g;
      Mat h;
      x << r * std::sin(t) * std::cos(p), r * std::sin(t) * std::sin(p), r * std::cos(t);
      xt << r * std::cos(t) * std::cos(p), r * std::cos(t) * std::sin(p), -r * std::sin(t);
      xp << -r * std::sin(t) * std::sin(p), r * std::sin(t) * std::cos(p), 0.0;
      gf.eval(x, g, h);
      const double gn = g.norm();
      const Vec n = g / gn;
      const Mat P = (Mat::Identity(3, 3) - n * n.transpose()) / gn;
      const Eigen::Vector3d nt = P * h * xt, np = P * h * xp;
      acc += wt * wp * Eigen::Vector3d(n).dot(nt.cross(np));
    }
  }
  return acc / (4 * pi);
}

}  // namespace detail

/// Topological degree of grad f / |grad f| on the sphere of the given radius.
inline DegreeResult gradient_degree(const Polynomial& f, double radius, const DegreeConfig& cfg = {}) {
  if (!(radius > 0)) fail(ErrorKind::InvalidInput, "radius must be positive");
  if (cfg.directions < 1) fail(ErrorKind::InvalidInput, "need at least one direction");
  const std::size_t m = f.nvars();
  if (m == 0) fail(ErrorKind::DimensionMismatch, "polynomial has no variables");
  const detail::GradientField gf(f);
  DegreeResult out;
  if (m == 1) {
    Vec p(1), q(1);
    p << radius;
    q << -radius;
    const double a = gf.value(p)[0], b = gf.value(q)[0];
    if (a == 0.0 || b == 0.0) fail(ErrorKind::GradientVanishesOnSphere, "gradient vanishes on the 0-sphere");
    out.degree = ((a > 0) - (b > 0));
    out.per_direction.assign(1, out.degree);
    return out;
  }
  for (double r : {radius, 0.5 * radius})
    if (detail::gradient_zero_on_sphere(gf, r, cfg.seed))
      fail(ErrorKind::GradientVanishesOnSphere,
           "gradient of " + f.to_string() + " vanishes on the sphere of radius " + std::to_string(r));
  std::map<int, int> votes;
  for (int d = 0; d < cfg.directions; ++d) {
    Rng rng(sub_seed(cfg.seed, 0xDE6, static_cast<std::uint64_t>(d)));
    const Vec u = rng.direction(m);
    const int k = detail::preimage_count(gf, radius, u, cfg, 0xDE60 + static_cast<std::uint64_t>(d));
    out.per_direction.push_back(k);
    ++votes[k];
  }
  auto best = votes.begin();
  for (auto it = votes.begin(); it != votes.end(); ++it)
    if (it->second > best->second) best = it;
  if (2 * best->second <= cfg.directions) {
    std::string all;
    for (int k : out.per_direction) all += (all.empty() ? "" : ",") + std::to_string(k);
    fail(ErrorKind::DegreeDisagreement, "direction counts disagree: " + all);
  }
  out.degree = best->first;
  if (best->second < cfg.directions) out.diagnostics = "minority directions disagreed";
  if (cfg.quadrature && m <= 3) {
    const double q = detail::kronecker_integral(gf, radius, cfg.quad_panels);
    out.quadrature = q;
    const double rq = std::round(q);
    out.methods_agree = std::abs(q - rq) < 0.2 && static_cast<int>(rq) == out.degree;
    if (!out.methods_agree) out.diagnostics += (out.diagnostics.empty() ? "" : "; ") + std::string("quadrature disagrees");
  }
  return out;
}

/// chi(F_F) = 1 - chi(S^M) deg / 2.
inline int euler_fiber(long m, int deg) { return m % 2 == 0 ? 1 - deg : 1; }

/// Four-term composite formula for chi(F_H).
inline int euler_composite(long m, long n, int deg_f1, int deg_g1) {
  const int sm = chi_sphere(m), sn = chi_sphere(n);
  return 1 - sm * deg_f1 / 2 - sn * deg_g1 / 2 + sm * sn * deg_f1 * deg_g1 / 4;
}

struct TubeEuler {
  int chi_tube_H = 0;
  int chi_tube_G = 0;
  bool consistent = false;
};

inline TubeEuler euler_tube(long k, int chi_fiber_h, int chi_fiber_f, int chi_fiber_g) {
  if (k < 2) fail(ErrorKind::InvalidInput, "tube formulas need K >= 2");
  const int s = chi_sphere(k - 1);
  TubeEuler t;
  t.chi_tube_H = s * chi_fiber_h;
  t.chi_tube_G = s * chi_fiber_g;
  t.consistent = t.chi_tube_H == t.chi_tube_G * chi_fiber_f;
  return t;
}

struct EulerReport {
  std::map<std::string, int> degrees;  // "F1", "G2", ...
  std::optional<int> chi_fiber_F, chi_fiber_G, chi_fiber_H;
  std::optional<int> chi_tube_H, chi_tube_G;
  std::size_t M = 0, N = 0, K = 0;
  std::string method = "preimage_count";
  bool methods_agree = true;
  bool multiplicative = true;
  bool tube_consistent = true;
  std::string diagnostics;
};

namespace detail {

/// Degrees of all component gradients; they must coincide.
inline int component_degrees(const PolyMap& f, const std::string& tag, double radius, const DegreeConfig& cfg,
                             EulerReport& rep) {
  std::optional<int> common;
  for (std::size_t i = 0; i < f.target_dim(); ++i) {
    const auto d = gradient_degree(f.components()[i], radius, cfg);
    rep.degrees[tag + std::to_string(i + 1)] = d.degree;
    if (d.quadrature) {
      rep.method = "preimage_count+kronecker_quadrature";
      rep.methods_agree = rep.methods_agree && d.methods_agree;
    }
    if (common && *common != d.degree)
      fail(ErrorKind::DegreeDisagreement, tag + " component gradients have different degrees");
    common = d.degree;
  }
  return *common;
}

inline void require_isolated(const PolyMap& f, const std::string& tag, double radius, const SamplerConfig& scfg,
                             std::uint64_t seed) {
  if (f.source_dim() <= f.target_dim())
    fail(ErrorKind::PreconditionNotMet, tag + " needs source dimension larger than target dimension");
  const auto sing = singular_set_ideal(f);
  if (sing.is_empty_set()) return;
  const auto set = ConstructibleSet::from_ideal(sing);
  for (double r : {radius, 0.5 * radius})
    if (!try_sample_on_sphere(set, r, 1, seed, scfg).empty())
      fail(ErrorKind::PreconditionNotMet, "Sing " + tag + " is not isolated at the origin");
}

}  // namespace detail

/// Degrees and Euler characteristics for F alone or for the pair (F, G).
inline EulerReport euler_report(const PolyMap& f, const std::optional<PolyMap>& g, double radius = 0.1,
                                const DegreeConfig& cfg = {}, const SamplerConfig& scfg = {}) {
  EulerReport rep;
  rep.M = f.source_dim();
  rep.N = f.target_dim();
  detail::require_isolated(f, "F", radius, scfg, cfg.seed);
  const int df = detail::component_degrees(f, "F", radius, cfg, rep);
  if (rep.M % 2 == 1 && df != 0) fail(ErrorKind::DegreeDisagreement, "odd source dimension with nonzero degree");
  rep.chi_fiber_F = euler_fiber(static_cast<long>(rep.M), df);
  if (!g) return rep;
  if (g->source_dim() != rep.N) fail(ErrorKind::DimensionMismatch, "F target dimension differs from G source dimension");
  rep.K = g->target_dim();
  detail::require_isolated(*g, "G", radius, scfg, cfg.seed);
  const int dg = detail::component_degrees(*g, "G", radius, cfg, rep);
  if (rep.N % 2 == 1 && dg != 0) fail(ErrorKind::DegreeDisagreement, "odd source dimension with nonzero degree");
  rep.chi_fiber_G = euler_fiber(static_cast<long>(rep.N), dg);
  rep.chi_fiber_H = euler_composite(static_cast<long>(rep.M), static_cast<long>(rep.N), df, dg);
  rep.multiplicative = *rep.chi_fiber_H == *rep.chi_fiber_F * *rep.chi_fiber_G;
  const auto t = euler_tube(static_cast<long>(rep.K), *rep.chi_fiber_H, *rep.chi_fiber_F, *rep.chi_fiber_G);
  rep.chi_tube_H = t.chi_tube_H;
  rep.chi_tube_G = t.chi_tube_G;
  rep.tube_consistent = t.consistent;
  return rep;
}

}  // namespace milnor
