#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "milnor/compiled.hpp"
#include "milnor/jacobian.hpp"
#include "milnor/semialg.hpp"
#include "milnor/solver.hpp"

namespace milnor {

/// Knobs shared by the tameness and composite-condition searches.
struct TameConfig {
  std::vector<double> radii{0.2, 0.1, 0.05, 0.025};
  double exclusion_radius = 0.02;
  double composite_exclusion = 1e-3;
  double margin = 0.1;
  double witness_tol = 1e-5;
  double delta0 = 0.05;
  double rank_tol = 1e-10;
  double ladder_tol = 1e-9;
  double seed_sep = 1e-4;
  int random_starts = 40;
  int near_starts = 24;
  int sing_samples = 16;
  int max_ladders = 6;
  int min_rungs = 4;
  std::uint64_t seed = 1;
  SamplerConfig sampler{};

  /// Number of halvings so that delta0 * 2^-J <= witness_tol.
  int ladder_steps() const {
    if (!(witness_tol > 0) || !(delta0 > 0)) fail(ErrorKind::InvalidTolerance, "ladder tolerances must be positive");
    return std::max(0, static_cast<int>(std::ceil(std::log2(delta0 / witness_tol) - 1e-12)));
  }

  double rung(int j) const { return delta0 * std::ldexp(1.0, -j); }

  void validate() const {
    sampler.validate();
    if (radii.empty()) fail(ErrorKind::InvalidInput, "radius ladder is empty");
    for (double r : radii)
      if (!(r > 0)) fail(ErrorKind::InvalidInput, "radii must be positive");
    if (!(margin > 0) || !(exclusion_radius > 0) || !(rank_tol > 0) || !(ladder_tol > 0))
      fail(ErrorKind::InvalidTolerance, "tameness tolerances must be positive");
    ladder_steps();
  }
};

struct LadderRung {
  std::vector<double> point;   // source point on M \ Sing
  std::vector<double> target;  // nearby point of the target set
  double distance = 0.0;
};

struct Witness {
  std::vector<double> accumulation_point;
  std::vector<LadderRung> ladder;
  double slice = 0.0;
};

struct SliceEvidence {
  double slice = 0.0;
  std::size_t target_samples = 0;
  std::size_t seeds = 0;
  double min_relative = INFINITY;  // min distance / ||image||
  double min_distance = INFINITY;
  double max_distance = 0.0;
  int ladders_tried = 0;
  int best_ladder_rungs = 0;
};

namespace polar {

/// e(x) = (I - Q Q^T) grad rho / |grad rho| with Q spanning the row space of dP.
/// It vanishes exactly on M_rho(P) \ Sing P and is invariant under scaling of P.
class RankResidual {
 public:
  RankResidual(const PolyMap& p, const Polynomial& rho)
      : P_(p), rho_(rho), m_(p.source_dim()), n_(p.target_dim()) {}

  std::size_t dim() const noexcept { return m_; }

  Vec eval(const Vec& x, double* sigma_ratio = nullptr, Mat* complement = nullptr) const {
    const Mat J = P_.jacobian(x);
    Vec g(static_cast<Eigen::Index>(m_));
    rho_.value_grad(x, g);
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullV);
    const auto k = static_cast<Eigen::Index>(std::min(n_, m_));
    const Mat V = svd.matrixV().leftCols(k);
    if (sigma_ratio) {
      const auto& s = svd.singularValues();
      *sigma_ratio = s[0] > 0 ? s[k - 1] / s[0] : 0.0;
    }
    if (complement) *complement = svd.matrixV().rightCols(static_cast<Eigen::Index>(m_) - k);
    const double gn = g.norm();
    if (gn == 0.0) return Vec::Zero(static_cast<Eigen::Index>(m_));
    return (g - V * (V.transpose() * g)) / gn;
  }

  std::size_t codim() const noexcept { return m_ - std::min(n_, m_); }

  /// W^T e with W an orthonormal basis of the complement of the row space at x,
  /// plus its forward-difference Jacobian. Only M - N components are independent,
  /// so solving on the full e would chase second-order noise.
  void reduced(const Vec& x, double h, Eigen::Ref<Vec> r, Eigen::Ref<Mat> jac) const {
    Mat W;
    const Vec e0 = eval(x, nullptr, &W);
    r = W.transpose() * e0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m_); ++j) {
      Vec xp = x;
      xp[j] += h;
      jac.col(j) = W.transpose() * (eval(xp) - e0) / h;
    }
  }

  double sigma_ratio(const Vec& x) const {
    double s = 0.0;
    eval(x, &s);
    return s;
  }

  const CompiledPoly& rho() const { return rho_; }

 private:
  CompiledSystem P_;
  CompiledPoly rho_;
  std::size_t m_, n_;
};

/// Point t*u with rho(t*u) = level (rho is positive on rays).
inline Vec on_level(const CompiledPoly& rho, const Vec& u, double level) {
  double hi = 1e-3;
  while (rho.value(hi * u) < level && hi < 1e6) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (rho.value(mid * u) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) * u;
}

/// Min-norm projection of z onto the zero set of `gens`.
inline std::optional<Vec> project(const CompiledSystem& gens, const Vec& z, double tol) {
  if (gens.size() == 0) return z;
  const double r = std::max(z.norm(), 1e-12);
  std::vector<double> scales;
  for (std::size_t i = 0; i < gens.size(); ++i) scales.push_back(gens[i].scale_at(r));
  ResidualFn fn = [&](const Vec& y, Vec& out, Mat& jac) {
    gens.values_jacobian(y, out, jac);
    for (std::size_t i = 0; i < scales.size(); ++i) {
      out[static_cast<Eigen::Index>(i)] /= scales[i];
      jac.row(static_cast<Eigen::Index>(i)) /= scales[i];
    }
  };
  SolverOptions opt;
  opt.tol = tol;
  opt.max_iter = 120;
  auto sol = gauss_newton(fn, z, opt);
  if (!sol.converged) return std::nullopt;
  return sol.x;
}

/// Search for points of M_rho(P) \ Sing P on rho-slices and measure how close
/// their images under T come to the target set S (in T's target space).
/// With T the identity and S = Sing P this is the tameness condition; with
/// P = G o F, T = F and S = Sing G it is the composite condition.
class Engine {
 public:
  static constexpr double kSubRatio = 0.7071067811865476;

  Engine(const PolyMap& P, const Polynomial& rho, const PolyMap& T, const IdealGenerators& S, const TameConfig& cfg,
         bool relative_seed_sep)
      : residual_(P, rho),
        rho_poly_(rho),
        T_(T),
        S_(S),
        Tc_(T),
        Sc_(S.generators),
        cfg_(cfg),
        relative_sep_(relative_seed_sep) {
    pieces_ = coordinate_cover(S, cfg.seed, cfg.sampler);
    exact_ = !pieces_.empty();
    if (exact_) {
      std::vector<BasicPiece> linear;
      for (const auto& I : pieces_) {
        BasicPiece b;
        for (auto i : I) b.equations.push_back(Polynomial::variable(S.variables, S.variables[i]));
        linear.push_back(std::move(b));
      }
      source_targets_ = ConstructibleSet(S.variables, std::move(linear)).preimage(T);
    } else {
      source_targets_ = ConstructibleSet::from_ideal(S).preimage(T);
    }
  }

  /// True when S was recognised as a union of coordinate subspaces.
  bool exact_pieces() const noexcept { return exact_; }

  struct Seed {
    Vec x;
    Vec y;
    double distance;
    double relative;
    int piece = -1;  // coordinate piece realising the distance, or -1
  };

  struct Result {
    std::vector<SliceEvidence> slices;
    std::optional<Witness> witness;
    bool targets_empty = true;  // no target samples on any slice
    bool seeds_empty = true;    // no M \ Sing points on any slice
  };

  Result run() const {
    Result out;
    for (std::size_t si = 0; si < cfg_.radii.size(); ++si) {
      const double s = cfg_.radii[si];
      SliceEvidence ev;
      ev.slice = s;
      auto targets = sample_targets(s, si);
      ev.target_samples = targets.size();
      if (!targets.empty()) out.targets_empty = false;
      auto seeds = find_seeds(s, si, targets);
      ev.seeds = seeds.size();
      if (!seeds.empty()) out.seeds_empty = false;
      for (const auto& sd : seeds) {
        ev.min_relative = std::min(ev.min_relative, sd.relative);
        ev.min_distance = std::min(ev.min_distance, sd.distance);
        ev.max_distance = std::max(ev.max_distance, sd.distance);
      }
      if (!out.witness && !targets.empty()) {
        std::vector<const Seed*> order;
        for (const auto& sd : seeds) order.push_back(&sd);
        std::sort(order.begin(), order.end(),
                  [](const Seed* a, const Seed* b) { return a->relative < b->relative; });
        for (const Seed* sd : order) {
          if (ev.ladders_tried >= cfg_.max_ladders) break;
          ++ev.ladders_tried;
          auto w = ladder(*sd, s);
          ev.best_ladder_rungs = std::max<int>(ev.best_ladder_rungs, static_cast<int>(w.ladder.size()));
          if (is_witness(w)) {
            out.witness = std::move(w);
            break;
          }
        }
      }
      out.slices.push_back(ev);
    }
    return out;
  }

  bool is_witness(const Witness& w) const {
    const int J = cfg_.ladder_steps();
    if (static_cast<int>(w.ladder.size()) < std::min(cfg_.min_rungs, J + 1)) return false;
    if (w.ladder.back().distance > cfg_.witness_tol * (1 + 1e-6)) return false;
    const double norm = to_vec(w.accumulation_point).norm();
    return norm >= exclusion() && norm >= 10.0 * w.ladder.back().distance;
  }

  double exclusion() const { return relative_sep_ ? cfg_.exclusion_radius : cfg_.composite_exclusion; }

 private:
  /// Exact distance from y to the nearest coordinate piece, and the nearest point.
  std::pair<int, Vec> nearest_piece(const Vec& y) const {
    int best = -1;
    double bd = INFINITY;
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
      double d = 0.0;
      for (auto i : pieces_[k]) d += y[static_cast<Eigen::Index>(i)] * y[static_cast<Eigen::Index>(i)];
      if (d < bd) {
        bd = d;
        best = static_cast<int>(k);
      }
    }
    Vec p = y;
    for (auto i : pieces_[static_cast<std::size_t>(best)]) p[static_cast<Eigen::Index>(i)] = 0.0;
    return {best, p};
  }

  std::vector<Vec> sample_targets(double s, std::size_t si) const {
    std::vector<Vec> out;
    if (source_targets_.pieces().empty()) return out;
    auto cloud = detail::sample_on_level(source_targets_, residual_.rho(), s * s, s, s,
                                         static_cast<std::size_t>(cfg_.sing_samples), cfg_.seed, cfg_.sampler,
                                         0x7A00 + si);
    for (const auto& p : cloud.points) out.push_back(to_vec(p));
    return out;
  }

  ResidualFn seed_system(double s) const {
    return [this, s](const Vec& x, Vec& r, Mat& jac) {
      const auto m = static_cast<Eigen::Index>(residual_.dim());
      const auto c = static_cast<Eigen::Index>(residual_.codim());
      r.resize(c + 1);
      jac.resize(c + 1, m);
      residual_.reduced(x, 1e-4 * s, r.head(c), jac.topRows(c));
      Vec g(m);
      r[c] = (residual_.rho().value_grad(x, g) - s * s) / (s * s);
      jac.row(c) = g.transpose() / (s * s);
    };
  }

  std::vector<Seed> find_seeds(double s, std::size_t si, const std::vector<Vec>& targets) const {
    std::vector<Seed> seeds;
    const auto fn = seed_system(s);
    SolverOptions opt = cfg_.sampler.solver();
    opt.tol = cfg_.rank_tol;
    const std::size_t M = residual_.dim();
    const int total = cfg_.random_starts + (targets.empty() ? 0 : cfg_.near_starts);
    for (int k = 0; k < total; ++k) {
      Rng rng(sub_seed(cfg_.seed, 0x5E00 + si, static_cast<std::uint64_t>(k)));
      Vec x0;
      if (k < cfg_.random_starts) {
        x0 = on_level(residual_.rho(), rng.direction(M), s * s);
      } else {
        const Vec& t = targets[static_cast<std::size_t>(k) % targets.size()];
        const double scale = std::pow(10.0, -2.0 + 1.5 * rng.uniform());
        x0 = t + scale * t.norm() * rng.direction(M);
      }
      auto sol = gauss_newton(fn, x0, opt, &rng);
      if (!sol.converged) continue;
      if (residual_.sigma_ratio(sol.x) < 1e-7) continue;
      bool dup = false;
      for (const auto& sd : seeds)
        if ((sd.x - sol.x).norm() <= 1e-3 * s) dup = true;
      if (dup) continue;
      Seed sd;
      sd.x = sol.x;
      const Vec img = Tc_.values(sol.x);
      const double img_norm = img.norm();
      if (S_.is_whole_space()) continue;
      if (S_.is_empty_set()) {
        sd.y = img;
        sd.distance = INFINITY;
        sd.relative = INFINITY;
      } else if (exact_) {
        auto [k, y] = nearest_piece(img);
        sd.piece = k;
        sd.y = y;
        sd.distance = (y - img).norm();
        sd.relative = img_norm > 0 ? sd.distance / img_norm : INFINITY;
      } else {
        auto y = project(Sc_, img, cfg_.sampler.tol);
        for (const auto& t : targets) {
          // Sampled targets give a second upper bound when projection misses.
          if (T_is_identity() && (!y || (t - img).norm() < (*y - img).norm())) y = t;
        }
        if (!y) continue;
        sd.y = *y;
        sd.distance = (*y - img).norm();
        sd.relative = img_norm > 0 ? sd.distance / img_norm : INFINITY;
      }
      const double sep = relative_sep_ ? cfg_.seed_sep : 1e-9;
      if (sd.relative < sep) continue;
      seeds.push_back(std::move(sd));
    }
    return seeds;
  }

  bool T_is_identity() const { return relative_sep_; }

  /// Continuation on x alone: x on M \ Sing and the slice, |T(x)_I| = delta.
  ResidualFn piece_system(double s, double delta, const std::vector<std::size_t>& I) const {
    return [this, s, delta, &I](const Vec& x, Vec& r, Mat& jac) {
      const auto M = static_cast<Eigen::Index>(residual_.dim());
      const auto C = static_cast<Eigen::Index>(residual_.codim());
      r.setZero(C + 2);
      jac.setZero(C + 2, M);
      residual_.reduced(x, std::max(1e-3 * std::min(s, delta), 1e-10), r.head(C), jac.topRows(C));
      Vec g(M);
      r[C] = (residual_.rho().value_grad(x, g) - s * s) / (s * s);
      jac.row(C) = g.transpose() / (s * s);
      Vec tv;
      Mat tj;
      Tc_.values_jacobian(x, tv, tj);
      double d2 = 0.0;
      for (auto i : I) {
        const auto ii = static_cast<Eigen::Index>(i);
        d2 += tv[ii] * tv[ii];
        jac.row(C + 1) += 2.0 * tv[ii] * tj.row(ii) / (delta * delta);
      }
      r[C + 1] = (d2 - delta * delta) / (delta * delta);
    };
  }

  /// Continuation on (x, y): x on M \ Sing and the slice, y on S, |T(x) - y| = delta.
  ResidualFn ladder_system(double s, double delta, double yscale) const {
    std::vector<double> scales;
    for (std::size_t i = 0; i < Sc_.size(); ++i) scales.push_back(Sc_[i].scale_at(yscale));
    return [this, s, delta, scales](const Vec& z, Vec& r, Mat& jac) {
      const auto M = static_cast<Eigen::Index>(residual_.dim());
      const auto K = static_cast<Eigen::Index>(T_.target_dim());
      const auto nS = static_cast<Eigen::Index>(Sc_.size());
      const auto C = static_cast<Eigen::Index>(residual_.codim());
      const Vec x = z.head(M), y = z.tail(K);
      r.setZero(C + 2 + nS);
      jac.setZero(C + 2 + nS, M + K);
      residual_.reduced(x, std::max(1e-3 * std::min(s, delta), 1e-10), r.head(C), jac.topLeftCorner(C, M));
      Vec g(M);
      r[C] = (residual_.rho().value_grad(x, g) - s * s) / (s * s);
      jac.block(C, 0, 1, M) = g.transpose() / (s * s);
      Vec sv;
      Mat sj;
      Sc_.values_jacobian(y, sv, sj);
      for (Eigen::Index i = 0; i < nS; ++i) {
        r[C + 1 + i] = sv[i] / scales[static_cast<std::size_t>(i)];
        jac.block(C + 1 + i, M, 1, K) = sj.row(i) / scales[static_cast<std::size_t>(i)];
      }
      Vec tv;
      Mat tj;
      Tc_.values_jacobian(x, tv, tj);
      const Vec diff = tv - y;
      const auto last = C + 1 + nS;
      r[last] = (diff.squaredNorm() - delta * delta) / (delta * delta);
      jac.block(last, 0, 1, M) = 2.0 * diff.transpose() * tj / (delta * delta);
      jac.block(last, M, 1, K) = -2.0 * diff.transpose() / (delta * delta);
    };
  }

  Witness ladder(const Seed& seed, double s) const {
    Witness w;
    w.slice = s;
    const auto M = static_cast<Eigen::Index>(residual_.dim());
    const auto K = static_cast<Eigen::Index>(T_.target_dim());
    const bool exact = seed.piece >= 0;
    Vec z(exact ? M : M + K);
    if (exact) z = seed.x;
    else z << seed.x, seed.y;
    const double yscale = std::max(seed.y.norm(), 1e-12);
    SolverOptions opt = cfg_.sampler.solver();
    opt.tol = cfg_.ladder_tol;
    opt.max_iter = 60;
    const int J = cfg_.ladder_steps();
    int j0 = 0;
    while (j0 <= J && cfg_.rung(j0) >= seed.distance) ++j0;
    if (j0 > J) return w;
    // Unrecorded continuation from the seed distance down to the first rung.
    auto step_to = [&](double d) {
      opt.max_step = 0.5 * d;
      auto sol = gauss_newton(exact ? piece_system(s, d, pieces_[static_cast<std::size_t>(seed.piece)])
                                    : ladder_system(s, d, yscale),
                              z, opt);
      if (sol.converged) z = sol.x;
      return sol;
    };
    for (double d = seed.distance * kSubRatio; d > cfg_.rung(j0); d *= kSubRatio)
      if (!step_to(d).converged) return w;
    for (int j = j0; j <= J; ++j) {
      const double delta = cfg_.rung(j);
      bool ok = true;
      if (j > j0)
        for (double d = cfg_.rung(j - 1) * kSubRatio; d > delta * 1.0001 && ok; d *= kSubRatio) ok = step_to(d).converged;
      if (!ok) break;
      auto sol = step_to(delta);
      if (!sol.converged) break;
      const Vec x = z.head(M);
      if (residual_.sigma_ratio(x) <= 1e-12) break;
      const Vec img = Tc_.values(x);
      const Vec y = exact ? nearest_piece(img).second : Vec(z.tail(K));
      LadderRung rung;
      rung.point = to_std(x);
      rung.target = to_std(y);
      rung.distance = (img - y).norm();
      if (!w.ladder.empty() && !(rung.distance < w.ladder.back().distance)) break;
      w.ladder.push_back(std::move(rung));
    }
    if (!w.ladder.empty()) w.accumulation_point = w.ladder.back().target;
    return w;
  }

  RankResidual residual_;
  Polynomial rho_poly_;
  PolyMap T_;
  IdealGenerators S_;
  CompiledSystem Tc_;
  CompiledSystem Sc_;
  TameConfig cfg_;
  bool relative_sep_;
  ConstructibleSet source_targets_;
  std::vector<std::vector<std::size_t>> pieces_;
  bool exact_ = false;
};

}  // namespace polar
}  // namespace milnor
