#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "milnor/commands.hpp"

namespace milnor::testing {

inline VariableList vars(std::initializer_list<const char*> names) { return VariableList(names.begin(), names.end()); }

inline PolyMap map_of(const VariableList& v, std::vector<std::string> comps) { return PolyMap::parse(v, comps); }

/// Random polynomial with `terms` monomials of total degree in [lo, hi], coefficients in [-c, c] \ {0}.
inline Polynomial random_poly(Rng& rng, const VariableList& v, int terms, int lo, int hi, int c = 3) {
  Polynomial::TermMap t;
  for (int k = 0; k < terms; ++k) {
    const int d = static_cast<int>(rng.integer(lo, hi));
    Exponents e(v.size(), 0);
    for (int j = 0; j < d; ++j) ++e[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(v.size()) - 1))];
    std::int64_t q = 0;
    while (q == 0) q = rng.integer(-c, c);
    t[e] += Rational(q);
  }
  return Polynomial::from_terms(v, t);
}

/// Random germ map (no constant terms), each component nonzero.
inline PolyMap random_map(Rng& rng, const VariableList& source, std::size_t target, int max_deg, int terms = 3) {
  std::vector<Polynomial> comps;
  while (comps.size() < target) {
    auto p = random_poly(rng, source, terms, 1, max_deg);
    if (!p.is_zero()) comps.push_back(p);
  }
  return PolyMap(source, comps);
}

inline std::vector<Rational> random_rational_point(Rng& rng, std::size_t n, int range = 5, int den = 7) {
  std::vector<Rational> p;
  for (std::size_t i = 0; i < n; ++i) {
    Rational q(static_cast<long>(rng.integer(-range * den, range * den)), static_cast<unsigned long>(rng.integer(1, den)));
    q.canonicalize();
    p.push_back(q);
  }
  return p;
}

inline std::vector<Rational> rationals(std::initializer_list<long> xs) {
  std::vector<Rational> out;
  for (long x : xs) out.emplace_back(x);
  return out;
}

inline double norm(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

/// Winding number of grad f around the circle of radius r, by dense angle accumulation.
inline int winding_number(const Polynomial& f, double r, int steps = 20000) {
  const auto& v = f.variables();
  const auto fx = differentiate(f, v[0]), fy = differentiate(f, v[1]);
  auto angle = [&](double t) {
    const std::vector<double> p{r * std::cos(t), r * std::sin(t)};
    return std::atan2(evaluate_float(fy, p), evaluate_float(fx, p));
  };
  double total = 0, prev = angle(0);
  for (int k = 1; k <= steps; ++k) {
    const double cur = angle(2 * M_PI * k / steps);
    double d = cur - prev;
    if (d > M_PI) d -= 2 * M_PI;
    if (d < -M_PI) d += 2 * M_PI;
    total += d;
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2 * M_PI)));
}

/// Smallest |grad f| over the circle of radius r.
inline double min_gradient_on_circle(const Polynomial& f, double r, int steps = 4000) {
  const auto& v = f.variables();
  const auto fx = differentiate(f, v[0]), fy = differentiate(f, v[1]);
  double m = INFINITY;
  for (int k = 0; k < steps; ++k) {
    const double t = 2 * M_PI * k / steps;
    const std::vector<double> p{r * std::cos(t), r * std::sin(t)};
    m = std::min(m, std::hypot(evaluate_float(fx, p), evaluate_float(fy, p)));
  }
  return m;
}

/// Planar polynomial of degree <= 4 whose gradient stays away from zero on the circle of radius r.
inline Polynomial random_planar(Rng& rng, double r) {
  const auto v = vars({"x", "y"});
  for (;;) {
    const int d = static_cast<int>(rng.integer(2, 4));
    auto f = random_poly(rng, v, 3, d, d) + random_poly(rng, v, 1, 4, 4);
    if (f.is_zero()) continue;
    if (min_gradient_on_circle(f, r) > 1e-3 * std::pow(r, d - 1)) return f;
  }
}

inline std::string bundle_path(const std::string& name) { return std::string(MILNOR_BUNDLE_DIR) + "/" + name + ".json"; }

}  // namespace milnor::testing
