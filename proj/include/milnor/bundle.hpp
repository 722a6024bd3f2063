#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "milnor/report.hpp"

namespace milnor {

/// Parsed input document: maps, optional rho overrides, named sets, analysis config, stored verdicts.
struct MapBundle {
  std::string name;
  VariableList source, middle;
  PolyMap F;
  std::optional<PolyMap> G;
  std::optional<Polynomial> rho, rho_G;
  std::map<std::string, ConstructibleSet> sets;
  TameConfig tame;
  CompositeConfig composite;
  DegreeConfig degree;
  double euler_radius = 0.1;
  json expected = json::object();

  bool has_G() const noexcept { return G.has_value(); }
  PolyMap H() const { return compose(*G, F); }

  const PolyMap& map(const std::string& which) const {
    if (which == "F") return F;
    if (which == "G" && G) return *G;
    if (which == "H" && G) {
      if (!H_) H_ = H();
      return *H_;
    }
    fail(ErrorKind::InvalidInput, "bundle has no map " + which);
  }

  /// rho for the source of F (also used for H) or for the source of G.
  Rho rho_for(const std::string& which) const {
    if (which == "G") return Rho{rho_G ? *rho_G : euclidean_rho(middle), false};
    return Rho{rho ? *rho : euclidean_rho(source), false};
  }

  /// M >= N >= K >= 2.
  void require_chain() const {
    if (!G) fail(ErrorKind::InvalidInput, "composite commands need a map G");
    const auto m = F.source_dim(), n = F.target_dim(), k = G->target_dim();
    if (!(m >= n && n >= k && k >= 2))
      fail(ErrorKind::DimensionMismatch, "dimension chain M >= N >= K >= 2 violated: " + std::to_string(m) + ", " +
                                             std::to_string(n) + ", " + std::to_string(k));
  }

  void set_radii(const std::vector<double>& radii) {
    tame.radii = radii;
    composite.radii = radii;
  }

  void set_seed(std::uint64_t seed) {
    tame.seed = seed;
    composite.seed = seed;
    degree.seed = seed;
  }

 private:
  mutable std::optional<PolyMap> H_;
};

namespace detail {

inline std::vector<std::string> string_list(const json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorKind::InvalidInput, what + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) fail(ErrorKind::InvalidInput, what + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline double positive(const json& j, const std::string& key) {
  if (!j.is_number()) fail(ErrorKind::InvalidInput, key + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(ErrorKind::NonFinite, key + " is not finite");
  if (!(v > 0)) fail(ErrorKind::InvalidTolerance, key + " must be positive");
  return v;
}

/// Applies "key": value tolerance overrides; unknown keys are rejected.
inline void apply_tolerance(MapBundle& b, const std::string& key, double v) {
  if (!std::isfinite(v)) fail(ErrorKind::NonFinite, key + " is not finite");
  if (!(v > 0)) fail(ErrorKind::InvalidTolerance, key + " must be positive");
  if (key == "member") b.composite.member_tol = v;
  else if (key == "image") b.composite.image_tol = v;
  else if (key == "witness") b.tame.witness_tol = v;
  else if (key == "margin") b.tame.margin = v;
  else if (key == "exclusion") b.tame.exclusion_radius = v;
  else if (key == "rank") b.tame.rank_tol = v;
  else if (key == "ladder") b.tame.ladder_tol = v;
  else if (key == "sampler") b.tame.sampler.tol = b.composite.sampler.tol = v;
  else if (key == "delta0") b.tame.delta0 = v;
  else fail(ErrorKind::InvalidInput, "unknown tolerance " + key);
}

}  // namespace detail

/// start * 2^-k for k < steps.
inline std::vector<double> radius_ladder(double start, int steps) {
  if (!(start > 0) || !std::isfinite(start)) fail(ErrorKind::InvalidInput, "ladder start must be positive");
  if (steps < 1) fail(ErrorKind::InvalidInput, "ladder needs at least one step");
  std::vector<double> r;
  for (int k = 0; k < steps; ++k) r.push_back(std::ldexp(start, -k));
  return r;
}

inline MapBundle parse_bundle(const json& j) {
  if (!j.is_object()) fail(ErrorKind::InvalidInput, "bundle must be a JSON object");
  MapBundle b;
  b.name = j.value("name", std::string("bundle"));
  if (!j.contains("variables") || !j["variables"].contains("source"))
    fail(ErrorKind::InvalidInput, "bundle needs variables.source");
  const auto& vars = j["variables"];
  b.source = detail::string_list(vars["source"], "variables.source");
  if (!j.contains("F")) fail(ErrorKind::InvalidInput, "bundle needs a map F");
  b.F = PolyMap::parse(b.source, detail::string_list(j["F"], "F"));
  if (vars.contains("middle")) {
    b.middle = detail::string_list(vars["middle"], "variables.middle");
  } else {
    for (std::size_t i = 0; i < b.F.target_dim(); ++i) b.middle.push_back("y" + std::to_string(i + 1));
  }
  if (b.middle.size() != b.F.target_dim())
    fail(ErrorKind::DimensionMismatch, "variables.middle must have one name per component of F");
  if (j.contains("G")) b.G = PolyMap::parse(b.middle, detail::string_list(j["G"], "G"));
  if (j.contains("rho")) {
    b.rho = parse_polynomial(j["rho"].get<std::string>(), b.source);
    validate_rho(*b.rho);
  }
  if (j.contains("rho_G")) {
    b.rho_G = parse_polynomial(j["rho_G"].get<std::string>(), b.middle);
    validate_rho(*b.rho_G);
  }
  if (j.contains("sets")) {
    for (const auto& [name, spec] : j["sets"].items()) {
      const std::string space = spec.value("space", std::string("source"));
      if (space != "source" && space != "middle") fail(ErrorKind::InvalidInput, "set space must be source or middle");
      std::vector<std::vector<std::string>> pieces;
      for (const auto& p : spec.at("pieces")) pieces.push_back(detail::string_list(p, "set piece"));
      b.sets.emplace(name, ConstructibleSet::parse(space == "source" ? b.source : b.middle, pieces));
    }
  }
  if (j.contains("config")) {
    const auto& c = j["config"];
    if (c.contains("radii")) {
      std::vector<double> radii;
      for (const auto& r : c["radii"]) radii.push_back(detail::positive(r, "radius"));
      if (radii.empty()) fail(ErrorKind::InvalidInput, "radius ladder is empty");
      b.set_radii(radii);
    }
    if (c.contains("seed")) b.set_seed(c["seed"].get<std::uint64_t>());
    if (c.contains("samples")) b.composite.samples = c["samples"].get<std::size_t>();
    if (c.contains("euler_radius")) b.euler_radius = detail::positive(c["euler_radius"], "euler_radius");
    if (c.contains("tol"))
      for (const auto& [k, v] : c["tol"].items()) detail::apply_tolerance(b, k, detail::positive(v, k));
  }
  if (j.contains("expected")) b.expected = j["expected"];
  b.tame.validate();
  b.composite.validate();
  return b;
}

inline MapBundle load_bundle(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::InvalidInput, "cannot open bundle " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::SyntaxError, std::string("bundle is not valid JSON: ") + e.what());
  }
  return parse_bundle(j);
}

/// Named sets available for export: overrides first, then the derived sets.
inline ConstructibleSet bundle_set(const MapBundle& b, const std::string& name) {
  if (auto it = b.sets.find(name); it != b.sets.end()) return it->second;
  auto pick = [&](const std::string& which) -> const PolyMap& { return b.map(which); };
  if (name.size() > 1) {
    const std::string which(1, name.back());
    if (name == "Sing " + which || name == "Sing_" + which)
      return ConstructibleSet::from_ideal(singular_set_ideal(pick(which)));
    if (name == "M_" + which) return ConstructibleSet::from_ideal(milnor_set_ideal(pick(which), b.rho_for(which).poly));
    if (name == "V_" + which) return detail::zero_set(pick(which));
  }
  fail(ErrorKind::InvalidInput, "unknown set " + name);
}

}  // namespace milnor
