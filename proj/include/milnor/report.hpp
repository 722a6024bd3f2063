#pragma once

#include <nlohmann/json.hpp>

#include "milnor/equivalence.hpp"
#include "milnor/tameness.hpp"
#include "milnor/topology.hpp"

namespace milnor {

using json = nlohmann::json;

namespace detail {

inline json opt_point(const std::optional<std::vector<double>>& p) { return p ? json(*p) : json(nullptr); }

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace detail

inline void to_json(json& j, const PolyMap& f) { j = {{"variables", f.source()}, {"components", f.to_strings()}}; }

inline void to_json(json& j, const ConstructibleSet& s) {
  json pieces = json::array();
  for (const auto& p : s.pieces()) {
    json eqs = json::array(), neqs = json::array();
    for (const auto& e : p.equations) eqs.push_back(e.to_string());
    for (const auto& e : p.inequations) neqs.push_back(e.to_string());
    pieces.push_back({{"equations", eqs}, {"inequations", neqs}});
  }
  j = {{"variables", s.variables()}, {"pieces", pieces}};
}

inline void to_json(json& j, const SamplerConfig& c) {
  j = {{"tol", c.tol},       {"sep_tol", c.sep_tol},     {"cluster_factor", c.cluster_factor},
       {"starts_per_point", c.starts_per_point}, {"empty_probe", c.empty_probe}, {"reject_tol", c.reject_tol}};
}

inline void to_json(json& j, const TameConfig& c) {
  j = {{"radii", c.radii},
       {"exclusion_radius", c.exclusion_radius},
       {"composite_exclusion", c.composite_exclusion},
       {"margin", c.margin},
       {"witness_tol", c.witness_tol},
       {"delta0", c.delta0},
       {"ladder_steps", c.ladder_steps()},
       {"rank_tol", c.rank_tol},
       {"seed", c.seed},
       {"sampler", c.sampler}};
}

inline void to_json(json& j, const CompositeConfig& c) {
  j = {{"radii", c.radii},         {"samples", c.samples}, {"member_tol", c.member_tol},
       {"image_tol", c.image_tol}, {"seed", c.seed},       {"sampler", c.sampler}};
}

inline void to_json(json& j, const LadderRung& r) { j = {{"point", r.point}, {"target", r.target}, {"distance", r.distance}}; }

inline void to_json(json& j, const Witness& w) {
  j = {{"accumulation_point", w.accumulation_point}, {"slice", w.slice}, {"ladder", w.ladder}};
}

inline void to_json(json& j, const SliceEvidence& e) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  j = {{"slice", e.slice},
       {"target_samples", e.target_samples},
       {"seeds", e.seeds},
       {"min_relative", num(e.min_relative)},
       {"min_distance", num(e.min_distance)},
       {"max_distance", e.max_distance},
       {"ladders_tried", e.ladders_tried},
       {"best_ladder_rungs", e.best_ladder_rungs}};
}

inline void to_json(json& j, const TamenessVerdict& v) {
  j = {{"status", to_string(v.status)},
       {"mode", v.mode},
       {"witness", detail::opt(v.witness)},
       {"flags", v.flags},
       {"evidence", v.evidence},
       {"diagnostics", v.diagnostics},
       {"config", v.config}};
}

inline void to_json(json& j, const CheckResult& c) {
  j = {{"name", c.name},
       {"status", to_string(c.status)},
       {"witness", detail::opt_point(c.witness)},
       {"radii", c.radii},
       {"samples", c.samples},
       {"diagnostics", c.diagnostics}};
}

inline void to_json(json& j, const DiscEvidence& d) {
  j = {{"status", to_string(d.status)}, {"witness", detail::opt_point(d.witness)}, {"exact", d.exact},
       {"vacuous", d.vacuous},          {"samples", d.samples},                     {"diagnostics", d.diagnostics}};
}

inline json cloud_json(const SampleCloud& c) {
  json j = cloud_sidecar(c);
  j["points"] = c.points;
  return j;
}

inline void to_json(json& j, const CompositeReport& r) {
  json sets = json::object();
  for (const auto& s : r.sets) sets[s.name] = s.set;
  j = {{"maps", {{"F", r.F}, {"G", r.G}, {"H", r.H}}},
       {"sets", sets},
       {"checks", r.lattice_checks},
       {"disc", {{"F", r.disc_F}, {"G", r.disc_G}, {"H", r.disc_H}}},
       {"image_cloud", cloud_json(r.image_cloud)},
       {"config", r.config}};
}

inline void to_json(json& j, const CompositeVerdict& v) {
  j = {{"status", v.precondition_met ? to_string(v.verdict.status) : "PreconditionNotMet"},
       {"precondition_met", v.precondition_met},
       {"failed_precondition", v.failed_precondition},
       {"verdict", v.verdict},
       {"F", v.f_verdict},
       {"disc_F", v.disc_f},
       {"direct_H", detail::opt(v.direct)},
       {"cross_check_failed", v.cross_check_failed}};
}

inline void to_json(json& j, const InclusionVerdict& v) {
  j = {{"inclusion", v.inclusion},
       {"equality", v.equality},
       {"G", v.g_status ? json(to_string(*v.g_status)) : json(nullptr)},
       {"derived_H", v.derived_h ? json(to_string(*v.derived_h)) : json(nullptr)},
       {"derived", v.derived}};
}

inline void to_json(json& j, const IcisVerdict& v) {
  j = {{"status", to_string(v.status)}, {"witness", detail::opt_point(v.witness)}, {"exact", v.exact},
       {"samples", v.samples},          {"diagnostics", v.diagnostics}};
}

inline void to_json(json& j, const DegreeResult& d) {
  j = {{"degree", d.degree},
       {"per_direction", d.per_direction},
       {"quadrature", detail::opt(d.quadrature)},
       {"methods_agree", d.methods_agree},
       {"diagnostics", d.diagnostics}};
}

inline void to_json(json& j, const EulerReport& r) {
  j = {{"degrees", r.degrees},
       {"chi_fiber", {{"F", detail::opt(r.chi_fiber_F)}, {"G", detail::opt(r.chi_fiber_G)}, {"H", detail::opt(r.chi_fiber_H)}}},
       {"chi_tube", {{"H", detail::opt(r.chi_tube_H)}, {"G", detail::opt(r.chi_tube_G)}}},
       {"dims", {r.M, r.N, r.K}},
       {"method", r.method},
       {"methods_agree", r.methods_agree},
       {"multiplicative", r.multiplicative},
       {"tube_consistent", r.tube_consistent},
       {"diagnostics", r.diagnostics}};
}

inline void to_json(json& j, const LeftInvariance& l) {
  j = {{"status", to_string(l.status)}, {"milnor", l.milnor}, {"sing", l.sing}, {"diagnostics", l.diagnostics}};
}

inline void to_json(json& j, const RightTransfer& r) {
  j = {{"identity", r.identity},
       {"g2", r.g2},
       {"rho2", r.rho2.poly.to_string()},
       {"tame_g1", detail::opt(r.tame_g1)},
       {"tame_g2", detail::opt(r.tame_g2)},
       {"statuses_agree", r.statuses_agree}};
}

inline json error_json(const Error& e) {
  json j = {{"error", to_string(e.kind())}, {"message", e.what()}};
  if (e.has_position()) j["position"] = e.position();
  return j;
}

}  // namespace milnor
