#pragma once

#include <filesystem>
#include <sstream>

#include "milnor/bundle.hpp"

namespace milnor {

/// Exit codes shared by every command.
enum ExitCode : int { kExitTame = 0, kExitNotTame = 1, kExitInconclusive = 2, kExitPrecondition = 3, kExitInput = 4 };

inline int exit_code(TameStatus s) {
  switch (s) {
    case TameStatus::Tame: return kExitTame;
    case TameStatus::NotTame: return kExitNotTame;
    case TameStatus::Inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

inline int exit_code(const Error& e) { return e.kind() == ErrorKind::PreconditionNotMet ? kExitPrecondition : kExitInput; }

struct CommandResult {
  json output;
  int code = 0;
  std::vector<std::string> files;  // written by export-cloud
};

inline CommandResult cmd_analyze(const MapBundle& b) {
  b.require_chain();
  const auto rep = analyze_composite(b.F, *b.G, b.composite);
  json out = rep;
  json overrides = json::array();
  for (const auto& [name, set] : b.sets) {
    if (set.variables() != b.source) continue;
    bool derived = false;
    for (const auto& s : rep.sets) derived = derived || s.name == name;
    if (!derived) continue;
    overrides.push_back(detail::bidirectional("override " + name, set, rep.set(name), b.composite, 0x0E00));
  }
  out["override_checks"] = overrides;
  out["name"] = b.name;
  return {out, 0, {}};
}

inline CommandResult cmd_tame(const MapBundle& b, const std::string& which) {
  if (which != "F" && which != "G" && which != "H") fail(ErrorKind::InvalidInput, "--which must be F, G or H");
  const auto v = check_tame(b.map(which), b.rho_for(which), b.tame);
  json out = v;
  out["map"] = which;
  out["name"] = b.name;
  return {out, exit_code(v.status), {}};
}

inline CommandResult cmd_composite_check(const MapBundle& b) {
  b.require_chain();
  const auto v = check_composite_condition(b.F, *b.G, b.rho_for("F"), b.tame, b.composite);
  json out = v;
  out["name"] = b.name;
  return {out, v.precondition_met ? exit_code(v.verdict.status) : kExitPrecondition, {}};
}

inline CommandResult cmd_euler(const MapBundle& b) {
  const auto rep = euler_report(b.F, b.G, b.euler_radius, b.degree, b.composite.sampler);
  json out = rep;
  out["name"] = b.name;
  out["radius"] = b.euler_radius;
  return {out, 0, {}};
}

namespace detail {

inline std::string file_stem(const std::string& set, double radius) {
  std::string s;
  for (char c : set) s += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  std::ostringstream os;
  os << s << "_r" << radius;
  return os.str();
}

}  // namespace detail

/// One cloud per (set, radius). "image" is closure(F(M_H \ Sing H)) in the middle space.
inline SampleCloud export_cloud(const MapBundle& b, const std::string& set, double radius, std::size_t count) {
  CompositeConfig cfg = b.composite;
  cfg.radii = {radius};
  cfg.samples = count;
  if (set == "image") {
    b.require_chain();
    const PolyMap h = b.H();
    return image_cloud(b.F, bundle_set(b, "M_H"), bundle_set(b, "Sing H"), cfg, b.middle);
  }
  const auto s = bundle_set(b, set);
  const auto lin = linearized(s, cfg.seed, cfg.sampler);
  auto cloud = try_sample_on_sphere(lin, radius, count, sub_seed(cfg.seed, 0xE4, static_cast<std::uint64_t>(radius * 1e6)),
                                    cfg.sampler);
  cloud.variables = s.variables();
  return cloud;
}

inline CommandResult cmd_export_cloud(const MapBundle& b, const std::vector<std::string>& sets, const std::string& out_dir,
                                      const std::string& format, std::size_t count) {
  if (sets.empty()) fail(ErrorKind::InvalidInput, "export-cloud needs at least one --set");
  if (format != "csv" && format != "json") fail(ErrorKind::InvalidInput, "--format must be json or csv");
  if (out_dir.empty()) fail(ErrorKind::InvalidInput, "export-cloud needs --out");
  std::filesystem::create_directories(out_dir);
  CommandResult res;
  res.output = {{"name", b.name}, {"clouds", json::array()}};
  for (const auto& name : sets)
    for (double r : b.composite.radii) {
      const auto cloud = export_cloud(b, name, r, count);
      const auto stem = (std::filesystem::path(out_dir) / detail::file_stem(name, r)).string();
      json side = cloud_sidecar(cloud);
      side["set"] = name;
      if (format == "csv") {
        write_cloud_csv(cloud, stem + ".csv");
        std::ofstream(stem + ".json") << side.dump(2) << "\n";
        res.files.push_back(stem + ".csv");
      } else {
        side["points"] = cloud.points;
        std::ofstream(stem + ".json") << side.dump(2) << "\n";
        res.files.push_back(stem + ".json");
      }
      side.erase("points");
      side["file"] = res.files.back();
      res.output["clouds"].push_back(side);
    }
  return res;
}

}  // namespace milnor
