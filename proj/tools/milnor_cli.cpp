#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "milnor/commands.hpp"

using namespace milnor;

namespace {

struct Common {
  std::string bundle;
  std::optional<std::uint64_t> seed;
  std::string ladder;
  std::vector<std::string> tol;
  std::string out;
  std::string format;  // reports are JSON; clouds default to CSV
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--bundle", c.bundle, "input bundle (JSON)")->required();
  app->add_option("--seed", c.seed, "override the bundle seed");
  app->add_option("--radius-ladder", c.ladder, "start,steps: radii start*2^-k");
  app->add_option("--tol", c.tol, "key=value tolerance override (member, image, witness, margin, ...)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

MapBundle load(const Common& c) {
  MapBundle b = load_bundle(c.bundle);
  if (c.seed) b.set_seed(*c.seed);
  if (!c.ladder.empty()) {
    const auto comma = c.ladder.find(',');
    if (comma == std::string::npos) fail(ErrorKind::InvalidInput, "--radius-ladder expects start,steps");
    try {
      b.set_radii(radius_ladder(std::stod(c.ladder.substr(0, comma)), std::stoi(c.ladder.substr(comma + 1))));
    } catch (const std::logic_error&) {
      fail(ErrorKind::InvalidInput, "--radius-ladder expects start,steps");
    }
  }
  for (const auto& t : c.tol) {
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(ErrorKind::InvalidInput, "--tol expects key=value");
    double v = 0;
    try {
      v = std::stod(t.substr(eq + 1));
    } catch (const std::logic_error&) {
      fail(ErrorKind::InvalidInput, "--tol value is not a number");
    }
    detail::apply_tolerance(b, t.substr(0, eq), v);
  }
  b.tame.validate();
  b.composite.validate();
  return b;
}

int emit(const CommandResult& r, const Common& c, const std::string& cmd) {
  std::cout << r.output.dump(2) << "\n";
  if (!c.out.empty() && cmd != "export-cloud") {
    std::filesystem::create_directories(c.out);
    std::ofstream((std::filesystem::path(c.out) / (cmd + ".json")).string()) << r.output.dump(2) << "\n";
  }
  return r.code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Milnor set and tameness analysis for polynomial map germs"};
  app.require_subcommand(1);
  Common common;
  std::string which = "H";
  std::vector<std::string> sets;
  std::size_t count = 1500;

  auto* analyze = app.add_subcommand("analyze", "composite analysis report");
  auto* tame = app.add_subcommand("tame", "tameness verdict for F, G or H");
  auto* composite = app.add_subcommand("composite-check", "tameness of H through the image condition");
  auto* euler = app.add_subcommand("euler", "gradient degrees and Euler characteristics");
  auto* cloud = app.add_subcommand("export-cloud", "point clouds of named sets");
  for (auto* s : {analyze, tame, composite, euler, cloud}) add_common(s, common);
  tame->add_option("--which", which, "F, G or H")->check(CLI::IsMember({"F", "G", "H"}));
  cloud->add_option("--set", sets, "set name (M_F, Sing H, image, or a bundle override)")->required();
  cloud->add_option("--count", count, "points per radius");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "InvalidInput"}, {"message", e.what()}}.dump() << "\n";
    return kExitInput;
  }

  try {
    const MapBundle b = load(common);
    if (*analyze) return emit(cmd_analyze(b), common, "analyze");
    if (*tame) return emit(cmd_tame(b, which), common, "tame");
    if (*composite) return emit(cmd_composite_check(b), common, "composite-check");
    if (*euler) return emit(cmd_euler(b), common, "euler");
    return emit(cmd_export_cloud(b, sets, common.out, common.format.empty() ? "csv" : common.format, count), common,
                "export-cloud");
  } catch (const Error& e) {
    std::cerr << error_json(e).dump() << "\n";
    return exit_code(e);
  } catch (const json::exception& e) {
    std::cerr << json{{"error", "InvalidInput"}, {"message", e.what()}}.dump() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "InvalidInput"}, {"message", e.what()}}.dump() << "\n";
    return kExitInput;
  }
}
