#include "support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace milnor;
using namespace milnor::testing;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kBundles = {
    "example_3_1",   "intro_3_2",   "example_4_2",   "example_4_2_alt_rho", "example_4_6",  "example_4_7",
    "example_4_8",   "example_4_8_alt_rho", "example_4_9", "figure1_a3", "figure1_a6", "figure1_a9",
    "figure1_a12",   "figure1_a15"};

json minimal() {
  return json::parse(R"({"variables": {"source": ["x", "y", "z"]}, "F": ["x", "y*z"]})");
}

ErrorKind kind_of(const json& j) {
  try {
    parse_bundle(j);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted: " << j.dump();
  return ErrorKind::InvalidInput;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("milnor_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out, err;
};

Run run_cli(const std::string& args, const std::string& tag) {
  const auto dir = scratch("cli_" + tag);
  const std::string cmd = std::string(MILNOR_CLI) + " " + args + " > " + (dir / "out").string() + " 2> " + (dir / "err").string();
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp(dir / "out"), slurp(dir / "err")};
}

}  // namespace

// ---- bundle parsing

TEST(Bundle, Minimal) {
  const auto b = parse_bundle(minimal());
  EXPECT_EQ(b.middle, vars({"y1", "y2"}));
  EXPECT_FALSE(b.has_G());
  EXPECT_EQ(b.rho_for("F").poly, euclidean_rho(b.source));
  EXPECT_THROW(b.map("H"), Error);
  EXPECT_THROW(b.require_chain(), Error);
}

TEST(Bundle, Errors) {
  auto j = minimal();
  j["F"] = {"x*(y"};
  EXPECT_EQ(kind_of(j), ErrorKind::SyntaxError);
  j = minimal();
  j["F"] = {"x", "q"};
  EXPECT_EQ(kind_of(j), ErrorKind::UnknownVariable);
  j = minimal();
  j.erase("F");
  EXPECT_EQ(kind_of(j), ErrorKind::InvalidInput);
  j = minimal();
  j["rho"] = "x^2+y^2";
  EXPECT_EQ(kind_of(j), ErrorKind::InvalidRho);
  j = minimal();
  j["config"] = {{"tol", {{"margin", -1}}}};
  EXPECT_EQ(kind_of(j), ErrorKind::InvalidTolerance);
  j = minimal();
  j["config"] = {{"tol", {{"bogus", 1}}}};
  EXPECT_EQ(kind_of(j), ErrorKind::InvalidInput);
  j = minimal();
  j["variables"]["middle"] = {"u"};
  EXPECT_EQ(kind_of(j), ErrorKind::DimensionMismatch);
  j = minimal();
  j["F"] = {"x+1", "y"};
  EXPECT_THROW(parse_bundle(j), Error);
}

TEST(Bundle, LoadErrors) {
  const auto dir = scratch("load");
  std::ofstream(dir / "bad.json") << "{ not json";
  try {
    load_bundle((dir / "bad.json").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SyntaxError);
  }
  EXPECT_THROW(load_bundle((dir / "missing.json").string()), Error);
}

TEST(Bundle, RadiusLadder) {
  EXPECT_EQ(radius_ladder(0.2, 3), (std::vector<double>{0.2, 0.1, 0.05}));
  EXPECT_THROW(radius_ladder(0, 3), Error);
  EXPECT_THROW(radius_ladder(0.1, 0), Error);
}

TEST(Bundle, SetsAndOverrides) {
  const auto b = load_bundle(bundle_path("example_4_2"));
  EXPECT_EQ(bundle_set(b, "M_H").pieces().size(), 2u);
  EXPECT_EQ(bundle_set(b, "Sing_G").variables(), b.middle);
  EXPECT_EQ(bundle_set(b, "V_F").variables(), b.source);
  EXPECT_THROW(bundle_set(b, "nothing"), Error);
  const auto alt = load_bundle(bundle_path("example_4_8_alt_rho"));
  EXPECT_EQ(alt.rho_for("G").poly, parse_polynomial("9*u^2+v^2+t^2", alt.middle));
  EXPECT_EQ(alt.rho_for("H").poly, euclidean_rho(alt.source));
}

TEST(Bundle, AllShippedBundlesParse) {
  for (const auto& name : kBundles) {
    const auto b = load_bundle(bundle_path(name));
    EXPECT_TRUE(b.expected.contains("tame")) << name;
    for (const auto& [which, _] : b.expected["tame"].items()) EXPECT_NO_THROW(b.map(which)) << name;
  }
}

// ---- golden replay

class Golden : public ::testing::TestWithParam<std::string> {};

TEST_P(Golden, StoredVerdicts) {
  const auto b = load_bundle(bundle_path(GetParam()));
  for (const auto& [which, want] : b.expected["tame"].items()) {
    const auto r = cmd_tame(b, which);
    EXPECT_EQ(r.output["status"], want) << which;
    EXPECT_EQ(r.code, exit_code(check_tame(b.map(which), b.rho_for(which), b.tame).status));
  }
  if (b.expected.contains("composite")) {
    const auto r = cmd_composite_check(b);
    EXPECT_EQ(r.output["status"], b.expected["composite"]);
    EXPECT_EQ(r.code == kExitPrecondition, b.expected["composite"] == "PreconditionNotMet");
  }
}

INSTANTIATE_TEST_SUITE_P(Bundles, Golden, ::testing::ValuesIn(kBundles));

// ---- commands

TEST(Commands, AnalyzeOverridesHold) {
  for (const auto* name : {"example_4_2", "example_4_6"}) {
    const auto r = cmd_analyze(load_bundle(bundle_path(name)));
    ASSERT_FALSE(r.output["override_checks"].empty()) << name;
    for (const auto& c : r.output["override_checks"]) EXPECT_EQ(c["status"], "Holds") << name << " " << c["name"];
    EXPECT_EQ(json::parse(r.output.dump()), r.output);
  }
}

TEST(Commands, CompositeCheckExitCodes) {
  EXPECT_EQ(cmd_composite_check(load_bundle(bundle_path("example_4_6"))).code, kExitTame);
  EXPECT_EQ(cmd_composite_check(load_bundle(bundle_path("example_4_2"))).code, kExitNotTame);
  EXPECT_EQ(cmd_composite_check(load_bundle(bundle_path("example_4_7"))).code, kExitPrecondition);
  EXPECT_THROW(cmd_composite_check(load_bundle(bundle_path("figure1_a3"))), Error);
}

TEST(Commands, Euler) {
  const auto r = cmd_euler(load_bundle(bundle_path("example_3_1")));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.output["chi_fiber"]["F"], 1);
}

TEST(Commands, ExportCloudCsv) {
  auto b = load_bundle(bundle_path("example_4_6"));
  b.set_radii({0.1});
  const auto dir = scratch("export_csv");
  const auto r = cmd_export_cloud(b, {"image", "Sing G"}, dir.string(), "csv", 60);
  ASSERT_EQ(r.files.size(), 2u);
  EXPECT_TRUE(fs::exists(dir / "image_r0.1.csv"));
  const auto side = json::parse(slurp(dir / "image_r0.1.json"));
  EXPECT_EQ(side["set"], "image");
  std::ifstream is(dir / "image_r0.1.csv");
  std::string header, line;
  std::getline(is, header);
  EXPECT_EQ(header.rfind("u,v,t", 0), 0u);
  int rows = 0;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::vector<double> p;
    for (std::string cell; std::getline(ss, cell, ',') && p.size() < 3;) p.push_back(std::stod(cell));
    const double s = p[0] * p[0] + p[1] * p[1];
    EXPECT_LE(std::abs(p[2] * p[2] - 4 * s * s * s), 1e-6);
    ++rows;
  }
  EXPECT_GT(rows, 0);
}

TEST(Commands, ExportCloudJsonAndErrors) {
  auto b = load_bundle(bundle_path("example_4_2"));
  b.set_radii({0.1});
  const auto dir = scratch("export_json");
  const auto r = cmd_export_cloud(b, {"M_H"}, dir.string(), "json", 40);
  ASSERT_EQ(r.files.size(), 1u);
  const auto j = json::parse(slurp(r.files[0]));
  ASSERT_FALSE(j["points"].empty());
  const auto mh = bundle_set(b, "M_H");
  for (const auto& p : j["points"]) EXPECT_TRUE(member_float(mh, p.get<std::vector<double>>(), 1e-8));
  EXPECT_THROW(cmd_export_cloud(b, {}, dir.string(), "csv", 10), Error);
  EXPECT_THROW(cmd_export_cloud(b, {"M_H"}, dir.string(), "xml", 10), Error);
  EXPECT_THROW(cmd_export_cloud(b, {"M_H"}, "", "csv", 10), Error);
}

TEST(Commands, ErrorJson) {
  try {
    parse_polynomial("x + * y", vars({"x", "y"}));
    FAIL();
  } catch (const Error& e) {
    const auto j = error_json(e);
    EXPECT_EQ(j["error"], "SyntaxError");
    EXPECT_EQ(j["position"], 4);
    EXPECT_EQ(exit_code(e), kExitInput);
  }
  EXPECT_EQ(exit_code(Error(ErrorKind::PreconditionNotMet, "x")), kExitPrecondition);
}

// ---- the binary

TEST(Binary, CompositeCheckExample46) {
  const auto r = run_cli("composite-check --bundle " + bundle_path("example_4_6"), "c46");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["status"], "Tame");
}

TEST(Binary, TameExample42H) {
  const auto dir = scratch("cli_out");
  const auto r = run_cli("tame --which H --bundle " + bundle_path("example_4_2") + " --out " + dir.string(), "t42");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.out)["status"], "NotTame");
  EXPECT_EQ(json::parse(slurp(dir / "tame.json")), json::parse(r.out));
}

TEST(Binary, MalformedPolynomial) {
  const auto dir = scratch("bad_bundle");
  auto j = minimal();
  j["F"] = {"x*(y", "z"};
  std::ofstream(dir / "bad.json") << j.dump();
  const auto r = run_cli("tame --which F --bundle " + (dir / "bad.json").string(), "bad");
  EXPECT_EQ(r.code, 4);
  const auto e = json::parse(r.err);
  EXPECT_EQ(e["error"], "SyntaxError");
  EXPECT_TRUE(e.contains("position"));
  EXPECT_TRUE(r.out.empty());
}

TEST(Binary, FlagErrorsAndOverrides) {
  EXPECT_EQ(run_cli("tame --bundle /nonexistent.json", "missing").code, 4);
  EXPECT_EQ(run_cli("frobnicate", "unknown").code, 4);
  EXPECT_EQ(run_cli("tame --bundle " + bundle_path("example_4_6") + " --tol margin=-1", "tol").code, 4);
  EXPECT_EQ(run_cli("composite-check --bundle " + bundle_path("example_4_7"), "c47").code, 3);
  const auto r = run_cli("tame --which G --bundle " + bundle_path("example_4_8") + " --seed 3 --radius-ladder 0.2,3", "seed");
  EXPECT_EQ(r.code, 1);
  const auto out = json::parse(r.out);
  EXPECT_EQ(out["config"]["seed"], 3);
  EXPECT_EQ(out["config"]["radii"].size(), 3u);
}
