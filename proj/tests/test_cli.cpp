#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "support.hpp"

using namespace hspace;
using testkit::run_tool;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Writes text to a fresh file under the temp directory and returns its path.
std::string temp_file(const std::string& name, const std::string& text) {
  const auto dir = std::filesystem::temp_directory_path() / "hspace_cli_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / name).string();
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

std::string edited_spec(const std::string& rel, const std::string& name, void (*edit)(Json&)) {
  Json j = Json::parse(read_file(testkit::spec_path(rel)));
  edit(j);
  return temp_file(name, j.dump(2));
}

std::string spec_arg(const std::string& rel) { return "--spec " + testkit::spec_path(rel); }

}  // namespace

TEST(Validate, S1IsClean) {
  const auto [rc, out] = run_tool("validate " + spec_arg("S1.json"));
  EXPECT_EQ(rc, 0);
  const Json j = Json::parse(out);
  EXPECT_TRUE(j["violations"].empty());
  EXPECT_EQ(j["signature"]["plus"], 2);
  EXPECT_EQ(j["signature"]["minus"], 4);
}

TEST(Validate, EqualLambdasFail) {
  const auto path = edited_spec("S1.json", "lambda_eq.json", [](Json& j) { j["constants"]["lambda2"] = 1; });
  const auto [rc, out] = run_tool("validate --spec " + path);
  EXPECT_EQ(rc, 1);
  EXPECT_NE(out.find("\"LAMBDA_EQ\""), std::string::npos);
}

TEST(Validate, TruncatedJsonIsInputError) {
  const std::string text = read_file(testkit::spec_path("S1.json"));
  const auto path = temp_file("truncated.json", text.substr(0, text.size() / 2));
  const auto [rc, out] = run_tool("validate --spec " + path);
  EXPECT_EQ(rc, 2);
  EXPECT_NE(out.find("offset"), std::string::npos) << out;
}

TEST(Validate, UnknownKeyIsInputError) {
  const auto path = edited_spec("S1.json", "unknown_key.json", [](Json& j) { j["lamda"] = 3; });
  EXPECT_EQ(run_tool("validate --spec " + path).first, 2);
}

TEST(Validate, BadExpressionIsInputError) {
  const auto path = edited_spec("S1.json", "bad_expr.json", [](Json& j) { j["functions"]["theta"] = "x2 +* 1"; });
  EXPECT_EQ(run_tool("validate --spec " + path).first, 2);
}

TEST(Validate, MissingFileOrBadFlagIsInputError) {
  EXPECT_EQ(run_tool("validate --spec /nonexistent/spec.json 2>/dev/null").first, 2);
  EXPECT_EQ(run_tool("residual " + spec_arg("S1.json") + " --format xml 2>/dev/null").first, 2);
}

TEST(Residual, S2NamesPassingConvention) {
  const auto [rc, out] = run_tool("residual " + spec_arg("S2.json"));
  EXPECT_EQ(rc, 0);
  const Json j = Json::parse(out);
  EXPECT_EQ(j["passer"], "literal");
  EXPECT_EQ(j["verdict"], "unique");
  EXPECT_EQ(j["variants"].size(), 2u);
}

TEST(Residual, PerturbedS2Fails) {
  const auto path = edited_spec("S2.json", "s2_perturbed.json", [](Json& j) {
    j["perturb"] = Json{{"component", {1, 1}}, {"expr", "0.001*x1"}};
  });
  const auto [rc, out] = run_tool("residual --spec " + path);
  EXPECT_EQ(rc, 1);
  EXPECT_EQ(Json::parse(out)["verdict"], "none");
}

TEST(Residual, S1IsDegenerateButSucceeds) {
  const auto [rc, out] = run_tool("residual " + spec_arg("S1.json"));
  EXPECT_EQ(rc, 0);
  const Json j = Json::parse(out);
  EXPECT_EQ(j["verdict"], "degenerate");
  EXPECT_NE(j["note"].get<std::string>().find("degenerate discriminator"), std::string::npos);
}

TEST(Roots, S2Matches) {
  const auto [rc, out] = run_tool("roots " + spec_arg("S2.json") + " --n 20");
  EXPECT_EQ(rc, 0);
  const Json j = Json::parse(out);
  EXPECT_TRUE(j["all_match"].get<bool>());
  EXPECT_EQ(j["points"].size(), 20u);
}

TEST(Roots, PerturbedS2Mismatches) {
  const auto path = edited_spec("S2.json", "s2_roots_perturbed.json", [](Json& j) {
    j["perturb"] = Json{{"component", {1, 1}}, {"expr", "0.001*x1"}};
  });
  EXPECT_EQ(run_tool("roots --spec " + path + " --n 20").first, 1);
}

TEST(Conserve, S2WithinTolerance) {
  const auto [rc, out] = run_tool("conserve " + spec_arg("S2.json") + " --n 5");
  EXPECT_EQ(rc, 0);
  const Json j = Json::parse(out);
  EXPECT_LE(j["max_rel_drift_I"].get<double>(), 1e-7);
  EXPECT_LE(j["max_rel_drift_N"].get<double>(), 1e-7);
}

TEST(Conserve, S1FlatCaseHasNoDrift) {
  const auto [rc, out] = run_tool("conserve " + spec_arg("S1.json") + " --n 3");
  EXPECT_EQ(rc, 0);
  EXPECT_LE(Json::parse(out)["max_rel_drift_I"].get<double>(), 1e-12);
}

TEST(Conserve, WrongIntegralIsFlagged) {
  const auto path = edited_spec("S2.json", "s2_conserve_perturbed.json", [](Json& j) {
    j["perturb"] = Json{{"component", {1, 1}}, {"expr", "x1^3"}};
  });
  EXPECT_EQ(run_tool("conserve --spec " + path + " --n 5").first, 1);
}

TEST(Geodesic, CsvToFileAndStdout) {
  const auto csv = (std::filesystem::temp_directory_path() / "hspace_cli_test" / "traj.csv").string();
  const auto [rc, out] = run_tool("geodesic " + spec_arg("S2.json") + " --t-end 0.5 --csv " + csv);
  EXPECT_EQ(rc, 0);
  const Json j = Json::parse(out);
  EXPECT_EQ(j["status"], "completed");
  EXPECT_LE(j["rel_drift_I"].get<double>(), 1e-7);
  const std::string text = read_file(csv);
  EXPECT_EQ(static_cast<int>(std::count(text.begin(), text.end(), '\n')), j["samples"].get<int>() + 1);
  EXPECT_EQ(text.rfind("t,x1,x2,x3,x4,x5,x6,v1,v2,v3,v4,v5,v6,I,N\n", 0), 0u);

  const auto [rc2, out2] = run_tool("geodesic " + spec_arg("S2.json") + " --t-end 0.5 --format csv");
  EXPECT_EQ(rc2, 0);
  EXPECT_EQ(out2, text);
}

TEST(Geodesic, ExplicitStartLeavingChartFails) {
  const auto [rc, out] = run_tool("geodesic " + spec_arg("S1.json") + " --x0 0 0 0 0 0 0 --v0 2 0 0 0 0 0");
  EXPECT_EQ(rc, 1);
  EXPECT_NE(out.find("singular_abort"), std::string::npos) << out;
}

TEST(Determinism, ByteIdenticalReports) {
  for (const std::string& cmd : {"residual " + spec_arg("S3.json") + " --seed 5",
                                "conserve " + spec_arg("S3.json") + " --seed 5 --n 4"}) {
    const auto a = run_tool(cmd), b = run_tool(cmd);
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
  }
}

TEST(Output, OutFlagWritesReport) {
  const auto path = (std::filesystem::temp_directory_path() / "hspace_cli_test" / "report.json").string();
  std::filesystem::remove(path);
  const auto [rc, out] = run_tool("validate " + spec_arg("S2.json") + " --out " + path);
  EXPECT_EQ(rc, 0);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(read_file(path), run_tool("validate " + spec_arg("S2.json")).second);
}

TEST(Sweep, GoldenDirectory) {
  const auto [rc, out] =
      run_tool("sweep --dir " + testkit::spec_path("golden") + " --format csv --n 50 --geodesics 2");
  EXPECT_EQ(rc, 3);  // the (22)(11) spec cannot be discriminated
  std::istringstream is(out);
  std::string line;
  int rows = 0, ok_rows = 0;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("file,type,", 0), 0u);
  while (std::getline(is, line)) {
    ++rows;
    ok_rows += line.size() >= 3 && line.compare(line.size() - 3, 3, ",ok") == 0;
  }
  EXPECT_EQ(rows, 8);
  EXPECT_EQ(ok_rows, 7);
}
