#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "optrans/io.hpp"
#include "support.hpp"

using namespace optrans;
using io::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string temp_path(const std::string& name) { return ::testing::TempDir() + "optrans_cli_" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const std::string err_path = temp_path("stderr.txt");
  const std::string cmd = std::string(OPTRANS_CLI_PATH) + " " + args + " 2>" + err_path;
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  return r;
}

const json& find_check(const json& rep, const std::string& name) {
  for (const auto& c : rep["checks"]) {
    if (c["name"] == name) return c;
  }
  throw std::runtime_error("no check named " + name);
}

void write(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace

TEST(Cli, ExitCodesForBadParameters) {
  EXPECT_EQ(run("").code, 2);
  const auto low = run("frame-build --p 2");
  EXPECT_EQ(low.code, 2);
  EXPECT_NE(low.err.find("p > 2"), std::string::npos);
  EXPECT_EQ(run("frame-build --p 1.5").code, 2);
  EXPECT_EQ(run("frame-build --strategy nope").code, 2);
  EXPECT_EQ(run("frame-build --unknown-flag").code, 2);
  EXPECT_EQ(run("qha-verify --grid-n 12").code, 2);
  EXPECT_EQ(run("perturbed --decay-a 1").code, 2);
  EXPECT_EQ(run("t2 --dim 2").code, 2);
}

TEST(Cli, FrameBuildReport) {
  const auto r = run("frame-build --p 4 --radius 0");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = json::parse(r.out);
  EXPECT_EQ(rep["total_indices"], 64);
  EXPECT_LE(find_check(rep, "generator_spectrum")["max_deviation"].get<double>(), 1e-10);
  EXPECT_LE(rep["frame_bound"].get<double>(), 0.5);
  // stable key order
  std::vector<std::string> keys;
  for (const auto& [k, _] : rep.items()) keys.push_back(k);
  EXPECT_EQ(keys.front(), "command");
  EXPECT_EQ(keys.back(), "passed");
}

TEST(Cli, DeterministicReportsAndPlans) {
  const auto plan_a = temp_path("det_a.json"), plan_b = temp_path("det_b.json");
  const auto a = run("frame-build --p 6 --radius 1 --seed 3 --out " + plan_a);
  const auto b = run("frame-build --p 6 --radius 1 --seed 3 --out " + plan_b);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(plan_a), slurp(plan_b));
  const auto va = run("frame-verify --plan " + plan_a + " --trials 4 --seed 9");
  const auto vb = run("frame-verify --plan " + plan_a + " --trials 4 --seed 9");
  EXPECT_EQ(va.code, 0) << va.out;
  EXPECT_EQ(va.out, vb.out);
  EXPECT_EQ(run("qha-verify --seed 5").out, run("qha-verify --seed 5").out);
}

TEST(Cli, FrameVerifyPassesAndTrialsZeroIsStructural) {
  const auto plan = temp_path("p4.json");
  ASSERT_EQ(run("frame-build --p 4 --out " + plan).code, 0);
  const auto full = run("frame-verify --plan " + plan + " --trials 5");
  ASSERT_EQ(full.code, 0) << full.out;
  const auto rep = json::parse(full.out);
  EXPECT_LE(find_check(rep, "residual_spectrum")["max_deviation"].get<double>(), 1e-8);
  EXPECT_LE(find_check(rep, "frame_bound")["max_ratio"].get<double>(), rep["plan"]["frame_bound"].get<double>());
  EXPECT_LE(find_check(rep, "neumann")["max_final_error"].get<double>(), 1e-9);

  const auto zero = run("frame-verify --plan " + plan + " --trials 0");
  ASSERT_EQ(zero.code, 0);
  const auto z = json::parse(zero.out);
  EXPECT_EQ(z["checks"].size(), 3u);
  EXPECT_EQ(find_check(z, "condition_2")["status"], "passed");
}

TEST(Cli, CorruptedPlanFailsWithQuadruple) {
  auto plan = build_plan(6, 1, 0);
  plan.family = fixtures::corrupt_family(plan.family, 0);
  plan.generator = build_frame_generator(plan.schedule, plan.family);
  const auto path = temp_path("corrupt.json");
  write(path, io::to_json(plan).dump());
  const auto r = run("frame-verify --plan " + path + " --trials 0");
  EXPECT_EQ(r.code, 1);
  const auto rep = json::parse(r.out);
  const auto& c2 = find_check(rep, "condition_2");
  EXPECT_EQ(c2["status"], "failed");
  for (const char* key : {"i", "it", "j", "jt", "blocks"}) EXPECT_TRUE(c2["witness"].contains(key)) << key;
  EXPECT_FALSE(rep["passed"].get<bool>());
}

TEST(Cli, MalformedInputsExitThree) {
  const auto bad = temp_path("bad.json");
  write(bad, "{\"p\": ");
  EXPECT_EQ(run("frame-verify --plan " + bad).code, 3);
  EXPECT_EQ(run("frame-verify --plan " + temp_path("missing.json")).code, 3);
  EXPECT_EQ(run("frame-verify").code, 3);
  const auto misaligned = run("qha-verify --shift 0.1 0");
  EXPECT_EQ(misaligned.code, 3);
  EXPECT_NE(misaligned.err.find("lattice"), std::string::npos);
  const auto cfg = temp_path("cfg_unknown.json");
  write(cfg, "{\"bogus\": 1}");
  EXPECT_EQ(run("frame-build --config " + cfg).code, 3);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  const auto cfg = temp_path("cfg.json");
  write(cfg, "{\"p\": 6, \"radius\": 1}");
  const auto from_file = json::parse(run("frame-build --config " + cfg).out);
  EXPECT_EQ(from_file["p"], 6.0);
  EXPECT_EQ(from_file["radius"], 1);
  const auto overridden = json::parse(run("frame-build --config " + cfg + " --p 4").out);
  EXPECT_EQ(overridden["p"], 4.0);
  EXPECT_EQ(overridden["radius"], 1);
}

TEST(Cli, QhaVerifyDefaults) {
  const auto r = run("qha-verify");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rep = json::parse(r.out);
  EXPECT_EQ(rep["grid_n"], 32);
  EXPECT_EQ(rep["grid_n_fine"], 64);
  EXPECT_LE(find_check(rep, "symplectic_involution")["error"].get<double>(), 1e-10);
  EXPECT_LE(find_check(rep, "fourier_wigner_covariance")["error"].get<double>(), 1e-8);
  EXPECT_GE(find_check(rep, "quantization_roundtrip")["ratio"].get<double>(), 2.0);
  EXPECT_GE(find_check(rep, "convolution_theorem")["ratio"].get<double>(), 2.0);
}

TEST(Cli, T2Certificates) {
  const auto r = run("t2");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rep = json::parse(r.out);
  EXPECT_TRUE(find_check(rep, "special_form_unit_cell")["result"]["holds"].get<bool>());
  EXPECT_TRUE(find_check(rep, "special_form_wide_box_fails")["result"].contains("witness"));
  EXPECT_LE(find_check(rep, "orthogonal_witness")["pairing_max"].get<double>(), 1e-8);
}

TEST(Cli, PerturbedWritesCurves) {
  const auto csv = temp_path("curves.csv");
  const auto r = run("perturbed --out " + csv);
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rep = json::parse(r.out);
  for (const auto& c : rep["curves"]) {
    EXPECT_TRUE(c["nonincreasing"].get<bool>());
    EXPECT_GE(c["strict_decreases"].get<int>(), 3);
  }
  const auto text = slurp(csv);
  EXPECT_EQ(text.rfind("M,target_id,residual\n", 0), 0u);
  EXPECT_EQ(run("perturbed").out, r.out);
}
