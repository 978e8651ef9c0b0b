#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(HYPERLOSS_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 512> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string config(const std::string& name) { return std::string(HYPERLOSS_CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) { return fs::temp_directory_path() / ("hyperloss_cli_" + name); }

}  // namespace

TEST(Cli, ColdLoss) {
  const auto r = run("coldloss --eps1 0.08 --eps2 0.08 --phi 0");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("lambda = 0.2944"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("lambda_smallk = 0.3200"), std::string::npos);
}

TEST(Cli, MachZehnderRecovery) {
  const auto r = run("mz --eps1 0.08 --eps2 0.08 --phi pi --sqz-db 15");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("V_min = 15.00 dB"), std::string::npos) << r.out;
}

TEST(Cli, ChainReportsConventionsAndBaseline) {
  const auto r = run("chain --nodes 10 --eps 0.01 --sqz-db 15 --phi-sweep 720 --threshold-db 10");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("fraction below threshold = 0.5625"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("policy=shared"), std::string::npos);
  EXPECT_NE(r.out.find("incoherent baseline"), std::string::npos);
  EXPECT_NE(r.out.find("DISCREPANCY"), std::string::npos);
}

TEST(Cli, SweepWritesCsvWithHeader) {
  const auto out = scratch("sweep.csv");
  const auto r = run("sweep --spec " + config("mz_paper.json") + " --points 16 --readout locked --set input.sqz_db=25.3 -o " + out.string());
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("hyperloss detected at phi="), std::string::npos) << r.out;
  const std::string text = slurp(out);
  EXPECT_NE(text.find("# config: {"), std::string::npos);
  EXPECT_NE(text.find("csv schema 1"), std::string::npos);
  EXPECT_NE(text.find("phi_rad,omega_hz,v_min_rel_shot,v_max_rel_shot,squeezing_db,cold_loss_frac"), std::string::npos);
  fs::remove(out);
}

TEST(Cli, OverridesApply) {
  const auto out = scratch("override.json");
  const auto r = run("sweep --spec " + config("mz_paper.json") +
                     " --points 4 --format json --set components.0.eps=0 --set components.2.eps=0 -o " + out.string());
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(slurp(out).find("\"eps\": 0"), std::string::npos);
  EXPECT_NE(r.out.find("no hyperloss"), std::string::npos) << r.out;
  fs::remove(out);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("sweep --spec /nonexistent.json").status, 2);
  EXPECT_EQ(run("sweep --spec " + config("mz_paper.json") + " --set input.bogus=1").status, 2);
  EXPECT_EQ(run("sweep --spec " + config("mz_paper.json") + " --set components.0.eps=2").status, 2);
  EXPECT_EQ(run("coldloss --eps1 0.08 --eps2 0.08 --phi notanangle").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);

  const auto bad = scratch("bad.json");
  std::ofstream(bad) << "{\n  \"schema\": 1,\n  \"modes\": oops\n}\n";
  const auto r = run("sweep --spec " + bad.string());
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find(":3"), std::string::npos) << r.out;
  fs::remove(bad);
}

TEST(Cli, NonPhysicalExitsThree) {
  // e^{2r} overflows: the readout statistics are no longer a valid state.
  const auto r = run("mz --eps1 0.08 --eps2 0.08 --phi pi/2 --sqz-db 4000");
  EXPECT_EQ(r.status, 3) << r.out;
  EXPECT_NE(r.out.find("non-physical"), std::string::npos);
}

TEST(Cli, OptimizeRecoversAtPi) {
  const auto r = run("optimize --spec " + config("mz_paper.json"));
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("phi* = [3.141593]"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("squeezing = 15.0000 dB"), std::string::npos);
}

TEST(Cli, Selftest) {
  const auto r = run("selftest");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("selftest passed"), std::string::npos);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const auto a = scratch("det_a.csv"), b = scratch("det_b.csv");
  const std::string args = "map --spec " + config("two_cavity_hyperloss.json") + " --phi-points 24 -o ";
  ASSERT_EQ(run(args + a.string()).status, 0);
  ASSERT_EQ(run(args + b.string()).status, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
  fs::remove(a);
  fs::remove(b);
}
