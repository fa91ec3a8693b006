// Runs the installed command-line binary end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("consensus_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result Run(const std::string& args) const {
    const fs::path log = dir_ / "stdout.txt";
    const std::string cmd = std::string(CONSENSUS_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = Slurp(log);
    return r;
  }

  static std::string Slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  std::string Out() const { return "--out " + dir_.string(); }

  fs::path dir_;
};

TEST_F(CliTest, ListAndHelp) {
  const Result r = Run("list");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("paper/one-over-t"), std::string::npos);
  EXPECT_EQ(Run("--help").code, 0);
  EXPECT_EQ(Run("").code, 1);
  EXPECT_EQ(Run("run teleport").code, 1);
  EXPECT_EQ(Run("run simulate --max-steps -3 --name paper/one-over-t").code, 1);
}

TEST_F(CliTest, SimulateWritesArtifacts) {
  const Result r = Run("run simulate --name paper/krause-midpoint " + Out());
  ASSERT_EQ(r.code, 0) << r.out;
  const fs::path csv = dir_ / "paper_krause-midpoint.trajectory.csv";
  const fs::path summary = dir_ / "paper_krause-midpoint.summary.json";
  ASSERT_TRUE(fs::exists(csv));
  ASSERT_TRUE(fs::exists(summary));
  EXPECT_EQ(Slurp(csv).rfind("t,agent,c1,c2,diameter,gap\n", 0), 0u);
  const auto j = nlohmann::json::parse(Slurp(summary));
  EXPECT_TRUE(j.at("reached").get<bool>());
  EXPECT_NEAR(j.at("gamma")[0].get<double>(), 1.0 / 3, 1e-9);
}

TEST_F(CliTest, SimulateIsDeterministic) {
  ASSERT_EQ(Run("run simulate --name paper/random-switching --max-steps 300 " + Out()).code, 0);
  const std::string first = Slurp(dir_ / "paper_random-switching.trajectory.csv");
  ASSERT_EQ(Run("run simulate --name paper/random-switching --max-steps 300 " + Out()).code, 0);
  EXPECT_EQ(Slurp(dir_ / "paper_random-switching.trajectory.csv"), first);
  ASSERT_EQ(Run("run simulate --name paper/random-switching --max-steps 300 --seed 9 " + Out()).code, 0);
  EXPECT_NE(Slurp(dir_ / "paper_random-switching.trajectory.csv"), first);
}

TEST_F(CliTest, ViolationExitsTwo) {
  const Result r = Run("run simulate --name fixture/scale-by-2 " + Out());
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_EQ(Run("run certify --name fixture/scale-by-2 " + Out()).code, 2);
}

TEST_F(CliTest, UnknownScenarioAndBadFile) {
  EXPECT_EQ(Run("run simulate --name no/such " + Out()).code, 1);
  const fs::path bad = dir_ / "bad.json";
  std::ofstream(bad) << "{\"scenarios\": [\n {\"name\": \"a\",\n  \"maps\": [ }\n]}";
  const Result r = Run("run simulate --file " + bad.string() + " --name a " + Out());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("bad.json:3"), std::string::npos) << r.out;
}

TEST_F(CliTest, CertifyReport) {
  const Result r = Run("run certify --name paper/one-over-t " + Out());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("equiproper"), std::string::npos);
  const auto j = nlohmann::json::parse(Slurp(dir_ / "paper_one-over-t.report.json"));
  EXPECT_TRUE(j.at("ok").get<bool>());
  EXPECT_TRUE(j.at("equiproper").get<bool>());
}

TEST_F(CliTest, RendezvousArtifacts) {
  const Result r = Run("run rendezvous --name paper/watergun-square " + Out());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("consensus found!"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "paper_watergun-square.events.jsonl"));
  EXPECT_TRUE(fs::exists(dir_ / "paper_watergun-square.trajectory.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "paper_watergun-square.summary.json"));
  std::istringstream lines(Slurp(dir_ / "paper_watergun-square.events.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    EXPECT_NO_THROW(nlohmann::json::parse(line));
    ++n;
  }
  EXPECT_GT(n, 0);
}

TEST_F(CliTest, MatrixFromCsv) {
  const fs::path m = dir_ / "pull.csv";
  std::ofstream(m) << "0,1,0\n0,0,1\n0.5,0.5,0\n";
  const Result r = Run("run matrix --file " + m.string() + " " + Out());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(Slurp(dir_ / "pull.matrix.json"));
  EXPECT_EQ(j.at("cap"), 5);
  EXPECT_EQ(j.at("regularity_index"), 5);
  EXPECT_EQ(j.at("scrambling_index"), 3);

  const fs::path bad = dir_ / "bad.csv";
  std::ofstream(bad) << "0.5,0.5\n0.2,0.2\n";
  const Result e = Run("run matrix --file " + bad.string() + " " + Out());
  EXPECT_EQ(e.code, 1);
  EXPECT_NE(e.out.find("row 1"), std::string::npos) << e.out;
}

TEST_F(CliTest, ExportBuiltinsRoundTrips) {
  const fs::path f = dir_ / "all.json";
  ASSERT_EQ(Run("export-builtins --out " + f.string()).code, 0);
  const Result r = Run("run simulate --file " + f.string() + " --name paper/krause-midpoint " + Out());
  EXPECT_EQ(r.code, 0) << r.out;
}

}  // namespace
