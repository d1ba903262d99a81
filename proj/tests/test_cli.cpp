#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "coupled_hover/cli.hpp"

using namespace coupled_hover;
namespace fs = std::filesystem;

namespace {

const std::string kReferencePath = std::string(COUPLED_HOVER_CONFIG_DIR) + "/reference_platform.cfg";

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "coupled_hover");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("coupled_hover_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out_dir() const { return (dir_ / "out").string(); }

  /// Writes a variant of the reference config with small audit and search sizes.
  std::string write_config(const std::function<void(RunConfig&)>& edit) const {
    RunConfig c = load_config(kReferencePath);
    c.search.k_p.count = c.search.k_v.count = c.search.k_R.count = c.search.k_Omega.count = 2;
    c.audit_samples = 200;
    c.roa_trials = 2;
    c.roa_horizon = 15.0;
    c.horizon = 1.0;
    edit(c);
    const fs::path path = dir_ / "run.cfg";
    std::ofstream(path) << config_to_yaml(c);
    return path.string();
  }

  fs::path dir_;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

}  // namespace

TEST_F(CliTest, CertifyReferenceIsInfeasible) {
  const CliResult r = run({"certify", "--config", kReferencePath, "--out", out_dir()});
  EXPECT_EQ(r.code, kExitFail) << r.err;
  for (const char* name : {"W2_det", "lambda_min(W)", "c2 window", "INFEASIBLE", "VIOLATED"}) {
    EXPECT_NE(r.out.find(name), std::string::npos) << name << "\n" << r.out;
  }
  std::ifstream in(fs::path(out_dir()) / "certificate.json");
  ASSERT_TRUE(in.good());
  const Json j = Json::parse(in);
  EXPECT_FALSE(j.at("feasible").get<bool>());
}

TEST_F(CliTest, CertifyFlagsC1AtBoundary) {
  const std::string cfg = write_config([](RunConfig& c) {
    c.auto_c1 = false;
    c.gains.c1 = std::sqrt(c.platform.mass * c.gains.k_p);
  });
  const CliResult r = run({"certify", "--config", cfg, "--out", out_dir()});
  EXPECT_EQ(r.code, kExitFail);
  std::istringstream lines(r.out);
  bool seen = false;
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("c1_sqrt_m_kp", 0) == 0) {
      seen = true;
      EXPECT_NE(line.find("VIOLATED"), std::string::npos) << line;
    }
  }
  EXPECT_TRUE(seen) << r.out;
}

TEST_F(CliTest, SimulateWritesVersionedCsv) {
  const CliResult r = run({"simulate", "--config", kReferencePath, "--out", out_dir()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream in(fs::path(out_dir()) / "trajectory.csv");
  ASSERT_TRUE(in.good());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kCsvVersion);
  std::getline(in, line);
  EXPECT_EQ(split(line), csv_columns());
  EXPECT_EQ(csv_columns().size(), 31u);
  std::size_t rows = 0;
  std::vector<std::string> last;
  while (std::getline(in, line)) {
    last = split(line);
    ASSERT_EQ(last.size(), 31u) << "row " << rows;
    ++rows;
  }
  EXPECT_EQ(rows, 5001u);
  EXPECT_NEAR(std::stod(last[0]), 5.0, 1e-9);
  EXPECT_LT(std::stod(last[26]), 1e-2);  // norm_e_p
}

TEST_F(CliTest, SimulateJsonFormat) {
  const std::string cfg = write_config([](RunConfig&) {});
  const CliResult r = run({"simulate", "--config", cfg, "--out", out_dir(), "--format", "json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream in(fs::path(out_dir()) / "trajectory.json");
  const Json j = Json::parse(in);
  EXPECT_EQ(j.at("samples").size(), 1001u);
}

TEST_F(CliTest, JsonConfigMatchesYaml) {
  const std::string json = std::string(COUPLED_HOVER_CONFIG_DIR) + "/reference_platform.json";
  const CliResult a = run({"certify", "--config", kReferencePath, "--out", out_dir()});
  const CliResult b = run({"certify", "--config", json, "--out", out_dir()});
  EXPECT_EQ(a.code, b.code);
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, SearchReportsNoFeasiblePoint) {
  const std::string cfg = write_config([](RunConfig&) {});
  const CliResult r = run({"search-gains", "--config", cfg, "--out", out_dir()});
  EXPECT_EQ(r.code, kExitFail) << r.err;
  EXPECT_NE(r.out.find("evaluated 16 points, 0 feasible"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(fs::path(out_dir()) / "search.json"));
}

TEST_F(CliTest, AuditWritesReport) {
  const std::string cfg = write_config([](RunConfig&) {});
  const CliResult r = run({"audit", "--config", cfg, "--out", out_dir(), "--seed", "3"});
  EXPECT_NE(r.code, kExitError) << r.err;
  EXPECT_NE(r.out.find("lemma bounds: pass"), std::string::npos) << r.out;
  std::ifstream in(fs::path(out_dir()) / "audit.json");
  const Json j = Json::parse(in);
  EXPECT_EQ(j.at("lemma_bounds").at("seed").get<std::uint64_t>(), 3u);
}

TEST_F(CliTest, RoaRequiresCertificate) {
  const std::string cfg = write_config([](RunConfig&) {});
  const CliResult refused = run({"roa", "--config", cfg, "--out", out_dir()});
  EXPECT_EQ(refused.code, kExitFail);
  EXPECT_NE(refused.out.find("W2_det"), std::string::npos) << refused.out;
  EXPECT_FALSE(fs::exists(fs::path(out_dir()) / "roa.json"));

  const CliResult forced = run({"roa", "--config", cfg, "--out", out_dir(), "--uncertified"});
  EXPECT_EQ(forced.code, kExitOk) << forced.out << forced.err;
  EXPECT_NE(forced.out.find("converged 2/2"), std::string::npos) << forced.out;
}

TEST_F(CliTest, BadConfigIsAnError) {
  const fs::path path = dir_ / "bad.cfg";
  std::ifstream in(kReferencePath);
  std::stringstream text;
  text << in.rdbuf();
  std::string cfg = text.str();
  cfg.replace(cfg.find("mass: 1.0"), 9, "mass: -1");
  std::ofstream(path) << cfg;
  const CliResult r = run({"certify", "--config", path.string(), "--out", out_dir()});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("platform.mass"), std::string::npos) << r.err;
  EXPECT_EQ(run({"certify", "--config", (dir_ / "missing.cfg").string()}).code, kExitError);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitError);
  EXPECT_EQ(run({"certify"}).code, kExitError);
  EXPECT_EQ(run({"launch", "--config", kReferencePath}).code, kExitError);
  EXPECT_EQ(run({"simulate", "--config", kReferencePath, "--format", "xml"}).code, kExitError);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}
