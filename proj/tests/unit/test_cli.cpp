#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rlo_cli/checks.hpp"
#include "rlo_cli/commands.hpp"
#include "rlo_cli/csv.hpp"

namespace rlo::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("rlo_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  CommonOptions opts() const { return {dir_ / "out", std::nullopt, true}; }

  fs::path dir_;
  std::ostringstream out_, err_;
};

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<double> column(const std::vector<std::string>& lines, std::size_t col) {
  std::vector<double> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string cell;
    for (std::size_t c = 0; c <= col; ++c) std::getline(row, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

const char* kQuadSgd = R"({
  "objective": {"kind": "quadratic", "dim": 4, "seed": 1},
  "optimizer": {"preset": "sgd", "hyper": {"h": 0.05}},
  "run": {"steps": STEPS, "seed": 2}
})";

std::string with_steps(int steps) {
  std::string s = kQuadSgd;
  s.replace(s.find("STEPS"), 5, std::to_string(steps));
  return s;
}

TEST_F(CliTest, RunWritesOneRowPerStep) {
  EXPECT_EQ(cmd_run(write("c.json", with_steps(25)), opts(), out_, err_), exit_code::kOk)
      << err_.str();
  const auto lines = read_lines(dir_ / "out" / "trace.csv");
  ASSERT_EQ(lines.size(), 26u);
  EXPECT_EQ(lines[0], kTraceHeader);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "summary.txt"));
  EXPECT_EQ(slurp(dir_ / "out" / "trace.csv").find('\r'), std::string::npos);
}

TEST_F(CliTest, ZeroStepsWritesHeaderOnly) {
  EXPECT_EQ(cmd_run(write("c.json", with_steps(0)), opts(), out_, err_), exit_code::kOk);
  const auto lines = read_lines(dir_ / "out" / "trace.csv");
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0], kTraceHeader);
}

TEST_F(CliTest, EtaZeroIsValidationErrorNamingField) {
  const auto cfg = write("c.json", R"({
    "objective": {"kind": "quadratic", "dim": 4},
    "optimizer": {"preset": "momentum", "hyper": {"h": 0.1, "eta": 0}},
    "run": {"steps": 5}
  })");
  EXPECT_EQ(cmd_run(cfg, opts(), out_, err_), exit_code::kValidation);
  EXPECT_NE(err_.str().find("eta"), std::string::npos) << err_.str();
  EXPECT_FALSE(fs::exists(dir_ / "out" / "trace.csv"));
}

TEST_F(CliTest, UnknownKeyIsValidationError) {
  const auto cfg = write("c.json", R"({
    "objective": {"kind": "quadratic", "dim": 4, "colour": 1},
    "optimizer": {"preset": "sgd", "hyper": {"h": 0.1}},
    "run": {"steps": 5}
  })");
  EXPECT_EQ(cmd_run(cfg, opts(), out_, err_), exit_code::kValidation);
  EXPECT_NE(err_.str().find("objective.colour"), std::string::npos) << err_.str();
}

TEST_F(CliTest, MissingConfigIsIoError) {
  EXPECT_EQ(cmd_run(dir_ / "absent.json", opts(), out_, err_), exit_code::kIoError);
}

TEST_F(CliTest, DivergenceReportsPoisonedGradient) {
  const auto cfg = write("c.json", R"({
    "objective": {"kind": "rosenbrock", "dim": 2},
    "optimizer": {"preset": "sgd", "hyper": {"h": 1.0}},
    "run": {"steps": 100}
  })");
  EXPECT_EQ(cmd_run(cfg, opts(), out_, err_), exit_code::kPoisoned);
}

TEST_F(CliTest, SeedOverrideChangesNoisyTrace) {
  const auto cfg = write("c.json", R"({
    "objective": {"kind": "quadratic", "dim": 4, "noise": {"kind": "gaussian", "sigma": 0.1}},
    "optimizer": {"preset": "sgd", "hyper": {"h": 0.05}},
    "run": {"steps": 20, "seed": 1}
  })");
  CommonOptions o = opts();
  ASSERT_EQ(cmd_run(cfg, o, out_, err_), exit_code::kOk);
  const std::string a = slurp(dir_ / "out" / "trace.csv");
  ASSERT_EQ(cmd_run(cfg, o, out_, err_), exit_code::kOk);
  EXPECT_EQ(a, slurp(dir_ / "out" / "trace.csv"));
  o.seed = 2;
  ASSERT_EQ(cmd_run(cfg, o, out_, err_), exit_code::kOk);
  EXPECT_NE(a, slurp(dir_ / "out" / "trace.csv"));
}

TEST_F(CliTest, LogEveryThinsRows) {
  std::string text = with_steps(20);
  text.replace(text.find("\"seed\": 2"), 9, "\"seed\": 2, \"log_every\": 5");
  ASSERT_EQ(cmd_run(write("c.json", text), opts(), out_, err_), exit_code::kOk) << err_.str();
  EXPECT_EQ(read_lines(dir_ / "out" / "trace.csv").size(), 5u);
}

TEST(Csv, SeventeenDigitsRoundTrip) {
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_real(x)), x);
}

const char* kNoisyQuad = R"({
  "objective": {"kind": "quadratic", "dim": 10, "seed": 3,
                "noise": {"kind": "gaussian", "sigma": 0.05}},
  "optimizer": {"preset": "rlo_lifted",
                "hyper": {"h": 0.01, "lambda_b": 0, "global_normalize": 0, "beta1": 0.99}},
  "run": {"steps": 1000, "seed": 1}
})";

TEST_F(CliTest, EtaGridThicknessDecreases) {
  const auto grid = write("g.json", R"({"axes": [{"path": "optimizer.hyper.eta",
      "values": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]}]})");
  ASSERT_EQ(cmd_ablate(write("c.json", kNoisyQuad), grid, opts(), out_, err_), exit_code::kOk)
      << err_.str();
  const auto lines = read_lines(dir_ / "out" / "grid.csv");
  ASSERT_EQ(lines.size(), 10u);
  EXPECT_EQ(lines[0], "optimizer.hyper.eta,best_loss,final_loss,tail_z_norm,mean_cos_vd");
  const auto thick = column(lines, 3);
  for (std::size_t i = 1; i < thick.size(); ++i) EXPECT_LT(thick[i], thick[i - 1]) << i;
  EXPECT_TRUE(fs::exists(dir_ / "out" / "pivot.txt"));
}

TEST_F(CliTest, FactorialGridHasFourRows) {
  const auto grid = write("g.json", R"({"axes": [
      {"path": "optimizer.hyper.global_normalize", "values": [0, 1]},
      {"path": "optimizer.hyper.eta", "values": [0.3, 0.9]}]})");
  std::string cfg = kNoisyQuad;
  cfg.replace(cfg.find("1000"), 4, "50");
  ASSERT_EQ(cmd_ablate(write("c.json", cfg), grid, opts(), out_, err_), exit_code::kOk)
      << err_.str();
  EXPECT_EQ(read_lines(dir_ / "out" / "grid.csv").size(), 5u);
}

TEST_F(CliTest, EmptyAxesRunsBaseConfig) {
  const auto grid = write("g.json", R"({"axes": []})");
  ASSERT_EQ(cmd_ablate(write("c.json", with_steps(10)), grid, opts(), out_, err_),
            exit_code::kOk)
      << err_.str();
  EXPECT_EQ(read_lines(dir_ / "out" / "grid.csv").size(), 2u);
}

TEST_F(CliTest, GridCapExceeded) {
  const auto grid = write("g.json", R"({"cap": 3, "axes": [
      {"path": "optimizer.hyper.h", "values": [0.01, 0.02]},
      {"path": "run.seed", "values": [1, 2]}]})");
  EXPECT_EQ(cmd_ablate(write("c.json", with_steps(10)), grid, opts(), out_, err_),
            exit_code::kValidation);
  EXPECT_FALSE(fs::exists(dir_ / "out" / "grid.csv"));
}

TEST_F(CliTest, InvalidCellRejectedBeforeCompute) {
  const auto grid = write("g.json", R"({"axes": [
      {"path": "optimizer.hyper.h", "values": [0.01, -1]}]})");
  EXPECT_EQ(cmd_ablate(write("c.json", with_steps(10)), grid, opts(), out_, err_),
            exit_code::kValidation);
}

TEST_F(CliTest, VerifyUnknownSuite) {
  EXPECT_EQ(cmd_verify("nosuchsuite", opts(), out_, err_), exit_code::kValidation);
}

TEST_F(CliTest, VerifyGradientsAndContraction) {
  EXPECT_EQ(cmd_verify("gradients", opts(), out_, err_), exit_code::kOk) << out_.str();
  EXPECT_EQ(cmd_verify("contraction", opts(), out_, err_), exit_code::kOk) << out_.str();
}

}  // namespace
}  // namespace rlo::cli
