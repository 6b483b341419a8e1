#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lsmix/cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using lsmix::cli::Json;
using lsmix::cli::run_cli;

namespace {

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation run(std::vector<std::string> args) {
  std::ostringstream o, e;
  Invocation r;
  r.code = run_cli(std::move(args), o, e);
  r.out = o.str();
  r.err = e.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lsmix_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream f(data_path());
    f << "# standard data\n";
    const auto data = lsmix::testing::standard_data();
    for (double x : data.values()) f << std::setprecision(17) << x << "\n\n";
  }
  void TearDown() override { fs::remove_all(dir_); }
  [[nodiscard]] std::string data_path() const { return (dir_ / "data.txt").string(); }
  [[nodiscard]] std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST(CliParse, ValuesSkipCommentsAndBlanks) {
  std::istringstream in("# header\n1.5\n\n  -2e3 \n# tail\n");
  EXPECT_EQ(lsmix::cli::parse_values(in, "x"), (std::vector<double>{1.5, -2000.0}));
  std::istringstream bad("1.0\nabc\n");
  EXPECT_THROW(lsmix::cli::parse_values(bad, "x"), lsmix::cli::InputError);
  EXPECT_EQ(lsmix::cli::parse_list("1, 2.5,3"), (std::vector<double>{1.0, 2.5, 3.0}));
}

TEST(CliNsd, TextOutputIsOnePerLine) {
  const Invocation r = run({"nsd", "--a", "0", "--var", "1", "--n", "25"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::vector<double> v;
  for (double x; in >> x;) v.push_back(x);
  ASSERT_EQ(v.size(), 25u);
  EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
  EXPECT_NEAR(v[12], 0.0, 1e-12);
  EXPECT_NEAR(v[0], -1.7688, 1e-3);
}

TEST_F(CliTest, InvalidInputExitCodes) {
  EXPECT_EQ(run({"fit", "--s", "2"}).code, 2);
  EXPECT_EQ(run({"fit", "--data", path("missing.txt"), "--s", "2"}).code, 2);
  EXPECT_EQ(run({"fit", "--data", data_path(), "--s", "2", "--bogus"}).code, 2);
  EXPECT_EQ(run({"fit", "--data", data_path()}).code, 2);
  EXPECT_EQ(run({"fit", "--data", data_path(), "--s", "2", "--family", "cauchy"}).code, 2);
  std::ofstream(path("bad.txt")) << "1\n2\nnot-a-number\n";
  const Invocation bad = run({"fit", "--data", path("bad.txt"), "--s", "1"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find(":3:"), std::string::npos) << bad.err;
}

TEST_F(CliTest, HypothesisViolationExitCode) {
  const Invocation r = run({"bound", "--data", data_path(), "--certificate", "improper-noise", "--noise", "improper:20",
                     "--s", "2"});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("hypothesis"), std::string::npos);
}

TEST_F(CliTest, BicCertificateRows) {
  const Invocation r = run({"bound", "--data", data_path(), "--theorem", "4.13", "--g-max", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["command"], "bound");
  EXPECT_EQ(j["config"]["certificate"], "bic");
  const auto& rows = j["result"]["rows"];
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0]["g"], 1);
  EXPECT_NEAR(rows[0]["value"].get<double>(), 3.37, 0.2);
  EXPECT_TRUE(rows[0]["holds"].get<bool>());
  EXPECT_NEAR(rows[1]["value"].get<double>(), -7.56, 0.2);
  EXPECT_FALSE(rows[1]["holds"].get<bool>());
  EXPECT_EQ(j["result"]["bound"], "1/51");
}

TEST_F(CliTest, RerunFromReportIsIdentical) {
  const std::string first = path("first.json");
  const std::string second = path("second.json");
  ASSERT_EQ(run({"select", "--data", data_path(), "--s-max", "3", "--out", first}).code, 0);
  ASSERT_EQ(run({"--from-report", first, "--out", second}).code, 0);
  EXPECT_EQ(slurp(first), slurp(second));
  const Json j = Json::parse(slurp(first));
  EXPECT_EQ(j["result"]["chosen"], 2);
  for (const auto& a : j["args"]) EXPECT_NE(a.get<std::string>(), "--out");
}

TEST_F(CliTest, OutFileAndPlotData) {
  const std::string out = path("fit.json");
  const std::string plot = path("fit.csv");
  const Invocation r = run({"fit", "--data", data_path(), "--s", "2", "--out", out, "--plot-data", plot});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(fs::exists(out + ".tmp"));
  const Json j = Json::parse(slurp(out));
  const auto& comps = j["result"]["components"];
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_NEAR(comps[0]["location"].get<double>(), 0.0, 0.05);
  EXPECT_NEAR(comps[1]["location"].get<double>(), 5.0, 0.05);
  const std::string csv = slurp(plot);
  EXPECT_FALSE(csv.empty());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n') >= 2, true);
}

TEST_F(CliTest, ClassifyCsv) {
  const Invocation r = run({"classify", "--data", data_path(), "--s", "2", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 51);
  EXPECT_EQ(run({"classify", "--data", data_path(), "--s", "2", "--format", "text"}).code, 2);
}

TEST_F(CliTest, ProbeAndThreshold) {
  const Invocation p = run({"search", "--data", data_path(), "--mode", "probe", "--add", "50,50,50", "--noise",
                     "improper:0.0117", "--s", "2"});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_TRUE(Json::parse(p.out)["result"]["probe"]["parameter_breakdown"].get<bool>());
  const Invocation t = run({"search", "--data", data_path(), "--s", "2"});
  ASSERT_EQ(t.code, 0) << t.err;
  const double y = Json::parse(t.out)["result"]["search"]["threshold"].get<double>();
  EXPECT_GT(y, 13.0);
  EXPECT_LT(y, 18.0);
}

TEST(CliCalibrate, ReportsTuning) {
  const Invocation r = run({"calibrate", "--n", "50", "--p", "0.95", "--sigma-max", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j["result"]["sigma0"].get<double>(), 0.025, 0.005);
  EXPECT_NEAR(j["result"]["b"].get<double>(), 0.0117, 0.0005);
}
