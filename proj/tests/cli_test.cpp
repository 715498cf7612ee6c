#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

using namespace parchr;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args, const cli::Hooks& hooks = {}) {
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.code = cli::run_cli(args, out, err, hooks);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("parchr-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json summary_of(const std::string& out) {
  return nlohmann::json::parse(out.substr(0, out.find("}\n") + 1));
}

}  // namespace

TEST(CliRun, PrimesSingleStep) {
  TempDir dir;
  const auto r = invoke({"run", "--example", "primes", "--size", "30", "--strategy", "parr", "--processors", "unbounded",
                      "--seed", "7", "--out", dir / "t.csv"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = summary_of(r.out);
  EXPECT_EQ(j["counted_steps"], 1);
  EXPECT_EQ(j["oracle_result"], "pass");
  EXPECT_EQ(j["validator_result"], "pass");
  EXPECT_EQ(slurp(dir / "t.csv").rfind("step,applicable,applicable_raw,applied,store_size,gc\n1,", 0), 0u);
}

TEST(CliRun, ProgramAndQuery) {
  TempDir dir;
  std::ofstream(dir / "min.chr") << "min(N) \\ min(M) <=> N=<M | true.\n";
  const auto r = invoke({"run", "--program", dir / "min.chr", "--query", "min(3),min(1),min(2)", "--processors", "1",
                      "--strategy", "par", "--seed", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("final store: min(1)\n"), std::string::npos) << r.out;
  const auto j = summary_of(r.out);
  EXPECT_EQ(j["oracle_result"], "skipped");
  EXPECT_EQ(j["counted_steps"], 2);
  EXPECT_EQ(j["example"], "min");
}

TEST(CliRun, UsageErrors) {
  EXPECT_EQ(invoke({"run", "--example", "min", "--program", "x.chr", "--size", "3"}).code, 2);
  EXPECT_EQ(invoke({"run"}).code, 2);
  EXPECT_EQ(invoke({"run", "--example", "min"}).code, 2);
  EXPECT_EQ(invoke({"run", "--program", "x.chr"}).code, 2);
  EXPECT_EQ(invoke({"run", "--example", "nope", "--size", "3"}).code, 2);
  EXPECT_EQ(invoke({"run", "--example", "min", "--size", "3", "--strategy", "fifo"}).code, 2);
  EXPECT_EQ(invoke({"run", "--example", "min", "--size", "3", "--processors", "0"}).code, 2);
  EXPECT_EQ(invoke({"run", "--example", "min", "--size", "3", "--processors", "many"}).code, 2);
  EXPECT_EQ(invoke({"run", "--example", "min", "--size", "3", "--format", "xml"}).code, 2);
  EXPECT_EQ(invoke({"run", "--example", "primes", "--size", "1"}).code, 2);
  EXPECT_EQ(invoke({"run", "--program", "/nonexistent/p.chr", "--query", "a"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  const auto r = invoke({"run", "--example", "min", "--program", "x.chr", "--size", "3"});
  EXPECT_FALSE(r.err.empty());
}

TEST(CliRun, ProcessorsN) {
  const auto r = invoke({"run", "--example", "min", "--size", "6", "--processors", "n", "--seed", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(summary_of(r.out)["processors"], "6");
}

TEST(CliRun, VariantSyntax) {
  const auto r = invoke({"run", "--example", "gcd:gcd2", "--size", "5"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(summary_of(r.out)["example"], "gcd2");
}

TEST(CliRun, StepLimitFails) {
  const auto r = invoke({"run", "--example", "gcd:gcd2", "--size", "20", "--max-steps", "5"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("step limit"), std::string::npos);
  EXPECT_EQ(summary_of(r.out)["total_steps"], 5);
}

TEST(CliRun, FormatsAndByteIdenticalOutput) {
  TempDir dir;
  const std::vector<std::string> base = {"run", "--example", "floyd:3", "--size", "7", "--strategy", "parr",
                                         "--processors", "4", "--seed", "3", "--format", "both"};
  auto a = base;
  a.insert(a.end(), {"--out", dir / "a.csv"});
  auto b = base;
  b.insert(b.end(), {"--out", dir / "b.csv"});
  ASSERT_EQ(invoke(a).code, 0);
  ASSERT_EQ(invoke(b).code, 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "a.json"))["example"], "floyd");

  auto j = base;
  j[12] = "json";
  j.insert(j.end(), {"--out", dir / "only.json"});
  ASSERT_EQ(invoke(j).code, 0);
  EXPECT_EQ(slurp(dir / "only.json"), slurp(dir / "a.json"));
}

TEST(CliRun, KeepStaleAndNoPermuteAreReported) {
  const auto r = invoke({"run", "--example", "msort", "--size", "10", "--processors", "10", "--keep-stale",
                      "--no-permute"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = summary_of(r.out);
  EXPECT_EQ(j["prune_stale"], false);
  EXPECT_EQ(j["permute_query"], false);
}

TEST(CliSweep, MinGrid) {
  TempDir dir;
  const auto r = invoke({"sweep", "--example", "min", "--size", "30", "--strategy", "par,pars,pard,parr",
                      "--processors", "unbounded,1,n", "--seed", "1,2,3,4,5", "--out", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(slurp(dir.path() / "aggregate.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, report::kAggregateHeader);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    const auto counted = std::stoul(cells.at(6));
    EXPECT_GE(counted, 1u);
    EXPECT_LE(counted, 29u);
  }
  EXPECT_EQ(rows, 60u);
  EXPECT_TRUE(fs::exists(dir.path() / "min_30_parr_unbounded_3.csv"));
  EXPECT_TRUE(fs::exists(dir.path() / "min_30_pard_30_5.json"));
}

TEST(CliSweep, ResumesUnlessForced) {
  TempDir dir;
  const std::vector<std::string> args = {"sweep", "--example", "primes", "--size", "12", "--strategy", "pars",
                                         "--processors", "2", "--seed", "1,2", "--out", dir.path().string()};
  ASSERT_EQ(invoke(args).code, 0);
  const auto first_aggregate = slurp(dir.path() / "aggregate.csv");
  const fs::path marker = dir.path() / "primes_12_pars_2_1.csv";
  std::ofstream(marker) << "sentinel";

  const auto resumed = invoke(args);
  EXPECT_EQ(resumed.code, 0);
  EXPECT_NE(resumed.out.find("0 executed, 2 resumed"), std::string::npos) << resumed.out;
  EXPECT_EQ(slurp(marker), "sentinel");
  EXPECT_EQ(slurp(dir.path() / "aggregate.csv"), first_aggregate);

  auto forced = args;
  forced.push_back("--force");
  const auto f = invoke(forced);
  EXPECT_EQ(f.code, 0);
  EXPECT_NE(f.out.find("2 executed"), std::string::npos);
  EXPECT_NE(slurp(marker), "sentinel");
  EXPECT_EQ(slurp(dir.path() / "aggregate.csv"), first_aggregate);
}

TEST(CliSweep, UsageErrors) {
  TempDir dir;
  EXPECT_EQ(invoke({"sweep", "--example", "min", "--size", "5", "--strategy", "par", "--processors", "1", "--seed", "",
                 "--out", dir.path().string()})
                .code,
            2);
  EXPECT_EQ(invoke({"sweep", "--example", "min", "--size", "5", "--strategy", "par", "--processors", "1", "--out",
                 dir.path().string()})
                .code,
            2);
  EXPECT_EQ(invoke({"sweep", "--example", "min", "--size", "5", "--strategy", "par", "--processors", "1", "--seed",
                 "1"})
                .code,
            2);
  EXPECT_EQ(invoke({"sweep", "--example", "min", "--size", "5", "--strategy", "bogus", "--processors", "1", "--seed",
                 "1", "--out", dir.path().string()})
                .code,
            2);
}

TEST(CliCheck, SelectedCriteriaPass) {
  const auto r = invoke({"check", "--only", "1,3"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS  1 "), std::string::npos);
  EXPECT_NE(r.out.find("PASS  3 "), std::string::npos);
  EXPECT_EQ(r.out.find(" 2 Minimum"), std::string::npos);
}

TEST(CliCheck, JsonOutput) {
  const auto r = invoke({"check", "--only", "2", "--json"});
  EXPECT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["passed"], true);
  ASSERT_EQ(j["criteria"].size(), 1u);
  EXPECT_EQ(j["criteria"][0]["id"], 2);
  EXPECT_EQ(j["criteria"][0]["pass"], true);
}

TEST(CliCheck, BrokenStrategyIsCaught) {
  // Schedules only the first entry per step, whatever the processor model.
  cli::Hooks hooks;
  hooks.order = [](ConflictSet cs, Strategy, Rng&) {
    if (cs.size() > 1) cs.resize(1);
    return cs;
  };
  const auto r = invoke({"check", "--only", "1,2"}, hooks);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL  2 Minimum"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("PASS  1 "), std::string::npos) << r.out;
}

TEST(CliBinary, ExitCodes) {
  const std::string bin = PARCHR_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int rc = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  EXPECT_EQ(status("run --example min --size 5 --processors 1"), 0);
  EXPECT_EQ(status("run --example min --size 5 --program x.chr"), 2);
  EXPECT_EQ(status("--help"), 0);
}
