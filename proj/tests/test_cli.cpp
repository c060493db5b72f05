#include "prooforge/corpus.hpp"
#include "prooforge/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>

using namespace prooforge;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("prooforge-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the CLI with `args`; stdout lands in out(), stderr in err().
  int cli(const std::string& args) {
    std::string cmd = std::string(PROOFORGE_CLI) + " " + args + " >" + path("stdout") + " 2>" + path("stderr");
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(path(name));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  std::string out() const { return read("stdout"); }
  std::string err() const { return read("stderr"); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  static std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1)) ++n;
    return n;
  }

  fs::path dir_;
};

const std::string kEvm = "bundled:mini-evm.sem";
const std::string kLoop = "bundled:loop-lang.sem";

TEST_F(Cli, ProveAddIsComplete) {
  EXPECT_EQ(cli("prove " + kEvm + " bundled:mini-evm/add.spec -o " + path("add.json")), 0) << err();
  Json j = Json::parse(read("add.json"));
  EXPECT_EQ(j["format"], kGraphFormat);
  EXPECT_EQ(j["partial"], false);
}

TEST_F(Cli, ProveFromFilesOnDisk) {
  std::string spec = std::string(PROOFORGE_BUNDLED) + "/mini-evm/pop.spec";
  EXPECT_EQ(cli(std::string("prove ") + PROOFORGE_BUNDLED + "/mini-evm.sem " + spec), 0) << err();
  EXPECT_NE(out().find("\"prooforge-aprp\""), std::string::npos);
}

TEST_F(Cli, PartialProofExitsTwo) {
  EXPECT_EQ(cli("prove " + kLoop + " bundled:loop-sum.spec --max-depth 1000 --max-iterations 1 -o " + path("p.json")),
            2);
  EXPECT_NE(err().find("partial"), std::string::npos);
}

TEST_F(Cli, UnsatisfiableInitExitsOne) {
  write("bad.spec", "spec bad\ninit <k> #next(ADD) ~> REST </k> <gas> G </gas>\n  requires G >Int 3 andBool G <Int 2\n"
                    "final <k> REST </k>\n");
  EXPECT_EQ(cli("prove " + kEvm + " " + path("bad.spec")), 1);
  EXPECT_NE(err().find("unsatisfiable"), std::string::npos);
}

TEST_F(Cli, ParseErrorNamesFileAndLine) {
  write("broken.sem", "semantics broken\nop f(Nope) -> Int\n");
  EXPECT_EQ(cli("run " + path("broken.sem") + " " + path("missing.cfg")), 1);
  EXPECT_NE(err().find("broken.sem:2"), std::string::npos) << err();
}

TEST_F(Cli, UsageErrorExitsOne) {
  EXPECT_EQ(cli("prove"), 1);
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("--help"), 0);
}

TEST_F(Cli, CompileAddGivesOnePriorityTenRule) {
  ASSERT_EQ(cli("prove " + kEvm + " bundled:mini-evm/add.spec -o " + path("add.json")), 0);
  ASSERT_EQ(cli("compile " + path("add.json") + " " + kEvm + " -o " + path("fast.sem")), 0) << err();
  std::string text = read("fast.sem");
  EXPECT_EQ(count(text, "//@ compiled"), 1u);
  EXPECT_EQ(count(text, "consolidated=5"), 1u);
  EXPECT_EQ(count(text, "priority 10"), 1u);
  EXPECT_NE(text.find("rule add-c0"), std::string::npos);
}

TEST_F(Cli, CompileEmptyProofReproducesInput) {
  write("same.spec", "spec same\ninit <k> REST </k>\nfinal <k> REST </k>\n");
  ASSERT_EQ(cli("prove " + kEvm + " " + path("same.spec") + " -o " + path("same.json")), 0);
  ASSERT_EQ(cli("compile " + path("same.json") + " " + kEvm + " -o " + path("out.sem")), 0);
  EXPECT_EQ(read("out.sem"), to_text(builtin("mini-evm")));
}

TEST_F(Cli, CompileRejectsTamperedProof) {
  ASSERT_EQ(cli("prove " + kEvm + " bundled:mini-evm/add.spec -o " + path("add.json")), 0);
  Json j = Json::parse(read("add.json"));
  j["steps"][0]["n"] = 3;
  write("bad.json", j.dump());
  EXPECT_EQ(cli("compile " + path("bad.json") + " " + kEvm), 1);
  EXPECT_EQ(cli("check " + path("bad.json") + " " + kEvm), 1);
  EXPECT_NE(out().find("step"), std::string::npos);
}

TEST_F(Cli, CheckAcceptsValidProof) {
  ASSERT_EQ(cli("prove " + kEvm + " bundled:mini-evm/jumpi.spec -o " + path("j.json")), 0);
  EXPECT_EQ(cli("check " + path("j.json") + " " + kEvm), 0);
  EXPECT_EQ(out().rfind("ok:", 0), 0u);
}

TEST_F(Cli, LoopCompilesToBodyAndExitRules) {
  ASSERT_EQ(cli("prove " + kLoop + " bundled:loop-sum.spec --max-depth 1000 -o " + path("loop.json") + " --emit-dot " +
                path("loop.dot")),
            0)
      << err();
  EXPECT_NE(read("loop.dot").find("style=dashed"), std::string::npos);
  ASSERT_EQ(cli("compile " + path("loop.json") + " " + kLoop + " -o " + path("fast.sem")), 0) << err();
  EXPECT_EQ(count(read("fast.sem"), "//@ compiled"), 3u);

  ASSERT_EQ(cli("run " + kLoop + " bundled:loop-sum.cfg"), 0);
  std::string slow = out();
  ASSERT_EQ(cli("run " + path("fast.sem") + " bundled:loop-sum.cfg"), 0);
  std::string fast = out();
  EXPECT_NE(slow.find("bind(x, 1000)"), std::string::npos);
  EXPECT_EQ(slow.substr(0, slow.find("steps")), fast.substr(0, fast.find("steps")));
  long steps_slow = std::stol(slow.substr(slow.find("steps") + 6));
  long steps_fast = std::stol(fast.substr(fast.find("steps") + 6));
  EXPECT_GE(steps_slow, 10000);
  EXPECT_LE(steps_fast, 2100);
}

TEST_F(Cli, PartialLoopProofCompilesOnlyProvedEdges) {
  ASSERT_EQ(cli("prove " + kLoop + " bundled:loop-sum.spec --max-depth 1000 --max-iterations 3 -o " + path("p.json")),
            2);
  ASSERT_EQ(cli("check " + path("p.json") + " " + kLoop), 0);
  ASSERT_EQ(cli("compile " + path("p.json") + " " + kLoop + " -o " + path("p.sem")), 0) << err();
  ASSERT_EQ(cli("run " + path("p.sem") + " bundled:loop-sum.cfg"), 0);
  EXPECT_NE(out().find("bind(x, 1000)"), std::string::npos);
}

TEST_F(Cli, RunFuelExhaustionExitsThree) {
  EXPECT_EQ(cli("run " + kLoop + " bundled:loop-sum.cfg --fuel 50"), 3);
  EXPECT_NE(out().find("steps 50"), std::string::npos);
}

TEST_F(Cli, RunTraceListsRewrites) {
  write("stop.cfg", "<k> #fetch </k> <wordStack> nil </wordStack> <pc> 0 </pc> <gas> 10 </gas> "
                    "<program> STOP ; .Program </program> <jumpDests> nil </jumpDests>\n");
  ASSERT_EQ(cli("run " + kEvm + " " + path("stop.cfg") + " --trace"), 0);
  EXPECT_EQ(err().rfind("0 fetch #fetch\n", 0), 0u);
  EXPECT_NE(out().find("<k> #halt </k>"), std::string::npos);

  ASSERT_EQ(cli("prove " + kEvm + " bundled:mini-evm/stop.spec -o " + path("stop.json")), 0);
  ASSERT_EQ(cli("compile " + path("stop.json") + " " + kEvm + " -o " + path("stop.sem")), 0);
  ASSERT_EQ(cli("run " + path("stop.sem") + " " + path("stop.cfg")), 0);
  EXPECT_NE(out().find("steps 2"), std::string::npos);
}

TEST_F(Cli, BenchReportsAndSeeds) {
  ASSERT_EQ(cli("prove " + kEvm + " bundled:mini-evm/add.spec -o " + path("add.json")), 0);
  ASSERT_EQ(cli("compile " + path("add.json") + " " + kEvm + " -o " + path("fast.sem")), 0);
  ASSERT_EQ(cli("bench " + kEvm + " " + path("fast.sem") + " --generate 5 --seed 3 --repetitions 1 --report " +
                path("r.jsonl")),
            0)
      << err();
  EXPECT_NE(out().find("equivalence failures 0"), std::string::npos);
  std::string report = read("r.jsonl");
  EXPECT_EQ(count(report, "\n"), 6u);
  EXPECT_NE(report.find("\"type\":\"summary\""), std::string::npos);
  EXPECT_EQ(cli("bench " + kEvm + " " + path("fast.sem")), 1);
}

TEST_F(Cli, BenchEquivalenceViolationExitsOne) {
  std::string text = to_text(builtin("mini-evm"));
  auto at = text.find("G -Int 3");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 8, "G -Int 2");
  write("wrong.sem", text);
  EXPECT_EQ(cli("bench " + kEvm + " " + path("wrong.sem") + " --generate 5 --repetitions 1"), 1);
  EXPECT_NE(err().find("equivalence violation"), std::string::npos);
}

}  // namespace
