#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "support.hpp"
#include "synodsim/cli.hpp"

namespace fs = std::filesystem;
using synodsim::cli::run_cli;

namespace {

struct Cli {
  std::ostringstream out;
  std::ostringstream err;
  int code = -1;
};

Cli call(std::vector<std::string> args) {
  Cli c;
  c.code = run_cli(args, c.out, c.err);
  return c;
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("synodsim-cli-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string scn(const std::string& name) { return synodsim::testing::scenarios_dir() + "/" + name + ".scn"; }

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const std::string& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("run: protected scenario satisfies every check") {
  TempDir dir;
  const auto r = call({"run", scn("cnd"), "--check", "safety,theorem1,lemma1,lemma2", "--out", dir.path.string()});
  INFO(r.err.str());
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "cnd.trace"));
  const auto verdicts = slurp(dir / "cnd.verdicts");
  CHECK(verdicts.rfind("synodsim-verdicts v1\n", 0) == 0);
  CHECK(verdicts.find("holds=false") == std::string::npos);
  CHECK(slurp(dir / "cnd.manifest").rfind("synodsim-manifest v1\n", 0) == 0);

  CHECK(call({"replay", dir / "cnd.trace"}).code == 0);
  const auto rerun = call({"rerun", dir / "cnd.manifest"});
  INFO(rerun.err.str());
  CHECK(rerun.code == 0);

  SUBCASE("tampered output is detected by rerun") {
    spit(dir / "cnd.verdicts", verdicts + "extra\n");
    CHECK(call({"rerun", dir / "cnd.manifest"}).code == 1);
  }
  SUBCASE("manifest version is checked") {
    auto m = slurp(dir / "cnd.manifest");
    m.replace(0, 20, "synodsim-manifest v9");
    spit(dir / "cnd.manifest", m);
    CHECK(call({"rerun", dir / "cnd.manifest"}).code == 2);
  }
}

TEST_CASE("run: duel violates theorem 1 and writes a counterexample") {
  TempDir dir;
  const auto r = call({"run", scn("duel"), "--check", "theorem1", "--out", dir.path.string()});
  CHECK(r.code == 1);
  CHECK(fs::exists(dir / "duel.theorem1.cex.trace"));
  CHECK(call({"replay", dir / "duel.theorem1.cex.trace"}).code == 0);
  CHECK(call({"rerun", dir / "duel.manifest"}).code == 0);
}

TEST_CASE("run: seed sweeps merge verdicts in seed order") {
  TempDir dir;
  const auto r = call({"run", scn("single"), "--seeds", "3..6", "--budget", "800", "--check", "safety,theorem1",
                       "--out", dir.path.string()});
  CHECK(r.code == 0);
  for (int s = 3; s <= 6; ++s) CHECK(fs::exists(dir / ("single-s" + std::to_string(s) + ".trace")));
  const auto verdicts = slurp(dir / "single.verdicts");
  CHECK(verdicts.find("budget = 800") != std::string::npos);
  auto pos3 = verdicts.find("seed=3 ");
  auto pos6 = verdicts.find("seed=6 ");
  CHECK(pos3 < pos6);
  CHECK(pos6 != std::string::npos);
  CHECK(call({"rerun", dir / "single.manifest"}).code == 0);
}

TEST_CASE("run: usage and input errors exit 2") {
  TempDir dir;
  CHECK(call({"run", scn("missing"), "--out", dir.path.string()}).code == 2);
  CHECK(call({}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({"run", scn("single"), "--check", "liveness", "--out", dir.path.string()}).code == 2);
  CHECK(call({"run", scn("single"), "--seeds", "9..2", "--out", dir.path.string()}).code == 2);
  CHECK(call({"run", scn("single"), "--seed", "1", "--seeds", "1..2"}).code == 2);

  spit(dir / "bad.scn", "[roster]\nP1 proposer\nA1 acceptor\n[nonfaulty]\nall\n[policy]\nkind = cnd\n");
  const auto r = call({"run", dir / "bad.scn", "--out", dir.path.string()});
  CHECK(r.code == 2);
  CHECK(r.err.str().find("line") != std::string::npos);

  spit(dir / "weak.scn",
       "[roster]\nP1 proposer quorum=A1\nA1 acceptor\nA2 acceptor\nA3 acceptor\n[nonfaulty]\nall\n[policy]\n"
       "kind = fair_random\n[limits]\nbudget = 10\npatience = 5\nfairness_bound = 4\nseed = 1\n");
  const auto w = call({"run", dir / "weak.scn", "--out", dir.path.string()});
  CHECK(w.code == 2);
  CHECK(w.err.str().find("quorum:") != std::string::npos);
}

TEST_CASE("replay: mutation, truncation and parse errors") {
  TempDir dir;
  REQUIRE(call({"run", scn("crashq"), "--out", dir.path.string()}).code == 0);
  const auto text = slurp(dir / "crashq.trace");

  spit(dir / "cut.trace", text.substr(0, text.size() * 2 / 3));
  CHECK(call({"replay", dir / "cut.trace"}).code == 0);

  auto mutated = text;
  const auto pos = mutated.find("|1|");  // ballot field of the first message record
  REQUIRE(pos != std::string::npos);
  mutated[pos + 1] = '3';
  spit(dir / "bad.trace", mutated);
  const auto r = call({"replay", dir / "bad.trace"});
  CHECK(r.code == 1);
  CHECK(r.err.str().find("diverged at index") != std::string::npos);

  spit(dir / "junk.trace", "not a trace\n");
  CHECK(call({"replay", dir / "junk.trace"}).code == 2);
  CHECK(call({"replay", dir / "nope.trace"}).code == 2);
}

TEST_CASE("explore exit codes") {
  TempDir dir;
  const auto small = call({"explore", scn("small"), "--depth", "40", "--require-progress", "--out", dir.path.string()});
  CHECK(small.code == 0);
  CHECK(small.out.str().find("learned_coverage = 1\n") != std::string::npos);
  CHECK(fs::exists(dir / "small.report"));

  const auto duel = call({"explore", scn("duel"), "--depth", "40", "--require-progress"});
  CHECK(duel.code == 1);
  CHECK(duel.out.str().find("state_cap_exceeded = false") != std::string::npos);
  CHECK(call({"explore", scn("duel"), "--depth", "40"}).code == 0);

  const auto big = call({"explore", scn("big"), "--state-cap", "20000"});
  CHECK(big.code == 3);
  CHECK(big.out.str().find("state_cap_exceeded = true") != std::string::npos);
}
