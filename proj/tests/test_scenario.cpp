#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "synodsim/errors.hpp"
#include "synodsim/scenario.hpp"

using namespace synodsim;
using namespace synodsim::sched;

namespace {

const char* kBase = R"([roster]
P1 proposer value=3 quorum=A1,A2
P2 proposer
A1 acceptor
A2 acceptor
A3 acceptor

[nonfaulty]
all

[policy]
kind = fair_random

[limits]
budget = 100
patience = 10
fairness_bound = 8
seed = 42
)";

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in, "t");
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

void expect_parse_error(const std::string& text, std::size_t line, const std::string& field) {
  try {
    parse(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == line);
    CHECK(e.field() == field);
  }
}

std::string validation_error(const Scenario& s) {
  try {
    validate(s);
  } catch (const IllFormedScenario& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse defaults and explicit values") {
  const auto s = parse(kBase);
  const auto& r = *s.roster;
  REQUIRE(r.size() == 5);
  const auto p1 = *r.find("P1");
  const auto p2 = *r.find("P2");
  CHECK(r.info(p1).value == Value{3});
  CHECK(r.info(p2).value == Value{2});  // ordinal default
  CHECK(r.info(p1).quorum.size() == 2);
  CHECK(r.info(p2).quorum.size() == 3);  // all acceptors by default
  CHECK(s.nonfaulty.size() == 5);
  CHECK(s.budget == 100);
  CHECK(s.patience == 10);
  CHECK(s.fairness_bound == 8);
  CHECK(s.seed == 42);
  CHECK(s.max_retries == 0);
  CHECK(s.stop == StopRule::AllLearned);
  CHECK(s.policy.kind == PolicyKind::FairRandom);
  CHECK_NOTHROW(validate(s));
}

TEST_CASE("scenario text round trips") {
  for (const char* f : {"single", "small", "duel", "cnd", "crashq", "big"}) {
    CAPTURE(f);
    const auto s = load_scenario(testing::scenarios_dir() + "/" + f + ".scn");
    CHECK_NOTHROW(validate(s));
    const auto again = parse(scenario_text(s));
    CHECK(scenario_text(again) == scenario_text(s));
    CHECK(*again.roster == *s.roster);
  }
}

TEST_CASE("parse errors name line and field") {
  expect_parse_error(replace(kBase, "P2 proposer", "P2 leader"), 3, "role");
  expect_parse_error(replace(kBase, "budget = 100", "budget = lots"), 15, "budget");
  expect_parse_error(replace(kBase, "kind = fair_random", "kind = chaos"), 12, "kind");
  expect_parse_error(replace(kBase, "[limits]", "[limitz]"), 14, "section");
  expect_parse_error(replace(kBase, "quorum=A1,A2", "quorum=A1,A9"), 2, "quorum");
  expect_parse_error(replace(kBase, "A3 acceptor", "A2 acceptor"), 6, "name");
  expect_parse_error(std::string(kBase) + "[failures]\n5 A1 explode\n", 20, "action");
  expect_parse_error(replace(kBase, "seed = 42\n", ""), 14, "seed");
  CHECK_THROWS_AS(load_scenario(testing::scenarios_dir() + "/missing.scn"), std::exception);
}

TEST_CASE("validation names the violated invariant") {
  SUBCASE("minority quorum") {
    const auto s = parse(replace(kBase, "quorum=A1,A2", "quorum=A1"));
    CHECK(validation_error(s).rfind("quorum:", 0) == 0);
  }
  SUBCASE("nonfaulty actor that never restarts") {
    const auto s = parse(std::string(kBase) + "[failures]\n5 A2 stp\n");
    CHECK(validation_error(s).find("nonfaulty actors never fail permanently") != std::string::npos);
  }
  SUBCASE("the same plan is fine when the actor is faulty") {
    auto text = replace(kBase, "[nonfaulty]\nall", "[nonfaulty]\nP1 P2 A1 A3");
    CHECK(validation_error(parse(text + "[failures]\n5 A2 stp\n")).empty());
  }
  SUBCASE("failures must alternate") {
    const auto s = parse(std::string(kBase) + "[failures]\n5 A2 bgn\n");
    CHECK(validation_error(s).rfind("failures:", 0) == 0);
  }
  SUBCASE("cnd quorum member must be nonfaulty") {
    auto text = replace(kBase, "[nonfaulty]\nall", "[nonfaulty]\nP1 P2 A1 A3");
    text = replace(text, "kind = fair_random", "kind = cnd\nproposer = P1\nquorum = A1,A2\nactivation = 0");
    CHECK(validation_error(parse(text)).find("cnd: quorum member A2") == 0);
  }
  SUBCASE("cnd ballot residue") {
    auto text = replace(kBase, "kind = fair_random",
                        "kind = cnd\nproposer = P1\nquorum = A1,A2\nactivation = 0\nballot = 3");
    CHECK(validation_error(parse(text)).rfind("cnd: ballot", 0) == 0);
    text = replace(text, "ballot = 3", "ballot = 4");
    CHECK(validation_error(parse(text)).empty());
  }
}

TEST_CASE("is_quorum") {
  const auto r = testing::make_roster(1, 5);
  const auto a = r->acceptors();
  CHECK(r->majority() == 3);
  CHECK(is_quorum(*r, {a[0], a[1], a[2]}));
  CHECK_FALSE(is_quorum(*r, {a[0], a[1]}));
  CHECK_FALSE(is_quorum(*r, {}));
  CHECK_FALSE(is_quorum(*r, {a[0], a[1], ActorId{0}}));
}

TEST_CASE("random scenarios are valid and reproducible") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    CAPTURE(seed);
    const auto s = random_scenario(seed);
    CHECK_NOTHROW(validate(s));
    CHECK(s.roster->proposer_count() >= 1);
    CHECK(s.roster->proposer_count() <= 3);
    CHECK(s.roster->acceptor_count() <= 5);
    CHECK(s.budget == 5000);
    CHECK(scenario_text(random_scenario(seed)) == scenario_text(s));
  }
}
