#include <doctest.h>

#include <set>

#include "support.hpp"
#include "synodsim/errors.hpp"
#include "synodsim/synod.hpp"

using namespace synodsim;
using namespace synodsim::synod;
using synodsim::testing::msg;

namespace {

const ActorId P1{0};
const ActorId A1{1};
const ActorId A2{2};
const ActorId A3{3};
const Value x{21};
const Value y{22};
const Value z{23};

std::size_t count_kind(const MessageBag& bag, MessageKind kind) {
  std::size_t n = 0;
  for (const auto& m : bag) n += m.kind == kind ? 1 : 0;
  return n;
}

ProposerState fresh(std::uint32_t stride = 1, std::uint32_t offset = 0) {
  return make_proposer(Value{7}, stride, offset);
}

}  // namespace

TEST_CASE("propose sends one prepare per quorum member") {
  const std::vector<ActorId> q{A1, A2};
  auto p = propose(fresh(), P1, Ballot{1}, q);
  CHECK(p.outbox.size() == 2);
  CHECK(p.outbox.contains(msg(P1, A1, MessageKind::Prepare1a, 1)));
  CHECK(p.outbox.contains(msg(P1, A2, MessageKind::Prepare1a, 1)));
  for (const auto& m : p.outbox) CHECK(m.value.is_null());

  const std::vector<ActorId> all{A1, A2, A3};
  CHECK(propose(fresh(), P1, Ballot{1}, all).outbox.size() == 3);
}

TEST_CASE("re-proposal resets promises and votes") {
  const std::vector<ActorId> q{A1, A2};
  auto p = propose(fresh(2, 0), P1, Ballot{2}, q);
  p = handle_promise(p, msg(A1, P1, MessageKind::Promise1b, 2));
  CHECK(p.promises.size() == 1);
  p = propose(p, P1, Ballot{4}, q);
  CHECK(p.current_ballot == Ballot{4});
  CHECK(p.promises.empty());
  CHECK(p.votes.empty());
  CHECK_THROWS_AS(propose(p, P1, Ballot{4}, q), StaleBallot);
  CHECK_THROWS_AS(propose(p, P1, Ballot{3}, q), StaleBallot);
}

TEST_CASE("next_ballot follows the residue class") {
  auto p0 = fresh(2, 0);
  CHECK(next_ballot(p0) == Ballot{2});
  auto p1 = fresh(2, 1);
  p1.current_ballot = Ballot{3};
  CHECK(next_ballot(p1) == Ballot{5});
  CHECK(next_ballot(fresh(1, 0)) == Ballot{1});
  CHECK(next_ballot(fresh(3, 2)) == Ballot{2});

  auto q = fresh(3, 1);
  CHECK(next_ballot_above(q, Ballot{7}) == Ballot{10});
  CHECK(next_ballot_above(q, Ballot{10}) == Ballot{13});
  q.current_ballot = Ballot{16};
  CHECK(next_ballot_above(q, Ballot{7}) == Ballot{19});
}

TEST_CASE("ballots of different proposers never collide") {
  for (std::uint32_t n = 1; n <= 4; ++n) {
    std::vector<std::set<std::uint64_t>> issued(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      auto p = fresh(n, i);
      for (int k = 0; k < 100; ++k) {
        const Ballot b = next_ballot(p);
        CHECK(b > p.current_ballot);
        CHECK(owns_ballot(p, b));
        issued[i].insert(b.number);
        p.current_ballot = b;
      }
      CHECK(issued[i].size() == 100);
    }
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = i + 1; j < n; ++j) {
        for (auto b : issued[i]) CHECK_FALSE(issued[j].contains(b));
      }
    }
  }
}

TEST_CASE("handle_prepare") {
  SUBCASE("promise carries the highest accepted proposal") {
    AcceptorState a;
    a.highest_seen = Ballot{2};
    a.accepted = Accepted{Ballot{2}, x};
    a = handle_prepare(a, msg(P1, A1, MessageKind::Prepare1a, 3));
    CHECK(a.highest_seen == Ballot{3});
    REQUIRE(a.outbox.size() == 1);
    const auto& m = *a.outbox.begin();
    CHECK(m.kind == MessageKind::Promise1b);
    CHECK(m.ballot == Ballot{3});
    CHECK(m.receiver == P1);
    REQUIRE(m.prior);
    CHECK(*m.prior == Accepted{Ballot{2}, x});
  }
  SUBCASE("equal ballot is not promised") {
    AcceptorState a;
    a.highest_seen = Ballot{3};
    const auto after = handle_prepare(a, msg(P1, A1, MessageKind::Prepare1a, 3));
    CHECK(after == a);
  }
  SUBCASE("fresh acceptor promises with no prior") {
    const auto a = handle_prepare(AcceptorState{}, msg(P1, A1, MessageKind::Prepare1a, 1));
    REQUIRE(a.outbox.size() == 1);
    CHECK_FALSE(a.outbox.begin()->prior.has_value());
    CHECK(a.highest_seen == Ballot{1});
  }
}

TEST_CASE("handle_accept") {
  SUBCASE("accept at the promised ballot") {
    AcceptorState a;
    a.highest_seen = Ballot{3};
    a = handle_accept(a, msg(P1, A1, MessageKind::Accept2a, 3, x.id));
    REQUIRE(a.accepted);
    CHECK(*a.accepted == Accepted{Ballot{3}, x});
    CHECK(count_kind(a.outbox, MessageKind::Voted2b) == 1);
  }
  SUBCASE("lower ballot is ignored") {
    AcceptorState a;
    a.highest_seen = Ballot{5};
    a.unresponded.push_back(msg(P1, A1, MessageKind::Accept2a, 3, x.id));
    const auto after = handle_accept(a, msg(P1, A1, MessageKind::Accept2a, 3, x.id));
    CHECK(after.unresponded.empty());
    CHECK(after.highest_seen == Ballot{5});
    CHECK_FALSE(after.accepted);
    CHECK(after.outbox.empty());
  }
  SUBCASE("fresh acceptor votes") {
    const auto a = handle_accept(AcceptorState{}, msg(P1, A1, MessageKind::Accept2a, 1, x.id));
    REQUIRE(a.accepted);
    CHECK(*a.accepted == Accepted{Ballot{1}, x});
  }
}

TEST_CASE("handle_promise") {
  const std::vector<ActorId> q{A1, A2};
  auto p = propose(fresh(), P1, Ballot{1}, q);
  p.outbox = MessageBag{};

  SUBCASE("quorum of promises emits accepts") {
    p = handle_promise(p, msg(A1, P1, MessageKind::Promise1b, 1));
    CHECK_FALSE(quorum_predicates(p).promised);
    CHECK(p.outbox.empty());
    p = handle_promise(p, msg(A2, P1, MessageKind::Promise1b, 1));
    CHECK(quorum_predicates(p).promised);
    CHECK(count_kind(p.outbox, MessageKind::Accept2a) == 2);
    for (const auto& m : p.outbox) CHECK(m.value == Value{7});
  }
  SUBCASE("stale ballot discarded") {
    const auto after = handle_promise(p, msg(A1, P1, MessageKind::Promise1b, 0));
    CHECK(after == p);
  }
  SUBCASE("duplicate promise is idempotent") {
    p = handle_promise(p, msg(A1, P1, MessageKind::Promise1b, 1));
    p = handle_promise(p, msg(A1, P1, MessageKind::Promise1b, 1));
    CHECK(p.outbox.empty());
    p = handle_promise(p, msg(A2, P1, MessageKind::Promise1b, 1));
    p = handle_promise(p, msg(A2, P1, MessageKind::Promise1b, 1));
    p = handle_promise(p, msg(A1, P1, MessageKind::Promise1b, 1));
    CHECK(count_kind(p.outbox, MessageKind::Accept2a) == 2);
  }
  SUBCASE("promise outside the quorum does not complete it") {
    p = handle_promise(p, msg(A1, P1, MessageKind::Promise1b, 1));
    p = handle_promise(p, msg(A3, P1, MessageKind::Promise1b, 1));
    CHECK_FALSE(quorum_predicates(p).promised);
    CHECK(p.outbox.empty());
  }
}

TEST_CASE("decide_value") {
  auto p = fresh();
  p.current_ballot = Ballot{6};
  auto promise = [&](ActorId from, std::optional<Accepted> prior) {
    p.promises.insert_or_assign(from, msg(from, P1, MessageKind::Promise1b, 6, 0, prior));
  };
  SUBCASE("highest prior wins") {
    promise(A1, Accepted{Ballot{2}, x});
    promise(A2, Accepted{Ballot{5}, y});
    promise(A3, std::nullopt);
    CHECK(decide_value(p) == y);
  }
  SUBCASE("no prior uses own value") {
    promise(A1, std::nullopt);
    promise(A2, std::nullopt);
    CHECK(decide_value(p) == Value{7});
  }
  SUBCASE("single prior") {
    promise(A1, Accepted{Ballot{1}, z});
    CHECK(decide_value(p) == z);
  }
}

TEST_CASE("handle_voted") {
  const std::vector<ActorId> q{A1, A2};
  auto p = propose(fresh(), P1, Ballot{1}, q);
  p = handle_voted(p, msg(A1, P1, MessageKind::Voted2b, 1, 7));
  CHECK_FALSE(p.learned);
  SUBCASE("quorum of votes learns") {
    p = handle_voted(p, msg(A2, P1, MessageKind::Voted2b, 1, 7));
    REQUIRE(p.learned);
    CHECK(*p.learned == Accepted{Ballot{1}, Value{7}});
    const auto after = handle_voted(p, msg(A3, P1, MessageKind::Voted2b, 1, 7));
    CHECK(after == p);
  }
  SUBCASE("stale vote ignored") {
    const auto after = handle_voted(p, msg(A2, P1, MessageKind::Voted2b, 0, 7));
    CHECK(after == p);
  }
}

TEST_CASE("quorum predicates") {
  const std::vector<ActorId> q{A1, A2};
  auto p = propose(fresh(), P1, Ballot{1}, q);
  p = handle_promise(p, msg(A1, P1, MessageKind::Promise1b, 1));
  CHECK_FALSE(has_promises(p, Ballot{1}, q));
  p = handle_promise(p, msg(A2, P1, MessageKind::Promise1b, 1));
  CHECK(has_promises(p, Ballot{1}, q));
  CHECK_FALSE(has_promises(p, Ballot{2}, q));
  CHECK_FALSE(has_promises(p, Ballot{1}, std::vector<ActorId>{}));
  const auto qp = quorum_predicates(p);
  CHECK(qp.promised);
  CHECK_FALSE(qp.voted);
  CHECK_FALSE(qp.learned);
}
