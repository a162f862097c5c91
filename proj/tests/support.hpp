#pragma once

#include <memory>
#include <string>
#include <vector>

#include "synodsim/fam.hpp"
#include "synodsim/ids.hpp"
#include "synodsim/message.hpp"
#include "synodsim/scenario.hpp"

namespace synodsim::testing {

/// Roster with `proposers` proposers (P1..) and `acceptors` acceptors (A1..).
/// Proposer i gets value 10+i and the first `quorum_size` acceptors as quorum
/// (all acceptors when 0).
inline std::shared_ptr<Roster> make_roster(std::size_t proposers, std::size_t acceptors,
                                           std::size_t quorum_size = 0) {
  auto r = std::make_shared<Roster>();
  std::vector<ActorId> ps;
  for (std::size_t i = 1; i <= proposers; ++i) {
    ps.push_back(r->add(ActorInfo{"P" + std::to_string(i), Role::Proposer,
                                  Value{static_cast<std::uint32_t>(10 + i)}, {}}));
  }
  std::vector<ActorId> as;
  for (std::size_t i = 1; i <= acceptors; ++i) {
    as.push_back(r->add(ActorInfo{"A" + std::to_string(i), Role::Acceptor, Value::null(), {}}));
  }
  const std::size_t q = quorum_size == 0 ? acceptors : quorum_size;
  for (auto p : ps) r->set_quorum(p, std::vector<ActorId>(as.begin(), as.begin() + static_cast<long>(q)));
  return r;
}

inline ActorId id_of(const Roster& r, const std::string& name) { return *r.find(name); }

inline Message msg(ActorId from, ActorId to, MessageKind kind, std::uint64_t ballot,
                   std::uint32_t value = 0, std::optional<Accepted> prior = std::nullopt) {
  return Message{from, to, kind, Ballot{ballot}, Value{value}, prior};
}

inline std::string scenarios_dir() { return SYNODSIM_SCENARIOS; }

}  // namespace synodsim::testing
