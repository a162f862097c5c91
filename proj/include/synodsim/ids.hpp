#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace synodsim {

/// Index of an actor in its roster. Names are only resolved through a Roster.
struct ActorId {
  std::uint32_t index = 0;
  auto operator<=>(const ActorId&) const = default;
};

/// Proposal number. Zero means "nothing seen yet".
struct Ballot {
  std::uint64_t number = 0;
  auto operator<=>(const Ballot&) const = default;
};

/// Proposed value. Id zero is the null value carried by prepare messages.
struct Value {
  std::uint32_t id = 0;
  static constexpr Value null() { return Value{0}; }
  constexpr bool is_null() const { return id == 0; }
  auto operator<=>(const Value&) const = default;
};

enum class Role : std::uint8_t { Proposer, Acceptor };

std::string_view role_name(Role role);

struct ActorInfo {
  std::string name;
  Role role = Role::Acceptor;
  // Proposer-only: value it proposes when no prior accept is reported, and
  // the quorum it sends to.
  Value value;
  std::vector<ActorId> quorum;
};

/// Static actor set of a scenario. Ids are dense and stable.
class Roster {
 public:
  ActorId add(ActorInfo info);

  std::size_t size() const { return actors_.size(); }
  const ActorInfo& info(ActorId id) const { return actors_.at(id.index); }
  const std::string& name(ActorId id) const { return info(id).name; }
  Role role(ActorId id) const { return info(id).role; }
  bool contains(ActorId id) const { return id.index < actors_.size(); }
  std::optional<ActorId> find(std::string_view name) const;

  std::vector<ActorId> proposers() const;
  std::vector<ActorId> acceptors() const;
  std::size_t proposer_count() const;
  std::size_t acceptor_count() const;
  /// Position of a proposer among the roster's proposers.
  std::uint32_t proposer_index(ActorId id) const;
  /// Smallest number of acceptors forming a strict majority.
  std::size_t majority() const { return acceptor_count() / 2 + 1; }

  void set_quorum(ActorId id, std::vector<ActorId> quorum);

  bool operator==(const Roster&) const = default;

 private:
  std::vector<ActorInfo> actors_;
};

inline bool operator==(const ActorInfo& a, const ActorInfo& b) {
  return a.name == b.name && a.role == b.role && a.value == b.value && a.quorum == b.quorum;
}

}  // namespace synodsim
