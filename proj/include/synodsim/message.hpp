#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synodsim/ids.hpp"

namespace synodsim {

enum class MessageKind : std::uint8_t { Prepare1a, Promise1b, Accept2a, Voted2b };

std::string_view kind_tag(MessageKind kind);
std::optional<MessageKind> parse_kind_tag(std::string_view tag);

/// A (ballot, value) pair an acceptor has accepted.
struct Accepted {
  Ballot ballot;
  Value value;
  auto operator<=>(const Accepted&) const = default;
};

/// Synod message: the 5-tuple plus the prior accept reported by promises.
struct Message {
  ActorId sender;
  ActorId receiver;
  MessageKind kind = MessageKind::Prepare1a;
  Ballot ballot;
  Value value;
  std::optional<Accepted> prior;

  bool operator==(const Message&) const = default;
  std::strong_ordering operator<=>(const Message& other) const;
};

/// Counted multiset of messages kept in canonical (sorted) order.
class MessageBag {
 public:
  MessageBag() = default;
  MessageBag(std::initializer_list<Message> items);

  void insert(const Message& m);
  /// Removes one instance. Returns false if `m` is absent.
  bool erase_one(const Message& m);
  std::size_t count(const Message& m) const;
  bool contains(const Message& m) const { return count(m) > 0; }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const std::vector<Message>& items() const { return items_; }

  bool operator==(const MessageBag&) const = default;

 private:
  std::vector<Message> items_;
};

class Roster;

/// `kind|sender|receiver|ballot|value|prior_ballot|prior_value`, prior fields
/// empty when absent.
std::string message_fields(const Message& m, const Roster& roster);
/// Inverse of message_fields. Returns nullopt on malformed input.
std::optional<Message> parse_message_fields(std::string_view text, const Roster& roster);

}  // namespace synodsim
