#include "synodsim/message.hpp"

#include <algorithm>
#include <charconv>

#include "synodsim/ids.hpp"

namespace synodsim {

std::string_view kind_tag(MessageKind kind) {
  switch (kind) {
    case MessageKind::Prepare1a: return "1a";
    case MessageKind::Promise1b: return "1b";
    case MessageKind::Accept2a: return "2a";
    case MessageKind::Voted2b: return "2b";
  }
  return "?";
}

std::optional<MessageKind> parse_kind_tag(std::string_view tag) {
  if (tag == "1a") return MessageKind::Prepare1a;
  if (tag == "1b") return MessageKind::Promise1b;
  if (tag == "2a") return MessageKind::Accept2a;
  if (tag == "2b") return MessageKind::Voted2b;
  return std::nullopt;
}

std::strong_ordering Message::operator<=>(const Message& o) const {
  if (auto c = sender <=> o.sender; c != 0) return c;
  if (auto c = receiver <=> o.receiver; c != 0) return c;
  if (auto c = kind <=> o.kind; c != 0) return c;
  if (auto c = ballot <=> o.ballot; c != 0) return c;
  if (auto c = value <=> o.value; c != 0) return c;
  if (prior.has_value() != o.prior.has_value()) {
    return prior.has_value() ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  if (prior) return *prior <=> *o.prior;
  return std::strong_ordering::equal;
}

MessageBag::MessageBag(std::initializer_list<Message> items) {
  for (const auto& m : items) insert(m);
}

void MessageBag::insert(const Message& m) {
  items_.insert(std::upper_bound(items_.begin(), items_.end(), m), m);
}

bool MessageBag::erase_one(const Message& m) {
  auto it = std::lower_bound(items_.begin(), items_.end(), m);
  if (it == items_.end() || *it != m) return false;
  items_.erase(it);
  return true;
}

std::size_t MessageBag::count(const Message& m) const {
  auto [lo, hi] = std::equal_range(items_.begin(), items_.end(), m);
  return static_cast<std::size_t>(hi - lo);
}

std::string message_fields(const Message& m, const Roster& roster) {
  std::string out;
  out.reserve(32);
  out += kind_tag(m.kind);
  out += '|';
  out += roster.name(m.sender);
  out += '|';
  out += roster.name(m.receiver);
  out += '|';
  out += std::to_string(m.ballot.number);
  out += '|';
  out += std::to_string(m.value.id);
  out += '|';
  if (m.prior) out += std::to_string(m.prior->ballot.number);
  out += '|';
  if (m.prior) out += std::to_string(m.prior->value.id);
  return out;
}

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::optional<Message> parse_message_fields(std::string_view text, const Roster& roster) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto bar = text.find('|', start);
    parts.push_back(text.substr(start, bar == std::string_view::npos ? bar : bar - start));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  if (parts.size() != 7) return std::nullopt;

  Message m;
  auto kind = parse_kind_tag(parts[0]);
  auto sender = roster.find(parts[1]);
  auto receiver = roster.find(parts[2]);
  if (!kind || !sender || !receiver) return std::nullopt;
  m.kind = *kind;
  m.sender = *sender;
  m.receiver = *receiver;
  if (!parse_number(parts[3], m.ballot.number) || !parse_number(parts[4], m.value.id)) {
    return std::nullopt;
  }
  if (parts[5].empty() != parts[6].empty()) return std::nullopt;
  if (!parts[5].empty()) {
    Accepted prior;
    if (!parse_number(parts[5], prior.ballot.number) || !parse_number(parts[6], prior.value.id)) {
      return std::nullopt;
    }
    m.prior = prior;
  }
  return m;
}

}  // namespace synodsim
