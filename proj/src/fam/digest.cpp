#include "synodsim/digest.hpp"

#include <charconv>
#include <cstdio>

namespace synodsim {

namespace {

void append_message(std::string& out, const Message& m) {
  out += kind_tag(m.kind);
  out += ':';
  out += std::to_string(m.sender.index);
  out += '>';
  out += std::to_string(m.receiver.index);
  out += ':';
  out += std::to_string(m.ballot.number);
  out += ':';
  out += std::to_string(m.value.id);
  if (m.prior) {
    out += ':';
    out += std::to_string(m.prior->ballot.number);
    out += '/';
    out += std::to_string(m.prior->value.id);
  }
}

void append_bag(std::string& out, const MessageBag& bag) {
  out += '[';
  for (const auto& m : bag) {
    append_message(out, m);
    out += ';';
  }
  out += ']';
}

void append_accepted(std::string& out, const std::optional<Accepted>& a) {
  if (!a) {
    out += '-';
    return;
  }
  out += std::to_string(a->ballot.number);
  out += '/';
  out += std::to_string(a->value.id);
}

void append_state(std::string& out, const fam::ActorState& state) {
  if (const auto* p = std::get_if<synod::ProposerState>(&state)) {
    out += "P v=" + std::to_string(p->own_value.id) + " b=" + std::to_string(p->current_ballot.number) +
           " n=" + std::to_string(p->ballot_stride) + " i=" + std::to_string(p->ballot_offset) + " q=";
    for (auto a : p->target_quorum) out += std::to_string(a.index) + ',';
    out += " pr=";
    for (const auto& [id, m] : p->promises) {
      append_message(out, m);
      out += ';';
    }
    out += " vt=";
    for (const auto& [id, m] : p->votes) {
      append_message(out, m);
      out += ';';
    }
    out += " l=";
    append_accepted(out, p->learned);
    out += " o=";
    append_bag(out, p->outbox);
  } else {
    const auto& a = std::get<synod::AcceptorState>(state);
    out += "A h=" + std::to_string(a.highest_seen.number) + " acc=";
    append_accepted(out, a.accepted);
    out += " eta=";
    for (const auto& m : a.unresponded) {
      append_message(out, m);
      out += ';';
    }
    out += " o=";
    append_bag(out, a.outbox);
  }
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string canonical_text(const fam::Configuration& config) {
  std::string out;
  out.reserve(256);
  for (const auto* side : {&config.available, &config.failed}) {
    out += side == &config.available ? "alpha{" : "failed{";
    for (const auto& [id, state] : *side) {
      out += std::to_string(id.index);
      out += '=';
      append_state(out, state);
      out += '\n';
    }
    out += "}";
  }
  out += "mu";
  append_bag(out, config.in_flight);
  return out;
}

std::uint64_t digest(const fam::Configuration& config) { return fnv1a64(canonical_text(config)); }

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return std::string(buf, 16);
}

bool parse_hex(std::string_view text, std::uint64_t& out) {
  if (text.size() != 16) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out, 16);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace synodsim
