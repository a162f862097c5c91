#include "synodsim/trace.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "synodsim/digest.hpp"
#include "synodsim/errors.hpp"

namespace synodsim {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) pos = text.size();
    if (pos > start) out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool to_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::optional<fam::StepKind> parse_step_tag(std::string_view tag) {
  using fam::StepKind;
  for (auto k : {StepKind::Propose, StepKind::Snd, StepKind::Rcv, StepKind::Stp, StepKind::Bgn}) {
    if (fam::step_tag(k) == tag) return k;
  }
  return std::nullopt;
}

}  // namespace

std::string roster_line(const Roster& roster) {
  std::string out = "roster";
  for (std::uint32_t i = 0; i < roster.size(); ++i) {
    const auto& info = roster.info(ActorId{i});
    out += ' ';
    out += info.name;
    out += ':';
    out += role_name(info.role);
    if (info.role == Role::Proposer) {
      out += ':';
      out += std::to_string(info.value.id);
      out += ':';
      for (std::size_t k = 0; k < info.quorum.size(); ++k) {
        if (k > 0) out += ',';
        out += roster.name(info.quorum[k]);
      }
    }
  }
  return out;
}

std::shared_ptr<const Roster> parse_roster_line(std::string_view line, std::size_t line_no) {
  auto words = split(line, ' ');
  if (words.empty() || words[0] != "roster") throw ParseError(line_no, "roster", "expected roster line");
  auto roster = std::make_shared<Roster>();
  std::vector<std::pair<ActorId, std::string_view>> quorums;
  for (std::size_t i = 1; i < words.size(); ++i) {
    auto parts = split(words[i], ':');
    ActorInfo info;
    std::string_view quorum;
    if (parts.size() == 4 && parts[1] == "proposer") {
      quorum = parts[3];
      info.role = Role::Proposer;
      if (!to_number(parts[2], info.value.id)) throw ParseError(line_no, "roster", "bad value");
    } else if (parts.size() == 2 && parts[1] == "acceptor") {
      info.role = Role::Acceptor;
    } else {
      throw ParseError(line_no, "roster", "bad actor entry '" + std::string(words[i]) + "'");
    }
    info.name = std::string(parts[0]);
    if (roster->find(info.name)) throw ParseError(line_no, "roster", "duplicate actor " + info.name);
    const bool proposer = info.role == Role::Proposer;
    const ActorId id = roster->add(std::move(info));
    if (proposer) quorums.emplace_back(id, quorum);
  }
  for (const auto& [id, list] : quorums) {
    std::vector<ActorId> members;
    for (auto name : split(list, ',')) {
      if (name.empty()) continue;
      auto a = roster->find(name);
      if (!a || roster->role(*a) != Role::Acceptor) {
        throw ParseError(line_no, "roster", "bad quorum member '" + std::string(name) + "'");
      }
      members.push_back(*a);
    }
    roster->set_quorum(id, members);
  }
  return roster;
}

std::string step_payload(const fam::TransitionStep& step, const Roster& roster) {
  switch (step.kind) {
    case fam::StepKind::Snd:
    case fam::StepKind::Rcv: return message_fields(*step.message, roster);
    case fam::StepKind::Propose: {
      std::string out = std::to_string(step.ballot.number) + ":";
      for (std::size_t i = 0; i < step.quorum.size(); ++i) {
        if (i) out += ',';
        out += roster.name(step.quorum[i]);
      }
      return out;
    }
    default: return "-";
  }
}

void write_trace(std::ostream& out, const fam::Path& path) {
  const Roster& roster = *path.initial().roster;
  out << kTraceHeader << '\n' << roster_line(roster) << '\n';
  out << "0 init - - " << to_hex(digest(path.initial())) << '\n';
  for (std::size_t i = 1; i <= path.size(); ++i) {
    const auto& step = path.step_at(i);
    out << i << ' ' << fam::step_tag(step.kind) << ' ' << roster.name(step.actor) << ' '
        << step_payload(step, roster) << ' ' << to_hex(digest(path.config_at(i))) << '\n';
  }
}

std::string trace_text(const fam::Path& path) {
  std::ostringstream out;
  write_trace(out, path);
  return out.str();
}

Trace read_trace(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::string_view> lines;
  bool last_terminated = text.empty() || text.back() == '\n';
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      auto nl = rest.find('\n');
      lines.push_back(rest.substr(0, nl));
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  if (lines.empty() || lines[0] != kTraceHeader) {
    throw ParseError(1, "header", "expected '" + std::string(kTraceHeader) + "'");
  }
  if (lines.size() < 3) throw ParseError(lines.size() + 1, "init", "missing roster or init record");

  Trace trace;
  trace.roster = parse_roster_line(lines[1], 2);
  const Roster& roster = *trace.roster;

  auto init = split(lines[2], ' ');
  if (init.size() != 5 || init[0] != "0" || init[1] != "init" ||
      !parse_hex(init[4], trace.initial_digest)) {
    throw ParseError(3, "init", "malformed init record");
  }

  for (std::size_t li = 3; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    const bool unterminated = li + 1 == lines.size() && !last_terminated;
    try {
      auto words = split(lines[li], ' ');
      if (words.empty() && unterminated) break;
      if (words.size() != 5) throw ParseError(line_no, "record", "expected 5 fields");
      TraceRecord rec;
      if (!to_number(words[0], rec.index)) throw ParseError(line_no, "index", "not a number");
      if (rec.index != trace.records.size() + 1) throw ParseError(line_no, "index", "out of sequence");
      auto kind = parse_step_tag(words[1]);
      if (!kind) throw ParseError(line_no, "kind", "unknown step kind");
      auto actor = roster.find(words[2]);
      if (!actor) throw ParseError(line_no, "actor", "unknown actor");
      if (!parse_hex(words[4], rec.digest)) throw ParseError(line_no, "digest", "bad digest");
      rec.step.kind = *kind;
      rec.step.actor = *actor;
      switch (*kind) {
        case fam::StepKind::Snd:
        case fam::StepKind::Rcv: {
          auto m = parse_message_fields(words[3], roster);
          if (!m) throw ParseError(line_no, "message", "malformed message fields");
          rec.step.message = *m;
          break;
        }
        case fam::StepKind::Propose: {
          auto colon = words[3].find(':');
          if (colon == std::string_view::npos ||
              !to_number(words[3].substr(0, colon), rec.step.ballot.number)) {
            throw ParseError(line_no, "ballot", "malformed propose payload");
          }
          for (auto name : split(words[3].substr(colon + 1), ',')) {
            auto a = roster.find(name);
            if (!a) throw ParseError(line_no, "quorum", "unknown actor");
            rec.step.quorum.push_back(*a);
          }
          break;
        }
        default:
          if (words[3] != "-") throw ParseError(line_no, "payload", "expected '-'");
      }
      trace.records.push_back(std::move(rec));
    } catch (const ParseError&) {
      if (unterminated) break;  // truncated mid-record
      throw;
    }
  }
  return trace;
}

ReplayResult replay(const Trace& trace) {
  ReplayResult result;
  fam::Path path(fam::initial_configuration(trace.roster));
  if (digest(path.initial()) != trace.initial_digest) {
    result.ok = false;
    result.divergent_index = 0;
    result.detail = "initial configuration digest mismatch";
    result.path = std::move(path);
    return result;
  }
  for (const auto& rec : trace.records) {
    if (!fam::enabled(path.last(), rec.step)) {
      result.ok = false;
      result.divergent_index = rec.index;
      result.detail = "step not enabled";
      break;
    }
    path.extend(rec.step);
    if (digest(path.last()) != rec.digest) {
      result.ok = false;
      result.divergent_index = rec.index;
      result.detail = "digest mismatch";
      break;
    }
  }
  result.path = std::move(path);
  return result;
}

}  // namespace synodsim
