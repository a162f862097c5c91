#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "synodsim/path.hpp"

namespace synodsim {

inline constexpr std::string_view kTraceHeader = "synodsim-trace v1";

struct TraceRecord {
  std::size_t index = 0;
  fam::TransitionStep step;
  std::uint64_t digest = 0;
};

struct Trace {
  std::shared_ptr<const Roster> roster;
  std::uint64_t initial_digest = 0;
  std::vector<TraceRecord> records;
};

/// One record per line: `index kind actor payload digest`.
void write_trace(std::ostream& out, const fam::Path& path);
std::string trace_text(const fam::Path& path);

/// Throws ParseError on malformed or version-mismatched input. A trailing line
/// without a newline that does not parse is treated as truncation and dropped.
Trace read_trace(std::istream& in);

std::string roster_line(const Roster& roster);
std::shared_ptr<const Roster> parse_roster_line(std::string_view line, std::size_t line_no);

std::string step_payload(const fam::TransitionStep& step, const Roster& roster);

struct ReplayResult {
  bool ok = true;
  /// First record index whose step was not enabled or whose digest differed.
  std::optional<std::size_t> divergent_index;
  std::string detail;
  std::optional<fam::Path> path;  // replayed prefix
};

/// Re-applies every step from the roster's initial configuration and compares
/// digests.
ReplayResult replay(const Trace& trace);

}  // namespace synodsim
