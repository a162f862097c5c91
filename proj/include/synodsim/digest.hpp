#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "synodsim/fam.hpp"

namespace synodsim {

std::uint64_t fnv1a64(std::string_view bytes);

/// Canonical serialization of a configuration; equal configurations have
/// equal text.
std::string canonical_text(const fam::Configuration& config);

/// Stable 64-bit hash of canonical_text.
std::uint64_t digest(const fam::Configuration& config);

std::string to_hex(std::uint64_t value);
bool parse_hex(std::string_view text, std::uint64_t& out);

}  // namespace synodsim
