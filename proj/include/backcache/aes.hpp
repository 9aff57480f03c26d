#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace backcache::aes {

using Block = std::array<std::uint8_t, 16>;

/// AES-128 encryption (reference path, used to validate the lookup model).
Block encrypt(const Block& key, const Block& plaintext);

/// T-table line touched by each lookup, as an index in [0, 64): four 1KB
/// tables of 16 lines each, byte i of the state indexing table i mod 4.
///
/// With `full_rounds` false only the first round is modeled (16 lookups, line
/// (p_i ^ k_i) >> 4 of table i mod 4). Otherwise all ten rounds are expanded
/// from the real cipher state (160 lookups).
std::vector<std::uint8_t> ttable_lines(const Block& key, const Block& plaintext,
                                       bool full_rounds);

}  // namespace backcache::aes
