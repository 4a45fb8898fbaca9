#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wcea/instr.hpp"
#include "wcea/memory.hpp"

namespace wcea {

// Decodes the unique ARMv6-M instruction at addr. Throws DecodeError for
// undefined encodings (carrying the raw halfwords) and AddressError for an
// unaligned or non-executable address.
Instr decode_one(const MemoryImage& image, uint32_t addr);

// Decodes [start, end) sequentially; stops with an error at the first
// undefined encoding or when a 32-bit encoding straddles `end`.
std::vector<Instr> decode_range(const MemoryImage& image, uint32_t start, uint32_t end);

// Concrete target for PC-relative B / B<cond> / BL; absent for
// register-indirect transfers and non-branches.
std::optional<uint32_t> branch_target(const Instr& i);

// Decodes two raw halfwords without an image (16-bit encodings ignore hw2).
// Used by the decoder itself and by encoding tests.
Instr decode_raw(uint32_t addr, uint16_t hw1, uint16_t hw2, bool hw2_valid);

}  // namespace wcea
