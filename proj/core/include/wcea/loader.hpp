#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "wcea/memory.hpp"

namespace wcea {

// Loads a 32-bit little-endian ELF executable. Loadable segments become
// regions classified through `map`; the symbol table is imported when
// present. `entry_override` replaces the ELF header entry.
MemoryImage load_elf(std::span<const uint8_t> bytes, const MemoryMap& map = MemoryMap::cortex_m0_default(),
                     std::optional<uint32_t> entry_override = {});

// Loads a flat binary as a single executable region whose kind comes from
// classifying `base` in `map`. Entry must lie within [base, base+len).
MemoryImage load_raw(std::span<const uint8_t> bytes, uint32_t base, uint32_t entry,
                     const MemoryMap& map = MemoryMap::cortex_m0_default());

// Deterministic lookup against the image's region table.
inline AddressClass classify_address(const MemoryImage& image, uint32_t addr) {
  return image.classify(addr);
}

// Parses the textual region table used by the driver's --map flag: one
// `region <name> base <addr> size <n> kind flash|ram|device [rwx];` per line.
MemoryMap parse_memory_map(const std::string& text);

}  // namespace wcea
