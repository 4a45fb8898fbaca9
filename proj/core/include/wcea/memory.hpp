#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wcea {

enum class RegionKind { Flash, Ram, Device };

// Result of an address lookup. Unmapped is a value, not an error: the energy
// model distinguishes RAM and flash accesses, and anything else falls under
// the worst-coefficient rule downstream.
enum class AddressClass { Flash, Ram, Device, Unmapped };

const char* to_string(RegionKind k);
const char* to_string(AddressClass c);

struct MemoryRegion {
  std::string name;
  uint32_t base = 0;
  uint32_t size = 0;  // bytes; base + size must not overflow 32 bits
  RegionKind kind = RegionKind::Flash;
  bool readable = true;
  bool writable = false;
  bool executable = false;

  bool contains(uint32_t addr) const { return addr >= base && addr - base < size; }
  uint32_t end() const { return base + size; }
};

// Address-range classification table. Partitions the 4 GiB space into kinds
// independently of what was actually loaded, so stack and static RAM
// addresses classify correctly even in images with no RAM segment.
class MemoryMap {
public:
  // Cortex-M0 style default: flash below 0x2000'0000 (the 0x0800'0000 part
  // plus its alias at 0), RAM at 0x2000'0000..0x3FFF'FFFF, peripherals at
  // 0x4000'0000..0x5FFF'FFFF.
  static MemoryMap cortex_m0_default();

  void add_range(uint32_t base, uint32_t size, RegionKind kind);
  AddressClass classify(uint32_t addr) const;
  const std::vector<MemoryRegion>& ranges() const { return ranges_; }

private:
  std::vector<MemoryRegion> ranges_;  // sorted, pairwise disjoint
};

// A loaded executable: byte contents per region plus the classification map.
// Immutable after construction and safe to share across analysis passes.
class MemoryImage {
public:
  MemoryImage(std::vector<MemoryRegion> regions, std::vector<std::vector<uint8_t>> contents,
              uint32_t entry, MemoryMap map, std::map<std::string, uint32_t> symbols = {});

  const std::vector<MemoryRegion>& regions() const { return regions_; }
  const std::vector<uint8_t>& contents(size_t region_index) const {
    return contents_[region_index];
  }
  uint32_t entry() const { return entry_; }
  const std::map<std::string, uint32_t>& symbols() const { return symbols_; }
  const MemoryMap& map() const { return map_; }

  // Region holding addr, or nullptr. Loaded regions take precedence over the
  // bare classification table.
  const MemoryRegion* region_at(uint32_t addr) const;

  AddressClass classify(uint32_t addr) const;

  bool is_mapped(uint32_t addr) const { return classify(addr) != AddressClass::Unmapped; }
  bool is_executable(uint32_t addr) const;

  // Little-endian reads from loaded contents. Uninitialized but mapped
  // addresses read as zero. Throws AddressError when unmapped.
  uint8_t read8(uint32_t addr) const;
  uint16_t read16(uint32_t addr) const;
  uint32_t read32(uint32_t addr) const;

  std::optional<uint32_t> symbol_address(const std::string& name) const;
  // Reverse lookup for report labels; exact match only.
  std::optional<std::string> symbol_name(uint32_t addr) const;

private:
  std::vector<MemoryRegion> regions_;
  std::vector<std::vector<uint8_t>> contents_;
  uint32_t entry_;
  MemoryMap map_;
  std::map<std::string, uint32_t> symbols_;
};

}  // namespace wcea
