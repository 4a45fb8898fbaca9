#include "wcea/memory.hpp"

#include <algorithm>

#include "wcea/errors.hpp"

namespace wcea {

const char* to_string(RegionKind k) {
  switch (k) {
    case RegionKind::Flash: return "flash";
    case RegionKind::Ram: return "ram";
    case RegionKind::Device: return "device";
  }
  return "?";
}

const char* to_string(AddressClass c) {
  switch (c) {
    case AddressClass::Flash: return "flash";
    case AddressClass::Ram: return "ram";
    case AddressClass::Device: return "device";
    case AddressClass::Unmapped: return "unmapped";
  }
  return "?";
}

MemoryMap MemoryMap::cortex_m0_default() {
  MemoryMap m;
  m.add_range(0x0000'0000, 0x2000'0000, RegionKind::Flash);
  m.add_range(0x2000'0000, 0x2000'0000, RegionKind::Ram);
  m.add_range(0x4000'0000, 0x2000'0000, RegionKind::Device);
  return m;
}

void MemoryMap::add_range(uint32_t base, uint32_t size, RegionKind kind) {
  if (size == 0) throw LoadError("memory map range has zero size");
  uint64_t end = uint64_t(base) + uint64_t(size);
  if (end > 0x1'0000'0000ull) throw LoadError("memory map range overflows 32-bit space");
  for (const auto& r : ranges_) {
    if (base < r.end() && r.base < end)
      throw LoadError("memory map ranges overlap at 0x" + std::to_string(base));
  }
  MemoryRegion r;
  r.name = std::string(to_string(kind));
  r.base = base;
  r.size = size;
  r.kind = kind;
  r.writable = kind != RegionKind::Flash;
  r.executable = kind == RegionKind::Flash;
  ranges_.push_back(r);
  std::sort(ranges_.begin(), ranges_.end(),
            [](const MemoryRegion& a, const MemoryRegion& b) { return a.base < b.base; });
}

AddressClass MemoryMap::classify(uint32_t addr) const {
  for (const auto& r : ranges_) {
    if (r.contains(addr)) {
      switch (r.kind) {
        case RegionKind::Flash: return AddressClass::Flash;
        case RegionKind::Ram: return AddressClass::Ram;
        case RegionKind::Device: return AddressClass::Device;
      }
    }
  }
  return AddressClass::Unmapped;
}

MemoryImage::MemoryImage(std::vector<MemoryRegion> regions,
                         std::vector<std::vector<uint8_t>> contents, uint32_t entry,
                         MemoryMap map, std::map<std::string, uint32_t> symbols)
    : regions_(std::move(regions)),
      contents_(std::move(contents)),
      entry_(entry),
      map_(std::move(map)),
      symbols_(std::move(symbols)) {
  if (regions_.size() != contents_.size())
    throw LoadError("region/content count mismatch");
  for (size_t i = 0; i < regions_.size(); i++) {
    const auto& r = regions_[i];
    uint64_t end = uint64_t(r.base) + uint64_t(r.size);
    if (end > 0x1'0000'0000ull)
      throw LoadError("region '" + r.name + "' overflows 32-bit address space");
    if (!contents_[i].empty() && contents_[i].size() != r.size)
      throw LoadError("region '" + r.name + "' content length != region size");
    for (size_t j = 0; j < i; j++) {
      const auto& o = regions_[j];
      if (r.base < o.end() && o.base < r.end())
        throw LoadError("regions '" + o.name + "' and '" + r.name + "' overlap");
    }
  }
  if (!is_executable(entry_))
    throw LoadError("entry 0x" + std::to_string(entry_) + " not in an executable region");
}

const MemoryRegion* MemoryImage::region_at(uint32_t addr) const {
  for (const auto& r : regions_)
    if (r.contains(addr)) return &r;
  return nullptr;
}

AddressClass MemoryImage::classify(uint32_t addr) const {
  if (const MemoryRegion* r = region_at(addr)) {
    switch (r->kind) {
      case RegionKind::Flash: return AddressClass::Flash;
      case RegionKind::Ram: return AddressClass::Ram;
      case RegionKind::Device: return AddressClass::Device;
    }
  }
  return map_.classify(addr);
}

bool MemoryImage::is_executable(uint32_t addr) const {
  if (const MemoryRegion* r = region_at(addr)) return r->executable;
  // Unloaded flash is still fetchable in principle, but there is nothing
  // there to decode; treat only loaded regions as executable.
  return false;
}

uint8_t MemoryImage::read8(uint32_t addr) const {
  for (size_t i = 0; i < regions_.size(); i++) {
    if (regions_[i].contains(addr)) {
      const auto& bytes = contents_[i];
      if (bytes.empty()) return 0;
      return bytes[addr - regions_[i].base];
    }
  }
  if (map_.classify(addr) != AddressClass::Unmapped) return 0;
  throw AddressError("read from unmapped address", addr);
}

uint16_t MemoryImage::read16(uint32_t addr) const {
  return uint16_t(read8(addr)) | uint16_t(read8(addr + 1)) << 8;
}

uint32_t MemoryImage::read32(uint32_t addr) const {
  return uint32_t(read16(addr)) | uint32_t(read16(addr + 2)) << 16;
}

std::optional<uint32_t> MemoryImage::symbol_address(const std::string& name) const {
  auto it = symbols_.find(name);
  if (it == symbols_.end()) return {};
  return it->second;
}

std::optional<std::string> MemoryImage::symbol_name(uint32_t addr) const {
  for (const auto& [name, a] : symbols_)
    if (a == addr) return name;
  return {};
}

}  // namespace wcea
