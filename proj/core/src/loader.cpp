#include "wcea/loader.hpp"

#include <cstring>
#include <sstream>

#include "wcea/errors.hpp"

namespace wcea {

namespace {

uint16_t get16(std::span<const uint8_t> b, size_t off) {
  return uint16_t(b[off]) | uint16_t(b[off + 1]) << 8;
}

uint32_t get32(std::span<const uint8_t> b, size_t off) {
  return uint32_t(get16(b, off)) | uint32_t(get16(b, off + 2)) << 16;
}

std::string hex(uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

constexpr uint32_t PT_LOAD = 1;
constexpr uint32_t SHT_SYMTAB = 2;

}  // namespace

MemoryImage load_elf(std::span<const uint8_t> bytes, const MemoryMap& map,
                     std::optional<uint32_t> entry_override) {
  if (bytes.size() < 52) throw LoadError("malformed ELF header: file too short");
  if (bytes[0] != 0x7f || bytes[1] != 'E' || bytes[2] != 'L' || bytes[3] != 'F')
    throw LoadError("malformed ELF header: bad magic");
  if (bytes[4] == 2) throw LoadError("64-bit ELF not supported (need ELFCLASS32)");
  if (bytes[4] != 1) throw LoadError("malformed ELF header: bad class");
  if (bytes[5] == 2) throw LoadError("big-endian ELF not supported (need ELFDATA2LSB)");
  if (bytes[5] != 1) throw LoadError("malformed ELF header: bad data encoding");

  uint32_t entry = get32(bytes, 24);
  uint32_t phoff = get32(bytes, 28);
  uint32_t shoff = get32(bytes, 32);
  uint16_t phentsize = get16(bytes, 42);
  uint16_t phnum = get16(bytes, 44);
  uint16_t shentsize = get16(bytes, 46);
  uint16_t shnum = get16(bytes, 48);

  if (phnum == 0) throw LoadError("no loadable segments");
  if (phentsize < 32) throw LoadError("malformed ELF header: bad phentsize");
  if (uint64_t(phoff) + uint64_t(phnum) * phentsize > bytes.size())
    throw LoadError("malformed ELF header: program headers out of range");

  std::vector<MemoryRegion> regions;
  std::vector<std::vector<uint8_t>> contents;
  int load_index = 0;
  for (uint16_t i = 0; i < phnum; i++) {
    size_t ph = phoff + size_t(i) * phentsize;
    uint32_t p_type = get32(bytes, ph + 0);
    if (p_type != PT_LOAD) continue;
    uint32_t p_offset = get32(bytes, ph + 4);
    uint32_t p_vaddr = get32(bytes, ph + 8);
    uint32_t p_filesz = get32(bytes, ph + 16);
    uint32_t p_memsz = get32(bytes, ph + 20);
    uint32_t p_flags = get32(bytes, ph + 24);
    if (p_memsz == 0) continue;
    if (uint64_t(p_offset) + p_filesz > bytes.size())
      throw LoadError("segment " + std::to_string(i) + " file range out of bounds");
    if (uint64_t(p_vaddr) + p_memsz > 0x1'0000'0000ull)
      throw LoadError("segment " + std::to_string(i) + " overflows the address space");
    for (const auto& r : regions) {
      if (p_vaddr < r.end() && r.base < p_vaddr + p_memsz)
        throw LoadError("overlapping segments at " + hex(p_vaddr));
    }
    MemoryRegion r;
    AddressClass cls = map.classify(p_vaddr);
    switch (cls) {
      case AddressClass::Ram: r.kind = RegionKind::Ram; break;
      case AddressClass::Device: r.kind = RegionKind::Device; break;
      default: r.kind = RegionKind::Flash; break;
    }
    r.name = std::string(to_string(r.kind)) + std::to_string(load_index++);
    r.base = p_vaddr;
    r.size = p_memsz;
    r.readable = (p_flags & 4) != 0;
    r.writable = (p_flags & 2) != 0;
    r.executable = (p_flags & 1) != 0;
    std::vector<uint8_t> data(p_memsz, 0);
    std::memcpy(data.data(), bytes.data() + p_offset, p_filesz);
    regions.push_back(std::move(r));
    contents.push_back(std::move(data));
  }
  if (regions.empty()) throw LoadError("no loadable segments");

  // Symbol table (optional). Function symbols carry the Thumb bit; strip it.
  std::map<std::string, uint32_t> symbols;
  if (shoff != 0 && shnum != 0 && shentsize >= 40 &&
      uint64_t(shoff) + uint64_t(shnum) * shentsize <= bytes.size()) {
    for (uint16_t i = 0; i < shnum; i++) {
      size_t sh = shoff + size_t(i) * shentsize;
      if (get32(bytes, sh + 4) != SHT_SYMTAB) continue;
      uint32_t sym_off = get32(bytes, sh + 16);
      uint32_t sym_size = get32(bytes, sh + 20);
      uint32_t link = get32(bytes, sh + 24);
      uint32_t entsize = get32(bytes, sh + 36);
      if (entsize < 16 || link >= shnum) continue;
      size_t str_sh = shoff + size_t(link) * shentsize;
      uint32_t str_off = get32(bytes, str_sh + 16);
      uint32_t str_size = get32(bytes, str_sh + 20);
      if (uint64_t(str_off) + str_size > bytes.size()) continue;
      for (uint32_t s = 0; s + entsize <= sym_size; s += entsize) {
        size_t sym = sym_off + s;
        if (sym + 16 > bytes.size()) break;
        uint32_t name_idx = get32(bytes, sym + 0);
        uint32_t value = get32(bytes, sym + 4);
        uint8_t info = bytes[sym + 12];
        if ((info & 0xf) != 2) continue;  // STT_FUNC only
        if (name_idx == 0 || name_idx >= str_size) continue;
        const char* name = reinterpret_cast<const char*>(bytes.data()) + str_off + name_idx;
        size_t maxlen = str_size - name_idx;
        size_t len = strnlen(name, maxlen);
        if (len == 0 || len == maxlen) continue;
        symbols[std::string(name, len)] = value & ~1u;
      }
    }
  }

  if (entry_override) entry = *entry_override;
  return MemoryImage(std::move(regions), std::move(contents), entry & ~1u, map,
                     std::move(symbols));
}

MemoryImage load_raw(std::span<const uint8_t> bytes, uint32_t base, uint32_t entry,
                     const MemoryMap& map) {
  if (bytes.empty()) throw LoadError("empty raw image");
  if (entry < base || entry - base >= bytes.size())
    throw LoadError("entry " + hex(entry) + " outside image [" + hex(base) + ", " +
                    hex(base + uint32_t(bytes.size())) + ")");
  MemoryRegion r;
  switch (map.classify(base)) {
    case AddressClass::Ram: r.kind = RegionKind::Ram; break;
    case AddressClass::Device: r.kind = RegionKind::Device; break;
    default: r.kind = RegionKind::Flash; break;
  }
  r.name = "raw";
  r.base = base;
  r.size = uint32_t(bytes.size());
  r.readable = true;
  r.writable = false;
  r.executable = true;
  std::vector<std::vector<uint8_t>> contents;
  contents.emplace_back(bytes.begin(), bytes.end());
  return MemoryImage({r}, std::move(contents), entry, map);
}

MemoryMap parse_memory_map(const std::string& text) {
  MemoryMap m;
  std::istringstream in(text);
  std::string stmt;
  bool any = false;
  while (std::getline(in, stmt, ';')) {
    std::istringstream ts(stmt);
    std::string word;
    if (!(ts >> word)) continue;  // blank tail
    if (word != "region") throw LoadError("memory map: expected 'region', got '" + word + "'");
    std::string name, key, kind_s;
    uint32_t base = 0, size = 0;
    RegionKind kind = RegionKind::Flash;
    if (!(ts >> name)) throw LoadError("memory map: missing region name");
    while (ts >> key) {
      if (key == "base") {
        std::string v;
        ts >> v;
        base = uint32_t(std::stoul(v, nullptr, 0));
      } else if (key == "size") {
        std::string v;
        ts >> v;
        size = uint32_t(std::stoul(v, nullptr, 0));
      } else if (key == "kind") {
        ts >> kind_s;
        if (kind_s == "flash") kind = RegionKind::Flash;
        else if (kind_s == "ram") kind = RegionKind::Ram;
        else if (kind_s == "device") kind = RegionKind::Device;
        else throw LoadError("memory map: unknown kind '" + kind_s + "'");
      } else {
        throw LoadError("memory map: unknown key '" + key + "'");
      }
    }
    m.add_range(base, size, kind);
    any = true;
  }
  if (!any) throw LoadError("memory map: no regions");
  return m;
}

}  // namespace wcea
