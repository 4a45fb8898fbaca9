#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "wcea/rational.hpp"

namespace wcea {

// Non-negative counts per counter id. Counter ids come from one model's
// declared counter set; the Cortex-M0 set below is what the static analysis
// and the simulator can produce.
using EventVector = std::map<std::string, uint64_t>;

namespace counters {
inline const std::string kInsnNonMul = "insn_nonmul";       // executed instructions w/o muls
inline const std::string kRamReads = "ram_reads";           // RAM data reads
inline const std::string kRamWrites = "ram_writes";         // RAM writes
inline const std::string kFlashReads = "flash_reads";       // Flash data reads
inline const std::string kTakenBranches = "taken_branches"; // taken branches (edge-resident)
inline const std::string kMuls = "muls";                    // multiplication instructions
}  // namespace counters

inline EventVector& operator+=(EventVector& a, const EventVector& b) {
  for (const auto& [id, count] : b) a[id] += count;
  return a;
}

inline EventVector operator+(EventVector a, const EventVector& b) {
  a += b;
  return a;
}

inline EventVector scale(const EventVector& v, uint64_t factor) {
  EventVector out;
  for (const auto& [id, count] : v) out[id] = count * factor;
  return out;
}

}  // namespace wcea
