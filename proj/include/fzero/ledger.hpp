#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

// Exact bit accounting for the simulated coordinator model.  Every message
// is self-delimiting: a fixed 32-bit header plus its payload.  Payload
// units:
//   - an item id costs ceil(log2(n)) bits (minimum 1),
//   - an integer count costs ceil(log2(f1 + 1)) bits (minimum 1),
//   - a position in a length-m vector costs ceil(log2(m)) bits (minimum 1).
// Control flow (e.g. "descend one level") is derived from shared public
// randomness and is not charged.

namespace fzero {

inline constexpr std::uint64_t kHeaderBits = 32;

constexpr std::uint64_t ceil_log2(std::uint64_t x) noexcept {
  if (x <= 1) return 0;
  std::uint64_t bits = 0;
  std::uint64_t v = x - 1;
  while (v > 0) {
    ++bits;
    v >>= 1;
  }
  return bits;
}

struct CostModel {
  std::uint64_t item_id_bits = 1;
  std::uint64_t count_bits = 1;

  static CostModel for_dataset(std::uint64_t n, std::uint64_t f1) {
    CostModel m;
    m.item_id_bits = ceil_log2(n) > 0 ? ceil_log2(n) : 1;
    m.count_bits = ceil_log2(f1 + 1) > 0 ? ceil_log2(f1 + 1) : 1;
    return m;
  }
};

enum class Direction : std::uint8_t {
  kToCoordinator,
  kToPlayer,
};

struct LedgerEntry {
  std::uint32_t round = 0;
  Direction dir = Direction::kToCoordinator;
  std::uint32_t player = 0;
  const char* phase = "";
  std::uint64_t payload_bits = 0;
  std::uint64_t header_bits = kHeaderBits;
};

class CommLedger {
 public:
  void charge(std::uint32_t round, Direction dir, std::uint32_t player,
              const char* phase, std::uint64_t payload_bits) {
    entries_.push_back({round, dir, player, phase, payload_bits, kHeaderBits});
    total_ += payload_bits + kHeaderBits;
  }

  std::uint64_t total_bits() const { return total_; }

  std::uint64_t phase_payload_bits(std::string_view phase) const {
    std::uint64_t bits = 0;
    for (const auto& e : entries_)
      if (phase == e.phase) bits += e.payload_bits;
    return bits;
  }

  std::uint64_t phase_total_bits(std::string_view phase) const {
    std::uint64_t bits = 0;
    for (const auto& e : entries_)
      if (phase == e.phase) bits += e.payload_bits + e.header_bits;
    return bits;
  }

  const std::vector<LedgerEntry>& entries() const { return entries_; }

 private:
  std::vector<LedgerEntry> entries_;
  std::uint64_t total_ = 0;
};

}  // namespace fzero
