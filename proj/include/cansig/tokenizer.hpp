#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cansig/bits.hpp"
#include "cansig/traces.hpp"

namespace cansig {

enum class BitClass : std::uint8_t { constant_zero, constant_one, used };

// Partition of the 64 payload bit positions by observed behaviour. A bit
// that never changed is indistinguishable from padding, so it lands in a
// constant class even if it is "really" a signal.
struct BitClassification {
    std::array<BitClass, 64> bits{};

    std::uint64_t used_mask() const;     // bit j of the payload -> machine bit 63-j
    int count(BitClass c) const;
    bool is_used(int j) const { return bits[static_cast<std::size_t>(j)] == BitClass::used; }
};

BitClassification categorize_bits(const AidTrace& trace);

// Every inclusive interval whose bits are all used, i.e. all sub-intervals
// of the maximal used runs; sorted by (start, end).
std::vector<TokenBoundary> valid_token_boundaries(const BitClassification& cls);

// Maximal runs of used bits, sorted by start.
std::vector<TokenBoundary> used_runs(const BitClassification& cls);

}  // namespace cansig
