#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace cansig {

// Bit positions use the wire order of an 8-byte CAN payload: index 0 is the
// most significant bit of byte 0 (the first byte on the wire), index 63 the
// least significant bit of byte 7. A payload row is packed into a uint64_t
// so that bit j sits at machine position 63 - j; the row value therefore
// equals the payload read as one big-endian 64-bit integer.

// Inclusive bit interval [start, end]; start == end is a 1-bit token.
struct TokenBoundary {
    int start = 0;
    int end = 0;

    int length() const { return end - start + 1; }
    bool valid() const { return 0 <= start && start <= end && end <= 63; }
    bool overlaps(const TokenBoundary& other) const {
        return start <= other.end && other.start <= end;
    }
    auto operator<=>(const TokenBoundary&) const = default;
};

// Which end of the slice carries the most significant bit:
// little -> the end bit, big -> the start bit.
enum class Endianness : std::uint8_t { little = 0, big = 1 };

const char* to_string(Endianness e);
Endianness endianness_from_string(const std::string& s);

inline std::uint64_t mask_for_length(int len) {
    return len >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << len) - 1);
}

std::uint64_t reverse_bits64(std::uint64_t v);

// Integer value of row bits [b.start, b.end] with the start bit most
// significant (wire order).
inline std::uint64_t extract_big(std::uint64_t row, const TokenBoundary& b) {
    return (row >> (63 - b.end)) & mask_for_length(b.length());
}

// Same slice with the end bit most significant (bit-reversed wire order).
inline std::uint64_t extract_little(std::uint64_t row, const TokenBoundary& b) {
    const TokenBoundary mirrored{63 - b.end, 63 - b.start};
    return extract_big(reverse_bits64(row), mirrored);
}

inline std::uint64_t extract_token(std::uint64_t row, const TokenBoundary& b, Endianness e) {
    return e == Endianness::big ? extract_big(row, b) : extract_little(row, b);
}

// Inverse of extract_token: writes `value` into the slice, leaving other bits
// untouched. Value must fit in b.length() bits.
std::uint64_t place_token(std::uint64_t row, const TokenBoundary& b, Endianness e,
                          std::uint64_t value);

}  // namespace cansig
