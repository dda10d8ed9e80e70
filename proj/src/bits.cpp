#include "cansig/bits.hpp"

#include <stdexcept>

namespace cansig {

const char* to_string(Endianness e) {
    return e == Endianness::little ? "little" : "big";
}

Endianness endianness_from_string(const std::string& s) {
    if (s == "little") return Endianness::little;
    if (s == "big") return Endianness::big;
    throw std::invalid_argument("unknown endianness: " + s);
}

std::uint64_t reverse_bits64(std::uint64_t v) {
    v = ((v >> 1) & 0x5555555555555555ull) | ((v & 0x5555555555555555ull) << 1);
    v = ((v >> 2) & 0x3333333333333333ull) | ((v & 0x3333333333333333ull) << 2);
    v = ((v >> 4) & 0x0F0F0F0F0F0F0F0Full) | ((v & 0x0F0F0F0F0F0F0F0Full) << 4);
    v = ((v >> 8) & 0x00FF00FF00FF00FFull) | ((v & 0x00FF00FF00FF00FFull) << 8);
    v = ((v >> 16) & 0x0000FFFF0000FFFFull) | ((v & 0x0000FFFF0000FFFFull) << 16);
    return (v >> 32) | (v << 32);
}

std::uint64_t place_token(std::uint64_t row, const TokenBoundary& b, Endianness e,
                          std::uint64_t value) {
    const int len = b.length();
    const std::uint64_t mask = mask_for_length(len);
    if (value > mask) throw std::invalid_argument("token value does not fit boundary width");
    std::uint64_t wire = value;  // start-bit-most-significant form
    if (e == Endianness::little) wire = reverse_bits64(value) >> (64 - len);
    row &= ~(mask << (63 - b.end));
    row |= wire << (63 - b.end);
    return row;
}

}  // namespace cansig
