#include <doctest.h>

#include "cansig/bits.hpp"
#include "oracles.hpp"

using namespace cansig;

TEST_CASE("reverse_bits64 mirrors bit positions") {
    CHECK(reverse_bits64(0) == 0);
    CHECK(reverse_bits64(~std::uint64_t{0}) == ~std::uint64_t{0});
    CHECK(reverse_bits64(1ull) == (1ull << 63));
    CHECK(reverse_bits64(0x8000000000000000ull) == 1ull);
    oracles::Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t v = rng.next_u64();
        CHECK(reverse_bits64(reverse_bits64(v)) == v);
    }
}

TEST_CASE("slice encodings match the documented examples") {
    // Payload bits [X0, X1, X2] = [1, 1, 0] -> byte 0 = 0b1100'0000.
    const std::uint64_t row = 0xC000000000000000ull;
    const TokenBoundary b{0, 2};
    CHECK(extract_token(row, b, Endianness::little) == 3);
    CHECK(extract_token(row, b, Endianness::big) == 6);
}

TEST_CASE("single-bit tokens are endianness-invariant") {
    oracles::Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        const std::uint64_t row = rng.next_u64();
        const int j = static_cast<int>(rng.below(64));
        const TokenBoundary b{j, j};
        CHECK(extract_token(row, b, Endianness::little) == extract_token(row, b, Endianness::big));
    }
}

TEST_CASE("palindromic slices are endianness-invariant") {
    // 0b101101 reads the same in both directions.
    std::uint64_t row = 0;
    const TokenBoundary b{10, 15};
    row = place_token(row, b, Endianness::big, 0b101101);
    CHECK(extract_token(row, b, Endianness::little) == extract_token(row, b, Endianness::big));
}

TEST_CASE("extract matches the per-bit oracle on random rows") {
    oracles::Rng rng(1234);
    for (int iter = 0; iter < 500; ++iter) {
        const std::uint64_t row = rng.next_u64();
        std::uint8_t payload[8];
        for (int i = 0; i < 8; ++i) payload[i] = static_cast<std::uint8_t>(row >> (8 * (7 - i)));
        const int start = static_cast<int>(rng.below(64));
        const int end = start + static_cast<int>(rng.below(static_cast<std::uint64_t>(64 - start)));
        const TokenBoundary b{start, end};
        for (const Endianness e : {Endianness::little, Endianness::big}) {
            CHECK(extract_token(row, b, e) == oracles::endian_encode(payload, start, end, e));
        }
    }
}

TEST_CASE("place_token is the inverse of extract_token") {
    oracles::Rng rng(99);
    for (int iter = 0; iter < 500; ++iter) {
        const int start = static_cast<int>(rng.below(64));
        const int end = start + static_cast<int>(rng.below(static_cast<std::uint64_t>(64 - start)));
        const TokenBoundary b{start, end};
        const std::uint64_t value = rng.next_u64() & mask_for_length(b.length());
        const std::uint64_t background = rng.next_u64();
        for (const Endianness e : {Endianness::little, Endianness::big}) {
            const std::uint64_t row = place_token(background, b, e, value);
            CHECK(extract_token(row, b, e) == value);
            // Bits outside the slice are untouched.
            const std::uint64_t outside = ~(mask_for_length(b.length()) << (63 - b.end));
            CHECK((row & outside) == (background & outside));
        }
    }
    CHECK_THROWS_AS(place_token(0, TokenBoundary{0, 3}, Endianness::big, 16),
                    std::invalid_argument);
}

TEST_CASE("bit-reversal duality: little of a slice equals big of the mirrored slice") {
    oracles::Rng rng(5);
    for (int iter = 0; iter < 200; ++iter) {
        const std::uint64_t row = rng.next_u64();
        const int start = static_cast<int>(rng.below(64));
        const int end = start + static_cast<int>(rng.below(static_cast<std::uint64_t>(64 - start)));
        const TokenBoundary b{start, end};
        const TokenBoundary mirrored{63 - end, 63 - start};
        CHECK(extract_token(row, b, Endianness::little) ==
              extract_token(reverse_bits64(row), mirrored, Endianness::big));
    }
}
