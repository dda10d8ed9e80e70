// Test-only reference implementations, kept deliberately independent of the
// library's code paths: per-bit loops instead of shifts, long-double normal
// equations instead of the centered OLS, run enumeration instead of masks.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "cansig/bits.hpp"
#include "cansig/tokenizer.hpp"

namespace oracles {

// splitmix64 kept local so test data never depends on library internals.
struct Rng {
    std::uint64_t state = 0x9E3779B97F4A7C15ull;

    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next_u64() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }
};

// Bit j of an 8-byte payload in wire order (0 = MSB of byte 0).
inline int payload_bit(std::span<const std::uint8_t> payload, int j) {
    return (payload[static_cast<std::size_t>(j / 8)] >> (7 - j % 8)) & 1;
}

// Direct per-bit evaluation of the two endian encodings over one payload.
inline std::uint64_t endian_encode(std::span<const std::uint8_t> payload, int start, int end,
                                   cansig::Endianness e) {
    std::uint64_t value = 0;
    for (int j = start; j <= end; ++j) {
        if (!payload_bit(payload, j)) continue;
        const int power = e == cansig::Endianness::little ? j - start : end - j;
        value += std::uint64_t{1} << power;
    }
    return value;
}

// All sub-intervals of the maximal used runs, via direct scanning.
inline std::vector<cansig::TokenBoundary> enumerate_boundaries(
    const cansig::BitClassification& cls) {
    std::vector<cansig::TokenBoundary> out;
    for (int start = 0; start < 64; ++start) {
        if (!cls.is_used(start)) continue;
        for (int end = start; end < 64 && cls.is_used(end); ++end)
            out.push_back(cansig::TokenBoundary{start, end});
    }
    return out;
}

// Closed-form count: sum of L(L+1)/2 over maximal used runs.
inline std::size_t boundary_count(const cansig::BitClassification& cls) {
    std::size_t total = 0;
    std::size_t run = 0;
    for (int j = 0; j <= 64; ++j) {
        if (j < 64 && cls.is_used(j)) {
            ++run;
        } else {
            total += run * (run + 1) / 2;
            run = 0;
        }
    }
    return total;
}

struct LeastSquares {
    long double a = 0;
    long double b = 0;
    long double r2 = 0;
};

// Normal equations in long double, solved from raw power sums.
inline LeastSquares least_squares(std::span<const double> x, std::span<const double> y) {
    const long double n = static_cast<long double>(x.size());
    long double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        sxy += static_cast<long double>(x[i]) * y[i];
        syy += static_cast<long double>(y[i]) * y[i];
    }
    LeastSquares fit;
    const long double denom = n * sxx - sx * sx;
    fit.a = (n * sxy - sx * sy) / denom;
    fit.b = (sy * sxx - sx * sxy) / denom;
    long double ss_res = 0;
    const long double mean_y = sy / n;
    long double ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long double e = fit.a * x[i] + fit.b - y[i];
        ss_res += e * e;
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    fit.r2 = 1.0L - ss_res / ss_tot;
    return fit;
}

}  // namespace oracles
