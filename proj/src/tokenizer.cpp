#include "cansig/tokenizer.hpp"

#include <stdexcept>

namespace cansig {

std::uint64_t BitClassification::used_mask() const {
    std::uint64_t mask = 0;
    for (int j = 0; j < 64; ++j) {
        if (bits[static_cast<std::size_t>(j)] == BitClass::used) mask |= 1ull << (63 - j);
    }
    return mask;
}

int BitClassification::count(BitClass c) const {
    int n = 0;
    for (BitClass b : bits) {
        if (b == c) ++n;
    }
    return n;
}

BitClassification categorize_bits(const AidTrace& trace) {
    if (trace.rows.empty()) throw std::invalid_argument("cannot categorize an empty trace");
    std::uint64_t all_and = ~std::uint64_t{0};
    std::uint64_t all_or = 0;
    for (std::uint64_t row : trace.rows) {
        all_and &= row;
        all_or |= row;
    }
    BitClassification cls;
    for (int j = 0; j < 64; ++j) {
        const std::uint64_t bit = std::uint64_t{1} << (63 - j);
        if ((all_or & bit) == 0) {
            cls.bits[static_cast<std::size_t>(j)] = BitClass::constant_zero;
        } else if ((all_and & bit) != 0) {
            cls.bits[static_cast<std::size_t>(j)] = BitClass::constant_one;
        } else {
            cls.bits[static_cast<std::size_t>(j)] = BitClass::used;
        }
    }
    return cls;
}

std::vector<TokenBoundary> used_runs(const BitClassification& cls) {
    std::vector<TokenBoundary> runs;
    int j = 0;
    while (j < 64) {
        if (!cls.is_used(j)) {
            ++j;
            continue;
        }
        const int start = j;
        while (j < 64 && cls.is_used(j)) ++j;
        runs.push_back(TokenBoundary{start, j - 1});
    }
    return runs;
}

std::vector<TokenBoundary> valid_token_boundaries(const BitClassification& cls) {
    std::vector<TokenBoundary> out;
    for (const TokenBoundary& run : used_runs(cls)) {
        for (int start = run.start; start <= run.end; ++start) {
            for (int end = start; end <= run.end; ++end) {
                out.push_back(TokenBoundary{start, end});
            }
        }
    }
    return out;
}

}  // namespace cansig
