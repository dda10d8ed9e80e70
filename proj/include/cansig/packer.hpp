#pragma once

#include <span>
#include <vector>

#include "cansig/matcher.hpp"
#include "cansig/tokenizer.hpp"

namespace cansig {

// One packing interval: the best match seen for a distinct boundary,
// weighted by fit quality times token length.
struct PackingCandidate {
    TokenBoundary boundary;
    double weight = 0.0;  // r2 * length, always > 0 for stored matches
    TokenMatch match;
};

// Collapses a match set (single AID) to one candidate per distinct boundary:
// highest r2 wins; ties prefer the lower DID, then little endianness.
std::vector<PackingCandidate> reduce_to_candidates(std::span<const TokenMatch> matches);

// Chosen non-overlapping token set for one AID payload.
struct PayloadMap {
    AidKey aid;
    std::vector<TokenMatch> selected;  // sorted by start bit, pairwise disjoint
    double score = 0.0;                // selected weight sum / 64, in [0, 1]
};

// Maximum-weight selection of pairwise non-overlapping candidates via
// weighted interval scheduling. Equal-weight optima are resolved
// deterministically: more bits covered, then the lexicographically smallest
// sorted sequence of (start, end) boundaries.
//
// Scores are accumulated in a canonical order (descending start bit), so the
// exhaustive oracle below reproduces them bit-for-bit.
PayloadMap find_optimal_payload(const AidKey& aid, std::span<const PackingCandidate> candidates);

// Exhaustive-subset oracle with the identical objective and tie-breaks.
// Throws TooManyCandidates above 20 intervals.
PayloadMap brute_force_payload(const AidKey& aid, std::span<const PackingCandidate> candidates);

// Weight sum folded in the canonical order shared by both solvers.
double canonical_score_sum(std::span<const PackingCandidate> selection);

}  // namespace cansig
