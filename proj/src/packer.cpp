#include "cansig/packer.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <stdexcept>

#include "cansig/errors.hpp"

namespace cansig {

namespace {

bool better_match(const TokenMatch& lhs, const TokenMatch& rhs) {
    if (lhs.r2 != rhs.r2) return lhs.r2 > rhs.r2;
    if (lhs.did != rhs.did) return lhs.did < rhs.did;
    return lhs.endianness < rhs.endianness;
}

bool candidate_order(const PackingCandidate& a, const PackingCandidate& b) {
    return a.boundary < b.boundary;  // (start, end) lexicographic
}

// Solution comparison used by both solvers: higher score, then more bits
// covered, then the lexicographically smallest sequence of (start, end)
// boundaries. Two distinct selections with equal score can never be
// prefix-related (every candidate has positive weight), so the elementwise
// comparison always finds a deciding pair; the size rule is a guard for
// pathological floating-point collapses only.
bool better_selection(double score_a, const std::vector<std::size_t>& a, double score_b,
                      const std::vector<std::size_t>& b,
                      const std::vector<PackingCandidate>& sorted) {
    if (score_a != score_b) return score_a > score_b;
    long bits_a = 0;
    long bits_b = 0;
    for (std::size_t i : a) bits_a += sorted[i].boundary.length();
    for (std::size_t i : b) bits_b += sorted[i].boundary.length();
    if (bits_a != bits_b) return bits_a > bits_b;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t k = 0; k < n; ++k) {
        const TokenBoundary& ba = sorted[a[k]].boundary;
        const TokenBoundary& bb = sorted[b[k]].boundary;
        if (ba != bb) return ba < bb;
    }
    return a.size() < b.size();
}

PayloadMap assemble(const AidKey& aid, const std::vector<std::size_t>& picked,
                    const std::vector<PackingCandidate>& sorted, double score_sum) {
    PayloadMap out;
    out.aid = aid;
    out.selected.reserve(picked.size());
    for (std::size_t i : picked) out.selected.push_back(sorted[i].match);
    out.score = score_sum / 64.0;
    return out;
}

}  // namespace

double canonical_score_sum(std::span<const PackingCandidate> selection) {
    // Right-assoc fold over ascending start bits: w_1 + (w_2 + (... + 0)).
    double sum = 0.0;
    for (std::size_t i = selection.size(); i-- > 0;) sum = selection[i].weight + sum;
    return sum;
}

std::vector<PackingCandidate> reduce_to_candidates(std::span<const TokenMatch> matches) {
    std::map<TokenBoundary, TokenMatch> best;
    for (const TokenMatch& m : matches) {
        const auto [it, inserted] = best.try_emplace(m.boundary, m);
        if (!inserted && better_match(m, it->second)) it->second = m;
    }
    std::vector<PackingCandidate> out;
    out.reserve(best.size());
    for (const auto& [boundary, match] : best) {
        PackingCandidate c;
        c.boundary = boundary;
        c.weight = match.r2 * boundary.length();
        c.match = match;
        out.push_back(std::move(c));
    }
    return out;
}

PayloadMap find_optimal_payload(const AidKey& aid, std::span<const PackingCandidate> candidates) {
    std::vector<PackingCandidate> sorted(candidates.begin(), candidates.end());
    std::sort(sorted.begin(), sorted.end(), candidate_order);
    const std::size_t n = sorted.size();
    if (n == 0) return assemble(aid, {}, sorted, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        if (sorted[i].boundary == sorted[i - 1].boundary)
            throw std::invalid_argument("duplicate boundary in packing candidates");
    }

    std::vector<int> starts(n);
    for (std::size_t i = 0; i < n; ++i) starts[i] = sorted[i].boundary.start;

    // next[i]: first candidate starting after i's end bit.
    std::vector<std::size_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
        next[i] = static_cast<std::size_t>(
            std::upper_bound(starts.begin(), starts.end(), sorted[i].boundary.end) -
            starts.begin());
    }

    // Suffix DP over (score, bits); the lex tie-keys are resolved during
    // reconstruction, which rebuilds the forward-lex-smallest optimum from
    // scratch rather than trusting local decisions.
    struct Best {
        double score = 0.0;
        long bits = 0;
        bool operator==(const Best&) const = default;
    };
    const auto better = [](const Best& x, const Best& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.bits > y.bits;
    };

    std::vector<Best> f(n + 1);
    for (std::size_t i = n; i-- > 0;) {
        const Best take{sorted[i].weight + f[next[i]].score,
                        sorted[i].boundary.length() + f[next[i]].bits};
        f[i] = better(take, f[i + 1]) ? take : f[i + 1];
    }

    std::vector<std::size_t> picked;
    std::size_t i = 0;
    while (i < n) {
        const Best target = f[i];
        if (target.score == 0.0 && target.bits == 0) break;
        std::size_t k = i;
        for (;; ++k) {
            if (k >= n) throw std::logic_error("packing reconstruction lost the optimum");
            const Best take{sorted[k].weight + f[next[k]].score,
                            sorted[k].boundary.length() + f[next[k]].bits};
            if (take == target) break;
        }
        picked.push_back(k);
        i = next[k];
    }

    return assemble(aid, picked, sorted, f[0].score);
}

PayloadMap brute_force_payload(const AidKey& aid, std::span<const PackingCandidate> candidates) {
    if (candidates.size() > 20)
        throw TooManyCandidates("exhaustive packing limited to 20 candidates, got " +
                                std::to_string(candidates.size()));
    std::vector<PackingCandidate> sorted(candidates.begin(), candidates.end());
    std::sort(sorted.begin(), sorted.end(), candidate_order);
    const std::size_t n = sorted.size();

    std::vector<std::size_t> best_sel;
    double best_score = 0.0;
    std::vector<std::size_t> sel;
    std::vector<PackingCandidate> sel_candidates;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        sel.clear();
        sel_candidates.clear();
        int prev_end = -1;
        bool valid = true;
        for (std::size_t i = 0; i < n && valid; ++i) {
            if (!(mask & (1u << i))) continue;
            if (sorted[i].boundary.start <= prev_end) {
                valid = false;
                break;
            }
            prev_end = sorted[i].boundary.end;
            sel.push_back(i);
            sel_candidates.push_back(sorted[i]);
        }
        if (!valid) continue;
        const double score = canonical_score_sum(sel_candidates);
        if (better_selection(score, sel, best_score, best_sel, sorted)) {
            best_score = score;
            best_sel = sel;
        }
    }
    return assemble(aid, best_sel, sorted, best_score);
}

}  // namespace cansig
