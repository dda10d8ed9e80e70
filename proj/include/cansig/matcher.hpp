#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cansig/bits.hpp"
#include "cansig/tokenizer.hpp"
#include "cansig/traces.hpp"

namespace cansig {

// Integer time series of one token slice under one bit order.
struct TokenSeries {
    TokenBoundary boundary;
    Endianness endianness = Endianness::little;
    std::vector<std::uint64_t> values;
    std::vector<double> times;  // copied from the source trace
};

TokenSeries make_integers(const AidTrace& trace, const TokenBoundary& boundary, Endianness e);

enum class InterpMode { linear, hold };

const char* to_string(InterpMode m);
InterpMode interp_mode_from_string(const std::string& s);

// Token series resampled at the surviving diagnostic time points.
struct Alignment {
    std::vector<double> values;
    std::vector<std::size_t> kept;  // indices into the diagnostic time list
};

// Piecewise-linear (or zero-order-hold) resampling of the series at the
// diagnostic times that fall inside [times.front(), times.back()]; points
// outside the span are dropped, never extrapolated.
//
// Throws std::invalid_argument when the series has fewer than 2 samples and
// InsufficientOverlap when fewer than min_points diagnostic times survive.
Alignment interpolate(const TokenSeries& series, std::span<const double> diag_times,
                      InterpMode mode, std::size_t min_points);

// Reusable resampling recipe for one (broadcast times, diagnostic times)
// pair; the bracketing indices do not depend on token values, so one plan
// serves every candidate boundary.
struct AlignmentPlan {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> left;   // x_tilde = x[left] + frac * (x[left+1] - x[left])
    std::vector<double> frac;        // 0 means take x[left] exactly

    std::size_t size() const { return kept.size(); }
};

AlignmentPlan build_alignment_plan(std::span<const double> trace_times,
                                   std::span<const double> diag_times, InterpMode mode);

struct FitResult {
    double r2 = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// Ordinary least squares y ~ a*x + b scored by the coefficient of
// determination. Returns nullopt when x or y has zero variance over the
// window. R² of the fitted line is clipped at 0 against rounding noise.
std::optional<FitResult> linear_fit(std::span<const double> x, std::span<const double> y);

// 1 - sum((yhat - y)^2) / sum((y - mean(y))^2); unbounded below for an
// arbitrary predictor. Throws std::invalid_argument when y is constant.
double coef_determ(std::span<const double> y, std::span<const double> yhat);

struct TokenMatch {
    AidKey aid;
    TokenBoundary boundary;
    Endianness endianness = Endianness::little;
    int did = 0;
    double r2 = 0.0;
    double a = 0.0;
    double b = 0.0;
    std::size_t n_points = 0;
};

// Match-set ordering: (aid, start, end, endianness little<big, did).
bool match_order(const TokenMatch& lhs, const TokenMatch& rhs);

struct MatchOptions {
    double alpha = 0.5;
    std::size_t min_points = 10;
    InterpMode interp = InterpMode::linear;
};

// Candidates skipped during matching, by reason.
struct MatchDiagnostics {
    std::size_t fits_evaluated = 0;
    std::size_t insufficient_overlap = 0;
    std::size_t no_token_variance = 0;
    std::size_t no_did_variance = 0;
    std::size_t below_alpha = 0;
};

// Evaluates every (boundary, endianness, DID) candidate and keeps fits with
// r2 >= alpha. Output is deterministic and sorted by match_order regardless
// of evaluation order.
std::vector<TokenMatch> match_traces(const AidTrace& trace,
                                     std::span<const TokenBoundary> boundaries,
                                     const std::map<int, DidTrace>& did_traces,
                                     const MatchOptions& options,
                                     MatchDiagnostics* diagnostics = nullptr);

}  // namespace cansig
