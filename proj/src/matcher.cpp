#include "cansig/matcher.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "cansig/errors.hpp"

namespace cansig {

const char* to_string(InterpMode m) { return m == InterpMode::linear ? "linear" : "hold"; }

InterpMode interp_mode_from_string(const std::string& s) {
    if (s == "linear") return InterpMode::linear;
    if (s == "hold") return InterpMode::hold;
    throw std::invalid_argument("unknown interpolation mode: " + s);
}

TokenSeries make_integers(const AidTrace& trace, const TokenBoundary& boundary, Endianness e) {
    if (!boundary.valid()) throw std::invalid_argument("token boundary out of range");
    TokenSeries series;
    series.boundary = boundary;
    series.endianness = e;
    series.times = trace.times;
    series.values.reserve(trace.rows.size());
    for (std::uint64_t row : trace.rows) series.values.push_back(extract_token(row, boundary, e));
    return series;
}

AlignmentPlan build_alignment_plan(std::span<const double> trace_times,
                                   std::span<const double> diag_times, InterpMode mode) {
    AlignmentPlan plan;
    if (trace_times.size() < 2) return plan;
    const double t_first = trace_times.front();
    const double t_last = trace_times.back();
    for (std::size_t k = 0; k < diag_times.size(); ++k) {
        const double s = diag_times[k];
        if (s < t_first || s > t_last) continue;
        const auto it = std::upper_bound(trace_times.begin(), trace_times.end(), s);
        std::size_t left;
        double frac;
        if (it == trace_times.end()) {
            left = trace_times.size() - 1;  // s == t_last
            frac = 0.0;
        } else {
            const std::size_t right = static_cast<std::size_t>(it - trace_times.begin());
            left = right - 1;
            const double span = trace_times[right] - trace_times[left];
            frac = (s - trace_times[left]) / span;  // span > 0: upper_bound skips ties
        }
        if (mode == InterpMode::hold) frac = 0.0;
        plan.kept.push_back(k);
        plan.left.push_back(left);
        plan.frac.push_back(frac);
    }
    return plan;
}

namespace {

void apply_plan(const AlignmentPlan& plan, std::span<const std::uint64_t> values,
                std::vector<double>& out) {
    out.resize(plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const std::size_t left = plan.left[i];
        const double x0 = static_cast<double>(values[left]);
        if (plan.frac[i] == 0.0) {
            out[i] = x0;
        } else {
            const double x1 = static_cast<double>(values[left + 1]);
            out[i] = x0 + plan.frac[i] * (x1 - x0);
        }
    }
}

}  // namespace

Alignment interpolate(const TokenSeries& series, std::span<const double> diag_times,
                      InterpMode mode, std::size_t min_points) {
    if (series.values.size() < 2)
        throw std::invalid_argument("interpolation needs at least 2 token samples");
    const AlignmentPlan plan = build_alignment_plan(series.times, diag_times, mode);
    if (plan.size() < min_points)
        throw InsufficientOverlap("only " + std::to_string(plan.size()) +
                                  " diagnostic samples fall inside the token trace span");
    Alignment out;
    out.kept = plan.kept;
    apply_plan(plan, series.values, out.values);
    return out;
}

double coef_determ(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size() || y.empty())
        throw std::invalid_argument("coef_determ needs two equal-length non-empty series");
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_tot += (y[i] - mean) * (y[i] - mean);
        ss_res += (yhat[i] - y[i]) * (yhat[i] - y[i]);
    }
    if (ss_tot == 0.0) throw std::invalid_argument("coefficient of determination undefined for constant y");
    return 1.0 - ss_res / ss_tot;
}

std::optional<FitResult> linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit needs two equal-length series of >= 2 points");
    const double n = static_cast<double>(x.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= n;
    mean_y /= n;

    double sxx = 0.0;
    double sxy = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        ss_tot += dy * dy;
    }
    if (sxx == 0.0 || ss_tot == 0.0) return std::nullopt;

    FitResult fit;
    fit.a = sxy / sxx;
    fit.b = mean_y - fit.a * mean_x;

    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = fit.a * x[i] + fit.b - y[i];
        ss_res += e * e;
    }
    // The least-squares residual never exceeds ss_tot; a negative value here
    // is rounding noise.
    fit.r2 = std::max(0.0, 1.0 - ss_res / ss_tot);
    return fit;
}

bool match_order(const TokenMatch& lhs, const TokenMatch& rhs) {
    if (lhs.aid != rhs.aid) return lhs.aid < rhs.aid;
    if (lhs.boundary != rhs.boundary) return lhs.boundary < rhs.boundary;
    if (lhs.endianness != rhs.endianness) return lhs.endianness < rhs.endianness;
    return lhs.did < rhs.did;
}

std::vector<TokenMatch> match_traces(const AidTrace& trace,
                                     std::span<const TokenBoundary> boundaries,
                                     const std::map<int, DidTrace>& did_traces,
                                     const MatchOptions& options,
                                     MatchDiagnostics* diagnostics) {
    if (options.alpha <= 0.0 || options.alpha > 1.0)
        throw std::invalid_argument("alpha must be in (0, 1]");

    MatchDiagnostics local;
    MatchDiagnostics& diag = diagnostics ? *diagnostics : local;

    struct AlignedDid {
        int did;
        const AlignmentPlan* plan;
        std::vector<double> y;  // diagnostic values at the kept indices
    };

    // Alignment depends only on the two time grids, so it is shared across
    // all candidate boundaries.
    std::vector<AlignmentPlan> plans;
    std::vector<AlignedDid> aligned;
    plans.reserve(did_traces.size());
    for (const auto& [did, did_trace] : did_traces) {
        AlignmentPlan plan = build_alignment_plan(trace.times, did_trace.times, options.interp);
        if (plan.size() < options.min_points) {
            diag.insufficient_overlap += boundaries.size() * 2;
            continue;
        }
        plans.push_back(std::move(plan));
        AlignedDid entry;
        entry.did = did;
        entry.plan = &plans.back();
        entry.y.reserve(plans.back().size());
        for (std::size_t k : plans.back().kept)
            entry.y.push_back(static_cast<double>(did_trace.values[k]));
        aligned.push_back(std::move(entry));
    }

    std::vector<TokenMatch> matches;
    if (aligned.empty() || trace.size() < 2) return matches;

    std::vector<std::uint64_t> column(trace.size());
    std::vector<double> x_tilde;
    for (const TokenBoundary& boundary : boundaries) {
        for (const Endianness e : {Endianness::little, Endianness::big}) {
            for (std::size_t i = 0; i < trace.rows.size(); ++i)
                column[i] = extract_token(trace.rows[i], boundary, e);
            for (const AlignedDid& entry : aligned) {
                apply_plan(*entry.plan, column, x_tilde);
                ++diag.fits_evaluated;
                const auto fit = linear_fit(x_tilde, entry.y);
                if (!fit) {
                    // Distinguish the constant-token case from a diagnostic
                    // trace that is constant over this window.
                    const bool x_const = std::all_of(
                        x_tilde.begin(), x_tilde.end(),
                        [&](double v) { return v == x_tilde.front(); });
                    if (x_const) {
                        ++diag.no_token_variance;
                    } else {
                        ++diag.no_did_variance;
                    }
                    continue;
                }
                if (fit->r2 < options.alpha) {
                    ++diag.below_alpha;
                    continue;
                }
                if (fit->a == 0.0 || !std::isfinite(fit->a) || !std::isfinite(fit->b)) {
                    ++diag.no_token_variance;
                    continue;
                }
                TokenMatch m;
                m.aid = trace.key;
                m.boundary = boundary;
                m.endianness = e;
                m.did = entry.did;
                m.r2 = fit->r2;
                m.a = fit->a;
                m.b = fit->b;
                m.n_points = entry.plan->size();
                matches.push_back(m);
            }
        }
    }

    std::sort(matches.begin(), matches.end(), match_order);
    return matches;
}

}  // namespace cansig
