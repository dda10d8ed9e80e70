#include "cansig/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "cansig/errors.hpp"
#include "cansig/matcher.hpp"
#include "cansig/packer.hpp"
#include "cansig/tokenizer.hpp"

namespace cansig {

namespace {

AidAnalysis analyze_one(const AidTrace& trace, const std::map<int, DidTrace>& did_traces,
                        const AnalyzeOptions& options) {
    AidAnalysis out;
    out.key = trace.key;
    out.frames = trace.size();
    out.classification = categorize_bits(trace);
    const std::vector<TokenBoundary> boundaries = valid_token_boundaries(out.classification);

    MatchOptions match_options{options.alpha, options.min_points, options.interp};
    out.matches = match_traces(trace, boundaries, did_traces, match_options, &out.skipped);

    const std::vector<PackingCandidate> candidates = reduce_to_candidates(out.matches);
    out.payload = find_optimal_payload(trace.key, candidates);
    return out;
}

}  // namespace

AnalysisResult analyze_capture(const Capture& capture, const AnalyzeOptions& options) {
    std::vector<AidInterval> exclusion = options.diag_ranges;
    if (options.exclude_standard_requests) exclusion.push_back(standard_request_range());

    AidTraceSet aid_set = build_aid_traces(capture, exclusion);
    DidTraceSet did_set = build_did_traces(capture, options.diag_ranges);
    if (did_set.traces.empty())
        throw NoUsableDiagnostics("capture contains no usable (non-constant) diagnostic traces");

    std::vector<const AidTrace*> traces;
    traces.reserve(aid_set.traces.size());
    for (const auto& [key, trace] : aid_set.traces) traces.push_back(&trace);

    std::vector<AidAnalysis> analyses(traces.size());
    const unsigned workers =
        std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(traces.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < traces.size(); ++i)
            analyses[i] = analyze_one(*traces[i], did_set.traces, options);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= traces.size()) return;
                    try {
                        analyses[i] = analyze_one(*traces[i], did_set.traces, options);
                    } catch (...) {
                        const std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (std::thread& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    // A capture where no diagnostic time series overlaps any broadcast trace
    // cannot support any fit; distinct from "fits ran but nothing matched".
    if (!traces.empty()) {
        const bool any_fit = std::any_of(analyses.begin(), analyses.end(),
                                         [](const AidAnalysis& a) { return a.skipped.fits_evaluated > 0; });
        if (!any_fit)
            throw NoUsableDiagnostics(
                "no diagnostic trace overlaps any broadcast trace by at least min_points samples");
    }

    AnalysisResult result;
    result.report.config = options;
    result.report.source = capture.source;
    result.report.total_lines = capture.total_lines;
    result.report.malformed_lines = capture.malformed_lines;
    result.report.frame_count = capture.frames.size();
    result.report.time_start = capture.time_start();
    result.report.time_end = capture.time_end();
    result.report.aids = std::move(analyses);
    result.report.skipped_aids = std::move(aid_set.skipped);
    result.report.diag_stats = did_set.stats;
    result.report.stats = compute_stats(result.report.aids);

    for (const auto& [did, trace] : did_set.traces) {
        DidSummary summary;
        summary.did = did;
        summary.samples = trace.values.size();
        summary.min_raw = *std::min_element(trace.values.begin(), trace.values.end());
        summary.max_raw = *std::max_element(trace.values.begin(), trace.values.end());
        if (trace.formula) {
            summary.unit = trace.formula->unit;
            summary.label = trace.formula->label;
        }
        result.report.dids.push_back(std::move(summary));
    }

    result.aid_traces = std::move(aid_set.traces);
    result.did_traces = std::move(did_set.traces);
    return result;
}

}  // namespace cansig
