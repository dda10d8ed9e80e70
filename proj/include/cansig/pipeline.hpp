#pragma once

#include <map>

#include "cansig/canio.hpp"
#include "cansig/report.hpp"

namespace cansig {

struct AnalysisResult {
    AnalysisReport report;
    std::map<AidKey, AidTrace> aid_traces;
    std::map<int, DidTrace> did_traces;
};

// Full pipeline: trace building, bit categorization, diagnostic matching and
// payload packing, fanned out over a bounded worker pool. Output is
// deterministic regardless of worker count.
//
// Throws NoUsableDiagnostics when no diagnostic trace overlaps any broadcast
// trace (a capture with zero matches is still a success).
AnalysisResult analyze_capture(const Capture& capture, const AnalyzeOptions& options);

}  // namespace cansig
