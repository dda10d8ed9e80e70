#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cansig/matcher.hpp"
#include "cansig/packer.hpp"
#include "cansig/tokenizer.hpp"
#include "cansig/traces.hpp"

namespace cansig {

struct AnalyzeOptions {
    double alpha = 0.5;
    std::size_t min_points = 10;
    InterpMode interp = InterpMode::linear;
    std::vector<AidInterval> diag_ranges = default_diag_ranges();
    bool exclude_standard_requests = true;  // drop 7DF-7E7 from broadcast traces
    bool anonymize_aids = false;            // report priority ranks, not ids
    unsigned workers = 1;
    LogFormat format = LogFormat::candump;
};

struct AidAnalysis {
    AidKey key;
    std::size_t frames = 0;
    BitClassification classification;
    std::vector<TokenMatch> matches;
    PayloadMap payload;
    MatchDiagnostics skipped;
};

// Fractions are over the 64 * aid_count bit grid and sum to 1; the total
// match score averages the per-AID packing scores.
struct CaptureStats {
    std::size_t aid_count = 0;
    double constant_fraction = 0.0;
    double matched_fraction = 0.0;
    double unknown_fraction = 0.0;
    double total_match_score = 0.0;
};

struct DidSummary {
    int did = 0;
    std::size_t samples = 0;
    std::uint64_t min_raw = 0;
    std::uint64_t max_raw = 0;
    std::string unit = "raw";
    std::string label;
};

struct AnalysisReport {
    AnalyzeOptions config;
    std::string source;
    std::size_t total_lines = 0;
    std::size_t malformed_lines = 0;
    std::size_t frame_count = 0;
    double time_start = 0.0;
    double time_end = 0.0;
    std::vector<AidAnalysis> aids;  // sorted by key
    std::vector<DidSummary> dids;
    std::vector<AidKey> skipped_aids;
    DiagStats diag_stats;
    CaptureStats stats;

    // Display label for an AID: the hex id, or its priority rank when
    // anonymized (rank 1 = highest priority).
    std::string label_for(const AidKey& key) const;
};

CaptureStats compute_stats(const std::vector<AidAnalysis>& aids);

// Rounds to 9 significant digits; every float in emitted documents goes
// through this so report bytes are reproducible.
double snap_float(double v);

nlohmann::ordered_json report_to_json(const AnalysisReport& report);
std::string report_to_string(const AnalysisReport& report);

// Minimal BO_/SG_ fragment. Internal bit index j (0 = MSB of byte 0) maps to
// the DBC start bit (j/8)*8 + (7 - j%8); big tokens are emitted @0 from the
// start bit, little tokens @1 — approximate for non-byte-aligned slices,
// since the slice bit order is not the DBC byte order. Unmatched used runs
// appear as "// SG_ UNKNOWN_..." comment lines.
std::string emit_dbc(const AnalysisReport& report);

int dbc_start_bit(int bit_index);

// One CSV per DID trace and per selected token (time,value columns).
void write_csv_dumps(const AnalysisReport& report,
                     const std::map<AidKey, AidTrace>& aid_traces,
                     const std::map<int, DidTrace>& did_traces,
                     const std::filesystem::path& dir);

}  // namespace cansig
