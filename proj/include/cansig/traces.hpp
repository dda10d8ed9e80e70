#pragma once

#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cansig/canio.hpp"

namespace cansig {

// 11-bit and 29-bit identifiers are distinct key spaces even when the
// numeric values collide.
struct AidKey {
    std::uint32_t aid = 0;
    bool extended = false;

    auto operator<=>(const AidKey&) const = default;
};

inline std::string to_string(const AidKey& key) { return format_aid(key.aid, key.extended); }

// Time-ordered n x 64 bit matrix for one arbitration id. Rows are packed
// big-endian (see bits.hpp), built from frames with exactly 8-byte payloads.
struct AidTrace {
    AidKey key;
    std::vector<double> times;          // non-decreasing
    std::vector<std::uint64_t> rows;

    std::size_t size() const { return rows.size(); }
    int bit(std::size_t i, int j) const {
        return static_cast<int>((rows[i] >> (63 - j)) & 1u);
    }
};

// Affine conversion from the raw response integer to a physical value.
struct PidFormula {
    int pid = 0;
    int data_bytes = 1;
    double scale = 1.0;
    double offset = 0.0;
    std::string unit = "raw";
    std::string label;
};

// Raw integer response sequence for one diagnostic parameter id. Values are
// the concatenated data bytes read big-endian; unit conversion is a separate
// reporting step (to_physical).
struct DidTrace {
    int did = 0;
    std::vector<double> times;          // strictly increasing
    std::vector<std::uint64_t> values;
    std::optional<PidFormula> formula;
};

// Inclusive arbitration-id interval, applied to the numeric id of both
// standard and extended frames.
struct AidInterval {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;

    bool contains(std::uint32_t aid) const { return lo <= aid && aid <= hi; }
};

bool in_ranges(std::uint32_t aid, std::span<const AidInterval> ranges);
AidInterval parse_aid_interval(const std::string& text);  // "7E8-7EF" or "7E8"
std::string to_string(const AidInterval& r);

// Standard OBD-II response ids.
std::vector<AidInterval> default_diag_ranges();  // {[7E8, 7EF]}
// Functional + physical request ids, excluded from broadcast traces by default.
AidInterval standard_request_range();            // [7DF, 7E7]

struct AidTraceSet {
    std::map<AidKey, AidTrace> traces;
    std::vector<AidKey> skipped;  // ids seen only with payloads != 8 bytes
};

// Per-id bookkeeping from diagnostic decoding; never fatal.
struct DiagStats {
    std::map<std::uint32_t, std::size_t> malformed_per_aid;
    std::size_t multi_frame_skipped = 0;
    std::size_t negative_responses = 0;
    std::size_t non_response_frames = 0;
    std::size_t non_monotone_dropped = 0;
    std::vector<int> constant_dids_excluded;
};

struct DidTraceSet {
    std::map<int, DidTrace> traces;
    DiagStats stats;
};

// One AidTrace per id outside diag_ranges, built from 8-byte frames only.
AidTraceSet build_aid_traces(const Capture& capture, std::span<const AidInterval> diag_ranges);

// Decodes Mode-01 single-frame responses from frames inside diag_ranges,
// groups them by PID, and drops constant traces.
DidTraceSet build_did_traces(const Capture& capture, std::span<const AidInterval> diag_ranges);

struct PhysicalValue {
    double value = 0.0;
    std::string unit = "raw";
};

// Applies the PID's public conversion; identity with unit "raw" when the
// PID is not in the bundled table.
PhysicalValue to_physical(const DidTrace& trace, std::uint64_t raw);

// Bundled conversion table for common PIDs; same CSV grammar as
// data/pid_table.csv.
const std::map<int, PidFormula>& default_pid_table();
std::map<int, PidFormula> load_pid_table(std::istream& in);
const PidFormula* lookup_pid(int pid);

}  // namespace cansig
