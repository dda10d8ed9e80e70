#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cansig {

// One timestamped CAN 2.0 frame. Timestamps are seconds since the capture
// epoch with microsecond resolution; that resolution is the round-trip
// contract of the log format below.
struct CanFrame {
    double timestamp = 0.0;
    std::string channel;
    std::uint32_t aid = 0;        // 11-bit or 29-bit arbitration identifier
    bool extended = false;        // true -> 29-bit form
    std::vector<std::uint8_t> payload;  // 0..8 bytes

    bool operator==(const CanFrame&) const = default;
};

// Frames sorted by timestamp (stable: ties keep file order) plus ingestion
// bookkeeping.
struct Capture {
    std::vector<CanFrame> frames;
    std::string source;
    std::size_t total_lines = 0;      // non-blank lines seen
    std::size_t malformed_lines = 0;  // lines that failed to parse

    double time_start() const { return frames.empty() ? 0.0 : frames.front().timestamp; }
    double time_end() const { return frames.empty() ? 0.0 : frames.back().timestamp; }
};

enum class LogFormat { candump };

LogFormat log_format_from_string(const std::string& s);
const char* to_string(LogFormat f);

// Parses a candump "-l" style text log: `(<sec>.<usec>) <iface> <AID>#<HEX>`
// with a 3-digit (11-bit) or 8-digit (29-bit) uppercase-or-lowercase hex AID
// and 0..16 hex payload digits of even length. Malformed lines are counted,
// not fatal, unless they exceed 50% of the non-blank lines.
//
// Throws UnreadableInput on stream failure, FormatError past the 50% gate.
Capture parse_log(std::istream& in, LogFormat format, std::string source_name = "<stream>");
Capture parse_log_file(const std::filesystem::path& path, LogFormat format);

// Inverse of parse_log; timestamps rendered with 6 decimal places. Frames on
// the microsecond grid round-trip bit-exactly.
void write_log(const Capture& capture, std::ostream& out, LogFormat format);
std::string write_log_string(const Capture& capture, LogFormat format);

// Formats an AID the way the log does: 3 hex digits for 11-bit, 8 for 29-bit.
std::string format_aid(std::uint32_t aid, bool extended);

}  // namespace cansig
