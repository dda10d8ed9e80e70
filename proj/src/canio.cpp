#include "cansig/canio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cansig/errors.hpp"

namespace cansig {

namespace {

constexpr std::uint32_t kMaxStandardAid = 0x7FF;
constexpr std::uint32_t kMaxExtendedAid = 0x1FFFFFFF;

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

bool parse_hex(std::string_view s, std::uint64_t& out) {
    if (s.empty()) return false;
    std::uint64_t v = 0;
    for (char c : s) {
        const int d = hex_digit(c);
        if (d < 0) return false;
        v = (v << 4) | static_cast<std::uint64_t>(d);
    }
    out = v;
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

// `(<sec>.<usec>) <iface> <AID>#<HEX>` -> frame; false if the line does not fit.
bool parse_candump_line(std::string_view line, CanFrame& frame) {
    line = trim(line);
    if (line.empty() || line.front() != '(') return false;
    const std::size_t close = line.find(')');
    if (close == std::string_view::npos) return false;

    const std::string_view ts = line.substr(1, close - 1);
    if (ts.empty() || ts.front() == '+' || ts.front() == '-') return false;
    double timestamp = 0.0;
    const auto [ts_end, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), timestamp);
    if (ec != std::errc{} || ts_end != ts.data() + ts.size()) return false;
    if (!std::isfinite(timestamp) || timestamp < 0.0) return false;

    std::string_view rest = line.substr(close + 1);
    if (rest.empty() || (rest.front() != ' ' && rest.front() != '\t')) return false;
    while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);

    const std::size_t iface_end = rest.find_first_of(" \t");
    if (iface_end == std::string_view::npos || iface_end == 0) return false;
    const std::string_view iface = rest.substr(0, iface_end);
    rest.remove_prefix(iface_end);
    while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);

    const std::size_t hash = rest.find('#');
    if (hash == std::string_view::npos) return false;
    const std::string_view aid_hex = rest.substr(0, hash);
    const std::string_view payload_hex = rest.substr(hash + 1);

    bool extended = false;
    if (aid_hex.size() == 3) {
        extended = false;
    } else if (aid_hex.size() == 8) {
        extended = true;
    } else {
        return false;
    }
    std::uint64_t aid = 0;
    if (!parse_hex(aid_hex, aid)) return false;
    if (!extended && aid > kMaxStandardAid) return false;
    if (extended && aid > kMaxExtendedAid) return false;

    if (payload_hex.size() > 16 || payload_hex.size() % 2 != 0) return false;
    std::vector<std::uint8_t> payload;
    payload.reserve(payload_hex.size() / 2);
    for (std::size_t i = 0; i < payload_hex.size(); i += 2) {
        const int hi = hex_digit(payload_hex[i]);
        const int lo = hex_digit(payload_hex[i + 1]);
        if (hi < 0 || lo < 0) return false;
        payload.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }

    frame.timestamp = timestamp;
    frame.channel.assign(iface.begin(), iface.end());
    frame.aid = static_cast<std::uint32_t>(aid);
    frame.extended = extended;
    frame.payload = std::move(payload);
    return true;
}

void validate_for_write(const CanFrame& f) {
    if (!std::isfinite(f.timestamp) || f.timestamp < 0.0)
        throw std::invalid_argument("frame timestamp must be finite and non-negative");
    if (f.payload.size() > 8) throw std::invalid_argument("frame payload exceeds 8 bytes");
    const std::uint32_t max = f.extended ? kMaxExtendedAid : kMaxStandardAid;
    if (f.aid > max) throw std::invalid_argument("arbitration id out of range for frame type");
    if (f.channel.empty() || f.channel.find_first_of(" \t") != std::string::npos)
        throw std::invalid_argument("channel label must be a non-empty token");
}

}  // namespace

LogFormat log_format_from_string(const std::string& s) {
    if (s == "candump") return LogFormat::candump;
    throw std::invalid_argument("unknown log format: " + s);
}

const char* to_string(LogFormat) { return "candump"; }

std::string format_aid(std::uint32_t aid, bool extended) {
    char buf[9];
    std::snprintf(buf, sizeof buf, extended ? "%08X" : "%03X", aid);
    return buf;
}

Capture parse_log(std::istream& in, LogFormat format, std::string source_name) {
    (void)format;  // single format today; the tag keeps the call sites honest
    Capture cap;
    cap.source = std::move(source_name);

    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++cap.total_lines;
        CanFrame frame;
        if (parse_candump_line(line, frame)) {
            cap.frames.push_back(std::move(frame));
        } else {
            ++cap.malformed_lines;
        }
    }
    if (in.bad()) throw UnreadableInput("I/O error while reading " + cap.source);

    if (cap.total_lines > 0 && cap.malformed_lines * 2 > cap.total_lines) {
        std::ostringstream msg;
        msg << cap.source << ": " << cap.malformed_lines << " of " << cap.total_lines
            << " lines malformed; input does not look like a candump log";
        throw FormatError(msg.str());
    }

    std::stable_sort(cap.frames.begin(), cap.frames.end(),
                     [](const CanFrame& a, const CanFrame& b) { return a.timestamp < b.timestamp; });
    return cap;
}

Capture parse_log_file(const std::filesystem::path& path, LogFormat format) {
    std::ifstream in(path);
    if (!in) throw UnreadableInput("cannot open " + path.string());
    return parse_log(in, format, path.string());
}

void write_log(const Capture& capture, std::ostream& out, LogFormat format) {
    (void)format;
    char buf[64];
    for (const CanFrame& f : capture.frames) {
        validate_for_write(f);
        std::snprintf(buf, sizeof buf, "(%.6f) ", f.timestamp);
        out << buf << f.channel << ' ' << format_aid(f.aid, f.extended) << '#';
        for (std::uint8_t byte : f.payload) {
            std::snprintf(buf, sizeof buf, "%02X", byte);
            out << buf;
        }
        out << '\n';
    }
}

std::string write_log_string(const Capture& capture, LogFormat format) {
    std::ostringstream out;
    write_log(capture, out, format);
    return out.str();
}

}  // namespace cansig
