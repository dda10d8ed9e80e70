#include "cansig/traces.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cansig/errors.hpp"

namespace cansig {

namespace {

// Mirrors data/pid_table.csv; the file documents the format, this copy keeps
// the library self-contained.
constexpr const char* kDefaultPidTableCsv =
    "# pid_hex,data_bytes,scale,offset,unit,label\n"
    "05,1,1,-40,degC,EngineCoolantTemp\n"
    "0C,2,0.25,0,rpm,EngineRPM\n"
    "0D,1,1,0,km/h,VehicleSpeed\n"
    "0F,1,1,-40,degC,IntakeAirTemp\n"
    "11,1,0.39215686274509803,0,%,ThrottlePosition\n"
    "49,1,0.39215686274509803,0,%,AccelPedalPositionD\n"
    "4A,1,0.39215686274509803,0,%,AccelPedalPositionE\n";

std::uint64_t pack_row(const std::vector<std::uint8_t>& payload) {
    std::uint64_t row = 0;
    for (std::uint8_t byte : payload) row = (row << 8) | byte;
    return row;
}

}  // namespace

bool in_ranges(std::uint32_t aid, std::span<const AidInterval> ranges) {
    for (const AidInterval& r : ranges) {
        if (r.contains(aid)) return true;
    }
    return false;
}

AidInterval parse_aid_interval(const std::string& text) {
    const auto parse_one = [&](std::string_view s) -> std::uint32_t {
        std::uint32_t v = 0;
        const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
        if (ec != std::errc{} || end != s.data() + s.size() || v > 0x1FFFFFFF)
            throw std::invalid_argument("bad arbitration id range: " + text);
        return v;
    };
    const std::size_t dash = text.find('-');
    AidInterval r;
    if (dash == std::string::npos) {
        r.lo = r.hi = parse_one(text);
    } else {
        r.lo = parse_one(std::string_view(text).substr(0, dash));
        r.hi = parse_one(std::string_view(text).substr(dash + 1));
    }
    if (r.lo > r.hi) throw std::invalid_argument("inverted arbitration id range: " + text);
    return r;
}

std::string to_string(const AidInterval& r) {
    char buf[24];
    if (r.lo == r.hi) {
        std::snprintf(buf, sizeof buf, "%03X", r.lo);
    } else {
        std::snprintf(buf, sizeof buf, "%03X-%03X", r.lo, r.hi);
    }
    return buf;
}

std::vector<AidInterval> default_diag_ranges() { return {AidInterval{0x7E8, 0x7EF}}; }

AidInterval standard_request_range() { return AidInterval{0x7DF, 0x7E7}; }

AidTraceSet build_aid_traces(const Capture& capture, std::span<const AidInterval> diag_ranges) {
    AidTraceSet out;
    std::set<AidKey> seen_short;
    for (const CanFrame& f : capture.frames) {
        if (in_ranges(f.aid, diag_ranges)) continue;
        const AidKey key{f.aid, f.extended};
        if (f.payload.size() != 8) {
            seen_short.insert(key);
            continue;
        }
        AidTrace& trace = out.traces[key];
        trace.key = key;
        trace.times.push_back(f.timestamp);
        trace.rows.push_back(pack_row(f.payload));
    }
    for (const AidKey& key : seen_short) {
        if (!out.traces.contains(key)) out.skipped.push_back(key);
    }
    return out;
}

DidTraceSet build_did_traces(const Capture& capture, std::span<const AidInterval> diag_ranges) {
    DidTraceSet out;
    for (const CanFrame& f : capture.frames) {
        if (!in_ranges(f.aid, diag_ranges)) continue;
        const auto& p = f.payload;
        if (p.empty()) {
            ++out.stats.malformed_per_aid[f.aid];
            continue;
        }
        const int pci_type = p[0] >> 4;
        if (pci_type == 1 || pci_type == 2 || pci_type == 3) {
            // ISO-TP first/consecutive/flow-control: multi-frame transfers
            // are out of the single-frame decoding contract.
            ++out.stats.multi_frame_skipped;
            continue;
        }
        const int length = p[0];  // single frame: low nibble, high nibble 0
        if (length < 1 || length > 7) {
            ++out.stats.malformed_per_aid[f.aid];
            continue;
        }
        if (p.size() < static_cast<std::size_t>(length) + 1) {
            ++out.stats.malformed_per_aid[f.aid];
            continue;
        }
        const std::uint8_t service = p[1];
        if (service == 0x7F) {
            ++out.stats.negative_responses;
            continue;
        }
        if (service != 0x41) {
            // Requests and non-Mode-01 traffic share these ids; not an error.
            ++out.stats.non_response_frames;
            continue;
        }
        if (length < 3) {
            // A positive response must carry at least one data byte.
            ++out.stats.malformed_per_aid[f.aid];
            continue;
        }
        const int pid = p[2];
        std::uint64_t value = 0;
        for (int i = 3; i <= length; ++i) value = (value << 8) | p[i];

        DidTrace& trace = out.traces[pid];
        if (trace.times.empty()) {
            trace.did = pid;
            if (const PidFormula* formula = lookup_pid(pid)) trace.formula = *formula;
        }
        if (!trace.times.empty() && f.timestamp <= trace.times.back()) {
            ++out.stats.non_monotone_dropped;
            continue;
        }
        trace.times.push_back(f.timestamp);
        trace.values.push_back(value);
    }

    for (auto it = out.traces.begin(); it != out.traces.end();) {
        const auto& values = it->second.values;
        const bool constant =
            std::all_of(values.begin(), values.end(), [&](std::uint64_t v) { return v == values.front(); });
        if (constant) {
            out.stats.constant_dids_excluded.push_back(it->first);
            it = out.traces.erase(it);
        } else {
            ++it;
        }
    }
    return out;
}

PhysicalValue to_physical(const DidTrace& trace, std::uint64_t raw) {
    if (!trace.formula) return PhysicalValue{static_cast<double>(raw), "raw"};
    const PidFormula& f = *trace.formula;
    return PhysicalValue{f.scale * static_cast<double>(raw) + f.offset, f.unit};
}

std::map<int, PidFormula> load_pid_table(std::istream& in) {
    std::map<int, PidFormula> table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string pid_hex, bytes, scale, offset, unit, label;
        if (!std::getline(fields, pid_hex, ',') || !std::getline(fields, bytes, ',') ||
            !std::getline(fields, scale, ',') || !std::getline(fields, offset, ',') ||
            !std::getline(fields, unit, ',') || !std::getline(fields, label)) {
            throw FormatError("pid table line " + std::to_string(lineno) + ": expected 6 fields");
        }
        PidFormula f;
        f.pid = static_cast<int>(std::stoul(pid_hex, nullptr, 16));
        f.data_bytes = std::stoi(bytes);
        f.scale = std::stod(scale);
        f.offset = std::stod(offset);
        f.unit = unit;
        while (!label.empty() && (label.back() == '\r' || label.back() == ' ')) label.pop_back();
        f.label = label;
        table[f.pid] = std::move(f);
    }
    return table;
}

const std::map<int, PidFormula>& default_pid_table() {
    static const std::map<int, PidFormula> table = [] {
        std::istringstream in(kDefaultPidTableCsv);
        return load_pid_table(in);
    }();
    return table;
}

const PidFormula* lookup_pid(int pid) {
    const auto& table = default_pid_table();
    const auto it = table.find(pid);
    return it == table.end() ? nullptr : &it->second;
}

}  // namespace cansig
