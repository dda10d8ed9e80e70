#include "cansig/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "cansig/errors.hpp"

namespace cansig {

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string fmt_time(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", t);
    return buf;
}

char class_char(BitClass c) {
    switch (c) {
        case BitClass::constant_zero: return '0';
        case BitClass::constant_one: return '1';
        case BitClass::used: return 'u';
    }
    return '?';
}

std::string bit_map_string(const BitClassification& cls) {
    std::string s(64, '?');
    for (int j = 0; j < 64; ++j) s[static_cast<std::size_t>(j)] = class_char(cls.bits[static_cast<std::size_t>(j)]);
    return s;
}

nlohmann::ordered_json match_to_json(const TokenMatch& m) {
    return {{"start_bit", m.boundary.start},
            {"end_bit", m.boundary.end},
            {"endianness", to_string(m.endianness)},
            {"did", m.did},
            {"r2", snap_float(m.r2)},
            {"a", snap_float(m.a)},
            {"b", snap_float(m.b)},
            {"n_points", m.n_points}};
}

// Bits of the 64-bit grid covered by the packed selection.
std::uint64_t selected_mask(const AidAnalysis& aid) {
    std::uint64_t mask = 0;
    for (const TokenMatch& m : aid.payload.selected)
        mask |= mask_for_length(m.boundary.length()) << (63 - m.boundary.end);
    return mask;
}

}  // namespace

double snap_float(double v) {
    return std::strtod(fmt9(v).c_str(), nullptr);
}

std::string AnalysisReport::label_for(const AidKey& key) const {
    if (!config.anonymize_aids) return to_string(key);
    // Priority rank: lower id arbitrates first; standard before extended.
    std::size_t rank = 1;
    for (const AidAnalysis& a : aids) {
        const auto lhs = std::make_pair(a.key.extended, a.key.aid);
        const auto rhs = std::make_pair(key.extended, key.aid);
        if (lhs < rhs) ++rank;
    }
    return "AID" + std::to_string(rank);
}

CaptureStats compute_stats(const std::vector<AidAnalysis>& aids) {
    CaptureStats stats;
    stats.aid_count = aids.size();
    if (aids.empty()) return stats;
    std::uint64_t constant_bits = 0;
    std::uint64_t matched_bits = 0;
    double score_sum = 0.0;
    for (const AidAnalysis& aid : aids) {
        constant_bits += static_cast<std::uint64_t>(aid.classification.count(BitClass::constant_zero) +
                                                    aid.classification.count(BitClass::constant_one));
        for (const TokenMatch& m : aid.payload.selected)
            matched_bits += static_cast<std::uint64_t>(m.boundary.length());
        score_sum += aid.payload.score;
    }
    const double grid = 64.0 * static_cast<double>(aids.size());
    stats.constant_fraction = static_cast<double>(constant_bits) / grid;
    stats.matched_fraction = static_cast<double>(matched_bits) / grid;
    stats.unknown_fraction =
        static_cast<double>(64 * aids.size() - constant_bits - matched_bits) / grid;
    stats.total_match_score = score_sum / static_cast<double>(aids.size());
    return stats;
}

nlohmann::ordered_json report_to_json(const AnalysisReport& report) {
    nlohmann::ordered_json j;
    j["schema"] = 1;

    nlohmann::ordered_json config;
    config["alpha"] = snap_float(report.config.alpha);
    config["min_points"] = report.config.min_points;
    config["interpolation"] = to_string(report.config.interp);
    config["diag_ranges"] = nlohmann::ordered_json::array();
    for (const AidInterval& r : report.config.diag_ranges)
        config["diag_ranges"].push_back(to_string(r));
    config["exclude_standard_requests"] = report.config.exclude_standard_requests;
    config["anonymize_aids"] = report.config.anonymize_aids;
    config["format"] = to_string(report.config.format);
    j["config"] = std::move(config);

    nlohmann::ordered_json capture;
    capture["source"] = report.source;
    capture["total_lines"] = report.total_lines;
    capture["malformed_lines"] = report.malformed_lines;
    capture["frames"] = report.frame_count;
    capture["time_start"] = snap_float(report.time_start);
    capture["time_end"] = snap_float(report.time_end);
    j["capture"] = std::move(capture);

    nlohmann::ordered_json stats;
    stats["aid_count"] = report.stats.aid_count;
    stats["constant_bit_fraction"] = snap_float(report.stats.constant_fraction);
    stats["matched_bit_fraction"] = snap_float(report.stats.matched_fraction);
    stats["unknown_bit_fraction"] = snap_float(report.stats.unknown_fraction);
    stats["total_match_score"] = snap_float(report.stats.total_match_score);
    j["stats"] = std::move(stats);

    j["aids"] = nlohmann::ordered_json::array();
    for (const AidAnalysis& aid : report.aids) {
        nlohmann::ordered_json entry;
        entry["aid"] = report.label_for(aid.key);
        entry["extended"] = aid.key.extended;
        entry["frames"] = aid.frames;
        entry["bit_map"] = bit_map_string(aid.classification);
        entry["bit_counts"] = {{"constant_zero", aid.classification.count(BitClass::constant_zero)},
                               {"constant_one", aid.classification.count(BitClass::constant_one)},
                               {"used", aid.classification.count(BitClass::used)}};
        entry["matches"] = nlohmann::ordered_json::array();
        for (const TokenMatch& m : aid.matches) entry["matches"].push_back(match_to_json(m));
        entry["selected"] = nlohmann::ordered_json::array();
        for (const TokenMatch& m : aid.payload.selected) entry["selected"].push_back(match_to_json(m));
        entry["packing_score"] = snap_float(aid.payload.score);
        entry["skipped_candidates"] = {{"insufficient_overlap", aid.skipped.insufficient_overlap},
                                       {"no_token_variance", aid.skipped.no_token_variance},
                                       {"no_did_variance", aid.skipped.no_did_variance},
                                       {"below_alpha", aid.skipped.below_alpha},
                                       {"fits_evaluated", aid.skipped.fits_evaluated}};
        j["aids"].push_back(std::move(entry));
    }

    j["dids"] = nlohmann::ordered_json::array();
    for (const DidSummary& d : report.dids) {
        char pid_hex[8];
        std::snprintf(pid_hex, sizeof pid_hex, "%02X", d.did);
        j["dids"].push_back({{"did", d.did},
                             {"pid_hex", pid_hex},
                             {"samples", d.samples},
                             {"min_raw", d.min_raw},
                             {"max_raw", d.max_raw},
                             {"unit", d.unit},
                             {"label", d.label}});
    }

    j["skipped_aids"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < report.skipped_aids.size(); ++i) {
        // Skipped ids are not analyzed, so they carry no priority rank.
        j["skipped_aids"].push_back(report.config.anonymize_aids
                                        ? "SKIPPED" + std::to_string(i + 1)
                                        : to_string(report.skipped_aids[i]));
    }

    nlohmann::ordered_json diag;
    diag["malformed_per_aid"] = nlohmann::ordered_json::object();
    for (const auto& [aid, count] : report.diag_stats.malformed_per_aid)
        diag["malformed_per_aid"][format_aid(aid, false)] = count;
    diag["multi_frame_skipped"] = report.diag_stats.multi_frame_skipped;
    diag["negative_responses"] = report.diag_stats.negative_responses;
    diag["non_response_frames"] = report.diag_stats.non_response_frames;
    diag["non_monotone_dropped"] = report.diag_stats.non_monotone_dropped;
    diag["constant_dids_excluded"] = report.diag_stats.constant_dids_excluded;
    j["diagnostics"] = std::move(diag);

    return j;
}

std::string report_to_string(const AnalysisReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

int dbc_start_bit(int bit_index) {
    return (bit_index / 8) * 8 + (7 - bit_index % 8);
}

std::string emit_dbc(const AnalysisReport& report) {
    std::ostringstream out;
    out << "VERSION \"\"\n\n";
    out << "NS_ :\n\n";
    out << "BS_:\n\n";
    out << "BU_:\n";

    const auto& pid_table = default_pid_table();
    for (const AidAnalysis& aid : report.aids) {
        const std::string label = report.label_for(aid.key);
        const std::uint32_t dbc_id =
            aid.key.extended ? (aid.key.aid | 0x80000000u) : aid.key.aid;
        out << "\nBO_ " << dbc_id << " MSG_" << label << ": 8 Vector__XXX\n";

        std::set<std::string> names;
        for (const TokenMatch& m : aid.payload.selected) {
            std::string name = "DID" + std::to_string(m.did);
            const auto pid = pid_table.find(m.did);
            if (pid != pid_table.end()) name += "_" + pid->second.label;
            if (!names.insert(name).second) {
                name += "_" + std::to_string(m.boundary.start);
                names.insert(name);
            }

            // Physical value = PID formula applied to (a * token + b); both
            // maps are affine, so the composition is emitted exactly.
            double scale = m.a;
            double offset = m.b;
            std::string unit = "raw";
            if (pid != pid_table.end()) {
                scale = pid->second.scale * m.a;
                offset = pid->second.scale * m.b + pid->second.offset;
                unit = pid->second.unit;
            }
            const double token_max = static_cast<double>(mask_for_length(m.boundary.length()));
            const double p0 = offset;
            const double p1 = scale * token_max + offset;
            out << " SG_ " << name << " : " << dbc_start_bit(m.boundary.start) << '|'
                << m.boundary.length() << '@' << (m.endianness == Endianness::big ? '0' : '1')
                << "+ (" << fmt9(scale) << ',' << fmt9(offset) << ") [" << fmt9(std::min(p0, p1))
                << '|' << fmt9(std::max(p0, p1)) << "] \"" << unit << "\" Vector__XXX\n";
        }

        // Used bits the packing left uncovered, as commented placeholders.
        const std::uint64_t used = aid.classification.used_mask();
        const std::uint64_t uncovered = used & ~selected_mask(aid);
        int j = 0;
        while (j < 64) {
            if (!(uncovered >> (63 - j) & 1)) {
                ++j;
                continue;
            }
            const int start = j;
            while (j < 64 && (uncovered >> (63 - j) & 1)) ++j;
            const int end = j - 1;
            const int len = end - start + 1;
            out << "// SG_ UNKNOWN_" << start << '_' << end << " : " << dbc_start_bit(start) << '|'
                << len << "@0+ (1,0) [0|" << fmt9(static_cast<double>(mask_for_length(len)))
                << "] \"\" Vector__XXX\n";
        }
    }
    return out.str();
}

void write_csv_dumps(const AnalysisReport& report,
                     const std::map<AidKey, AidTrace>& aid_traces,
                     const std::map<int, DidTrace>& did_traces,
                     const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    for (const auto& [did, trace] : did_traces) {
        std::ofstream out(dir / ("did_" + std::to_string(did) + ".csv"));
        out << "time,raw,physical\n";
        for (std::size_t i = 0; i < trace.times.size(); ++i) {
            const PhysicalValue phys = to_physical(trace, trace.values[i]);
            out << fmt_time(trace.times[i]) << ',' << trace.values[i] << ',' << fmt9(phys.value)
                << '\n';
        }
    }

    for (const AidAnalysis& aid : report.aids) {
        const auto trace = aid_traces.find(aid.key);
        if (trace == aid_traces.end()) continue;
        for (const TokenMatch& m : aid.payload.selected) {
            std::ostringstream name;
            name << "aid_" << report.label_for(aid.key) << "_bits" << m.boundary.start << '-'
                 << m.boundary.end << '_' << to_string(m.endianness) << "_did" << m.did << ".csv";
            std::ofstream out(dir / name.str());
            out << "time,token,mapped\n";
            for (std::size_t i = 0; i < trace->second.size(); ++i) {
                const std::uint64_t v =
                    extract_token(trace->second.rows[i], m.boundary, m.endianness);
                out << fmt_time(trace->second.times[i]) << ',' << v << ','
                    << fmt9(m.a * static_cast<double>(v) + m.b) << '\n';
            }
        }
    }
}

}  // namespace cansig
