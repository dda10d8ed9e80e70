// Acceptance suite: end-to-end checks with stated tolerances and runtime
// budgets. Prints one PASS/FAIL line per criterion; exit code is the number
// of failures. Pass --cli <path> to exercise the real binary for the
// determinism criterion (ctest wires this up automatically).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cansig/canio.hpp"
#include "cansig/matcher.hpp"
#include "cansig/packer.hpp"
#include "cansig/pipeline.hpp"
#include "cansig/report.hpp"
#include "cansig/synth.hpp"
#include "cansig/tokenizer.hpp"
#include "../tests/oracles.hpp"

using namespace cansig;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

struct Context {
    std::string cli_path;
    fs::path work_dir;
    fs::path capture_path;
    SynthConfig scenario;
    nlohmann::json truth;
    Capture capture;  // parsed back from the written log
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- criterion 1: endian encodings vs the per-bit oracle -------------------

void criterion_endian_encodings(Context&) {
    std::size_t checked = 0;
    for (int byte = 0; byte < 8; ++byte) {
        for (int value = 0; value < 256; ++value) {
            AidTrace trace;
            trace.key = {0x100, false};
            trace.times = {0.0};
            std::vector<std::uint8_t> payload(8, 0);
            payload[static_cast<std::size_t>(byte)] = static_cast<std::uint8_t>(value);
            std::uint64_t row = 0;
            for (std::uint8_t b : payload) row = (row << 8) | b;
            trace.rows = {row};
            for (int start = 8 * byte; start < 8 * (byte + 1); ++start) {
                for (int end = start; end < 8 * (byte + 1); ++end) {
                    for (const Endianness e : {Endianness::little, Endianness::big}) {
                        const TokenSeries s = make_integers(trace, {start, end}, e);
                        const std::uint64_t expected =
                            oracles::endian_encode(payload, start, end, e);
                        require(s.values[0] == expected, "encoding mismatch");
                        ++checked;
                    }
                }
            }
        }
    }
    require(checked == 8ull * 256 * 36 * 2, "exhaustive sweep incomplete");
}

// --- criterion 2: tokenizer vs the run/sub-interval closed form ------------

void criterion_tokenizer(Context&) {
    oracles::Rng rng(20240202);
    for (int iter = 0; iter < 1000; ++iter) {
        BitClassification cls;
        for (int j = 0; j < 64; ++j) {
            const std::uint64_t r = rng.below(4);
            cls.bits[static_cast<std::size_t>(j)] =
                r < 2 ? BitClass::used : (r == 2 ? BitClass::constant_zero : BitClass::constant_one);
        }
        const auto got = valid_token_boundaries(cls);
        require(got.size() == oracles::boundary_count(cls), "boundary count mismatch");
        require(got == oracles::enumerate_boundaries(cls), "boundary membership mismatch");
    }
}

// --- criterion 3: OLS and R^2 vs long-double normal equations --------------

void criterion_ols(Context&) {
    oracles::Rng rng(31337);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<double> x;
        std::vector<double> y;
        const double a_true = rng.uniform(-50, 50);
        const double b_true = rng.uniform(-1000, 1000);
        const double noise = rng.uniform(0.0, 200.0);
        for (int i = 0; i < 100; ++i) {
            x.push_back(rng.uniform(-500, 500));
            y.push_back(a_true * x.back() + b_true + noise * (rng.unit() - 0.5));
        }
        const auto fit = linear_fit(x, y);
        require(fit.has_value(), "fit unexpectedly degenerate");
        const oracles::LeastSquares expected = oracles::least_squares(x, y);
        require(std::abs(fit->a - static_cast<double>(expected.a)) <=
                    1e-9 * std::abs(static_cast<double>(expected.a)),
                "slope disagrees with oracle");
        require(std::abs(fit->b - static_cast<double>(expected.b)) <=
                    1e-9 * std::max(1.0, std::abs(static_cast<double>(expected.b))),
                "intercept disagrees with oracle");
        require(std::abs(fit->r2 - static_cast<double>(expected.r2)) <= 1e-9,
                "r2 disagrees with oracle");
    }
    // Exact linear fixtures.
    for (int iter = 0; iter < 20; ++iter) {
        std::vector<double> x;
        std::vector<double> y;
        const double a_true = rng.uniform(-5, 5);
        const double b_true = rng.uniform(-10, 10);
        for (int i = 0; i < 50; ++i) {
            x.push_back(i * 0.25);
            y.push_back(a_true * x.back() + b_true);
        }
        const auto fit = linear_fit(x, y);
        require(fit.has_value() && std::abs(fit->r2 - 1.0) <= 1e-12,
                "exact linear fixture did not reach r2 = 1");
    }
}

// --- criterion 4: packing DP vs exhaustive oracle ---------------------------

void criterion_packing(Context&) {
    oracles::Rng rng(55555);
    const AidKey aid{0x0C5, false};
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<PackingCandidate> candidates;
        std::set<std::pair<int, int>> seen;
        const std::size_t count = 1 + rng.below(15);
        while (candidates.size() < count) {
            const int start = static_cast<int>(rng.below(60));
            const int end =
                start + static_cast<int>(rng.below(std::min<std::uint64_t>(16, 64 - start)));
            if (!seen.insert({start, end}).second) continue;
            PackingCandidate c;
            c.boundary = {start, end};
            c.weight = iter % 3 == 0 ? static_cast<double>(1 + rng.below(4))
                                     : rng.uniform(0.1, 16.0);
            c.match.aid = aid;
            c.match.boundary = c.boundary;
            c.match.r2 = c.weight / c.boundary.length();
            candidates.push_back(c);
        }
        const PayloadMap dp = find_optimal_payload(aid, candidates);
        const PayloadMap bf = brute_force_payload(aid, candidates);
        require(dp.score == bf.score, "DP and brute-force scores differ");
        require(dp.selected.size() == bf.selected.size(), "selection sizes differ");
        for (std::size_t i = 0; i < dp.selected.size(); ++i) {
            require(dp.selected[i].boundary == bf.selected[i].boundary,
                    "selected boundaries differ");
        }
        for (std::size_t i = 0; i < dp.selected.size(); ++i)
            for (std::size_t k = i + 1; k < dp.selected.size(); ++k)
                require(!dp.selected[i].boundary.overlaps(dp.selected[k].boundary),
                        "selection overlaps");
    }
}

// --- criterion 5: end-to-end synthetic recovery -----------------------------

void prepare_scenario(Context& ctx) {
    ctx.scenario = default_synth_config();
    ctx.scenario.seed = 424242;
    ctx.scenario.duration = 600.0;
    const SynthOutput out = generate_capture(ctx.scenario);
    ctx.truth = out.truth;
    {
        std::ofstream log(ctx.capture_path, std::ios::binary);
        write_log(out.capture, log, LogFormat::candump);
    }
    ctx.capture = parse_log_file(ctx.capture_path, LogFormat::candump);
}

void criterion_recovery(Context& ctx) {
    AnalyzeOptions options;
    options.alpha = 0.5;
    options.workers = 2;
    const AnalysisResult result = analyze_capture(ctx.capture, options);
    const nlohmann::json report = report_to_json(result.report);
    const nlohmann::json metrics = score_against_truth(report, ctx.truth);

    std::size_t linked = 0;
    for (const auto& row : metrics.at("signals")) {
        ++linked;
        const std::string where = row.at("aid").get<std::string>() + " [" +
                                  std::to_string(row.at("start_bit").get<int>()) + "," +
                                  std::to_string(row.at("end_bit").get<int>()) + "]";
        require(row.at("recovered").get<bool>(), where + ": boundary not recovered exactly");
        require(row.at("endianness_match").get<bool>(), where + ": wrong endianness");
        require(row.at("r2").get<double>() >= 0.99,
                where + ": quantization-only fit should reach r2 >= 0.99");
        require(row.at("rel_err_a").get<double>() <= 0.02, where + ": slope error > 2%");
        require(row.at("err_b_over_range").get<double>() <= 0.02,
                where + ": intercept error > 2% of range");
    }
    require(linked == 6, "expected 6 did-linked signals in the scenario");

    for (const auto& row : metrics.at("non_did_signals")) {
        if (row.at("kind") == "counter")
            require(!row.at("false_match").get<bool>(), "counter token matched");
    }

    // Packing recovers at least 95% of the plantable bit coverage per AID.
    std::map<std::string, int> truth_bits;
    for (const auto& sig : ctx.truth.at("signals")) {
        if (sig.at("kind") == "did_linked")
            truth_bits[sig.at("aid").get<std::string>()] +=
                sig.at("end_bit").get<int>() - sig.at("start_bit").get<int>() + 1;
    }
    for (const AidAnalysis& aid : result.report.aids) {
        const double truth_fraction = truth_bits[to_string(aid.key)] / 64.0;
        require(aid.payload.score >= 0.95 * truth_fraction,
                to_string(aid.key) + ": packing score below 0.95x truth coverage");
    }
}

// --- criterion 6: alpha monotonicity -----------------------------------------

void criterion_alpha_monotonicity(Context& ctx) {
    double prev_matched = 2.0;
    double prev_score = 2.0;
    for (const double alpha : {0.2, 0.5, 0.8, 0.98}) {
        AnalyzeOptions options;
        options.alpha = alpha;
        options.workers = 2;
        const CaptureStats stats = analyze_capture(ctx.capture, options).report.stats;
        require(stats.matched_fraction <= prev_matched + 1e-12,
                "matched-bit fraction increased with alpha");
        require(stats.total_match_score <= prev_score + 1e-12,
                "total match score increased with alpha");
        prev_matched = stats.matched_fraction;
        prev_score = stats.total_match_score;
    }
}

// --- criterion 7: determinism across worker counts ---------------------------

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void criterion_determinism(Context& ctx) {
    if (!ctx.cli_path.empty()) {
        const fs::path r1 = ctx.work_dir / "report_w1.json";
        const fs::path r8 = ctx.work_dir / "report_w8.json";
        const auto run = [&](unsigned workers, const fs::path& out) {
            std::ostringstream cmd;
            cmd << '"' << ctx.cli_path << "\" analyze \"" << ctx.capture_path.string()
                << "\" --workers " << workers << " --out \"" << out.string()
                << "\" 2>/dev/null";
            require(std::system(cmd.str().c_str()) == 0, "analyze subprocess failed");
        };
        run(1, r1);
        run(8, r8);
        const std::string a = read_file(r1);
        require(!a.empty(), "empty report from subprocess");
        require(a == read_file(r8), "reports differ between 1 and 8 workers");
        return;
    }
    AnalyzeOptions one;
    one.workers = 1;
    AnalyzeOptions eight;
    eight.workers = 8;
    require(report_to_string(analyze_capture(ctx.capture, one).report) ==
                report_to_string(analyze_capture(ctx.capture, eight).report),
            "reports differ between 1 and 8 workers");
}

// --- criterion 8: canio round trip -------------------------------------------

void criterion_roundtrip(Context&) {
    oracles::Rng rng(90210);
    Capture cap;
    cap.source = "<mem>";
    for (int i = 0; i < 10000; ++i) {
        CanFrame f;
        f.timestamp = static_cast<double>(rng.below(2'000'000'000'000ull)) / 1e6;
        f.channel = rng.below(2) ? "can0" : "slcan7";
        f.extended = rng.below(3) == 0;
        f.aid = static_cast<std::uint32_t>(rng.below(f.extended ? 0x20000000ull : 0x800ull));
        f.payload.resize(rng.below(9));
        for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng.below(256));
        cap.frames.push_back(std::move(f));
    }
    std::stable_sort(cap.frames.begin(), cap.frames.end(),
                     [](const CanFrame& a, const CanFrame& b) { return a.timestamp < b.timestamp; });
    std::istringstream in(write_log_string(cap, LogFormat::candump));
    const Capture back = parse_log(in, LogFormat::candump, "<mem>");
    require(back.malformed_lines == 0, "round trip produced malformed lines");
    require(back.frames.size() == cap.frames.size(), "frame count changed");
    for (std::size_t i = 0; i < cap.frames.size(); ++i)
        require(back.frames[i] == cap.frames[i], "frame " + std::to_string(i) + " changed");
}

// --- criterion 9: correlated 1-bit indicator ---------------------------------

void criterion_correlated_indicator(Context&) {
    SynthConfig config;
    config.duration = 600.0;
    config.seed = 777;
    config.channels = {ChannelSpec{13, 0.0, 40.0, 0.12, 0.0, 1}};
    AidSpec aid;
    aid.aid = 0x150;
    aid.period = 0.010;

    // The channel median makes the 1-bit token a threshold indicator:
    // round((y - median) / epsilon) clamps to {0, 1} around the median.
    const std::map<int, Channel> channels = simulate_channels(config);
    std::vector<double> samples = channels.at(13).values;
    std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
    const double median = samples[samples.size() / 2];

    SignalSpec indicator;
    indicator.boundary = {16, 16};
    indicator.endianness = Endianness::big;
    indicator.kind = SignalKind::did_linked;
    indicator.did = 13;
    indicator.a = 1e-6;
    indicator.b = median;
    indicator.allow_clamp = true;
    aid.signals = {indicator};
    config.aids = {aid};

    const SynthOutput out = generate_capture(config);
    std::istringstream in(write_log_string(out.capture, LogFormat::candump));
    const Capture capture = parse_log(in, LogFormat::candump, "<indicator>");

    AnalyzeOptions options;
    options.alpha = 0.2;
    options.workers = 1;
    const AnalysisResult result = analyze_capture(capture, options);
    require(result.report.aids.size() == 1, "expected a single analyzed AID");
    const AidAnalysis& analysis = result.report.aids[0];
    const auto hit = std::find_if(analysis.matches.begin(), analysis.matches.end(),
                                  [](const TokenMatch& m) {
                                      return m.boundary == TokenBoundary{16, 16} && m.did == 13;
                                  });
    require(hit != analysis.matches.end(), "indicator bit did not match its channel at alpha 0.2");
    require(hit->r2 >= 0.3 && hit->r2 <= 0.8,
            "indicator r2 " + std::to_string(hit->r2) + " outside [0.3, 0.8]");
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0 = no stated budget
    std::function<void(Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    Context ctx;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--cli") ctx.cli_path = argv[i + 1];
    }
    ctx.work_dir = fs::temp_directory_path() / "cansig_acceptance";
    fs::create_directories(ctx.work_dir);
    ctx.capture_path = ctx.work_dir / "scenario.log";

    try {
        const auto t0 = std::chrono::steady_clock::now();
        prepare_scenario(ctx);
        std::cout << "prepared 600 s scenario capture (" << ctx.capture.frames.size()
                  << " frames) in " << seconds_since(t0) << " s\n";
    } catch (const std::exception& e) {
        std::cout << "[FAIL] scenario preparation: " << e.what() << "\n";
        return 1;
    }

    const std::vector<Criterion> criteria = {
        {1, "endian encodings match the bit-loop oracle", 1.0, criterion_endian_encodings},
        {2, "token boundaries match the run closed form", 5.0, criterion_tokenizer},
        {3, "OLS and R2 against the long-double oracle", 0.0, criterion_ols},
        {4, "packing DP equals the exhaustive oracle", 10.0, criterion_packing},
        {5, "end-to-end synthetic recovery", 60.0, criterion_recovery},
        {6, "alpha monotonicity on the synthetic capture", 0.0, criterion_alpha_monotonicity},
        {7, "byte-identical reports across worker counts", 0.0, criterion_determinism},
        {8, "candump round trip of 10000 random frames", 0.0, criterion_roundtrip},
        {9, "correlated 1-bit indicator scores in [0.3, 0.8]", 0.0,
         criterion_correlated_indicator},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string error;
        try {
            c.run(ctx);
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double elapsed = seconds_since(t0);
        if (error.empty() && c.budget_seconds > 0.0 && elapsed > c.budget_seconds) {
            error = "runtime " + std::to_string(elapsed) + " s exceeds budget of " +
                    std::to_string(c.budget_seconds) + " s";
        }
        if (error.empty()) {
            std::printf("[PASS] criterion %d: %s (%.2f s)\n", c.id, c.name, elapsed);
        } else {
            std::printf("[FAIL] criterion %d: %s (%.2f s): %s\n", c.id, c.name, elapsed,
                        error.c_str());
            ++failures;
        }
    }
    return failures;
}
