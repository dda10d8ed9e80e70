// cansig - recover CAN signal definitions from a driving capture by
// regressing payload tokens against simultaneously captured OBD-II
// diagnostic responses.
//
// Subcommands:
//   analyze   parse a capture, match tokens to DIDs, emit report/DBC/CSVs
//   synth     generate a synthetic capture with a ground-truth file
//   score     compare an analysis report against ground truth

#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "cansig/canio.hpp"
#include "cansig/errors.hpp"
#include "cansig/pipeline.hpp"
#include "cansig/report.hpp"
#include "cansig/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitInternalError = 2;

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cansig::UnreadableInput("cannot open " + path.string() + " for writing");
    out << text;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw cansig::UnreadableInput("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw cansig::SchemaMismatch(path.string() + ": " + e.what());
    }
    return j;
}

struct AnalyzeArgs {
    std::string log_path;
    std::string format = "candump";
    double alpha = 0.5;
    std::size_t min_points = 10;
    std::string interp = "linear";
    std::vector<std::string> diag_ranges;
    bool include_requests = false;
    bool anonymize = false;
    unsigned workers = 0;
    std::string out_path;
    std::string dbc_path;
    std::string csv_dir;
};

int run_analyze(const AnalyzeArgs& args) {
    cansig::AnalyzeOptions options;
    options.alpha = args.alpha;
    options.min_points = args.min_points;
    options.interp = cansig::interp_mode_from_string(args.interp);
    options.format = cansig::log_format_from_string(args.format);
    if (!args.diag_ranges.empty()) {
        options.diag_ranges.clear();
        for (const std::string& r : args.diag_ranges)
            options.diag_ranges.push_back(cansig::parse_aid_interval(r));
    }
    options.exclude_standard_requests = !args.include_requests;
    options.anonymize_aids = args.anonymize;
    options.workers = args.workers > 0 ? args.workers
                                       : std::max(1u, std::thread::hardware_concurrency());

    const cansig::Capture capture = cansig::parse_log_file(args.log_path, options.format);
    const cansig::AnalysisResult result = cansig::analyze_capture(capture, options);
    const std::string report_text = cansig::report_to_string(result.report);

    if (args.out_path.empty()) {
        std::cout << report_text;
    } else {
        write_text_file(args.out_path, report_text);
    }
    if (!args.dbc_path.empty()) write_text_file(args.dbc_path, cansig::emit_dbc(result.report));
    if (!args.csv_dir.empty())
        cansig::write_csv_dumps(result.report, result.aid_traces, result.did_traces, args.csv_dir);

    std::cerr << "analyzed " << result.report.stats.aid_count << " AIDs, "
              << result.report.dids.size() << " DIDs; total match score "
              << result.report.stats.total_match_score << "\n";
    return kExitOk;
}

struct SynthArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double duration = 0.0;
    std::string out_path;
    std::string truth_path;
};

int run_synth(const SynthArgs& args) {
    cansig::SynthConfig config = args.config_path.empty()
                                     ? cansig::default_synth_config()
                                     : cansig::synth_config_from_json(read_json_file(args.config_path));
    if (args.seed_set) config.seed = args.seed;
    if (args.duration > 0.0) config.duration = args.duration;

    const cansig::SynthOutput output = cansig::generate_capture(config);
    write_text_file(args.out_path, cansig::write_log_string(output.capture, cansig::LogFormat::candump));
    if (!args.truth_path.empty()) write_text_file(args.truth_path, output.truth.dump(2) + "\n");

    std::cerr << "wrote " << output.capture.frames.size() << " frames to " << args.out_path << "\n";
    return kExitOk;
}

int run_score(const std::string& report_path, const std::string& truth_path) {
    const nlohmann::json metrics =
        cansig::score_against_truth(read_json_file(report_path), read_json_file(truth_path));
    std::cout << metrics.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CAN payload tokenization and DID translation toolkit"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    CLI::App* analyze = app.add_subcommand("analyze", "Analyze a capture log");
    analyze->add_option("log", analyze_args.log_path, "capture log file")->required();
    analyze->add_option("--format", analyze_args.format, "log format (candump)");
    analyze->add_option("--alpha", analyze_args.alpha, "minimum r2 for a match")
        ->check(CLI::Range(1e-9, 1.0));
    analyze->add_option("--min-points", analyze_args.min_points, "minimum aligned samples per fit");
    analyze->add_option("--interp", analyze_args.interp, "interpolation: linear or hold")
        ->check(CLI::IsMember({"linear", "hold"}));
    analyze->add_option("--diag-range", analyze_args.diag_ranges,
                        "diagnostic response id range, hex (default 7E8-7EF)");
    analyze->add_flag("--include-requests", analyze_args.include_requests,
                      "keep 7DF-7E7 frames in broadcast traces");
    analyze->add_flag("--anonymize-aids", analyze_args.anonymize,
                      "replace arbitration ids with priority ranks");
    analyze->add_option("--workers", analyze_args.workers, "worker threads (0 = hardware)");
    analyze->add_option("--out", analyze_args.out_path, "report path (default: stdout)");
    analyze->add_option("--dbc", analyze_args.dbc_path, "also write a DBC fragment");
    analyze->add_option("--csv-dir", analyze_args.csv_dir, "also write per-trace CSV dumps");

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic capture");
    synth->add_option("--config", synth_args.config_path, "generator config JSON");
    CLI::Option* seed_opt = synth->add_option("--seed", synth_args.seed, "RNG seed");
    synth->add_option("--duration", synth_args.duration, "override duration in seconds");
    synth->add_option("--out", synth_args.out_path, "capture output path")->required();
    synth->add_option("--truth", synth_args.truth_path, "ground-truth output path");

    std::string report_path;
    std::string truth_path;
    CLI::App* score = app.add_subcommand("score", "Score a report against ground truth");
    score->add_option("--report", report_path, "analysis report JSON")->required();
    score->add_option("--truth", truth_path, "ground-truth JSON")->required();

    try {
        app.parse(argc, argv);
        synth_args.seed_set = seed_opt->count() > 0;
        if (analyze->parsed()) return run_analyze(analyze_args);
        if (synth->parsed()) return run_synth(synth_args);
        if (score->parsed()) return run_score(report_path, truth_path);
        return kExitInputError;
    } catch (const CLI::ParseError& e) {
        // CLI11 uses its own exit codes; fold every usage error into 1.
        return app.exit(e) == 0 ? kExitOk : kExitInputError;
    } catch (const cansig::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternalError;
    }
}
