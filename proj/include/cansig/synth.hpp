#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cansig/bits.hpp"
#include "cansig/canio.hpp"

namespace cansig {

enum class SignalKind : std::uint8_t { did_linked, counter, constant_run, noise };

const char* to_string(SignalKind k);
SignalKind signal_kind_from_string(const std::string& s);

// One planted payload field. For did_linked signals the embedded token value
// is round((y(t) - b) / a) clamped to the token width, so a matcher that
// recovers (a, b) estimates these numbers directly.
struct SignalSpec {
    TokenBoundary boundary;
    Endianness endianness = Endianness::big;
    SignalKind kind = SignalKind::constant_run;
    int did = -1;                  // did_linked only
    double a = 1.0;
    double b = 0.0;
    bool allow_clamp = false;      // permit saturation instead of RangeOverflow
    std::uint64_t constant_value = 0;  // constant_run only
};

// Bounded smooth random walk in raw DID units. `speed` is the per-second
// drift as a fraction of the range; `latent_weight` mixes in a shared latent
// walk to approximate cross-channel correlation.
struct ChannelSpec {
    int did = 0;
    double lo = 0.0;
    double hi = 1.0;
    double speed = 0.15;
    double latent_weight = 0.0;
    int data_bytes = 2;  // response payload width; PID-table value wins if known
};

enum class QueryMode : std::uint8_t { round_robin, per_did };

struct DiagSpec {
    double rate = 20.0;  // aggregate queries per second (per DID in per_did mode)
    QueryMode mode = QueryMode::round_robin;
    std::uint32_t response_aid = 0x7E8;
    std::uint32_t request_aid = 0x7DF;
    bool emit_requests = true;
};

struct AidSpec {
    std::uint32_t aid = 0;
    bool extended = false;
    double period = 0.010;
    double phase = 0.0;
    std::string channel_name = "vcan0";
    std::vector<SignalSpec> signals;
};

struct SynthConfig {
    double duration = 600.0;
    std::uint64_t seed = 1;
    double grid_dt = 0.005;
    DiagSpec diag;
    std::vector<ChannelSpec> channels;
    std::vector<AidSpec> aids;
};

SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json synth_config_to_json(const SynthConfig& config);

// Built-in demo scenario: three broadcast ids, each carrying a 16-bit and a
// 12-bit DID-linked token, a 4-bit frame counter and a constant byte, over
// four simulated channels.
SynthConfig default_synth_config();

// Channel sampled on the fine grid; value(t) interpolates linearly.
struct Channel {
    ChannelSpec spec;
    double grid_dt = 0.0;
    std::vector<double> values;

    double value_at(double t) const;
    double min_value() const;
    double max_value() const;
};

// Deterministic per (config.seed, did); reflecting at the range edges.
std::map<int, Channel> simulate_channels(const SynthConfig& config);

struct SynthOutput {
    Capture capture;
    nlohmann::json truth;  // ground-truth document, schema 1
};

// Emits broadcast frames at the configured periods with payloads assembled
// from the signal layout, interleaved with Mode-01 diagnostic responses (and
// optional requests) sampling each channel. Byte-identical per (config, seed).
//
// Throws LayoutOverlap / RangeOverflow / std::invalid_argument on bad config.
SynthOutput generate_capture(const SynthConfig& config);

// Compares an analysis report against a ground-truth document: per
// did-linked signal exact-boundary recovery, endianness agreement and
// relative (a, b) errors; per counter/noise signal a false-match flag;
// plus matched-bit precision/recall aggregates.
//
// Throws SchemaMismatch when either document is missing required fields.
nlohmann::json score_against_truth(const nlohmann::json& report, const nlohmann::json& truth);

}  // namespace cansig
