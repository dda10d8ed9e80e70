#include "cansig/synth.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>

#include "cansig/errors.hpp"
#include "cansig/traces.hpp"

namespace cansig {

namespace {

// splitmix64: fully specified, so captures are reproducible across
// platforms (std::distributions are not).
struct Rng {
    std::uint64_t state;

    std::uint64_t next_u64() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double next_sym() { return 2.0 * next_unit() - 1.0; }
    std::uint64_t next_bits(int len) { return len == 0 ? 0 : next_u64() >> (64 - len); }
};

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    Rng rng{seed ^ (stream * 0xD6E8FEB86659FD93ull)};
    return rng.next_u64();
}

double round_us(double t) { return std::round(t * 1e6) / 1e6; }

// Reflecting walk on [0, 1].
std::vector<double> walk01(Rng& rng, std::size_t steps, double speed, double dt) {
    std::vector<double> w(steps);
    double v = rng.next_unit();
    const double scale = speed * std::sqrt(dt);
    for (std::size_t i = 0; i < steps; ++i) {
        w[i] = v;
        v += scale * rng.next_sym();
        while (v < 0.0 || v > 1.0) {
            if (v < 0.0) v = -v;
            if (v > 1.0) v = 2.0 - v;
        }
    }
    return w;
}

std::uint64_t max_raw_for_bytes(int data_bytes) {
    return data_bytes >= 8 ? ~std::uint64_t{0} : ((std::uint64_t{1} << (8 * data_bytes)) - 1);
}

int response_data_bytes(const ChannelSpec& spec) {
    if (const PidFormula* formula = lookup_pid(spec.did)) return formula->data_bytes;
    return spec.data_bytes;
}

void validate(const SynthConfig& config) {
    if (!(config.duration > 0.0)) throw std::invalid_argument("duration must be positive");
    if (!(config.grid_dt > 0.0)) throw std::invalid_argument("grid_dt must be positive");
    if (!(config.diag.rate > 0.0)) throw std::invalid_argument("diagnostic rate must be positive");
    if (config.duration / config.grid_dt > 5e7) throw std::invalid_argument("grid too fine for duration");

    std::set<int> dids;
    for (const ChannelSpec& ch : config.channels) {
        if (!dids.insert(ch.did).second)
            throw std::invalid_argument("duplicate channel DID " + std::to_string(ch.did));
        if (ch.did < 0 || ch.did > 255) throw std::invalid_argument("DID must be in [0, 255]");
        if (!(ch.hi > ch.lo)) throw std::invalid_argument("channel range must be non-empty");
        if (ch.lo < 0.0) throw std::invalid_argument("channel range must be non-negative (raw units)");
        const int nb = response_data_bytes(ch);
        if (nb < 1 || nb > 5) throw std::invalid_argument("response data bytes must be in [1, 5]");
        if (ch.hi > static_cast<double>(max_raw_for_bytes(nb)))
            throw RangeOverflow("channel DID " + std::to_string(ch.did) +
                                " range exceeds its response byte width");
        if (!(ch.speed > 0.0)) throw std::invalid_argument("channel speed must be positive");
        if (ch.latent_weight < 0.0 || ch.latent_weight > 1.0)
            throw std::invalid_argument("latent_weight must be in [0, 1]");
    }

    std::set<std::pair<std::uint32_t, bool>> seen_aids;
    for (const AidSpec& aid : config.aids) {
        if (!(aid.period > 0.0)) throw std::invalid_argument("aid period must be positive");
        if (config.duration / aid.period > 5e6) throw std::invalid_argument("aid period too short");
        if (aid.phase < 0.0) throw std::invalid_argument("aid phase must be non-negative");
        if (!seen_aids.insert({aid.aid, aid.extended}).second)
            throw std::invalid_argument("duplicate aid in layout");
        for (std::size_t i = 0; i < aid.signals.size(); ++i) {
            const SignalSpec& s = aid.signals[i];
            if (!s.boundary.valid()) throw std::invalid_argument("signal boundary out of range");
            for (std::size_t k = 0; k < i; ++k) {
                if (s.boundary.overlaps(aid.signals[k].boundary))
                    throw LayoutOverlap("aid " + format_aid(aid.aid, aid.extended) +
                                        ": overlapping signal boundaries");
            }
            const std::uint64_t token_max = mask_for_length(s.boundary.length());
            switch (s.kind) {
                case SignalKind::did_linked: {
                    if (s.a == 0.0 || !std::isfinite(s.a) || !std::isfinite(s.b))
                        throw std::invalid_argument("did_linked signal needs finite a != 0 and b");
                    const auto ch = std::find_if(config.channels.begin(), config.channels.end(),
                                                 [&](const ChannelSpec& c) { return c.did == s.did; });
                    if (ch == config.channels.end())
                        throw std::invalid_argument("signal references unknown DID " +
                                                    std::to_string(s.did));
                    if (!s.allow_clamp) {
                        const double e0 = std::round((ch->lo - s.b) / s.a);
                        const double e1 = std::round((ch->hi - s.b) / s.a);
                        if (std::min(e0, e1) < 0.0 ||
                            std::max(e0, e1) > static_cast<double>(token_max))
                            throw RangeOverflow("channel DID " + std::to_string(s.did) +
                                                " does not fit a " +
                                                std::to_string(s.boundary.length()) +
                                                "-bit token under (a, b)");
                    }
                    break;
                }
                case SignalKind::constant_run:
                    if (s.constant_value > token_max)
                        throw std::invalid_argument("constant value does not fit its boundary");
                    break;
                case SignalKind::counter:
                case SignalKind::noise:
                    break;
            }
        }
    }
}

std::uint64_t encode_did_linked(const SignalSpec& s, double y) {
    const double raw = std::round((y - s.b) / s.a);
    const double token_max = static_cast<double>(mask_for_length(s.boundary.length()));
    return static_cast<std::uint64_t>(std::clamp(raw, 0.0, token_max));
}

}  // namespace

const char* to_string(SignalKind k) {
    switch (k) {
        case SignalKind::did_linked: return "did_linked";
        case SignalKind::counter: return "counter";
        case SignalKind::constant_run: return "constant_run";
        case SignalKind::noise: return "noise";
    }
    return "unknown";
}

SignalKind signal_kind_from_string(const std::string& s) {
    if (s == "did_linked") return SignalKind::did_linked;
    if (s == "counter") return SignalKind::counter;
    if (s == "constant_run") return SignalKind::constant_run;
    if (s == "noise") return SignalKind::noise;
    throw std::invalid_argument("unknown signal kind: " + s);
}

double Channel::value_at(double t) const {
    if (values.empty()) return 0.0;
    const double max_t = grid_dt * static_cast<double>(values.size() - 1);
    t = std::clamp(t, 0.0, max_t);
    const double pos = t / grid_dt;
    const std::size_t idx = std::min(static_cast<std::size_t>(pos), values.size() - 2);
    const double frac = pos - static_cast<double>(idx);
    return values[idx] + frac * (values[idx + 1] - values[idx]);
}

double Channel::min_value() const { return *std::min_element(values.begin(), values.end()); }
double Channel::max_value() const { return *std::max_element(values.begin(), values.end()); }

std::map<int, Channel> simulate_channels(const SynthConfig& config) {
    validate(config);
    const std::size_t steps =
        static_cast<std::size_t>(std::floor(config.duration / config.grid_dt)) + 2;

    Rng latent_rng{stream_seed(config.seed, 0x1A7E47ull)};
    std::vector<double> latent;  // built lazily; most configs never use it
    const bool needs_latent = std::any_of(config.channels.begin(), config.channels.end(),
                                          [](const ChannelSpec& c) { return c.latent_weight > 0.0; });
    if (needs_latent) latent = walk01(latent_rng, steps, 0.15, config.grid_dt);

    std::map<int, Channel> out;
    for (const ChannelSpec& spec : config.channels) {
        Rng rng{stream_seed(config.seed, 0xC4A22ull + static_cast<std::uint64_t>(spec.did))};
        std::vector<double> own = walk01(rng, steps, spec.speed, config.grid_dt);
        Channel ch;
        ch.spec = spec;
        ch.grid_dt = config.grid_dt;
        ch.values.resize(steps);
        for (std::size_t i = 0; i < steps; ++i) {
            double w = own[i];
            if (spec.latent_weight > 0.0)
                w = (1.0 - spec.latent_weight) * w + spec.latent_weight * latent[i];
            ch.values[i] = spec.lo + (spec.hi - spec.lo) * w;
        }
        out.emplace(spec.did, std::move(ch));
    }
    return out;
}

SynthOutput generate_capture(const SynthConfig& config) {
    validate(config);
    const std::map<int, Channel> channels = simulate_channels(config);

    SynthOutput out;
    out.capture.source = "synth:seed=" + std::to_string(config.seed);
    auto& frames = out.capture.frames;

    for (const AidSpec& aid : config.aids) {
        Rng noise_rng{stream_seed(config.seed, 0x4015Eull ^ (static_cast<std::uint64_t>(aid.aid) << 1) ^
                                                   (aid.extended ? 1 : 0))};
        std::uint64_t frame_index = 0;
        for (double t = aid.phase; t <= config.duration + 1e-9; t += aid.period, ++frame_index) {
            const double ts = round_us(t);
            std::uint64_t row = 0;
            for (const SignalSpec& s : aid.signals) {
                std::uint64_t value = 0;
                switch (s.kind) {
                    case SignalKind::did_linked:
                        value = encode_did_linked(s, channels.at(s.did).value_at(ts));
                        break;
                    case SignalKind::counter:
                        value = frame_index & mask_for_length(s.boundary.length());
                        break;
                    case SignalKind::constant_run:
                        value = s.constant_value;
                        break;
                    case SignalKind::noise:
                        value = noise_rng.next_bits(s.boundary.length());
                        break;
                }
                row = place_token(row, s.boundary, s.endianness, value);
            }
            CanFrame f;
            f.timestamp = ts;
            f.channel = aid.channel_name;
            f.aid = aid.aid;
            f.extended = aid.extended;
            f.payload.resize(8);
            for (int i = 0; i < 8; ++i) f.payload[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(row >> (8 * (7 - i)));
            frames.push_back(std::move(f));
        }
    }

    // Diagnostic stream: responses sample the channel at the response
    // timestamp; requests precede them by 2 ms.
    std::vector<int> dids;
    for (const auto& [did, ch] : channels) dids.push_back(did);
    const auto emit_query = [&](int did, double t) {
        const Channel& ch = channels.at(did);
        const int nb = response_data_bytes(ch.spec);
        const double ts = round_us(t);
        if (config.diag.emit_requests) {
            CanFrame req;
            req.timestamp = round_us(std::max(0.0, t - 0.002));
            req.channel = "vcan0";
            req.aid = config.diag.request_aid;
            req.payload = {0x02, 0x01, static_cast<std::uint8_t>(did), 0, 0, 0, 0, 0};
            frames.push_back(std::move(req));
        }
        const double raw_max = static_cast<double>(max_raw_for_bytes(nb));
        const double value = std::clamp(std::round(ch.value_at(ts)), 0.0, raw_max);
        std::uint64_t raw = static_cast<std::uint64_t>(value);
        CanFrame resp;
        resp.timestamp = ts;
        resp.channel = "vcan0";
        resp.aid = config.diag.response_aid;
        resp.payload.assign(8, 0);
        resp.payload[0] = static_cast<std::uint8_t>(2 + nb);
        resp.payload[1] = 0x41;
        resp.payload[2] = static_cast<std::uint8_t>(did);
        for (int i = 0; i < nb; ++i)
            resp.payload[static_cast<std::size_t>(3 + i)] =
                static_cast<std::uint8_t>(raw >> (8 * (nb - 1 - i)));
        frames.push_back(std::move(resp));
    };

    if (!dids.empty()) {
        if (config.diag.mode == QueryMode::round_robin) {
            std::size_t k = 0;
            for (double t = 0.0; t <= config.duration + 1e-9; t += 1.0 / config.diag.rate, ++k)
                emit_query(dids[k % dids.size()], t);
        } else {
            const double stagger = 1.0 / config.diag.rate / static_cast<double>(dids.size());
            for (std::size_t d = 0; d < dids.size(); ++d) {
                for (double t = stagger * static_cast<double>(d); t <= config.duration + 1e-9;
                     t += 1.0 / config.diag.rate)
                    emit_query(dids[d], t);
            }
        }
    }

    std::stable_sort(frames.begin(), frames.end(),
                     [](const CanFrame& a, const CanFrame& b) { return a.timestamp < b.timestamp; });
    out.capture.total_lines = frames.size();

    nlohmann::json truth;
    truth["schema"] = 1;
    truth["generator"] = "cansig-synth";
    truth["seed"] = config.seed;
    truth["duration"] = config.duration;
    truth["channels"] = nlohmann::json::array();
    for (const ChannelSpec& ch : config.channels) {
        truth["channels"].push_back({{"did", ch.did},
                                     {"lo", ch.lo},
                                     {"hi", ch.hi},
                                     {"speed", ch.speed},
                                     {"latent_weight", ch.latent_weight},
                                     {"data_bytes", response_data_bytes(ch)}});
    }
    truth["signals"] = nlohmann::json::array();
    for (const AidSpec& aid : config.aids) {
        for (const SignalSpec& s : aid.signals) {
            nlohmann::json entry = {{"aid", format_aid(aid.aid, aid.extended)},
                                    {"extended", aid.extended},
                                    {"start_bit", s.boundary.start},
                                    {"end_bit", s.boundary.end},
                                    {"endianness", to_string(s.endianness)},
                                    {"kind", to_string(s.kind)}};
            if (s.kind == SignalKind::did_linked) {
                entry["did"] = s.did;
                entry["a"] = s.a;
                entry["b"] = s.b;
                entry["allow_clamp"] = s.allow_clamp;
            }
            if (s.kind == SignalKind::constant_run) entry["value"] = s.constant_value;
            truth["signals"].push_back(std::move(entry));
        }
    }
    out.truth = std::move(truth);
    return out;
}

namespace {

nlohmann::json diag_to_json(const DiagSpec& d) {
    return {{"rate", d.rate},
            {"mode", d.mode == QueryMode::round_robin ? "round_robin" : "per_did"},
            {"response_aid", format_aid(d.response_aid, false)},
            {"request_aid", format_aid(d.request_aid, false)},
            {"emit_requests", d.emit_requests}};
}

DiagSpec diag_from_json(const nlohmann::json& j) {
    DiagSpec d;
    d.rate = j.value("rate", d.rate);
    const std::string mode = j.value("mode", "round_robin");
    if (mode == "round_robin") {
        d.mode = QueryMode::round_robin;
    } else if (mode == "per_did") {
        d.mode = QueryMode::per_did;
    } else {
        throw std::invalid_argument("unknown query mode: " + mode);
    }
    if (j.contains("response_aid"))
        d.response_aid = parse_aid_interval(j["response_aid"].get<std::string>()).lo;
    if (j.contains("request_aid"))
        d.request_aid = parse_aid_interval(j["request_aid"].get<std::string>()).lo;
    d.emit_requests = j.value("emit_requests", d.emit_requests);
    return d;
}

}  // namespace

nlohmann::json synth_config_to_json(const SynthConfig& config) {
    nlohmann::json j;
    j["schema"] = 1;
    j["duration"] = config.duration;
    j["seed"] = config.seed;
    j["grid_dt"] = config.grid_dt;
    j["diag"] = diag_to_json(config.diag);
    j["channels"] = nlohmann::json::array();
    for (const ChannelSpec& ch : config.channels) {
        j["channels"].push_back({{"did", ch.did},
                                 {"lo", ch.lo},
                                 {"hi", ch.hi},
                                 {"speed", ch.speed},
                                 {"latent_weight", ch.latent_weight},
                                 {"data_bytes", ch.data_bytes}});
    }
    j["aids"] = nlohmann::json::array();
    for (const AidSpec& aid : config.aids) {
        nlohmann::json a = {{"aid", format_aid(aid.aid, aid.extended)},
                            {"extended", aid.extended},
                            {"period", aid.period},
                            {"phase", aid.phase},
                            {"channel", aid.channel_name},
                            {"signals", nlohmann::json::array()}};
        for (const SignalSpec& s : aid.signals) {
            nlohmann::json sj = {{"start_bit", s.boundary.start},
                                 {"end_bit", s.boundary.end},
                                 {"endianness", to_string(s.endianness)},
                                 {"kind", to_string(s.kind)}};
            if (s.kind == SignalKind::did_linked) {
                sj["did"] = s.did;
                sj["a"] = s.a;
                sj["b"] = s.b;
                sj["allow_clamp"] = s.allow_clamp;
            }
            if (s.kind == SignalKind::constant_run) sj["value"] = s.constant_value;
            a["signals"].push_back(std::move(sj));
        }
        j["aids"].push_back(std::move(a));
    }
    return j;
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("schema", 0) != 1)
        throw SchemaMismatch("generator config must be an object with schema 1");
    SynthConfig config;
    config.duration = j.value("duration", config.duration);
    config.seed = j.value("seed", config.seed);
    config.grid_dt = j.value("grid_dt", config.grid_dt);
    if (j.contains("diag")) config.diag = diag_from_json(j["diag"]);
    for (const auto& cj : j.value("channels", nlohmann::json::array())) {
        ChannelSpec ch;
        ch.did = cj.at("did").get<int>();
        ch.lo = cj.at("lo").get<double>();
        ch.hi = cj.at("hi").get<double>();
        ch.speed = cj.value("speed", ch.speed);
        ch.latent_weight = cj.value("latent_weight", ch.latent_weight);
        ch.data_bytes = cj.value("data_bytes", ch.data_bytes);
        config.channels.push_back(ch);
    }
    for (const auto& aj : j.value("aids", nlohmann::json::array())) {
        AidSpec aid;
        aid.extended = aj.value("extended", false);
        aid.aid = parse_aid_interval(aj.at("aid").get<std::string>()).lo;
        aid.period = aj.at("period").get<double>();
        aid.phase = aj.value("phase", 0.0);
        aid.channel_name = aj.value("channel", aid.channel_name);
        for (const auto& sj : aj.value("signals", nlohmann::json::array())) {
            SignalSpec s;
            s.boundary = TokenBoundary{sj.at("start_bit").get<int>(), sj.at("end_bit").get<int>()};
            s.endianness = endianness_from_string(sj.value("endianness", "big"));
            s.kind = signal_kind_from_string(sj.at("kind").get<std::string>());
            if (s.kind == SignalKind::did_linked) {
                s.did = sj.at("did").get<int>();
                s.a = sj.at("a").get<double>();
                s.b = sj.at("b").get<double>();
                s.allow_clamp = sj.value("allow_clamp", false);
            }
            if (s.kind == SignalKind::constant_run)
                s.constant_value = sj.value("value", std::uint64_t{0});
            aid.signals.push_back(s);
        }
        config.aids.push_back(std::move(aid));
    }
    return config;
}

SynthConfig default_synth_config() {
    SynthConfig config;
    config.duration = 600.0;
    config.seed = 1;
    config.channels = {
        ChannelSpec{12, 0.0, 32000.0, 0.15, 0.0, 2},  // engine speed, raw quarter-rpm
        ChannelSpec{13, 0.0, 40.0, 0.12, 0.0, 1},     // vehicle speed, km/h
        ChannelSpec{73, 0.0, 255.0, 0.20, 0.0, 1},    // accelerator pedal, raw
        ChannelSpec{17, 0.0, 255.0, 0.18, 0.0, 1},    // throttle, raw
    };

    const auto make_aid = [](std::uint32_t id, double period, double phase,
                             std::uint64_t constant_byte, SignalSpec wide, SignalSpec narrow) {
        AidSpec aid;
        aid.aid = id;
        aid.period = period;
        aid.phase = phase;
        aid.signals = {
            SignalSpec{{0, 7}, Endianness::big, SignalKind::constant_run, -1, 1.0, 0.0, false,
                       constant_byte},
            wide,
            narrow,
            SignalSpec{{60, 63}, Endianness::big, SignalKind::counter, -1, 1.0, 0.0, false, 0},
        };
        return aid;
    };

    SignalSpec wide;
    wide.boundary = {8, 23};
    wide.kind = SignalKind::did_linked;
    SignalSpec narrow;
    narrow.boundary = {28, 39};
    narrow.kind = SignalKind::did_linked;

    // 16-bit engine speed at half-raw resolution; 12-bit wheel-speed style
    // token at 1/100 km/h.
    wide.endianness = Endianness::big;
    wide.did = 12;
    wide.a = 0.5;
    narrow.endianness = Endianness::big;
    narrow.did = 13;
    narrow.a = 0.01;
    config.aids.push_back(make_aid(0x0C5, 0.010, 0.0, 0xA5, wide, narrow));

    wide.endianness = Endianness::little;
    wide.did = 73;
    wide.a = 0.004;
    narrow.endianness = Endianness::big;
    narrow.did = 12;
    narrow.a = 8.0;
    config.aids.push_back(make_aid(0x1A2, 0.012, 0.001, 0xFF, wide, narrow));

    wide.endianness = Endianness::big;
    wide.did = 17;
    wide.a = 0.004;
    narrow.endianness = Endianness::little;
    narrow.did = 13;
    narrow.a = 0.01;
    config.aids.push_back(make_aid(0x3B0, 0.020, 0.002, 0x3C, wide, narrow));

    return config;
}

namespace {

const nlohmann::json* find_report_aid(const nlohmann::json& report, const std::string& aid,
                                      bool extended) {
    for (const auto& entry : report.at("aids")) {
        if (entry.at("aid").get<std::string>() == aid && entry.at("extended").get<bool>() == extended)
            return &entry;
    }
    return nullptr;
}

bool entry_overlaps(const nlohmann::json& match, int start, int end) {
    return match.at("start_bit").get<int>() <= end && start <= match.at("end_bit").get<int>();
}

}  // namespace

nlohmann::json score_against_truth(const nlohmann::json& report, const nlohmann::json& truth) {
    if (!report.is_object() || report.value("schema", 0) != 1 || !report.contains("aids"))
        throw SchemaMismatch("report document: expected schema 1 with an 'aids' list");
    if (!truth.is_object() || truth.value("schema", 0) != 1 || !truth.contains("signals"))
        throw SchemaMismatch("truth document: expected schema 1 with a 'signals' list");
    if (report.contains("config") && report["config"].value("anonymize_aids", false))
        throw SchemaMismatch("cannot score an anonymized report against ground truth");

    std::map<int, std::pair<double, double>> channel_ranges;
    for (const auto& ch : truth.value("channels", nlohmann::json::array()))
        channel_ranges[ch.at("did").get<int>()] = {ch.at("lo").get<double>(),
                                                   ch.at("hi").get<double>()};

    nlohmann::json result;
    result["schema"] = 1;
    result["signals"] = nlohmann::json::array();
    result["non_did_signals"] = nlohmann::json::array();

    std::size_t n_linked = 0;
    std::size_t n_recovered = 0;
    std::size_t n_false = 0;

    // Matched-bit precision/recall over the 64-bit grids of truth AIDs.
    std::map<std::pair<std::string, bool>, std::pair<std::uint64_t, std::uint64_t>> bit_masks;

    for (const auto& sig : truth.at("signals")) {
        const std::string aid = sig.at("aid").get<std::string>();
        const bool extended = sig.value("extended", false);
        const int start = sig.at("start_bit").get<int>();
        const int end = sig.at("end_bit").get<int>();
        const std::string kind = sig.at("kind").get<std::string>();
        const nlohmann::json* entry = find_report_aid(report, aid, extended);

        auto& [truth_mask, selected_mask] = bit_masks[{aid, extended}];
        if (entry != nullptr && selected_mask == 0) {
            for (const auto& m : entry->at("selected")) {
                for (int j = m.at("start_bit").get<int>(); j <= m.at("end_bit").get<int>(); ++j)
                    selected_mask |= std::uint64_t{1} << (63 - j);
            }
        }

        if (kind == "did_linked") {
            ++n_linked;
            for (int j = start; j <= end; ++j) truth_mask |= std::uint64_t{1} << (63 - j);

            nlohmann::json row = {{"aid", aid},           {"extended", extended},
                                  {"start_bit", start},   {"end_bit", end},
                                  {"did", sig.at("did")}, {"endianness", sig.at("endianness")},
                                  {"recovered", false}};
            if (entry != nullptr) {
                const nlohmann::json* best = nullptr;
                for (const auto& m : entry->at("matches")) {
                    if (m.at("start_bit").get<int>() != start || m.at("end_bit").get<int>() != end)
                        continue;
                    if (m.at("did").get<int>() != sig.at("did").get<int>()) continue;
                    if (best == nullptr || m.at("r2").get<double>() > best->at("r2").get<double>())
                        best = &m;
                }
                if (best != nullptr) {
                    ++n_recovered;
                    row["recovered"] = true;
                    row["endianness_match"] =
                        best->at("endianness").get<std::string>() ==
                        sig.at("endianness").get<std::string>();
                    row["r2"] = best->at("r2");
                    row["a"] = best->at("a");
                    row["b"] = best->at("b");
                    const double a_true = sig.at("a").get<double>();
                    const double b_true = sig.at("b").get<double>();
                    row["rel_err_a"] =
                        std::abs(best->at("a").get<double>() - a_true) / std::abs(a_true);
                    const auto range = channel_ranges.find(sig.at("did").get<int>());
                    if (range != channel_ranges.end()) {
                        const double span = range->second.second - range->second.first;
                        row["err_b_over_range"] =
                            std::abs(best->at("b").get<double>() - b_true) / span;
                    }
                    bool selected = false;
                    for (const auto& m : entry->at("selected")) {
                        if (m.at("start_bit").get<int>() == start &&
                            m.at("end_bit").get<int>() == end &&
                            m.at("did").get<int>() == sig.at("did").get<int>()) {
                            selected = true;
                            break;
                        }
                    }
                    row["selected"] = selected;
                }
            }
            result["signals"].push_back(std::move(row));
        } else if (kind == "counter" || kind == "noise") {
            bool false_match = false;
            if (entry != nullptr) {
                for (const auto& m : entry->at("matches")) {
                    if (entry_overlaps(m, start, end)) {
                        false_match = true;
                        break;
                    }
                }
            }
            if (false_match) ++n_false;
            result["non_did_signals"].push_back({{"aid", aid},
                                                 {"extended", extended},
                                                 {"start_bit", start},
                                                 {"end_bit", end},
                                                 {"kind", kind},
                                                 {"false_match", false_match}});
        }
    }

    std::uint64_t truth_bits = 0;
    std::uint64_t selected_bits = 0;
    std::uint64_t overlap_bits = 0;
    for (const auto& [key, masks] : bit_masks) {
        truth_bits += static_cast<std::uint64_t>(std::popcount(masks.first));
        selected_bits += static_cast<std::uint64_t>(std::popcount(masks.second));
        overlap_bits += static_cast<std::uint64_t>(std::popcount(masks.first & masks.second));
    }
    if (selected_bits > 0) {
        result["matched_bit_precision"] =
            static_cast<double>(overlap_bits) / static_cast<double>(selected_bits);
    } else {
        result["matched_bit_precision"] = "N/A";
    }
    if (truth_bits > 0) {
        result["matched_bit_recall"] =
            static_cast<double>(overlap_bits) / static_cast<double>(truth_bits);
    } else {
        result["matched_bit_recall"] = "N/A";
    }
    result["summary"] = {{"did_linked_signals", n_linked},
                         {"recovered", n_recovered},
                         {"false_matches", n_false}};
    return result;
}

}  // namespace cansig
