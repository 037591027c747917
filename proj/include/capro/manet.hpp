#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "capro/errors.hpp"
#include "capro/network.hpp"

namespace capro {

/// Identity of the generator behind every sampled sequence; recorded in the
/// sample metadata so sequences are reproducible across builds.
inline constexpr const char* kRngName = "mt19937_64";

struct ManetConfig {
    int node_count = 0;
    double width = 1000.0, height = 1000.0;
    double coverage_radius = 0.0;
    double step_length = 0.0;
    int timeframes = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (node_count < 1) throw ValidationError("node count must be positive");
        if (!(width > 0.0 && height > 0.0)) throw ValidationError("area dimensions must be positive");
        if (coverage_radius < 0.0) throw ValidationError("coverage radius must be nonnegative");
        if (!(step_length > 0.0)) throw ValidationError("step length must be positive");
        if (timeframes < 1) throw ValidationError("timeframe count must be positive");
    }
};

namespace detail {

// Uniform double in [0,1) from the raw 64-bit stream; the std distributions
// are not bit-stable across standard libraries, this is.
inline double uniform01(std::mt19937_64& g) { return (g() >> 11) * 0x1.0p-53; }

// Fold a coordinate back into [0,limit] by mirror reflection.
inline double reflect(double x, double limit) {
    double period = 2.0 * limit;
    x = std::fmod(x, period);
    if (x < 0.0) x += period;
    return x <= limit ? x : period - x;
}

inline std::vector<Link> proximity_links(const std::vector<std::array<double, 2>>& pos,
                                         double radius) {
    std::vector<Link> links;
    const double r2 = radius * radius;
    for (int i = 0; i < static_cast<int>(pos.size()); ++i)
        for (int j = i + 1; j < static_cast<int>(pos.size()); ++j) {
            double dx = pos[i][0] - pos[j][0], dy = pos[i][1] - pos[j][1];
            if (dx * dx + dy * dy <= r2) links.emplace_back(i, j);
        }
    return links;
}

} // namespace detail

/// Random-walk MANET sampler: frame 0 scatters the nodes uniformly over the
/// rectangle; every later frame moves each node one fixed-length step in a
/// uniformly random direction, reflecting off the area boundary.  Links join
/// every pair within coverage range.
inline std::vector<Network> generate_samples(const ManetConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::array<double, 2>> pos(cfg.node_count);
    for (auto& p : pos) {
        p[0] = detail::uniform01(rng) * cfg.width;
        p[1] = detail::uniform01(rng) * cfg.height;
    }
    std::vector<Network> frames;
    frames.reserve(cfg.timeframes);
    frames.emplace_back(cfg.node_count, detail::proximity_links(pos, cfg.coverage_radius), pos);
    for (int f = 1; f < cfg.timeframes; ++f) {
        for (auto& p : pos) {
            double angle = detail::uniform01(rng) * 2.0 * std::numbers::pi;
            p[0] = detail::reflect(p[0] + cfg.step_length * std::cos(angle), cfg.width);
            p[1] = detail::reflect(p[1] + cfg.step_length * std::sin(angle), cfg.height);
        }
        frames.emplace_back(cfg.node_count, detail::proximity_links(pos, cfg.coverage_radius),
                            pos);
    }
    return frames;
}

/// Deterministically draws a connected source/sink pair, retrying up to
/// node_count^2 times.
inline EndpointPair pick_endpoints(const Network& net, std::uint64_t seed) {
    const int n = net.node_count();
    if (n < 2) throw ValidationError("endpoint selection needs at least two nodes");
    std::mt19937_64 rng(seed);
    const long trials = static_cast<long>(n) * n;
    for (long i = 0; i < trials; ++i) {
        int s = static_cast<int>(rng() % n);
        int t = static_cast<int>(rng() % n);
        if (s != t && connected(net, s, t)) return {s, t};
    }
    throw StructuralError("no connected endpoint pair found in " + std::to_string(trials) +
                          " draws");
}

/// Paper-scale and desk-scale presets.  Area, radius and step are calibrated
/// to the target mean degrees, not taken from measured instances.
inline std::optional<ManetConfig> manet_preset(std::string_view name) {
    ManetConfig c;
    if (name == "fig15") { // 300 nodes, mean degree ~17
        c.node_count = 300;
        c.coverage_radius = 145.0;
        c.step_length = 30.0;
        c.timeframes = 200;
    } else if (name == "fig17") { // 115 nodes
        c.node_count = 115;
        c.coverage_radius = 245.0;
        c.step_length = 30.0;
        c.timeframes = 300;
    } else if (name == "fig18") { // 120 nodes
        c.node_count = 120;
        c.coverage_radius = 240.0;
        c.step_length = 30.0;
        c.timeframes = 150;
    } else if (name == "desk40") { // 40 nodes, mean degree ~8
        c.node_count = 40;
        c.coverage_radius = 300.0;
        c.step_length = 40.0;
        c.timeframes = 30;
    } else {
        return std::nullopt;
    }
    return c;
}

/// Sample file: the network document wrapped with a metadata header, so the
/// network object itself stays exactly in the netmodel format.
inline std::string sample_to_json(const Network& net, const ManetConfig& cfg, int frame_index) {
    nlohmann::ordered_json meta;
    meta["seed"] = cfg.seed;
    meta["config"] = {{"nodes", cfg.node_count},   {"width", cfg.width},
                      {"height", cfg.height},      {"coverage_radius", cfg.coverage_radius},
                      {"step_length", cfg.step_length}, {"timeframes", cfg.timeframes}};
    meta["frame_index"] = frame_index;
    meta["rng_name"] = kRngName;
    nlohmann::ordered_json j;
    j["meta"] = std::move(meta);
    j["network"] = nlohmann::ordered_json::parse(save_network(net));
    return j.dump();
}

/// Accepts either a wrapped sample file or a bare network document.
inline Network network_from_document(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("network parse failure: ") + e.what());
    }
    if (j.is_object() && j.contains("network")) return load_network(j["network"].dump());
    return load_network(text);
}

} // namespace capro
