#pragma once

#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "capro/capillary.hpp"
#include "capro/errors.hpp"
#include "capro/fec.hpp"
#include "capro/manet.hpp"
#include "capro/network.hpp"
#include "capro/ror.hpp"

namespace capro {

/// The 15-value static-tolerance grid: 3.6% to 7.8% in steps of 0.3%.
inline std::vector<double> default_tolerance_grid() {
    std::vector<double> g;
    for (int k = 36; k <= 78; k += 3) g.push_back(k / 1000.0);
    return g;
}

struct ExperimentConfig {
    std::optional<ManetConfig> manet;
    std::vector<std::string> network_files;
    std::optional<EndpointPair> endpoints; // fixed endpoints for file samples
    int layer_min = 1;
    int layer_max = 10;
    std::vector<double> tolerances = default_tolerance_grid();
    FecParams fec{20, 1e-5};
    bool mode_short = true;
    bool mode_large = true;
    int sets = 1;
    std::uint64_t endpoint_seed = 1;
    int threads = 0; // 0 = hardware concurrency

    void validate() const {
        if (!manet && network_files.empty())
            throw ValidationError("experiment needs a manet config or a network file list");
        if (manet && !network_files.empty())
            throw ValidationError("manet config and network file list are mutually exclusive");
        if (layer_min < 1 || layer_max < layer_min)
            throw ValidationError("layer range must satisfy 1 <= min <= max");
        if (tolerances.empty()) throw ValidationError("tolerance grid must be nonempty");
        if (!mode_short && !mode_large) throw ValidationError("at least one mode is required");
        if (sets < 1) throw ValidationError("set count must be positive");
        fec.validate();
        for (double t : tolerances) StaticTolerance{t}.validate();
    }
};

inline ExperimentConfig experiment_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config parse failure: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        if (j.contains("manet")) {
            const auto& m = j["manet"];
            ManetConfig mc;
            if (m.contains("preset")) {
                auto p = manet_preset(m["preset"].get<std::string>());
                if (!p)
                    throw ValidationError("unknown manet preset \"" +
                                          m["preset"].get<std::string>() + "\"");
                mc = *p;
            }
            if (m.contains("nodes")) mc.node_count = m["nodes"].get<int>();
            if (m.contains("width")) mc.width = m["width"].get<double>();
            if (m.contains("height")) mc.height = m["height"].get<double>();
            if (m.contains("coverage_radius")) mc.coverage_radius = m["coverage_radius"].get<double>();
            if (m.contains("step_length")) mc.step_length = m["step_length"].get<double>();
            if (m.contains("timeframes")) mc.timeframes = m["timeframes"].get<int>();
            if (m.contains("seed")) mc.seed = m["seed"].get<std::uint64_t>();
            cfg.manet = mc;
        }
        if (j.contains("network_files"))
            cfg.network_files = j["network_files"].get<std::vector<std::string>>();
        if (j.contains("endpoints")) {
            auto e = j["endpoints"].get<std::vector<int>>();
            if (e.size() != 2) throw ValidationError("endpoints must be [source, sink]");
            cfg.endpoints = EndpointPair{e[0], e[1]};
        }
        if (j.contains("layers")) {
            auto r = j["layers"].get<std::vector<int>>();
            if (r.size() != 2) throw ValidationError("layers must be [min, max]");
            cfg.layer_min = r[0];
            cfg.layer_max = r[1];
        }
        if (j.contains("tolerances")) cfg.tolerances = j["tolerances"].get<std::vector<double>>();
        if (j.contains("fec")) {
            if (j["fec"].contains("m")) cfg.fec.m = j["fec"]["m"].get<int>();
            if (j["fec"].contains("der")) cfg.fec.der = j["fec"]["der"].get<double>();
        }
        if (j.contains("modes")) {
            cfg.mode_short = cfg.mode_large = false;
            for (const auto& m : j["modes"]) {
                std::string s = m.get<std::string>();
                if (s == "short")
                    cfg.mode_short = true;
                else if (s == "large")
                    cfg.mode_large = true;
                else
                    throw ValidationError("unknown mode \"" + s + "\"");
            }
        }
        if (j.contains("sets")) cfg.sets = j["sets"].get<int>();
        if (j.contains("endpoint_seed")) cfg.endpoint_seed = j["endpoint_seed"].get<std::uint64_t>();
        if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

struct SampleOutcome {
    bool ok = false;
    std::string error;
    // ror[layer - layer_min][tolerance index] -> {short, large}
    std::vector<std::vector<std::array<double, 2>>> ror;
    std::vector<LayerStats> stats; // per built layer
};

struct ExperimentResult {
    std::string ror_csv;
    std::string stats_csv;
    std::vector<SampleOutcome> samples;
    int dropped = 0;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline SampleOutcome evaluate_sample(const Network& net, const ExperimentConfig& cfg,
                                     std::uint64_t sample_index) {
    SampleOutcome out;
    try {
        EndpointPair ends = cfg.endpoints
                                ? *cfg.endpoints
                                : pick_endpoints(net, mix_seed(cfg.endpoint_seed, sample_index));
        CapillaryBuild build = build_layers(net, ends, cfg.layer_max);
        for (const LayerRecord& rec : build.layers) out.stats.push_back(rec.stats);
        for (int layer = cfg.layer_min; layer <= cfg.layer_max; ++layer) {
            RoutingPattern pat = pattern_at(build, layer);
            std::vector<std::array<double, 2>> row;
            row.reserve(cfg.tolerances.size());
            for (double t : cfg.tolerances) {
                std::array<double, 2> v{0.0, 0.0};
                if (cfg.mode_short) v[0] = ror_short_buffer(pat, {t}, cfg.fec).ror;
                if (cfg.mode_large) v[1] = ror_large_blocks(pat, {t}).ror;
                row.push_back(v);
            }
            out.ror.push_back(std::move(row));
        }
        out.ok = true;
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace detail

/// Sweeps layers x tolerances x samples and aggregates per-set mean ROR plus
/// per-layer hunting statistics.  Samples are evaluated in parallel; the
/// reduction is ordered by sample index, so outputs are deterministic.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    std::vector<Network> nets;
    if (cfg.manet) {
        nets = generate_samples(*cfg.manet);
    } else {
        for (const std::string& path : cfg.network_files) {
            std::ifstream in(path);
            if (!in) throw ValidationError("cannot open network file " + path);
            std::stringstream ss;
            ss << in.rdbuf();
            nets.push_back(network_from_document(ss.str()));
        }
    }
    const int n = static_cast<int>(nets.size());

    ExperimentResult result;
    result.samples.resize(n);
    {
        unsigned hw = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                result.samples[i] =
                    detail::evaluate_sample(nets[i], cfg, static_cast<std::uint64_t>(i));
        };
        std::vector<std::thread> pool;
        for (unsigned w = 1; w < hw; ++w) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
    }
    for (const auto& s : result.samples)
        if (!s.ok) ++result.dropped;

    // Per-set means over the samples that succeeded at every layer in range.
    const int layers = cfg.layer_max - cfg.layer_min + 1;
    const int base = n / cfg.sets;
    std::string csv = "set,layer,t,mode,mean_ror,n_samples\n";
    char buf[64];
    for (int set = 0; set < cfg.sets; ++set) {
        int lo = set * base;
        int hi = (set == cfg.sets - 1) ? n : lo + base;
        for (int li = 0; li < layers; ++li) {
            for (std::size_t ti = 0; ti < cfg.tolerances.size(); ++ti) {
                for (int mode = 0; mode < 2; ++mode) {
                    if (mode == 0 && !cfg.mode_short) continue;
                    if (mode == 1 && !cfg.mode_large) continue;
                    double sum = 0.0;
                    int count = 0;
                    for (int i = lo; i < hi; ++i) {
                        if (!result.samples[i].ok) continue;
                        sum += result.samples[i].ror[li][ti][mode];
                        ++count;
                    }
                    std::snprintf(buf, sizeof buf, "%d,%d,%.3f,%s,", set + 1,
                                  cfg.layer_min + li, cfg.tolerances[ti],
                                  mode == 0 ? "short" : "large");
                    csv += buf;
                    csv += count > 0 ? detail::format_double(sum / count) : "nan";
                    csv += "," + std::to_string(count) + "\n";
                }
            }
        }
    }
    result.ror_csv = std::move(csv);

    std::string stats = "layer,mean_iterations,mean_bottlenecks,n_samples\n";
    for (int layer = 1; layer <= cfg.layer_max; ++layer) {
        double iters = 0.0, bns = 0.0;
        int count = 0;
        for (const auto& s : result.samples) {
            if (!s.ok || static_cast<int>(s.stats.size()) < layer) continue;
            iters += s.stats[layer - 1].hunt_iterations;
            bns += s.stats[layer - 1].bottleneck_count;
            ++count;
        }
        if (count == 0) continue;
        stats += std::to_string(layer) + "," + detail::format_double(iters / count) + "," +
                 detail::format_double(bns / count) + "," + std::to_string(count) + "\n";
    }
    result.stats_csv = std::move(stats);
    return result;
}

} // namespace capro
