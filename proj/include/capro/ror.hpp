#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "capro/capillary.hpp"
#include "capro/errors.hpp"
#include "capro/fec.hpp"

namespace capro {

struct StaticTolerance {
    double t = 0.0;

    void validate() const {
        if (!(t >= 0.0 && t < 1.0)) throw ValidationError("static tolerance must lie in [0,1)");
    }
};

struct TrafficVolume {
    double failure_seconds = 0.0; // D: total single-link failure time
    double packet_rate = 1.0;     // P: packets per second

    void validate() const {
        if (failure_seconds < 0.0) throw ValidationError("failure time must be nonnegative");
        if (!(packet_rate > 0.0)) throw ValidationError("packet rate must be positive");
    }
};

enum class RorMode { short_buffer, large_blocks };

struct RorContribution {
    int from = 0, to = 0;
    double load = 0.0;
    double overhead = 0.0;
};

enum class ExclusionReason { entire_traffic, below_tolerance };

struct RorExclusion {
    int from = 0, to = 0;
    double load = 0.0;
    ExclusionReason reason = ExclusionReason::entire_traffic;
};

struct RorReport {
    double ror = 0.0;
    RorMode mode = RorMode::short_buffer;
    double t = 0.0;
    std::vector<RorContribution> contributions;
    std::vector<RorExclusion> excluded;
};

namespace detail {

template <typename OverheadFn>
RorReport rate_pattern(const RoutingPattern& pat, StaticTolerance tol, RorMode mode,
                       OverheadFn&& overhead) {
    tol.validate();
    RorReport rep;
    rep.mode = mode;
    rep.t = tol.t;
    for (const PatternLink& l : pat.links) {
        if (l.load >= 1.0 - kEpsLoad) {
            rep.excluded.push_back({l.from, l.to, l.load, ExclusionReason::entire_traffic});
        } else if (l.load <= tol.t) {
            rep.excluded.push_back({l.from, l.to, l.load, ExclusionReason::below_tolerance});
        } else {
            double o = overhead(l.load);
            rep.contributions.push_back({l.from, l.to, l.load, o});
            rep.ror += o;
        }
    }
    return rep;
}

} // namespace detail

/// Short-playback-buffer ROR: each link failing entirely forces the sender
/// from FEC_t blocks up to FEC_r(l) blocks; the overhead is the relative rate
/// increase FEC_r / FEC_t - 1.  Links carrying the entire traffic are skipped.
inline RorReport ror_short_buffer(const RoutingPattern& pat, StaticTolerance tol,
                                  FecParams params) {
    params.validate();
    const int fec_t = fec_block_size_cached({tol.t}, params);
    return detail::rate_pattern(pat, tol, RorMode::short_buffer, [&](double r) {
        int fec_r = fec_block_size_cached({r}, params);
        return static_cast<double>(fec_r) / fec_t - 1.0;
    });
}

/// Large-block ROR under the FEC_p = M/(1-p) asymptotic: overhead per link is
/// (1-t)/(1-r(l)) - 1.
inline RorReport ror_large_blocks(const RoutingPattern& pat, StaticTolerance tol) {
    return detail::rate_pattern(pat, tol, RorMode::large_blocks,
                                [&](double r) { return (1.0 - tol.t) / (1.0 - r) - 1.0; });
}

/// D * P * ROR: the count of adaptive redundant packets the sender transmits
/// over the whole communication to ride out single-link failures.
inline double redundant_packet_volume(TrafficVolume vol, double ror) {
    vol.validate();
    if (ror < 0.0) throw ValidationError("ROR must be nonnegative");
    return vol.failure_seconds * vol.packet_rate * ror;
}

inline std::string ror_report_to_json(const RorReport& rep) {
    nlohmann::ordered_json j;
    j["ror"] = rep.ror;
    j["mode"] = rep.mode == RorMode::short_buffer ? "short" : "large";
    j["t"] = rep.t;
    auto contribs = nlohmann::ordered_json::array();
    for (const auto& c : rep.contributions)
        contribs.push_back({{"i", c.from}, {"j", c.to}, {"load", c.load}, {"overhead", c.overhead}});
    j["contributions"] = std::move(contribs);
    auto excl = nlohmann::ordered_json::array();
    for (const auto& e : rep.excluded)
        excl.push_back({{"i", e.from},
                        {"j", e.to},
                        {"load", e.load},
                        {"reason", e.reason == ExclusionReason::entire_traffic
                                       ? "entire-traffic"
                                       : "below-tolerance"}});
    j["excluded"] = std::move(excl);
    return j.dump();
}

} // namespace capro
