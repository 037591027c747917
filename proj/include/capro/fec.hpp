#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <cstdio>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "capro/errors.hpp"

namespace capro {

struct FecParams {
    int m = 20;        // source packets per block
    double der = 1e-5; // acceptable decoding error rate

    void validate() const {
        if (m < 1) throw ValidationError("FEC block must carry at least one source packet");
        if (!(der > 0.0 && der < 1.0)) throw ValidationError("DER must lie in (0,1)");
    }
};

struct LossRate {
    double p = 0.0;

    void validate() const {
        if (!(p >= 0.0 && p < 1.0)) throw ValidationError("loss rate must lie in [0,1)");
    }
};

inline constexpr int kFecBlockCap = 1'000'000;

/// Probability that fewer than M of N transmitted packets survive a random
/// loss rate p, i.e. the binomial upper tail P(losses >= N-M+1).
///
/// Terms are generated from n = N downward by the multiplicative recurrence in
/// log space and summed smallest-first, so neither factorials nor tiny tails
/// overflow or cancel.
inline double decoding_failure_prob(int block_size, int source_packets, LossRate loss) {
    const int N = block_size, M = source_packets;
    if (M < 1 || N < M) throw ValidationError("block size must be at least the source count");
    loss.validate();
    const double p = loss.p;
    if (p == 0.0) return 0.0;
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);

    // log C(N,n) p^n q^(N-n) for n = N, N-1, ..., N-M+1
    std::vector<double> logs;
    logs.reserve(M);
    double lt = N * log_p;
    logs.push_back(lt);
    for (int n = N; n > N - M + 1; --n) {
        lt += std::log(static_cast<double>(n)) - std::log(static_cast<double>(N - n + 1)) +
              log_q - log_p;
        logs.push_back(lt);
    }
    double lmax = *std::max_element(logs.begin(), logs.end());
    if (lmax == -std::numeric_limits<double>::infinity()) return 0.0;
    std::sort(logs.begin(), logs.end());
    double sum = 0.0;
    for (double l : logs) sum += std::exp(l - lmax);
    double delta = std::exp(lmax) * sum;
    return std::clamp(delta, 0.0, 1.0);
}

/// FEC_p: smallest block length N >= M whose decoding failure probability is
/// at most DER, found by scanning N upward.
inline int fec_block_size(LossRate loss, FecParams params) {
    params.validate();
    loss.validate();
    if (loss.p == 0.0) return params.m;
    // delta == DER counts as success; the relative slack keeps decimal-exact
    // boundaries (0.1^5 vs 1e-5) from flipping on representation error.
    const double limit = params.der * (1.0 + 1e-12);
    for (int n = params.m; n <= kFecBlockCap; ++n) {
        if (decoding_failure_prob(n, params.m, loss) <= limit) return n;
    }
    throw NumericError("FEC block size search exceeded cap of " +
                       std::to_string(kFecBlockCap) + " at loss rate " +
                       std::to_string(loss.p));
}

/// FEC_p / M, the sender's transmission rate increase factor.
inline double rate_increase_factor(LossRate loss, FecParams params) {
    return static_cast<double>(fec_block_size(loss, params)) / params.m;
}

/// Memoized fec_block_size for the hot path (many links sharing loads across
/// tolerance grids).  Pure function of its arguments, so caching is invisible.
inline int fec_block_size_cached(LossRate loss, FecParams params) {
    struct Key {
        std::uint64_t p_bits, der_bits;
        int m;
        bool operator==(const Key&) const = default;
    };
    struct Hash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = k.p_bits * 0x9e3779b97f4a7c15ULL;
            h ^= k.der_bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h ^= static_cast<std::uint64_t>(k.m) + (h << 6) + (h >> 2);
            return static_cast<std::size_t>(h);
        }
    };
    static std::mutex mu;
    static std::unordered_map<Key, int, Hash> cache;

    Key key{std::bit_cast<std::uint64_t>(loss.p), std::bit_cast<std::uint64_t>(params.der),
            params.m};
    {
        std::lock_guard lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    int n = fec_block_size(loss, params);
    std::lock_guard lock(mu);
    cache.emplace(key, n);
    return n;
}

/// CSV table of rate increase factors: rows p = 0.01..0.50 step 0.01,
/// columns M = 1..m_max, header "p,M=1,...".
inline std::string fec_table_csv(double der, int m_max) {
    if (m_max < 1) throw ValidationError("m-max must be positive");
    FecParams base{1, der};
    base.validate();
    std::string out = "p";
    for (int m = 1; m <= m_max; ++m) out += ",M=" + std::to_string(m);
    out += "\n";
    char buf[64];
    for (int pi = 1; pi <= 50; ++pi) {
        double p = pi / 100.0;
        std::snprintf(buf, sizeof buf, "%.2f", p);
        out += buf;
        for (int m = 1; m <= m_max; ++m) {
            double f = rate_increase_factor({p}, {m, der});
            std::snprintf(buf, sizeof buf, ",%.6g", f);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

} // namespace capro
