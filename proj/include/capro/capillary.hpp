#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "capro/errors.hpp"
#include "capro/lp.hpp"
#include "capro/network.hpp"

namespace capro {

inline constexpr double kEpsLoad = 1e-6; // "maximally loaded" threshold
inline constexpr double kEpsZero = 1e-9; // coefficient termination threshold

/// Bounded multi-source/multi-sink problem of one capillary layer: the node
/// set, the links not yet pinned in earlier bottlenecks, and the per-node
/// flow-out coefficients.
struct LayerProblem {
    int layer = 1;
    int node_count = 0;
    std::vector<Link> links;
    std::vector<double> flow_out; // size node_count; sums to ~0

    bool drained() const {
        for (double f : flow_out)
            if (std::abs(f) >= kEpsZero) return false;
        return true;
    }
};

/// Per-link arc flows, oriented along the stored link (a -> b is fwd).
struct ArcFlows {
    std::vector<double> fwd, rev;

    double load(int k) const { return fwd[k] + rev[k]; }
};

struct LayerFlow {
    double factor = 0.0; // F^l
    ArcFlows flows;
};

struct HuntResult {
    std::vector<int> bottlenecks; // indices into LayerProblem::links
    ArcFlows flows;               // flows at the final hunting optimum
    int iterations = 0;
    std::vector<int> suspect_counts; // suspects at the start of each iteration
};

struct LayerStats {
    double factor = 0.0;
    int bottleneck_count = 0;
    int hunt_iterations = 0;
    std::vector<int> suspect_counts;
};

namespace detail {

inline void check_component_balance(const LayerProblem& p) {
    // Union-find over links; a component with unbalanced coefficients cannot
    // route any positive flow.
    std::vector<int> parent(p.node_count);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const Link& l : p.links) parent[find(l.a)] = find(l.b);
    std::vector<double> net(p.node_count, 0.0);
    for (int i = 0; i < p.node_count; ++i) net[find(i)] += p.flow_out[i];
    for (int i = 0; i < p.node_count; ++i) {
        if (find(i) == i && std::abs(net[i]) > kEpsZero * 10) {
            std::string members;
            for (int j = 0; j < p.node_count; ++j)
                if (find(j) == i) members += (members.empty() ? "" : ",") + std::to_string(j);
            throw StructuralError("component {" + members +
                                  "} has unbalanced flow-out coefficients (net " +
                                  std::to_string(net[i]) + "); no flow is routable");
        }
    }
}

// Conservation rows shared by all layer LPs:
//   sum_out(i) - sum_in(i) = flow_out[i] * F   for every node i.
// When factor_var < 0, F is the fixed constant `factor` instead of a variable.
inline void add_conservation(lp::LinearProgram& prog, const LayerProblem& p, int factor_var,
                             double factor) {
    const int nl = static_cast<int>(p.links.size());
    std::vector<lp::Constraint> rows(p.node_count);
    for (int k = 0; k < nl; ++k) {
        const Link& l = p.links[k];
        rows[l.a].terms.push_back({2 * k, 1.0});      // fwd leaves a
        rows[l.a].terms.push_back({2 * k + 1, -1.0}); // rev enters a
        rows[l.b].terms.push_back({2 * k, -1.0});
        rows[l.b].terms.push_back({2 * k + 1, 1.0});
    }
    for (int i = 0; i < p.node_count; ++i) {
        rows[i].rel = lp::Relation::eq;
        if (factor_var >= 0) {
            rows[i].terms.push_back({factor_var, -p.flow_out[i]});
            rows[i].rhs = 0.0;
        } else {
            rows[i].rhs = p.flow_out[i] * factor;
        }
        if (!rows[i].terms.empty() || std::abs(rows[i].rhs) > 0.0)
            prog.constraints.push_back(std::move(rows[i]));
    }
}

inline void add_capacities(lp::LinearProgram& prog, const LayerProblem& p) {
    for (int k = 0; k < static_cast<int>(p.links.size()); ++k) {
        lp::Constraint c;
        c.terms = {{2 * k, 1.0}, {2 * k + 1, 1.0}};
        c.rel = lp::Relation::le;
        c.rhs = 1.0;
        prog.constraints.push_back(std::move(c));
    }
}

inline ArcFlows extract_flows(const lp::Solution& sol, int link_count) {
    ArcFlows f;
    f.fwd.resize(link_count);
    f.rev.resize(link_count);
    for (int k = 0; k < link_count; ++k) {
        f.fwd[k] = std::max(0.0, sol.values[2 * k]);
        f.rev[k] = std::max(0.0, sol.values[2 * k + 1]);
    }
    return f;
}

inline void raise_lp_failure(lp::Status st, const std::string& what) {
    switch (st) {
        case lp::Status::infeasible:
            throw StructuralError(what + ": infeasible");
        case lp::Status::unbounded:
            throw NumericError(what + ": unbounded");
        default:
            throw NumericError(what + ": numeric breakdown in LP solve");
    }
}

} // namespace detail

inline LayerProblem initial_problem(const Network& net, EndpointPair ends) {
    if (ends.source == ends.sink || ends.source < 0 || ends.sink < 0 ||
        ends.source >= net.node_count() || ends.sink >= net.node_count())
        throw ValidationError("endpoints must be two distinct node ids of the network");
    LayerProblem p;
    p.layer = 1;
    p.node_count = net.node_count();
    p.links = net.links();
    p.flow_out.assign(net.node_count(), 0.0);
    p.flow_out[ends.source] = 1.0;
    p.flow_out[ends.sink] = -1.0;
    return p;
}

/// Max-flow LP of one layer: maximize the common increase factor F subject to
/// unit link capacities and proportional conservation at every node.
inline LayerFlow maximize_flow(const LayerProblem& p) {
    detail::check_component_balance(p);
    const int nl = static_cast<int>(p.links.size());
    lp::LinearProgram prog;
    for (int k = 0; k < 2 * nl; ++k) prog.add_variable(0.0);
    int fvar = prog.add_variable(0.0);
    detail::add_capacities(prog, p);
    detail::add_conservation(prog, p, fvar, 0.0);
    prog.maximize = true;
    prog.objective = {{fvar, 1.0}};

    lp::Solution sol = lp::solve(prog);
    if (sol.status != lp::Status::optimal)
        detail::raise_lp_failure(sol.status, "layer " + std::to_string(p.layer) + " max-flow");
    LayerFlow lf;
    lf.factor = sol.values[fvar];
    lf.flows = detail::extract_flows(sol, nl);
    return lf;
}

/// Bottleneck hunting loop: repeatedly minimize the summed load over the
/// suspect links with F fixed, discarding suspects that fail to stay at full
/// load, until an iteration discards nothing.
inline HuntResult hunt_bottlenecks(const LayerProblem& p, double factor,
                                   std::vector<int> suspects) {
    const int nl = static_cast<int>(p.links.size());
    HuntResult out;
    while (true) {
        out.suspect_counts.push_back(static_cast<int>(suspects.size()));
        ++out.iterations;

        lp::LinearProgram prog;
        for (int k = 0; k < 2 * nl; ++k) prog.add_variable(0.0);
        detail::add_capacities(prog, p);
        detail::add_conservation(prog, p, -1, factor);
        prog.maximize = false;
        for (int k : suspects) {
            prog.objective.push_back({2 * k, 1.0});
            prog.objective.push_back({2 * k + 1, 1.0});
        }
        lp::Solution sol = lp::solve(prog);
        if (sol.status != lp::Status::optimal)
            detail::raise_lp_failure(sol.status,
                                     "layer " + std::to_string(p.layer) + " bottleneck hunt");
        ArcFlows flows = detail::extract_flows(sol, nl);

        std::vector<int> kept;
        for (int k : suspects)
            if (flows.load(k) >= 1.0 - kEpsLoad) kept.push_back(k);
        bool done = kept.size() == suspects.size();
        out.flows = std::move(flows);
        suspects = std::move(kept);
        if (done) break;
    }
    out.bottlenecks = std::move(suspects);
    return out;
}

/// Eq-style layer-to-layer update: drop the bottlenecks, rescale the old
/// coefficients by F and adjust the ends of each removed bottleneck by +-1
/// according to its flow direction at the hunted optimum.
inline LayerProblem next_layer(const LayerProblem& p, double factor, const HuntResult& hunt) {
    if (hunt.bottlenecks.empty())
        throw NumericError("layer " + std::to_string(p.layer) + " produced no bottlenecks");
    std::vector<char> is_b(p.links.size(), 0);
    for (int k : hunt.bottlenecks) is_b[k] = 1;

    LayerProblem q;
    q.layer = p.layer + 1;
    q.node_count = p.node_count;
    for (int k = 0; k < static_cast<int>(p.links.size()); ++k)
        if (!is_b[k]) q.links.push_back(p.links[k]);
    q.flow_out.resize(p.node_count);
    for (int i = 0; i < p.node_count; ++i) q.flow_out[i] = p.flow_out[i] * factor;
    for (int k : hunt.bottlenecks) {
        const Link& l = p.links[k];
        bool forward = hunt.flows.fwd[k] >= hunt.flows.rev[k];
        int tail = forward ? l.a : l.b;
        int head = forward ? l.b : l.a;
        q.flow_out[head] += 1.0; // incoming bottleneck
        q.flow_out[tail] -= 1.0; // outgoing bottleneck
    }
    return q;
}

/// Min-cost routing of whatever flow remains once the layer cap is reached:
/// conservation with F = 1, unit capacities, minimize the total load.
inline ArcFlows complete_min_cost(const LayerProblem& p) {
    const int nl = static_cast<int>(p.links.size());
    if (p.drained()) {
        ArcFlows z;
        z.fwd.assign(nl, 0.0);
        z.rev.assign(nl, 0.0);
        return z;
    }
    detail::check_component_balance(p);
    lp::LinearProgram prog;
    for (int k = 0; k < 2 * nl; ++k) prog.add_variable(0.0);
    detail::add_capacities(prog, p);
    detail::add_conservation(prog, p, -1, 1.0);
    prog.maximize = false;
    for (int k = 0; k < 2 * nl; ++k) prog.objective.push_back({k, 1.0});
    lp::Solution sol = lp::solve(prog);
    if (sol.status != lp::Status::optimal)
        detail::raise_lp_failure(sol.status, "residual min-cost completion");
    return detail::extract_flows(sol, nl);
}

struct LayerRecord {
    LayerProblem problem; // the problem this layer solved
    double factor = 0.0;
    std::vector<int> bottlenecks;
    std::vector<char> forward; // direction per bottleneck: true = a -> b
    LayerStats stats;
};

struct CapillaryBuild {
    EndpointPair ends;
    int node_count = 0;
    std::vector<LayerRecord> layers;
    LayerProblem residual; // problem left after the last built layer
    bool exhausted = false;
};

/// One flow-carrying link of a finished routing pattern.  layer >= 1 marks the
/// bottleneck layer; layer == 0 marks residual (min-cost completed) links.
struct PatternLink {
    int from = 0;
    int to = 0;
    double load = 0.0;
    int layer = 0;
};

struct RoutingPattern {
    int source = 0;
    int sink = 0;
    std::vector<double> factors; // F^1..F^L
    std::vector<PatternLink> links;
};

inline CapillaryBuild build_layers(const Network& net, EndpointPair ends, int max_layers) {
    if (max_layers < 1) throw ValidationError("max_layers must be positive");
    if (!connected(net, ends.source, ends.sink))
        throw StructuralError("source " + std::to_string(ends.source) + " and sink " +
                              std::to_string(ends.sink) + " are not connected");
    CapillaryBuild build;
    build.ends = ends;
    build.node_count = net.node_count();

    LayerProblem p = initial_problem(net, ends);
    for (int l = 1; l <= max_layers; ++l) {
        if (p.drained()) break;
        LayerFlow lf = maximize_flow(p);
        if (lf.factor < 1.0 - kEpsLoad)
            throw NumericError("layer " + std::to_string(l) + " flow increase factor " +
                               std::to_string(lf.factor) +
                               " fell below 1; residual flow should always be routable");
        std::vector<int> suspects;
        for (int k = 0; k < static_cast<int>(p.links.size()); ++k)
            if (lf.flows.load(k) >= 1.0 - kEpsLoad) suspects.push_back(k);
        HuntResult hunt = hunt_bottlenecks(p, lf.factor, std::move(suspects));
        if (hunt.bottlenecks.empty())
            throw NumericError("layer " + std::to_string(l) + " hunting removed every suspect");

        LayerRecord rec;
        rec.problem = p;
        rec.factor = lf.factor;
        rec.bottlenecks = hunt.bottlenecks;
        for (int k : hunt.bottlenecks)
            rec.forward.push_back(hunt.flows.fwd[k] >= hunt.flows.rev[k] ? 1 : 0);
        rec.stats = {lf.factor, static_cast<int>(hunt.bottlenecks.size()), hunt.iterations,
                     hunt.suspect_counts};
        p = next_layer(p, lf.factor, hunt);
        build.layers.push_back(std::move(rec));
    }
    build.residual = std::move(p);
    build.exhausted = build.residual.drained();
    return build;
}

/// Reconstructs the real-load pattern using the first `layer_cap` layers of a
/// build, min-cost completing whatever flow the capped layers left over.
inline RoutingPattern pattern_at(const CapillaryBuild& build, int layer_cap) {
    if (layer_cap < 1) throw ValidationError("layer cap must be positive");
    const int used = std::min<int>(layer_cap, static_cast<int>(build.layers.size()));

    RoutingPattern pat;
    pat.source = build.ends.source;
    pat.sink = build.ends.sink;

    double cum = 1.0;
    for (int l = 0; l < used; ++l) {
        const LayerRecord& rec = build.layers[l];
        cum *= rec.factor;
        pat.factors.push_back(rec.factor);
        for (std::size_t bi = 0; bi < rec.bottlenecks.size(); ++bi) {
            const Link& link = rec.problem.links[rec.bottlenecks[bi]];
            PatternLink pl;
            pl.from = rec.forward[bi] ? link.a : link.b;
            pl.to = rec.forward[bi] ? link.b : link.a;
            pl.load = 1.0 / cum;
            pl.layer = l + 1;
            pat.links.push_back(pl);
        }
    }

    const LayerProblem& res =
        used < static_cast<int>(build.layers.size()) ? build.layers[used].problem : build.residual;
    if (!res.drained()) {
        ArcFlows flows = complete_min_cost(res);
        for (int k = 0; k < static_cast<int>(res.links.size()); ++k) {
            double load = flows.load(k);
            if (load <= 1e-12) continue;
            const Link& link = res.links[k];
            bool forward = flows.fwd[k] >= flows.rev[k];
            PatternLink pl;
            pl.from = forward ? link.a : link.b;
            pl.to = forward ? link.b : link.a;
            pl.load = load / cum;
            pl.layer = 0;
            pat.links.push_back(pl);
        }
    }
    return pat;
}

inline std::pair<RoutingPattern, std::vector<LayerStats>> build_capillary(const Network& net,
                                                                          EndpointPair ends,
                                                                          int max_layers) {
    CapillaryBuild build = build_layers(net, ends, max_layers);
    RoutingPattern pat = pattern_at(build, max_layers);
    std::vector<LayerStats> stats;
    for (const LayerRecord& rec : build.layers) stats.push_back(rec.stats);
    return {std::move(pat), std::move(stats)};
}

/// Net outflow of a node under the pattern's directed real loads; +1 at the
/// source, -1 at the sink and 0 elsewhere for a conserving pattern.
inline double net_outflow(const RoutingPattern& pat, int node) {
    double net = 0.0;
    for (const PatternLink& l : pat.links) {
        if (l.from == node) net += l.load;
        if (l.to == node) net -= l.load;
    }
    return net;
}

inline std::string pattern_to_json(const RoutingPattern& pat) {
    nlohmann::ordered_json j;
    j["source"] = pat.source;
    j["sink"] = pat.sink;
    j["factors"] = pat.factors;
    auto links = nlohmann::ordered_json::array();
    std::vector<PatternLink> sorted = pat.links;
    std::sort(sorted.begin(), sorted.end(), [](const PatternLink& x, const PatternLink& y) {
        return std::tie(x.layer, x.from, x.to) < std::tie(y.layer, y.from, y.to);
    });
    for (const PatternLink& l : sorted) {
        nlohmann::ordered_json e;
        e["i"] = l.from;
        e["j"] = l.to;
        e["load"] = l.load;
        if (l.layer > 0)
            e["layer"] = l.layer;
        else
            e["layer"] = "residual";
        links.push_back(std::move(e));
    }
    j["links"] = std::move(links);
    return j.dump();
}

inline RoutingPattern pattern_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("pattern parse failure: ") + e.what());
    }
    RoutingPattern pat;
    try {
        pat.source = j.at("source").get<int>();
        pat.sink = j.at("sink").get<int>();
        pat.factors = j.at("factors").get<std::vector<double>>();
        for (const auto& e : j.at("links")) {
            PatternLink l;
            l.from = e.at("i").get<int>();
            l.to = e.at("j").get<int>();
            l.load = e.at("load").get<double>();
            l.layer = e.at("layer").is_string() ? 0 : e.at("layer").get<int>();
            pat.links.push_back(l);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed pattern document: ") + e.what());
    }
    return pat;
}

} // namespace capro
