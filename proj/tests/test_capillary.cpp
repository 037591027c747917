#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "capro/capillary.hpp"
#include "capro/network.hpp"
#include "oracles.hpp"

using namespace capro;

namespace {

Network diamond() { return Network(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}); }
Network path3() { return Network(3, {{0, 1}, {1, 2}}); }
Network diamond_with_chord() { return Network(4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}}); }

} // namespace

TEST_CASE("diamond layer 1: factor 2, all links saturated") {
    LayerProblem p = initial_problem(diamond(), {0, 3});
    LayerFlow lf = maximize_flow(p);
    CHECK_THAT(lf.factor, Catch::Matchers::WithinAbs(2.0, 1e-7));
    for (int k = 0; k < 4; ++k)
        CHECK_THAT(lf.flows.load(k), Catch::Matchers::WithinAbs(1.0, 1e-6));
    // net outflow at each node equals f_i * F
    for (int i : {0, 3}) {
        double net = 0.0;
        for (int k = 0; k < 4; ++k) {
            const Link& l = p.links[k];
            if (l.a == i) net += lf.flows.fwd[k] - lf.flows.rev[k];
            if (l.b == i) net += lf.flows.rev[k] - lf.flows.fwd[k];
        }
        CHECK_THAT(net, Catch::Matchers::WithinAbs(p.flow_out[i] * lf.factor, 1e-6));
    }
}

TEST_CASE("path layer 1: factor 1") {
    LayerProblem p = initial_problem(path3(), {0, 2});
    LayerFlow lf = maximize_flow(p);
    CHECK_THAT(lf.factor, Catch::Matchers::WithinAbs(1.0, 1e-7));
    CHECK_THAT(lf.flows.load(0), Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK_THAT(lf.flows.load(1), Catch::Matchers::WithinAbs(1.0, 1e-6));
}

TEST_CASE("disconnected source yields a structural error naming the component") {
    Network net(4, {{0, 1}, {2, 3}});
    LayerProblem p = initial_problem(net, {0, 3});
    try {
        maximize_flow(p);
        FAIL("expected StructuralError");
    } catch (const StructuralError& e) {
        CHECK(std::string(e.what()).find("component") != std::string::npos);
    }
}

TEST_CASE("diamond hunting keeps all four links in one iteration") {
    LayerProblem p = initial_problem(diamond(), {0, 3});
    LayerFlow lf = maximize_flow(p);
    std::vector<int> suspects;
    for (int k = 0; k < 4; ++k)
        if (lf.flows.load(k) >= 1.0 - kEpsLoad) suspects.push_back(k);
    HuntResult hunt = hunt_bottlenecks(p, lf.factor, suspects);
    CHECK(hunt.bottlenecks.size() == 4);
    CHECK(hunt.iterations == 1);
    CHECK(hunt.suspect_counts == std::vector<int>{4});
}

TEST_CASE("chord of the reinforced diamond is never a bottleneck") {
    Network net = diamond_with_chord();
    LayerProblem p = initial_problem(net, {0, 3});
    LayerFlow lf = maximize_flow(p);
    CHECK_THAT(lf.factor, Catch::Matchers::WithinAbs(2.0, 1e-7));
    std::vector<int> suspects;
    for (int k = 0; k < static_cast<int>(p.links.size()); ++k)
        if (lf.flows.load(k) >= 1.0 - kEpsLoad) suspects.push_back(k);
    HuntResult hunt = hunt_bottlenecks(p, lf.factor, suspects);
    std::vector<Link> bl;
    for (int k : hunt.bottlenecks) bl.push_back(p.links[k]);
    std::sort(bl.begin(), bl.end());
    CHECK(bl == std::vector<Link>{{0, 1}, {0, 2}, {1, 3}, {2, 3}});
}

TEST_CASE("next_layer coefficient arithmetic") {
    // sink with f=-1, F=2 and two incoming bottlenecks becomes 0;
    // a pure relay feeding one outgoing bottleneck becomes a sink.
    LayerProblem p;
    p.layer = 1;
    p.node_count = 4;
    p.links = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
    p.flow_out = {1.0, 0.0, 0.0, -1.0};
    HuntResult hunt;
    hunt.bottlenecks = {2, 3}; // links 1-3 and 2-3, flowing toward 3
    hunt.flows.fwd = {1, 1, 1, 1};
    hunt.flows.rev = {0, 0, 0, 0};
    LayerProblem q = next_layer(p, 2.0, hunt);
    CHECK(q.layer == 2);
    CHECK(q.links == std::vector<Link>{{0, 1}, {0, 2}});
    CHECK_THAT(q.flow_out[3], Catch::Matchers::WithinAbs(-1.0 * 2.0 + 2.0, 1e-12));
    CHECK_THAT(q.flow_out[1], Catch::Matchers::WithinAbs(-1.0, 1e-12)); // relay became a sink
    CHECK_THAT(q.flow_out[2], Catch::Matchers::WithinAbs(-1.0, 1e-12));
    CHECK_THAT(q.flow_out[0], Catch::Matchers::WithinAbs(2.0, 1e-12));
}

TEST_CASE("diamond terminates after one layer") {
    LayerProblem p = initial_problem(diamond(), {0, 3});
    LayerFlow lf = maximize_flow(p);
    std::vector<int> suspects{0, 1, 2, 3};
    HuntResult hunt = hunt_bottlenecks(p, lf.factor, suspects);
    LayerProblem q = next_layer(p, lf.factor, hunt);
    CHECK(q.drained());
}

TEST_CASE("min-cost completion of an all-zero residual is zero") {
    LayerProblem p;
    p.node_count = 3;
    p.links = {{0, 1}, {1, 2}};
    p.flow_out = {0.0, 0.0, 0.0};
    ArcFlows f = complete_min_cost(p);
    CHECK(f.load(0) == 0.0);
    CHECK(f.load(1) == 0.0);
}

TEST_CASE("min-cost completion routes a half unit along the only path") {
    LayerProblem p;
    p.node_count = 3;
    p.links = {{0, 1}, {1, 2}};
    p.flow_out = {0.5, 0.0, -0.5};
    ArcFlows f = complete_min_cost(p);
    CHECK_THAT(f.load(0), Catch::Matchers::WithinAbs(0.5, 1e-7));
    CHECK_THAT(f.load(1), Catch::Matchers::WithinAbs(0.5, 1e-7));
}

TEST_CASE("min-cost over two equal disjoint paths costs half the path length") {
    // 0-1-3 and 0-2-3, each of length 2, carrying 0.5 total
    LayerProblem p;
    p.node_count = 4;
    p.links = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
    p.flow_out = {0.5, 0.0, 0.0, -0.5};
    ArcFlows f = complete_min_cost(p);
    double total = 0.0;
    for (int k = 0; k < 4; ++k) total += f.load(k);
    CHECK_THAT(total, Catch::Matchers::WithinAbs(0.5 * 2, 1e-7));
}

TEST_CASE("infeasible residual reports a structural error") {
    LayerProblem p;
    p.node_count = 2;
    p.links = {};
    p.flow_out = {0.5, -0.5};
    CHECK_THROWS_AS(complete_min_cost(p), StructuralError);
}

TEST_CASE("diamond capillary pattern: one layer, four links at one half") {
    auto [pat, stats] = build_capillary(diamond(), {0, 3}, 10);
    REQUIRE(pat.factors.size() == 1);
    CHECK_THAT(pat.factors[0], Catch::Matchers::WithinAbs(2.0, 1e-7));
    REQUIRE(pat.links.size() == 4);
    for (const PatternLink& l : pat.links) {
        CHECK_THAT(l.load, Catch::Matchers::WithinAbs(0.5, 1e-6));
        CHECK(l.layer == 1);
    }
    CHECK_THAT(net_outflow(pat, 0), Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK_THAT(net_outflow(pat, 3), Catch::Matchers::WithinAbs(-1.0, 1e-6));
}

TEST_CASE("single path capillary pattern: loads of one") {
    auto [pat, stats] = build_capillary(path3(), {0, 2}, 10);
    REQUIRE(pat.factors.size() == 1);
    CHECK_THAT(pat.factors[0], Catch::Matchers::WithinAbs(1.0, 1e-7));
    for (const PatternLink& l : pat.links)
        CHECK_THAT(l.load, Catch::Matchers::WithinAbs(1.0, 1e-6));
}

TEST_CASE("disconnected endpoints rejected") {
    Network net(4, {{0, 1}, {2, 3}});
    CHECK_THROWS_AS(build_capillary(net, {0, 3}, 5), StructuralError);
}

TEST_CASE("layer-1 factor equals the min cut on random graphs") {
    std::mt19937_64 rng(1234);
    for (int i = 0; i < 20; ++i) {
        Network net = oracles::random_connected_graph(rng, 8, 12);
        EndpointPair ends{0, net.node_count() - 1};
        int cut = oracles::min_cut_bruteforce(net, ends.source, ends.sink);
        LayerFlow lf = maximize_flow(initial_problem(net, ends));
        CHECK_THAT(lf.factor, Catch::Matchers::WithinAbs(static_cast<double>(cut), 1e-6));
    }
}

TEST_CASE("structural invariants on random graphs") {
    std::mt19937_64 rng(777);
    for (int i = 0; i < 15; ++i) {
        Network net = oracles::random_connected_graph(rng, 9, 14);
        EndpointPair ends{0, net.node_count() - 1};
        auto [pat, stats] = build_capillary(net, ends, 10);

        double cum = 1.0;
        double prev_load = 2.0;
        for (std::size_t l = 0; l < pat.factors.size(); ++l) {
            CHECK(pat.factors[l] >= 1.0 - kEpsLoad);
            cum *= pat.factors[l];
            double layer_load = 1.0 / cum;
            CHECK(layer_load <= prev_load + kEpsLoad); // nonincreasing across layers
            prev_load = layer_load;
        }
        for (const PatternLink& l : pat.links) {
            CHECK(l.load > 0.0);
            CHECK(l.load <= 1.0 + kEpsLoad);
        }
        for (int node = 0; node < net.node_count(); ++node) {
            double expect = node == ends.source ? 1.0 : node == ends.sink ? -1.0 : 0.0;
            CHECK_THAT(net_outflow(pat, node), Catch::Matchers::WithinAbs(expect, 1e-6));
        }
        // each input link appears at most once in the pattern
        std::vector<Link> seen;
        for (const PatternLink& l : pat.links) seen.emplace_back(l.from, l.to);
        std::sort(seen.begin(), seen.end());
        CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    }
}

TEST_CASE("bottleneck minimality on random graphs") {
    std::mt19937_64 rng(4242);
    for (int i = 0; i < 8; ++i) {
        Network net = oracles::random_connected_graph(rng, 8, 12);
        EndpointPair ends{0, net.node_count() - 1};
        CapillaryBuild build = build_layers(net, ends, 6);
        for (const LayerRecord& rec : build.layers) {
            // re-minimize the summed load of the final bottleneck set
            HuntResult again = hunt_bottlenecks(rec.problem, rec.factor, rec.bottlenecks);
            double total = 0.0;
            for (int k : rec.bottlenecks) total += again.flows.load(k);
            CHECK_THAT(total, Catch::Matchers::WithinAbs(
                                  static_cast<double>(rec.bottlenecks.size()), 1e-6));
        }
    }
}

TEST_CASE("pattern JSON round trip") {
    auto [pat, stats] = build_capillary(diamond(), {0, 3}, 10);
    RoutingPattern back = pattern_from_json(pattern_to_json(pat));
    CHECK(back.source == pat.source);
    CHECK(back.sink == pat.sink);
    CHECK(back.factors == pat.factors);
    CHECK(back.links.size() == pat.links.size());
}

TEST_CASE("capped build leaves a residual completed at min cost") {
    // a diamond feeding the sink through a single critical link: layer 1 pins
    // the critical link, layer 2 capillarizes the diamond; capping at 1 layer
    // leaves the diamond flow to the min-cost completion
    Network net(5, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}});
    auto [pat_full, stats_full] = build_capillary(net, {0, 4}, 10);
    CHECK(pat_full.factors.size() == 2);
    auto [pat_capped, stats_capped] = build_capillary(net, {0, 4}, 1);
    CHECK(pat_capped.factors.size() == 1);
    bool has_residual = false;
    for (const PatternLink& l : pat_capped.links) has_residual |= (l.layer == 0);
    CHECK(has_residual);
    CHECK_THAT(net_outflow(pat_capped, 0), Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK_THAT(net_outflow(pat_capped, 4), Catch::Matchers::WithinAbs(-1.0, 1e-6));
    CHECK_THAT(net_outflow(pat_full, 0), Catch::Matchers::WithinAbs(1.0, 1e-6));
}
