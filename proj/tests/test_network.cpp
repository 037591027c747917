#include <catch_amalgamated.hpp>

#include <random>

#include "capro/manet.hpp"
#include "capro/network.hpp"
#include "oracles.hpp"

using namespace capro;

TEST_CASE("smallest valid graph loads") {
    Network net = load_network(R"({"nodes": 2, "links": [[0,1]]})");
    CHECK(net.node_count() == 2);
    REQUIRE(net.links().size() == 1);
    CHECK(net.links()[0] == Link(0, 1));
}

TEST_CASE("self-loop is rejected with the offending element named") {
    try {
        load_network(R"({"nodes": 2, "links": [[0,0]]})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("[0,0]") != std::string::npos);
    }
}

TEST_CASE("duplicate link is rejected") {
    CHECK_THROWS_AS(load_network(R"({"nodes": 3, "links": [[0,1],[1,0]]})"), ValidationError);
}

TEST_CASE("dangling node id is rejected") {
    try {
        load_network(R"({"nodes": 2, "links": [[0,5]]})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("[0,5]") != std::string::npos);
    }
}

TEST_CASE("unknown fields are rejected") {
    CHECK_THROWS_AS(load_network(R"({"nodes": 2, "links": [], "weights": []})"), ValidationError);
}

TEST_CASE("parse failure reported") {
    CHECK_THROWS_AS(load_network("not json"), ValidationError);
}

TEST_CASE("diamond graph construction and canonical order") {
    Network net = load_network(R"({"nodes": 4, "links": [[1,3],[0,2],[2,3],[0,1]]})");
    CHECK(net.links() == std::vector<Link>{{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    CHECK(save_network(net) == R"({"nodes":4,"links":[[0,1],[0,2],[1,3],[2,3]]})");
}

TEST_CASE("round trip identity on random graphs") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 30; ++i) {
        Network net = oracles::random_connected_graph(rng, 8, 12);
        Network back = load_network(save_network(net));
        CHECK(back == net);
        CHECK(save_network(back) == save_network(net));
    }
}

TEST_CASE("round trip identity on MANET samples with positions") {
    ManetConfig cfg;
    cfg.node_count = 12;
    cfg.coverage_radius = 400;
    cfg.step_length = 25;
    cfg.timeframes = 4;
    cfg.seed = 99;
    for (const Network& net : generate_samples(cfg)) {
        Network back = load_network(save_network(net));
        CHECK(back == net);
    }
}

TEST_CASE("positions count must match nodes") {
    CHECK_THROWS_AS(load_network(R"({"nodes": 2, "links": [], "positions": [[0,0]]})"),
                    ValidationError);
}
