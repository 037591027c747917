#include <catch_amalgamated.hpp>

#include <cmath>

#include "capro/capillary.hpp"
#include "capro/ror.hpp"
#include "oracles.hpp"

using namespace capro;

namespace {

RoutingPattern pattern_with_loads(std::vector<double> loads) {
    RoutingPattern pat;
    pat.source = 0;
    pat.sink = static_cast<int>(loads.size());
    pat.factors = {1.0};
    for (std::size_t i = 0; i < loads.size(); ++i)
        pat.links.push_back({static_cast<int>(i), static_cast<int>(i) + 1, loads[i], 1});
    return pat;
}

RoutingPattern diamond_pattern() {
    auto [pat, stats] =
        build_capillary(Network(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}), {0, 3}, 10);
    return pat;
}

} // namespace

TEST_CASE("five links at 25 percent overhead rate 1.25") {
    // large-block arithmetic: t = 0, r = 0.2 per link gives 1/(1-0.2)-1 = 25%
    RorReport rep = ror_large_blocks(pattern_with_loads({0.2, 0.2, 0.2, 0.2, 0.2}), {0.0});
    CHECK_THAT(rep.ror, Catch::Matchers::WithinAbs(1.25, 1e-12));
    CHECK(rep.contributions.size() == 5);
}

TEST_CASE("single-path pattern rates zero with every link excluded") {
    RorReport rep = ror_short_buffer(pattern_with_loads({1.0, 1.0, 1.0}), {0.05}, {20, 1e-5});
    CHECK(rep.ror == 0.0);
    CHECK(rep.contributions.empty());
    CHECK(rep.excluded.size() == 3);
    for (const auto& e : rep.excluded) CHECK(e.reason == ExclusionReason::entire_traffic);
}

TEST_CASE("diamond short-buffer rating against the scan oracle") {
    int fec_half = oracles::fec_scan_oracle(0.5, 20, 1e-5);
    int fec_t = oracles::fec_scan_oracle(0.05, 20, 1e-5);
    double expect = 4.0 * (static_cast<double>(fec_half) / fec_t - 1.0);
    RorReport rep = ror_short_buffer(diamond_pattern(), {0.05}, {20, 1e-5});
    CHECK_THAT(rep.ror, Catch::Matchers::WithinAbs(expect, 1e-9));
}

TEST_CASE("diamond large-block rating is 4") {
    RorReport rep = ror_large_blocks(diamond_pattern(), {0.0});
    CHECK_THAT(rep.ror, Catch::Matchers::WithinAbs(4.0, 1e-9));
}

TEST_CASE("full-traffic link is excluded from the large-block sum") {
    RorReport rep = ror_large_blocks(pattern_with_loads({1.0, 0.5, 0.5}), {0.0});
    CHECK_THAT(rep.ror, Catch::Matchers::WithinAbs(2.0, 1e-12));
    CHECK(rep.excluded.size() == 1);
}

TEST_CASE("single half-load link at t = 0.036") {
    RorReport rep = ror_large_blocks(pattern_with_loads({0.5}), {0.036});
    CHECK_THAT(rep.ror, Catch::Matchers::WithinAbs(0.964 / 0.5 - 1.0, 1e-12));
}

TEST_CASE("links at or below tolerance are excluded with reason") {
    RorReport rep = ror_large_blocks(pattern_with_loads({0.03, 0.5}), {0.05});
    CHECK(rep.contributions.size() == 1);
    REQUIRE(rep.excluded.size() == 1);
    CHECK(rep.excluded[0].reason == ExclusionReason::below_tolerance);
}

TEST_CASE("report covers every link exactly once and sums exactly") {
    RorReport rep = ror_short_buffer(pattern_with_loads({0.03, 0.2, 0.5, 1.0}), {0.05},
                                     {20, 1e-5});
    CHECK(rep.contributions.size() + rep.excluded.size() == 4);
    double sum = 0.0;
    for (const auto& c : rep.contributions) sum += c.overhead;
    CHECK_THAT(rep.ror, Catch::Matchers::WithinAbs(sum, 1e-9));
}

TEST_CASE("both ratings are nonincreasing in tolerance") {
    RoutingPattern pat = pattern_with_loads({0.1, 0.25, 0.4, 0.6});
    double prev_short = 1e30, prev_large = 1e30;
    for (int k = 36; k <= 78; k += 3) {
        double t = k / 1000.0;
        double s = ror_short_buffer(pat, {t}, {20, 1e-5}).ror;
        double l = ror_large_blocks(pat, {t}).ror;
        CHECK(s <= prev_short + 1e-12);
        CHECK(l <= prev_large + 1e-12);
        prev_short = s;
        prev_large = l;
    }
}

TEST_CASE("large-block rating never exceeds short-buffer rating on desk patterns") {
    for (auto loads : {std::vector<double>{0.5, 0.5, 0.5, 0.5},
                       std::vector<double>{0.2, 0.2, 0.2, 0.2, 0.2},
                       std::vector<double>{0.1, 0.3, 0.6}}) {
        RoutingPattern pat = pattern_with_loads(loads);
        for (double t : {0.0, 0.036, 0.078})
            CHECK(ror_large_blocks(pat, {t}).ror <=
                  ror_short_buffer(pat, {t}, {20, 1e-5}).ror + 1e-9);
    }
}

TEST_CASE("redundant packet volume") {
    CHECK(redundant_packet_volume({0.0, 50.0}, 1.25) == 0.0);
    CHECK_THAT(redundant_packet_volume({100.0, 50.0}, 1.25),
               Catch::Matchers::WithinAbs(6250.0, 1e-9));
    CHECK_THAT(redundant_packet_volume({200.0, 50.0}, 1.25),
               Catch::Matchers::WithinAbs(2 * 6250.0, 1e-9));
}

TEST_CASE("report JSON export") {
    RorReport rep = ror_large_blocks(pattern_with_loads({0.5, 1.0}), {0.0});
    std::string j = ror_report_to_json(rep);
    CHECK(j.find("\"mode\":\"large\"") != std::string::npos);
    CHECK(j.find("\"entire-traffic\"") != std::string::npos);
}

TEST_CASE("invalid tolerance rejected") {
    CHECK_THROWS_AS(ror_large_blocks(pattern_with_loads({0.5}), {1.0}), ValidationError);
    CHECK_THROWS_AS(ror_large_blocks(pattern_with_loads({0.5}), {-0.1}), ValidationError);
}
