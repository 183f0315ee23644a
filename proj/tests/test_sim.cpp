#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "beets/sim.hpp"

using namespace beets;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

bool dirs_identical(const std::string& a, const std::string& b) {
    namespace fs = std::filesystem;
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename());
    for (const std::string& n : names)
        if (slurp(fs::path(a) / n) != slurp(fs::path(b) / n)) return false;
    return !names.empty();
}

}  // namespace

TEST_CASE("waypoint interpolation is piecewise linear and clamped") {
    std::vector<Waypoint> wps{{0, {0, 0}}, {1000, {10, 0}}, {2000, {10, 20}}};
    CHECK(position_at(wps, -5).x == 0);
    CHECK(position_at(wps, 500).x == doctest::Approx(5.0));
    CHECK(position_at(wps, 1500).y == doctest::Approx(10.0));
    CHECK(position_at(wps, 9999).y == 20);
}

TEST_CASE("builtin names resolve") {
    for (const char* name : {"fig2-sweep", "fig8-distance", "smart-building"}) {
        Scenario s = load_scenario(name);
        CHECK(s.name == name);
    }
    CHECK(load_scenario("fig2-sweep").mode == "fig2");
    CHECK(load_scenario("fig8-distance").mode == "fig8");
    Scenario sb = load_scenario("smart-building");
    CHECK(sb.nodes.size() == 9);  // server + 4 beacons + 4 mobiles
    CHECK(!sb.traffic.empty());
    CHECK_THROWS((void)builtin_scenario_doc("no-such"));
}

TEST_CASE("schema violations point at the field") {
    auto expect_path = [](const std::string& doc, const std::string& needle) {
        try {
            (void)load_scenario(doc);
            FAIL("expected error for ", needle);
        } catch (const std::exception& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_path(R"({"duration_ms": -1})", "duration_ms");
    expect_path(R"({"udp_drop_rate": 1.5})", "udp_drop_rate");
    expect_path(R"({"nodes": [{"kind": "beacon"}]})", "nodes[0]");
    expect_path(R"({"nodes": [{"id": "a", "position": [0, 0]},
                              {"id": "a", "position": [1, 0]}]})",
                "nodes[1].id");
    expect_path(R"({"nodes": [{"id": "a", "position": [0, 0]}],
                    "traffic": [{"node": "ghost", "tuple": ["1"]}]})",
                "traffic[0].node");
    CHECK_THROWS((void)load_scenario("{ not json"));
}

TEST_CASE("two-node event scenario delivers traffic") {
    Scenario s = load_scenario(R"({
        "name": "mini",
        "duration_ms": 20000,
        "seed": 3,
        "nodes": [
            {"id": "tx", "position": [0, 0]},
            {"id": "rx", "position": [3, 0]}
        ],
        "traffic": [
            {"node": "tx", "period_ms": 1000, "tuple": ["'SENSOR'", "'LIGHT'", "n"]}
        ]
    })");
    Metrics m = run_scenario(s);
    auto it = m.links.find({"tx", "rx"});
    REQUIRE(it != m.links.end());
    CHECK(it->second.sent >= 15);
    CHECK(it->second.received <= it->second.sent);
    CHECK(it->second.received > it->second.sent * 0.6);
    CHECK(!m.latencies_ms.empty());
    for (double l : m.latencies_ms) {
        CHECK(l >= 0);
        CHECK(l <= 500);
    }
    // the receiver's space filled up
    bool rx_nonempty = false;
    for (const auto& [t, node, space, count] : m.space_counts)
        if (node == "rx" && count > 0) rx_nonempty = true;
    CHECK(rx_nonempty);
}

TEST_CASE("udp drop rate thins udp links") {
    Scenario s = load_scenario(R"({
        "name": "drops",
        "duration_ms": 20000,
        "seed": 4,
        "udp_drop_rate": 0.5,
        "nodes": [
            {"id": "a", "position": [0, 0], "spaces": ["udp"]},
            {"id": "b", "position": [1, 0], "spaces": ["udp"]}
        ],
        "traffic": [
            {"node": "a", "space": "udp", "period_ms": 200, "tuple": ["'X'", "n"]}
        ]
    })");
    Metrics m = run_scenario(s);
    auto& st = m.udp_links.at({"a", "b"});
    CHECK(st.sent >= 90);
    double rate = double(st.received) / st.sent;
    CHECK(rate > 0.35);
    CHECK(rate < 0.65);
}

TEST_CASE("metrics files are emitted with stable headers") {
    Scenario s = load_scenario(R"({
        "name": "tiny",
        "duration_ms": 3000,
        "seed": 5,
        "nodes": [{"id": "a", "position": [0, 0]}, {"id": "b", "position": [1, 0]}],
        "traffic": [{"node": "a", "period_ms": 1000, "tuple": ["'T'", "n"]}]
    })");
    Metrics m = run_scenario(s);
    std::string dir = (std::filesystem::temp_directory_path() / "beets-sim-test").string();
    emit_metrics(m, dir);
    CHECK(slurp(dir + "/link_rates.csv").rfind("sender,receiver,sent,received,rate_pct", 0) == 0);
    CHECK(slurp(dir + "/distance_bins.csv").rfind("bin_m,", 0) == 0);
    CHECK(slurp(dir + "/latencies.csv").rfind("latency_ms", 0) == 0);
    emit_metrics(Metrics{}, dir);  // empty metrics still writes headers
    CHECK(slurp(dir + "/link_rates.csv") == "sender,receiver,sent,received,rate_pct\n");
}

TEST_CASE("identical seeds give byte-identical outputs") {
    Scenario s = load_scenario("smart-building");
    s.duration_ms = 10000;
    namespace fs = std::filesystem;
    std::string d1 = (fs::temp_directory_path() / "beets-det-1").string();
    std::string d2 = (fs::temp_directory_path() / "beets-det-2").string();
    emit_metrics(run_scenario(s), d1);
    emit_metrics(run_scenario(s), d2);
    CHECK(dirs_identical(d1, d2));

    s.seed = 99;
    std::string d3 = (fs::temp_directory_path() / "beets-det-3").string();
    emit_metrics(run_scenario(s), d3);
    CHECK(!dirs_identical(d1, d3));
}
