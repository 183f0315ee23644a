#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "beets/router.hpp"

using namespace beets;

namespace {

Value s(const char* v) { return Value(std::string(v)); }
Value i(int v) { return Value(static_cast<std::int16_t>(v)); }
Value F() { return Value(Formal{}); }

RouteRule rule(const std::string& id, const std::string& from, Pattern p,
               const std::string& to, RouteRule::Mode mode = RouteRule::Copy,
               int priority = 0) {
    RouteRule r;
    r.id = id;
    r.from_space = from;
    r.pattern = std::move(p);
    r.to_space = to;
    r.mode = mode;
    r.priority = priority;
    return r;
}

}  // namespace

TEST_CASE("first match wins by priority then id") {
    Router router;
    router.add_rule(rule("b-late", "ble", {s("SENSOR"), F()}, "udp", RouteRule::Copy, 5));
    router.add_rule(rule("a-early", "ble", {s("SENSOR"), F()}, "wifi", RouteRule::Move, 1));
    router.add_rule(rule("a-tie", "ble", {s("SENSOR"), F()}, "zig", RouteRule::Copy, 1));

    auto d = router.apply_routes({s("SENSOR"), i(1)}, "ble", 0);
    REQUIRE(d.size() == 1);
    CHECK(d[0].to_space == "wifi");  // priority 1, id "a-early" < "a-tie"
    CHECK(d[0].mode == RouteRule::Move);
}

TEST_CASE("no rule matches means no decision") {
    Router router;
    router.add_rule(rule("r", "ble", {s("SENSOR"), F()}, "udp"));
    CHECK(router.apply_routes({s("OTHER"), i(1)}, "ble", 0).empty());
    CHECK(router.apply_routes({s("SENSOR"), i(1)}, "udp", 0).empty());  // wrong source
    CHECK(router.apply_routes({s("SENSOR")}, "ble", 0).empty());        // wrong arity
}

TEST_CASE("transform rewrites the tuple") {
    Router router;
    RouteRule r = rule("xf", "ble", {s("SENSOR"), F()}, "udp");
    r.transform = {Expr::parse("'RELAYED'"), Expr::parse("t[2] * 2")};
    router.add_rule(r);
    auto d = router.apply_routes({s("SENSOR"), i(21)}, "ble", 0);
    REQUIRE(d.size() == 1);
    CHECK(d[0].tuple == Tuple{s("RELAYED"), i(42)});
}

TEST_CASE("transform errors drop the decision and log") {
    Router router;
    std::vector<std::string> log;
    router.set_log([&](const std::string& line) { log.push_back(line); });
    RouteRule r = rule("bad", "ble", {s("X")}, "udp");
    r.transform = {Expr::parse("t[3]")};  // out of range for arity 1
    router.add_rule(r);
    CHECK(router.apply_routes({s("X")}, "ble", 0).empty());
    REQUIRE(log.size() == 1);
    CHECK(log[0].find("bad") != std::string::npos);
}

TEST_CASE("rules are mutable at runtime") {
    Router router;
    router.add_rule(rule("one", "ble", {F()}, "udp"));
    CHECK_THROWS_WITH(router.add_rule(rule("one", "udp", {F()}, "ble")),
                      "duplicate rule id 'one'");
    router.add_rule(rule("two", "udp", {F()}, "ble"));
    CHECK(router.list_rules().size() == 2);
    router.remove_rule("one");
    CHECK(router.list_rules().size() == 1);
    CHECK_THROWS_WITH(router.remove_rule("one"), "no such rule");
    CHECK(router.apply_routes({s("X")}, "ble", 0).empty());
}

TEST_CASE("a route must connect two different spaces") {
    Router router;
    CHECK_THROWS(router.add_rule(rule("loop", "ble", {F()}, "ble")));
}

TEST_CASE("parse_rule from a JSON document") {
    RouteRule r = Router::parse_rule(R"({
        "id": "up",
        "from": "ble",
        "pattern": ["SENSOR", "?", 7],
        "to": "udp",
        "mode": "move",
        "priority": 3,
        "transform": ["t[1]", "t[3] + 1"]
    })");
    CHECK(r.id == "up");
    CHECK(r.mode == RouteRule::Move);
    CHECK(r.priority == 3);
    REQUIRE(r.pattern.size() == 3);
    CHECK(std::holds_alternative<Formal>(r.pattern[1]));
    CHECK(r.pattern[2] == i(7));
    CHECK(r.transform.size() == 2);
    CHECK_THROWS((void)Router::parse_rule(R"({"id": "x", "from": "a", "to": "b", "pattern": [], "mode": "copy"})"));
    CHECK_THROWS((void)Router::parse_rule(R"({"id": "x", "from": "a", "to": "b", "pattern": ["?"], "mode": "teleport"})"));
}
