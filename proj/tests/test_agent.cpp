#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "beets/agent.hpp"

using namespace beets;

namespace {

struct RecordingHost : AgentHost {
    std::vector<std::pair<std::string, Tuple>> outs, notifies;
    std::vector<std::string> logs;
    void agent_out(const std::string& space, const Tuple& t, std::int64_t) override {
        outs.emplace_back(space, t);
    }
    void agent_notify(const std::string& space, const Tuple& t, std::int64_t) override {
        notifies.emplace_back(space, t);
    }
    void agent_log(const std::string& line) override { logs.push_back(line); }
};

AgentEvent ts_event(const std::string& space, Tuple t, const std::string& from = "peer",
                    double rssi = -40, std::int64_t time = 0) {
    AgentEvent ev;
    ev.cls = AgentEvent::Ts;
    ev.space = space;
    ev.tuple = std::move(t);
    ev.from = from;
    ev.rssi = rssi;
    ev.time = time;
    return ev;
}

Value s(const char* v) { return Value(std::string(v)); }
Value i(int v) { return Value(static_cast<std::int16_t>(v)); }

}  // namespace

TEST_CASE("expression basics") {
    ExprEnv env;
    env.vars["x"] = Scalar(4.0);
    env.vars["name"] = Scalar(std::string("hi"));
    Tuple t{s("SENSOR"), i(10)};
    env.tuple = &t;
    CHECK(Expr::parse("1 + 2 * 3").eval(env) == Scalar(7.0));
    CHECK(Expr::parse("(1 + 2) * 3").eval(env) == Scalar(9.0));
    CHECK(Expr::parse("abs(0 - x)").eval(env) == Scalar(4.0));
    CHECK(Expr::parse("-x").eval(env) == Scalar(-4.0));
    CHECK(Expr::parse("t[1]").eval(env) == Scalar(std::string("SENSOR")));
    CHECK(Expr::parse("t[2] / 2").eval(env) == Scalar(5.0));
    CHECK(Expr::parse("name == 'hi'").eval(env) == Scalar(true));
    CHECK(Expr::parse("x > 3 and x < 5").eval(env) == Scalar(true));
    CHECK(Expr::parse("not (x == 4)").eval(env) == Scalar(false));
    CHECK(Expr::parse("x != 4 or t[2] >= 10").eval(env) == Scalar(true));
}

TEST_CASE("expression errors") {
    ExprEnv env;
    CHECK_THROWS((void)Expr::parse("1 +"));
    CHECK_THROWS((void)Expr::parse("t[0]").eval(env));      // 1-based
    CHECK_THROWS((void)Expr::parse("nosuch").eval(env));
    CHECK_THROWS((void)Expr::parse("1 / 0").eval(env));
}

TEST_CASE("agent document parse errors carry a path") {
    CHECK_THROWS((void)parse_agent("not json"));
    CHECK_THROWS_WITH((void)parse_agent(R"js({"rules": []})js"),
                      "agent needs a non-empty 'name'");
    CHECK_THROWS((void)parse_agent(R"js({"name": "a"})js"));
    try {
        (void)parse_agent(R"js({"name": "a", "rules": [{"on": "ts.ble:()"}]})js");
        FAIL("expected parse error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("rules[0]") != std::string::npos);
    }
}

TEST_CASE("ts rule fires with tuple access and consume") {
    RecordingHost host;
    AgentInstance a(parse_agent(R"js({
        "name": "echo",
        "rules": [{
            "on": "ts.ble:(PING,?)",
            "do": [{"type": "out", "space": "ble", "tuple": ["'PONG'", "t[2]"]}],
            "consume": true
        }]
    })js"),
                    host);
    a.start(0);
    auto res = a.dispatch_event(ts_event("ble", {s("PING"), i(3)}));
    CHECK(res.consumed);
    REQUIRE(host.outs.size() == 1);
    CHECK(host.outs[0].first == "ble");
    CHECK(host.outs[0].second == Tuple{s("PONG"), i(3)});
    // wrong space: no match, not consumed
    CHECK(!a.dispatch_event(ts_event("udp", {s("PING"), i(3)})).consumed);
    // wrong head: no match
    CHECK(!a.dispatch_event(ts_event("ble", {s("PANG"), i(3)})).consumed);
}

TEST_CASE("conditions gate rules, rssi and from are in scope") {
    RecordingHost host;
    AgentInstance a(parse_agent(R"js({
        "name": "near",
        "rules": [{
            "on": "ts.ble:(HELLO,?)",
            "if": "rssi > -50",
            "do": [{"type": "log", "tuple": ["from"]}]
        }]
    })js"),
                    host);
    a.start(0);
    a.dispatch_event(ts_event("ble", {s("HELLO"), i(1)}, "close-peer", -40));
    a.dispatch_event(ts_event("ble", {s("HELLO"), i(1)}, "far-peer", -90));
    REQUIRE(host.logs.size() == 1);
    CHECK(host.logs[0] == "near: close-peer");
}

TEST_CASE("init fires exactly once") {
    RecordingHost host;
    AgentInstance a(parse_agent(R"js({
        "name": "boot",
        "rules": [{"on": "init", "do": [{"type": "log", "tuple": ["'up'"]}]}]
    })js"),
                    host);
    a.start(5);
    a.start(6);  // idempotent
    AgentEvent ev;
    ev.cls = AgentEvent::Init;
    a.dispatch_event(ev);  // replayed init event is ignored after start
    CHECK(host.logs.size() == 1);
}

TEST_CASE("timer fires exactly period-aligned on the simulated clock") {
    RecordingHost host;
    AgentInstance a(parse_agent(R"js({
        "name": "clock",
        "vars": {"ticks": 0},
        "rules": [{"on": 1000, "do": [{"type": "set", "var": "ticks", "expr": "ticks + 1"}]}]
    })js"),
                    host);
    a.start(0);
    for (std::int64_t t = 0; t <= 5000; t += 50) a.tick(t);
    CHECK(a.vars().at("ticks") == Scalar(5.0));
    // a long stall catches the timer up
    a.tick(8000);
    CHECK(a.vars().at("ticks") == Scalar(8.0));
}

TEST_CASE("sensor selector with inline condition") {
    RecordingHost host;
    AgentInstance a(parse_agent(R"js({
        "name": "light",
        "rules": [{
            "on": "sensor.light: abs(sensor - sensor0) > 10",
            "do": [{"type": "out", "space": "ble", "tuple": ["'SENSOR'", "'LIGHT'", "sensor"]}]
        }]
    })js"),
                    host);
    a.start(0);
    AgentEvent ev;
    ev.cls = AgentEvent::Sensor;
    ev.sensor_name = "light";
    ev.sensor = 500;
    ev.sensor0 = 495;
    a.dispatch_event(ev);
    CHECK(host.outs.empty());
    ev.sensor = 520;
    a.dispatch_event(ev);
    REQUIRE(host.outs.size() == 1);
    CHECK(host.outs[0].second[2] == i(520));
}

TEST_CASE("an eval error skips only the offending rule") {
    RecordingHost host;
    AgentInstance a(parse_agent(R"js({
        "name": "mixed",
        "rules": [
            {"on": "ts.ble:(GO)", "do": [{"type": "out", "space": "ble", "tuple": ["t[4]"]}]},
            {"on": "ts.ble:(GO)", "do": [{"type": "log", "tuple": ["'fine'"]}]}
        ]
    })js"),
                    host);
    a.start(0);
    a.dispatch_event(ts_event("ble", {s("GO")}));
    CHECK(host.outs.empty());
    REQUIRE(host.logs.size() == 2);  // the error line, then the good rule
    CHECK(host.logs[1] == "mixed: fine");
}

TEST_CASE("serialize then parse preserves vars and rules") {
    RecordingHost host;
    AgentInstance a(parse_agent(R"js({
        "name": "counter",
        "vars": {"n": 0, "label": "x"},
        "rules": [{"on": "ts.ble:(INC,?)", "do": [{"type": "set", "var": "n", "expr": "n + t[2]"}], "consume": true}]
    })js"),
                    host);
    a.start(0);
    a.dispatch_event(ts_event("ble", {s("INC"), i(4)}));
    CHECK(a.vars().at("n") == Scalar(4.0));

    AgentDefinition def2 = parse_agent(a.serialize());
    CHECK(def2.name == "counter");
    CHECK(def2.vars.at("n") == Scalar(4.0));  // current value travels along
    CHECK(def2.vars.at("label") == Scalar(std::string("x")));
    REQUIRE(def2.rules.size() == 1);

    AgentInstance b(std::move(def2), host);
    b.start(0);
    b.dispatch_event(ts_event("ble", {s("INC"), i(6)}));
    CHECK(b.vars().at("n") == Scalar(10.0));
}

TEST_CASE("consume can be an expression") {
    RecordingHost host;
    AgentInstance a(parse_agent(R"js({
        "name": "picky",
        "rules": [{"on": "ts.ble:(V,?)", "do": [], "consume": "t[2] > 5"}]
    })js"),
                    host);
    a.start(0);
    CHECK(!a.dispatch_event(ts_event("ble", {s("V"), i(3)})).consumed);
    CHECK(a.dispatch_event(ts_event("ble", {s("V"), i(9)})).consumed);
}
