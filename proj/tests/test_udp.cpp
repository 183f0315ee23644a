#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <thread>

#include "beets/rpc.hpp"
#include "beets/udp_backend.hpp"

using namespace beets;

namespace {

Value s(const char* v) { return Value(std::string(v)); }
Value i(int v) { return Value(static_cast<std::int16_t>(v)); }
Value F() { return Value(Formal{}); }

std::int64_t wall_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

UdpConfig cfg(std::uint16_t port, int repeats = 1) {
    UdpConfig c;
    c.port = port;
    c.broadcast_address = "127.255.255.255";  // loopback broadcast keeps the test hermetic
    c.repeats = repeats;
    return c;
}

// Ticks both rpc cores until the predicate holds or the deadline passes.
template <typename Pred>
bool spin(RpcCore& a, RpcCore& b, Pred done, std::int64_t budget_ms) {
    std::int64_t t0 = wall_ms();
    while (wall_ms() - t0 < budget_ms) {
        a.tick(wall_ms());
        b.tick(wall_ms());
        if (done()) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return done();
}

}  // namespace

TEST_CASE("repeats outside 1..8 are rejected") {
    UdpConfig c;
    c.repeats = 0;
    CHECK_THROWS((void)UdpBackend(c));
    c.repeats = 9;
    CHECK_THROWS((void)UdpBackend(c));
}

TEST_CASE("loopback broadcast out, store, rd, reply") {
    UdpBackend b1(cfg(15188)), b2(cfg(15188));
    b1.start();
    b2.start();
    TupleSpace s1("udp"), s2("udp");
    RpcCore r1(s1, b1, {.node_id = "n1"});
    RpcCore r2(s2, b2, {.node_id = "n2"});

    r1.submit_request(Opcode::OUT, {s("SENSOR"), i(42)}, {}, nullptr, wall_ms());
    CHECK(spin(r1, r2, [&] { return s2.size() == 1; }, 1000));
    CHECK(s1.size() == 0);  // own datagram filtered by source port

    // n2 holds the stored copy, so n1 asks and n2 answers
    std::optional<Tuple> got;
    std::int64_t asked = wall_ms();
    r1.submit_request(Opcode::RD, {s("SENSOR"), F()}, {},
                      [&](const std::optional<Tuple>& t,
                          const std::optional<ReceiveEnvelope>&) { got = t; },
                      asked);
    CHECK(spin(r1, r2, [&] { return got.has_value(); }, 1000));
    REQUIRE(got);
    CHECK((*got)[1] == i(42));
    CHECK(wall_ms() - asked < 200);

    b1.stop();
    b2.stop();
}

TEST_CASE("three repeats collapse to one stored tuple") {
    UdpBackend b1(cfg(15189, 3)), b2(cfg(15189, 3));
    b1.start();
    b2.start();
    TupleSpace s1("udp"), s2("udp");
    RpcCore r1(s1, b1, {.node_id = "n1"});
    RpcCore r2(s2, b2, {.node_id = "n2"});

    r1.submit_request(Opcode::OUT, {s("DUP"), i(1)}, {}, nullptr, wall_ms());
    CHECK(b1.last_send_count() == 3);
    spin(r1, r2, [&] { return r2.stats().received >= 3; }, 1000);
    CHECK(s2.size() == 1);
    CHECK(r2.stats().duplicates == 2);

    b1.stop();
    b2.stop();
}

TEST_CASE("oversize payloads are refused before hitting the socket") {
    UdpBackend b(cfg(15190));
    b.start();
    CHECK_THROWS_WITH(b.send(std::vector<std::uint8_t>(513)), "oversize message");
    b.stop();
}
