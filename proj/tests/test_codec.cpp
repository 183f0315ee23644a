#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "beets/codec.hpp"

using namespace beets;

namespace {

std::vector<std::uint8_t> bytes(std::initializer_list<int> l) {
    std::vector<std::uint8_t> v;
    for (int b : l) v.push_back(static_cast<std::uint8_t>(b));
    return v;
}

Tuple random_tuple(std::mt19937_64& rng, std::size_t max_payload) {
    std::uniform_int_distribution<int> arity_d(1, 4);
    Tuple t;
    int arity = arity_d(rng);
    for (int i = 0; i < arity; ++i) {
        switch (rng() % 4) {
            case 0:
                t.emplace_back(Formal{});
                break;
            case 1: {
                std::string s;
                std::size_t len = rng() % 6;
                for (std::size_t j = 0; j < len; ++j)
                    s.push_back(static_cast<char>('a' + rng() % 26));
                t.emplace_back(std::move(s));
                break;
            }
            case 2:
                t.emplace_back(static_cast<std::int16_t>(rng()));
                break;
            default: {
                float f;
                do {
                    std::uint32_t u = static_cast<std::uint32_t>(rng());
                    std::memcpy(&f, &u, 4);
                } while (!std::isfinite(f));
                t.emplace_back(f);
            }
        }
    }
    (void)max_payload;
    return t;
}

}  // namespace

TEST_CASE("opcode values") {
    CHECK(static_cast<int>(Opcode::IAMHERE) == 0b0000);
    CHECK(static_cast<int>(Opcode::WHEREIS) == 0b0001);
    CHECK(static_cast<int>(Opcode::OUT) == 0b0100);
    CHECK(static_cast<int>(Opcode::INP) == 0b0101);
    CHECK(static_cast<int>(Opcode::RD) == 0b0110);
    CHECK(static_cast<int>(Opcode::TEST) == 0b0111);
    CHECK(static_cast<int>(Opcode::TUPLE) == 0b1000);
}

TEST_CASE("signature layout") {
    Tuple t{Value(std::string("SENSOR")), Value(std::string("LIGHT")),
            Value(std::int16_t(1000))};
    CHECK(derive_signature(t) == 0x58);
    CHECK(derive_signature(Tuple{Value(Formal{})}) == 0x00);
    CHECK(derive_signature(Tuple{Value(1.5f)}) == 0xC0);
}

TEST_CASE("known encodings") {
    WireMessage m;
    m.op = Opcode::OUT;
    m.seq = 3;
    m.tuple = {Value(std::string("A")), Value(std::int16_t(5))};
    CHECK(encode_message(m, kUdpLimit) == bytes({0x47, 0x60, 0xC1, 0x00, 0x05}));

    WireMessage rd;
    rd.op = Opcode::RD;
    rd.seq = 0;
    rd.tuple = {Value(std::string("SENSOR")), Value(Formal{})};
    CHECK(encode_message(rd, kUdpLimit) ==
          bytes({0x64, 0x40, 0x53, 0x45, 0x4E, 0x53, 0x4F, 0xD2}));
}

TEST_CASE("decode ignores trailing padding") {
    WireMessage m;
    m.op = Opcode::OUT;
    m.seq = 1;
    m.tuple = {Value(std::string("HI")), Value(std::int16_t(-7))};
    auto b = encode_message(m, kUdpLimit);
    b.push_back(0);
    b.push_back(0);
    b.push_back(0);
    CHECK(decode_message(b) == m);
}

TEST_CASE("empty string wire form") {
    WireMessage m;
    m.op = Opcode::OUT;
    m.seq = 0;
    m.tuple = {Value(std::string(""))};
    auto b = encode_message(m, kUdpLimit);
    CHECK(b == bytes({0x40, 0x40, 0x80}));
    CHECK(decode_message(b) == m);
}

TEST_CASE("decode errors") {
    CHECK_THROWS_WITH(decode_message(bytes({0x40})), "truncated payload");
    CHECK_THROWS_WITH(decode_message(bytes({0x20, 0x00})), "bad opcode");
    CHECK_THROWS_WITH(decode_message(bytes({0x90, 0x00})), "bad opcode");
    // string element with no terminator byte
    CHECK_THROWS_WITH(decode_message(bytes({0x40, 0x40, 0x41})), "unterminated string");
    // int16 element cut short
    CHECK_THROWS_WITH(decode_message(bytes({0x40, 0x80, 0x01})), "truncated payload");
}

TEST_CASE("encode errors") {
    WireMessage m;
    m.op = Opcode::OUT;
    CHECK_THROWS_WITH((void)encode_message(m, kUdpLimit), "bad arity");
    m.tuple = {Value(std::string(33, 'x'))};
    CHECK_THROWS_WITH((void)encode_message(m, kBleLimit), "oversize message");
    CHECK_NOTHROW((void)encode_message(m, kUdpLimit));
}

TEST_CASE("classify_value") {
    CHECK(classify_value(5) == Value(std::int16_t(5)));
    CHECK(classify_value(-32768) == Value(std::int16_t(-32768)));
    CHECK(classify_value(32768) == Value(32768.0f));
    CHECK(classify_value(1.5) == Value(1.5f));
    CHECK_THROWS_WITH((void)classify_value(1.0 / 0.0), "unrepresentable number");
}

TEST_CASE("ascii85 known vectors") {
    CHECK(ascii85_encode(bytes({0x4D, 0x61, 0x6E, 0x20})) == "9jqo^");
    CHECK(ascii85_encode(bytes({0x00})) == "!!");
    CHECK(ascii85_decode("9jqo^") == bytes({0x4D, 0x61, 0x6E, 0x20}));
    CHECK(ascii85_decode("!!") == bytes({0x00}));
    CHECK(ascii85_decode("") == bytes({}));
}

TEST_CASE("ascii85 errors") {
    CHECK_THROWS_WITH((void)ascii85_decode("9jqo^!"), "bad ascii85 length");
    CHECK_THROWS_WITH((void)ascii85_decode("ab~c"), "bad ascii85 char");
}

TEST_CASE("ascii85 roundtrip") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        std::vector<std::uint8_t> b(rng() % 40);
        for (auto& c : b) c = static_cast<std::uint8_t>(rng());
        CHECK(ascii85_decode(ascii85_encode(b)) == b);
    }
}

TEST_CASE("ble packing example") {
    WireMessage m;
    m.op = Opcode::OUT;
    m.seq = 0;
    m.tuple = {Value(std::string("SENSOR")), Value(std::string("LIGHT")),
               Value(std::int16_t(1000))};
    auto b = encode_message(m, kBleLimit);
    BleAdvPayload p = ble_pack(b);
    CHECK(p.uuids[0] == 0x4858);
    CHECK(p.uuids[1] == 0x5345);
    CHECK(!p.local_name.empty());
    CHECK(decode_message(ble_unpack(p)) == m);
}

TEST_CASE("ble packing short message stays in uuids") {
    auto b = bytes({0x47, 0x60, 0xC1, 0x00, 0x05});
    BleAdvPayload p = ble_pack(b);
    CHECK(p.local_name.empty());
    CHECK(decode_message(ble_unpack(p)) == decode_message(b));
}

TEST_CASE("randomized wire roundtrip") {
    std::mt19937_64 rng(42);
    std::vector<Opcode> ops{Opcode::IAMHERE, Opcode::WHEREIS, Opcode::OUT,
                            Opcode::INP,     Opcode::RD,      Opcode::TEST,
                            Opcode::TUPLE};
    int done = 0;
    while (done < 2000) {
        WireMessage m;
        m.op = ops[rng() % ops.size()];
        m.seq = static_cast<std::uint8_t>(rng() % 4);
        m.tuple = random_tuple(rng, kBleLimit);
        std::vector<std::uint8_t> b;
        try {
            b = encode_message(m, kBleLimit);
        } catch (const std::exception&) {
            continue;  // over the BLE limit, not a roundtrip case
        }
        REQUIRE(decode_message(b) == m);
        REQUIRE(decode_message(ble_unpack(ble_pack(b))) == m);
        ++done;
    }
}

TEST_CASE("value equality promotes int16 to float32") {
    CHECK(value_equal(Value(std::int16_t(5)), Value(5.0f)));
    CHECK(!value_equal(Value(std::int16_t(5)), Value(5.5f)));
    CHECK(!value_equal(Value(std::string("5")), Value(std::int16_t(5))));
    CHECK(value_equal(Value(Formal{}), Value(Formal{})));
}
