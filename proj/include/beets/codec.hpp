#ifndef BEETS_CODEC_HPP
#define BEETS_CODEC_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace beets {

// Wildcard tuple element ("formal parameter").
struct Formal {
    bool operator==(const Formal&) const = default;
};

// Variant index order matches the 2-bit wire type tags:
// 00 formal, 01 string, 10 int16, 11 float32.
using Value = std::variant<Formal, std::string, std::int16_t, float>;
using Tuple = std::vector<Value>;

// A pattern is a tuple where Formal matches anything.
using Pattern = Tuple;

enum class Opcode : std::uint8_t {
    IAMHERE = 0b0000,
    WHEREIS = 0b0001,
    OUT     = 0b0100,
    INP     = 0b0101,
    RD      = 0b0110,
    TEST    = 0b0111,
    TUPLE   = 0b1000,
};

const char* opcode_name(Opcode op);
bool parse_opcode(const std::string& name, Opcode& out);

struct WireMessage {
    Opcode op{Opcode::OUT};
    std::uint8_t seq{0};   // 0..3
    Tuple tuple;           // arity 1..4

    bool operator==(const WireMessage&) const = default;
};

struct BleAdvPayload {
    std::uint16_t uuids[7]{};
    std::string local_name;  // ASCII85, empty when the message fits in the uuids
};

inline constexpr std::size_t kBleLimit = 32;
inline constexpr std::size_t kUdpLimit = 512;

// Int16 if integral and in range, else Float32. Throws on NaN/inf.
Value classify_value(double n);

// One byte, TT1 in bits 7-6 down to TT4 in bits 1-0; unused slots 00.
std::uint8_t derive_signature(const Tuple& t);

std::vector<std::uint8_t> encode_message(const WireMessage& m, std::size_t limit);
WireMessage decode_message(const std::vector<std::uint8_t>& b);

// Plain base-85, alphabet '!'..'u', no 'z' shorthand, no framing.
std::string ascii85_encode(const std::vector<std::uint8_t>& b);
std::vector<std::uint8_t> ascii85_decode(const std::string& s);

BleAdvPayload ble_pack(const std::vector<std::uint8_t>& b);
std::vector<std::uint8_t> ble_unpack(const BleAdvPayload& p);

// Equality used by pattern matching: strings exact, numbers compared
// after promoting Int16 to Float32.
bool value_equal(const Value& a, const Value& b);

std::string value_to_string(const Value& v);
std::string tuple_to_string(const Tuple& t);

}  // namespace beets

#endif
