#include "beets/codec.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace beets {

namespace {

constexpr std::uint8_t kTagFormal = 0b00;
constexpr std::uint8_t kTagStr = 0b01;
constexpr std::uint8_t kTagInt16 = 0b10;
constexpr std::uint8_t kTagFloat32 = 0b11;

bool valid_opcode(std::uint8_t code) {
    switch (static_cast<Opcode>(code)) {
        case Opcode::IAMHERE:
        case Opcode::WHEREIS:
        case Opcode::OUT:
        case Opcode::INP:
        case Opcode::RD:
        case Opcode::TEST:
        case Opcode::TUPLE:
            return true;
    }
    return false;
}

std::uint32_t float_bits(float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    return u;
}

float bits_float(std::uint32_t u) {
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

}  // namespace

const char* opcode_name(Opcode op) {
    switch (op) {
        case Opcode::IAMHERE: return "IAMHERE";
        case Opcode::WHEREIS: return "WHEREIS";
        case Opcode::OUT:     return "OUT";
        case Opcode::INP:     return "INP";
        case Opcode::RD:      return "RD";
        case Opcode::TEST:    return "TEST";
        case Opcode::TUPLE:   return "TUPLE";
    }
    return "?";
}

bool parse_opcode(const std::string& name, Opcode& out) {
    for (Opcode op : {Opcode::IAMHERE, Opcode::WHEREIS, Opcode::OUT, Opcode::INP,
                      Opcode::RD, Opcode::TEST, Opcode::TUPLE}) {
        if (name == opcode_name(op)) {
            out = op;
            return true;
        }
    }
    return false;
}

Value classify_value(double n) {
    if (!std::isfinite(n)) throw std::runtime_error("unrepresentable number");
    if (n == std::floor(n) && n >= -32768.0 && n <= 32767.0)
        return Value(static_cast<std::int16_t>(n));
    return Value(static_cast<float>(n));
}

std::uint8_t derive_signature(const Tuple& t) {
    std::uint8_t sig = 0;
    for (std::size_t i = 0; i < t.size() && i < 4; ++i)
        sig |= static_cast<std::uint8_t>(t[i].index()) << (6 - 2 * i);
    return sig;
}

std::vector<std::uint8_t> encode_message(const WireMessage& m, std::size_t limit) {
    if (m.tuple.empty() || m.tuple.size() > 4)
        throw std::runtime_error("bad arity");
    if (m.seq > 3) throw std::runtime_error("bad seq");
    std::vector<std::uint8_t> out;
    out.push_back(static_cast<std::uint8_t>(
        (static_cast<std::uint8_t>(m.op) << 4) |
        ((static_cast<std::uint8_t>(m.tuple.size()) - 1) << 2) | m.seq));
    out.push_back(derive_signature(m.tuple));
    for (const Value& v : m.tuple) {
        switch (v.index()) {
            case 0:
                break;  // formal: no payload
            case 1: {
                const std::string& s = std::get<std::string>(v);
                for (char c : s)
                    if (static_cast<unsigned char>(c) > 127)
                        throw std::runtime_error("non-7bit string");
                if (s.empty()) {
                    out.push_back(0x80);  // terminator with char code 0
                } else {
                    for (std::size_t i = 0; i + 1 < s.size(); ++i)
                        out.push_back(static_cast<std::uint8_t>(s[i]));
                    out.push_back(static_cast<std::uint8_t>(s.back()) | 0x80);
                }
                break;
            }
            case 2: {
                std::uint16_t u = static_cast<std::uint16_t>(std::get<std::int16_t>(v));
                out.push_back(static_cast<std::uint8_t>(u >> 8));
                out.push_back(static_cast<std::uint8_t>(u & 0xFF));
                break;
            }
            case 3: {
                std::uint32_t u = float_bits(std::get<float>(v));
                out.push_back(static_cast<std::uint8_t>(u >> 24));
                out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
                out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
                out.push_back(static_cast<std::uint8_t>(u & 0xFF));
                break;
            }
        }
    }
    if (out.size() > limit) throw std::runtime_error("oversize message");
    return out;
}

WireMessage decode_message(const std::vector<std::uint8_t>& b) {
    if (b.size() < 2) throw std::runtime_error("truncated payload");
    std::uint8_t opcode = b[0] >> 4;
    if (!valid_opcode(opcode)) throw std::runtime_error("bad opcode");
    WireMessage m;
    m.op = static_cast<Opcode>(opcode);
    std::size_t arity = ((b[0] >> 2) & 0x3) + 1;
    m.seq = b[0] & 0x3;
    std::uint8_t sig = b[1];
    std::size_t pos = 2;
    for (std::size_t i = 0; i < arity; ++i) {
        std::uint8_t tag = (sig >> (6 - 2 * i)) & 0x3;
        switch (tag) {
            case kTagFormal:
                m.tuple.emplace_back(Formal{});
                break;
            case kTagStr: {
                std::string s;
                bool done = false;
                while (pos < b.size()) {
                    std::uint8_t c = b[pos++];
                    if (c & 0x80) {
                        if ((c & 0x7F) != 0 || !s.empty())
                            s.push_back(static_cast<char>(c & 0x7F));
                        done = true;
                        break;
                    }
                    s.push_back(static_cast<char>(c));
                }
                if (!done) throw std::runtime_error("unterminated string");
                m.tuple.emplace_back(std::move(s));
                break;
            }
            case kTagInt16: {
                if (pos + 2 > b.size()) throw std::runtime_error("truncated payload");
                std::uint16_t u = static_cast<std::uint16_t>((b[pos] << 8) | b[pos + 1]);
                pos += 2;
                m.tuple.emplace_back(static_cast<std::int16_t>(u));
                break;
            }
            case kTagFloat32: {
                if (pos + 4 > b.size()) throw std::runtime_error("truncated payload");
                std::uint32_t u = (static_cast<std::uint32_t>(b[pos]) << 24) |
                                  (static_cast<std::uint32_t>(b[pos + 1]) << 16) |
                                  (static_cast<std::uint32_t>(b[pos + 2]) << 8) |
                                  static_cast<std::uint32_t>(b[pos + 3]);
                pos += 4;
                m.tuple.emplace_back(bits_float(u));
                break;
            }
        }
    }
    // Trailing bytes (zero padding from the BLE uuid fields) are ignored.
    return m;
}

std::string ascii85_encode(const std::vector<std::uint8_t>& b) {
    std::string out;
    for (std::size_t i = 0; i < b.size(); i += 4) {
        std::size_t k = std::min<std::size_t>(4, b.size() - i);
        std::uint32_t v = 0;
        for (std::size_t j = 0; j < 4; ++j)
            v = (v << 8) | (j < k ? b[i + j] : 0);
        char digits[5];
        for (int j = 4; j >= 0; --j) {
            digits[j] = static_cast<char>('!' + v % 85);
            v /= 85;
        }
        out.append(digits, k + 1);
    }
    return out;
}

std::vector<std::uint8_t> ascii85_decode(const std::string& s) {
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < s.size(); i += 5) {
        std::size_t k = std::min<std::size_t>(5, s.size() - i);
        if (k == 1) throw std::runtime_error("bad ascii85 length");
        std::uint64_t v = 0;
        for (std::size_t j = 0; j < 5; ++j) {
            char c = j < k ? s[i + j] : 'u';  // pad with max digit
            if (c < '!' || c > 'u') throw std::runtime_error("bad ascii85 char");
            v = v * 85 + static_cast<std::uint64_t>(c - '!');
        }
        if (v > 0xFFFFFFFFull) throw std::runtime_error("bad ascii85 group");
        for (std::size_t j = 0; j < k - 1; ++j)
            out.push_back(static_cast<std::uint8_t>((v >> (24 - 8 * j)) & 0xFF));
    }
    return out;
}

BleAdvPayload ble_pack(const std::vector<std::uint8_t>& b) {
    if (b.size() > kBleLimit) throw std::runtime_error("oversize message");
    BleAdvPayload p;
    std::size_t head = std::min<std::size_t>(14, b.size());
    for (std::size_t i = 0; i < head; ++i) {
        if (i % 2 == 0)
            p.uuids[i / 2] = static_cast<std::uint16_t>(b[i] << 8);
        else
            p.uuids[i / 2] |= b[i];
    }
    if (b.size() > 14)
        p.local_name = ascii85_encode(
            std::vector<std::uint8_t>(b.begin() + 14, b.end()));
    return p;
}

std::vector<std::uint8_t> ble_unpack(const BleAdvPayload& p) {
    std::vector<std::uint8_t> out;
    out.reserve(14 + p.local_name.size());
    for (std::uint16_t u : p.uuids) {
        out.push_back(static_cast<std::uint8_t>(u >> 8));
        out.push_back(static_cast<std::uint8_t>(u & 0xFF));
    }
    std::vector<std::uint8_t> tail = ascii85_decode(p.local_name);
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
}

bool value_equal(const Value& a, const Value& b) {
    if (a.index() == b.index()) return a == b;
    // numeric cross-type comparison via Float32 promotion
    auto as_float = [](const Value& v, float& f) {
        if (std::holds_alternative<std::int16_t>(v)) {
            f = static_cast<float>(std::get<std::int16_t>(v));
            return true;
        }
        if (std::holds_alternative<float>(v)) {
            f = std::get<float>(v);
            return true;
        }
        return false;
    };
    float fa, fb;
    return as_float(a, fa) && as_float(b, fb) && fa == fb;
}

std::string value_to_string(const Value& v) {
    switch (v.index()) {
        case 0: return "?";
        case 1: return "'" + std::get<std::string>(v) + "'";
        case 2: return std::to_string(std::get<std::int16_t>(v));
        default: {
            std::ostringstream os;
            os << std::get<float>(v);
            return os.str();
        }
    }
}

std::string tuple_to_string(const Tuple& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) s += ",";
        s += value_to_string(t[i]);
    }
    return s + ")";
}

}  // namespace beets
