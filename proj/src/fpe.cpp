#include "beets/fpe.hpp"

#include <openssl/sha.h>

#include <numeric>
#include <random>
#include <stdexcept>

namespace beets {

FpeTables derive_tables(const std::string& key) {
    if (key.empty()) throw std::runtime_error("empty key");

    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(key.data()), key.size(), digest);
    std::uint64_t seed = 0;
    for (int i = 0; i < 8; ++i) seed = (seed << 8) | digest[i];

    FpeTables t;
    std::iota(t.enc.begin(), t.enc.end(), 0);
    // mt19937_64 output is fully specified by the standard; the modulo
    // draw keeps the shuffle reproducible across library implementations.
    std::mt19937_64 rng(seed);
    for (int i = 255; i > 0; --i) {
        int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(t.enc[i], t.enc[j]);
    }
    for (int i = 0; i < 256; ++i) t.dec[t.enc[i]] = static_cast<std::uint8_t>(i);
    return t;
}

std::vector<std::uint8_t> fpe_encrypt(const FpeTables& t, const std::vector<std::uint8_t>& b) {
    std::vector<std::uint8_t> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = t.enc[b[i]];
    return out;
}

std::vector<std::uint8_t> fpe_decrypt(const FpeTables& t, const std::vector<std::uint8_t>& b) {
    std::vector<std::uint8_t> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = t.dec[b[i]];
    return out;
}

}  // namespace beets
