#ifndef BEETS_FPE_HPP
#define BEETS_FPE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace beets {

// Key-derived byte substitution tables. enc is a permutation of 0..255
// and dec its inverse, so encryption is length- and format-preserving.
struct FpeTables {
    std::array<std::uint8_t, 256> enc{};
    std::array<std::uint8_t, 256> dec{};
};

// Deterministic: SHA-256 of the key seeds a Fisher-Yates shuffle of the
// identity table. Same key, same tables, on any platform.
FpeTables derive_tables(const std::string& key);

std::vector<std::uint8_t> fpe_encrypt(const FpeTables& t, const std::vector<std::uint8_t>& b);
std::vector<std::uint8_t> fpe_decrypt(const FpeTables& t, const std::vector<std::uint8_t>& b);

}  // namespace beets

#endif
