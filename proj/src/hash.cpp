#include "udt/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace udt::hash {

static constexpr char kHexDigits[] = "0123456789abcdef";

std::string hex64(uint64_t v) {
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = kHexDigits[v & 0xf];
        v >>= 4;
    }
    return out;
}

uint64_t parse_hex64(std::string_view s) {
    if (s.size() != 16) {
        throw std::invalid_argument("hex64: expected 16 hex chars");
    }
    uint64_t v = 0;
    for (char c : s) {
        v <<= 4;
        if (c >= '0' && c <= '9') {
            v |= static_cast<uint64_t>(c - '0');
        } else if (c >= 'a' && c <= 'f') {
            v |= static_cast<uint64_t>(c - 'a' + 10);
        } else {
            throw std::invalid_argument("hex64: invalid digit");
        }
    }
    return v;
}

std::string sha256_trunc128_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len < 16) {
        throw std::runtime_error("sha256 digest failed");
    }
    std::string out(32, '0');
    for (size_t i = 0; i < 16; ++i) {
        out[2 * i] = kHexDigits[digest[i] >> 4];
        out[2 * i + 1] = kHexDigits[digest[i] & 0xf];
    }
    return out;
}

}  // namespace udt::hash
