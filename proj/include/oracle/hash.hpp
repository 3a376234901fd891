#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace oracle {

// FNV-1a, 64-bit. Stable across platforms; used for fixture keys and
// manifest digests, not for anything adversarial.
class Fnv1a {
public:
    void update(std::string_view bytes) {
        for (unsigned char c : bytes) {
            h_ ^= c;
            h_ *= 1099511628211ULL;
        }
    }
    void update_byte(unsigned char c) {
        h_ ^= c;
        h_ *= 1099511628211ULL;
    }
    std::uint64_t value() const { return h_; }
    std::string hex() const;

private:
    std::uint64_t h_ = 1469598103934665603ULL;
};

std::string fnv1a_hex(std::string_view bytes);

}  // namespace oracle
