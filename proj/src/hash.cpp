#include "oracle/hash.hpp"

#include <array>

namespace oracle {

std::string Fnv1a::hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t v = h_;
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::string fnv1a_hex(std::string_view bytes) {
    Fnv1a h;
    h.update(bytes);
    return h.hex();
}

}  // namespace oracle
