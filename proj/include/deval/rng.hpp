#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace deval {

// FNV-1a; the stable hash used everywhere a seed or digest must be
// reproducible across platforms and runs.
inline std::uint64_t fnv1a64_bytes(const void* data, std::size_t len,
                                   std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64_bytes(s.data(), s.size(), h);
}

inline std::string to_hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

// Deterministic uniform sampler on top of the standardized mt19937_64
// stream. std::uniform_real_distribution is implementation-defined, so the
// mapping from raw 64-bit draws to doubles is done by hand here: identical
// seeds give identical samples on every platform.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    int uniform_int(int lo, int hi) { // inclusive bounds
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(eng_() % span);
    }

    double sign() { return (eng_() & 1) ? 1.0 : -1.0; }

    bool chance(double p) { return uniform01() < p; }

private:
    std::mt19937_64 eng_;
};

} // namespace deval
