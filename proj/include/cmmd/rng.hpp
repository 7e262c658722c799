#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cmmd {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Derives an independent sub-seed from a master seed, a textual label and
/// optional indices. Labeled derivation keeps randomness stable when the
/// order of consumption changes (e.g. parallel replications).
template <typename... Idx>
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, Idx... idx) {
    std::uint64_t h = detail::splitmix64(master ^ detail::fnv1a(label));
    ((h = detail::splitmix64(h ^ static_cast<std::uint64_t>(idx))), ...);
    return h;
}

/// Seeded RNG stream. Thin wrapper over mt19937_64 with the distributions
/// the library needs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(detail::splitmix64(seed)) {}

    template <typename... Idx>
    Rng(std::uint64_t master, std::string_view label, Idx... idx)
        : Rng(derive_seed(master, label, idx...)) {}

    double normal() { return normal_(gen_); }
    double uniform() { return uniform_(gen_); }  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double exponential(double rate) {
        // inverse-CDF; avoids log(0)
        double u = uniform();
        return -std::log1p(-u) / rate;
    }
    std::uint64_t next_u64() { return gen_(); }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace cmmd
