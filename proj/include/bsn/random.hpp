#pragma once
// Seeded random streams. One scenario owns a base seed; each consumer
// (field sampling, walk noise, flip noise, initialization, replication i)
// derives its own independent stream, so any component is reproducible in
// isolation and replications can run in parallel.
//
// Draws avoid std:: distributions on purpose: engine output is standardized,
// distribution algorithms are not, and output files must be reproducible.

#include <cstdint>
#include <cmath>
#include <random>
#include <string_view>

namespace bsn {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace detail

// A named, derivable stream of random draws.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(detail::splitmix64(seed)) {}

    // Independent child stream identified by (tag, index).
    Rng derive(std::string_view tag, std::uint64_t index = 0) const {
        std::uint64_t h = detail::fnv1a64(tag);
        h = detail::splitmix64(h ^ detail::splitmix64(seed_ + 0x632be59bd9b4e019ull * (index + 1)));
        return Rng(h);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via polar Box-Muller; second draw cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace bsn
