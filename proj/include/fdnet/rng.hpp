#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace fdnet {

// Deterministic random source. All draws are derived from the raw mt19937_64
// stream by fixed arithmetic, so a seed pins every sample independently of
// the standard library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller; the second draw of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Uniform sign in {-1, +1}.
    int pm_one() { return (eng_() & 1u) ? 1 : -1; }

    // Uniform index in [0, n). Rejection sampling keeps it unbiased.
    std::size_t index(std::size_t n) {
        const std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = eng_();
        while (x >= bound) x = eng_();
        return static_cast<std::size_t>(x % n);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

  private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// Independent seed for a named sub-stream of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return detail::splitmix64(base ^ detail::splitmix64(stream + 0x51ED270B4A3Cull));
}

inline std::uint64_t hash_name(const char* s) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (; *s; ++s) h = (h ^ static_cast<unsigned char>(*s)) * 1099511628211ULL;
    return h;
}

}  // namespace fdnet
