#pragma once
// Counter-based generator: value k of a stream is splitmix64's finalizer applied
// to key + k*golden, where key hashes (seed, stream, purpose). Streams are
// independent of evaluation order, so realizations can be drawn in any order.
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace mlcsc {

enum class Purpose : std::uint64_t { FilterSelection = 1, Cardinality = 2, Support = 3, Values = 4, Noise = 5 };

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    CounterRng(std::uint64_t seed, std::uint64_t stream, Purpose purpose)
        : key_(mix64(mix64(seed + kGolden) ^ mix64(stream * 0xD1B54A32D192ED03ull + static_cast<std::uint64_t>(purpose)))) {}

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }
    std::uint64_t counter() const { return counter_; }

    // [0,1) with 53 random bits
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // unbiased integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = n ? (~std::uint64_t{0} - (~std::uint64_t{0} % n)) : 0;
        std::uint64_t r;
        do r = next_u64();
        while (r >= limit);
        return r % n;
    }

    // inclusive range
    long uniform_int(long lo, long hi) { return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo) + 1)); }

    // Box-Muller; keeps the second variate
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 6.283185307179586 * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace mlcsc
