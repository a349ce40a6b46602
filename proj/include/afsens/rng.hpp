#ifndef AFSENS_RNG_HPP
#define AFSENS_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace afsens {

// Deterministic random stream. Uniform variates are produced from raw engine
// bits instead of std::uniform_real_distribution, so sequences are identical
// across standard library implementations. Substreams are derived from
// (master seed, index), which keeps replicate results independent of how work
// is scheduled across threads.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : eng_(mix(seed)) {}

    static RngStream substream(std::uint64_t master_seed, std::uint64_t index) {
        return RngStream(mix(master_seed) + 0x9e3779b97f4a7c15ULL * (index + 1));
    }

    std::uint64_t next_bits() { return eng_(); }

    // uniform on [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // uniform integer in [0, n), n >= 1, by rejection
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = n * (UINT64_MAX / n);
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

  private:
    // splitmix64 finalizer, decorrelates nearby seeds
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 eng_;
};

} // namespace afsens

#endif
