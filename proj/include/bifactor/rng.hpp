#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace bifactor {

// Mixing function used to derive independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seeded generator for one (seed, stream) pair.  All randomized operations in
// the library draw from an Rng passed in explicitly; re-running with the same
// pair reproduces every draw.  Bounded sampling is implemented by rejection on
// the raw 64-bit output so results do not depend on the standard library's
// distribution internals.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream)
        : gen_(splitmix64(splitmix64(seed) ^ splitmix64(0x9e3779b97f4a7c15ULL + stream))) {}

    std::uint64_t next() { return gen_(); }

    // Uniform integer in [0, n), unbiased.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: empty range");
        std::uint64_t x, r;
        do {
            x = gen_();
            r = x % n;
        } while (x - r > std::uint64_t(-1) - (n - 1));
        return r;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double unit() { return double(gen_() >> 11) * 0x1.0p-53; }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        if (v.empty()) throw std::invalid_argument("Rng::pick: empty vector");
        return v[below(v.size())];
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    // k distinct values from [0, n), returned sorted.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        if (k > n) throw std::invalid_argument("Rng::sample_indices: k > n");
        // Floyd's algorithm keeps this cheap for small k relative to n.
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t j = n - k; j < n; ++j) {
            std::size_t t = below(j + 1);
            if (std::find(out.begin(), out.end(), t) == out.end())
                out.push_back(t);
            else
                out.push_back(j);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace bifactor
