#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace loghint {

/// Deterministic PRNG (splitmix64-seeded xoshiro256**) with portable helpers.
/// std::shuffle and the std distributions are implementation-defined, so all
/// seeded sampling in the pipeline goes through this class to keep artifacts
/// byte-identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();

    /// Uniform double in [0, 1).
    double uniform();

    /// Uniform integer in [0, n). n must be > 0.
    std::size_t below(std::size_t n);

    /// Standard normal via Box-Muller.
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Sample k distinct indices from [0, n) in selection order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    /// Derive an independent stream seed from a base seed and a tag.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t tag);
    static std::uint64_t hash_string(std::string_view s);

private:
    std::uint64_t state_[4];
    bool have_gauss_ = false;
    double gauss_ = 0.0;
};

}  // namespace loghint
