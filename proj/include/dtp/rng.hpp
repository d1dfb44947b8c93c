#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dtp {

// All randomness in the toolkit flows through this wrapper. std::mt19937_64
// has a fully specified output sequence, and the helpers below avoid
// std::*_distribution (whose mappings differ between standard libraries),
// so results are bit-reproducible for a fixed seed on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform on [0, bound), bias-free via rejection
    std::uint64_t next_below(std::uint64_t bound);

    // uniform on [0, 1) with 53-bit resolution
    double next_double();

    // uniform on [lo, hi)
    double next_double(double lo, double hi);

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_below(n)); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    // k distinct indices from [0, n), returned ascending
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

// Deterministic seed derivation for independent substreams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace dtp
