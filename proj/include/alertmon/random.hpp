#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace alertmon {

// Reproducible random source used for dataset splits and synthetic sessions.
//
// Engine: MT19937-64 (std::mt19937_64, whose output sequence is fixed by the
// C++ standard). Derived quantities avoid implementation-defined std::
// distributions:
//   uniform()          top 53 bits / 2^53, in [0, 1)
//   uniform_below(n)   rejection sampling on the raw 64-bit output
//   gaussian()         Box-Muller, second deviate cached
//   shuffle(v)         Fisher-Yates, i from n-1 down to 1, j = uniform_below(i+1)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform();
    std::uint64_t uniform_below(std::uint64_t n);
    double gaussian();
    double exponential(double rate);

    template <typename T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// SplitMix64 finaliser; used to derive independent seeds from (seed, stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

} // namespace alertmon
