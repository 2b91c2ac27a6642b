#pragma once

#include <cstdint>
#include <span>

namespace skewfield {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

// Stateless counter-based generator: draw i depends only on (key, i), so any
// partition of the work across threads yields identical samples.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t replicate, std::uint64_t stream);

    std::uint64_t key() const { return key_; }
    std::uint64_t bits(std::uint64_t counter) const;
    // Uniform in the open interval (0,1).
    double uniform(std::uint64_t counter) const;

    // out[i] ~ N(0, sigma²); pair (2j, 2j+1) comes from one Box-Muller draw.
    void fill_normal(std::span<double> out, double sigma, std::uint64_t offset = 0) const;

private:
    std::uint64_t key_;
};

}  // namespace skewfield
