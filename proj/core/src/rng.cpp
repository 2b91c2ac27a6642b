#include "skewfield/rng.hpp"

#include <cmath>
#include <numbers>

namespace skewfield {

std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t replicate, std::uint64_t stream)
{
    std::uint64_t k = mix64(seed ^ 0x5f0e3c1ab7d2e489ULL);
    k = mix64(k ^ replicate);
    k = mix64(k ^ (stream * 0xd1b54a32d192ed03ULL));
    key_ = k;
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const
{
    return mix64(key_ ^ mix64(counter));
}

double CounterRng::uniform(std::uint64_t counter) const
{
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

void CounterRng::fill_normal(std::span<double> out, double sigma, std::uint64_t offset) const
{
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; i += 2) {
        const std::uint64_t pair = (offset + i) / 2;
        const double u1 = uniform(2 * pair);
        const double u2 = uniform(2 * pair + 1);
        const double r = sigma * std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        out[i] = r * std::cos(t);
        if (i + 1 < n) out[i + 1] = r * std::sin(t);
    }
}

}  // namespace skewfield
