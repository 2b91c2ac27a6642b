#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "skewfield/fft.hpp"
#include "skewfield/kernels.hpp"
#include "skewfield/model.hpp"

namespace skewfield {

class OverflowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NoisePair {
    std::vector<double> W;
    std::vector<double> What;
};

struct FieldRealization {
    std::vector<double> samples;
    ModelParams params;
    std::uint64_t rng_stream_id = 0;
    Variant model = Variant::Skewed;
};

// W and Ŵ use disjoint streams keyed by (seed, replicate).
NoisePair sample_noise_pair(const ModelParams& p, std::uint64_t replicate);

std::vector<double> circular_convolve(const KernelGrid& kernel, std::span<const double> f, Semantics s);

inline constexpr double kGmcExponentLimit = 700.0;

// exp(γX̂ - γ²c_ε) per cell, X̂ = (k̂ ∗ Ŵ)/√2 under measure semantics.
std::vector<double> gmc_weight(std::span<const double> What, const ModelParams& p);

// Caches kernel spectra and c_ε for repeated realizations of one law.
class Synthesizer {
public:
    explicit Synthesizer(const ModelParams& p);

    const ModelParams& params() const { return p_; }
    double c_epsilon() const { return c_eps_; }

    FieldRealization realize(std::uint64_t replicate) const;
    FieldRealization realize(const NoisePair& noise, std::uint64_t replicate) const;

    // X̂ for a given Ŵ.
    std::vector<double> driver(std::span<const double> What) const;
    std::vector<double> weight(std::span<const double> What) const;

private:
    ModelParams p_;
    double c_eps_ = 0.0;
    SpectralKernel phi_;
    std::optional<SpectralKernel> k_;
    std::optional<SpectralKernel> khat_;
};

FieldRealization synthesize(const ModelParams& p, std::uint64_t replicate);

}  // namespace skewfield
