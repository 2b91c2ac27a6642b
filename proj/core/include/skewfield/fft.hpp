#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace skewfield {

// Aligned buffer for FFT work arrays.
template <class T>
class AlignedBuffer {
public:
    AlignedBuffer() = default;
    explicit AlignedBuffer(std::size_t n);
    AlignedBuffer(AlignedBuffer&& o) noexcept : data_(o.data_), size_(o.size_)
    {
        o.data_ = nullptr;
        o.size_ = 0;
    }
    AlignedBuffer& operator=(AlignedBuffer&& o) noexcept;
    AlignedBuffer(const AlignedBuffer&) = delete;
    AlignedBuffer& operator=(const AlignedBuffer&) = delete;
    ~AlignedBuffer();

    T* data() { return data_; }
    const T* data() const { return data_; }
    std::size_t size() const { return size_; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }
    std::span<T> span() { return {data_, size_}; }
    std::span<const T> span() const { return {data_, size_}; }

private:
    T* data_ = nullptr;
    std::size_t size_ = 0;
};

using RealBuffer = AlignedBuffer<double>;
using ComplexBuffer = AlignedBuffer<std::complex<double>>;

// Real-to-complex transform of length n (n/2+1 outputs), unnormalized.
void rfft(std::span<const double> in, std::span<std::complex<double>> out);
// Inverse of rfft including the 1/n factor.
void irfft(std::span<const std::complex<double>> in, std::span<double> out);

enum class Semantics { Density, Measure };

// Precomputed spectrum of a periodic kernel for repeated circular convolution.
class SpectralKernel {
public:
    explicit SpectralKernel(std::span<const double> samples);

    std::size_t size() const { return n_; }

    // out_i = Σ_j k_{(i-j) mod n} f_j, times dx = 1/n under density semantics.
    void convolve(std::span<const double> f, std::span<double> out, Semantics s) const;

    const ComplexBuffer& spectrum() const { return spec_; }

private:
    std::size_t n_;
    ComplexBuffer spec_;
};

std::vector<double> circular_convolve(std::span<const double> kernel, std::span<const double> f,
                                      Semantics s);

// c_h = Σ_s a_s b_{(s+h) mod n}.
std::vector<double> circular_correlate(std::span<const double> a, std::span<const double> b);

}  // namespace skewfield
