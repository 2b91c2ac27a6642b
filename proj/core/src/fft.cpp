#include "skewfield/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <new>
#include <stdexcept>

#include "skewfield/model.hpp"

namespace skewfield {

template <class T>
AlignedBuffer<T>::AlignedBuffer(std::size_t n) : size_(n)
{
    if (n == 0) return;
    data_ = static_cast<T*>(fftw_malloc(n * sizeof(T)));
    if (data_ == nullptr) throw std::bad_alloc();
    for (std::size_t i = 0; i < n; ++i) new (data_ + i) T{};
}

template <class T>
AlignedBuffer<T>& AlignedBuffer<T>::operator=(AlignedBuffer&& o) noexcept
{
    if (this != &o) {
        if (data_ != nullptr) fftw_free(data_);
        data_ = o.data_;
        size_ = o.size_;
        o.data_ = nullptr;
        o.size_ = 0;
    }
    return *this;
}

template <class T>
AlignedBuffer<T>::~AlignedBuffer()
{
    if (data_ != nullptr) fftw_free(data_);
}

template class AlignedBuffer<double>;
template class AlignedBuffer<std::complex<double>>;

namespace {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

// Planning is not thread-safe in FFTW; execution with new-array calls is.
std::mutex& plan_mutex()
{
    static std::mutex m;
    return m;
}

const PlanPair& plans_for(std::size_t n)
{
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    RealBuffer r(n);
    ComplexBuffer c(n / 2 + 1);
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    PlanPair pp;
    const int ni = static_cast<int>(n);
    pp.forward = fftw_plan_dft_r2c_1d(ni, r.data(), cp, FFTW_ESTIMATE);
    pp.backward = fftw_plan_dft_c2r_1d(ni, cp, r.data(), FFTW_ESTIMATE);
    if (pp.forward == nullptr || pp.backward == nullptr) throw std::runtime_error("fftw planning failed");
    return cache.emplace(n, pp).first->second;
}

bool aligned(const void* p) { return fftw_alignment_of(static_cast<double*>(const_cast<void*>(p))) == 0; }

void check_length(std::size_t n)
{
    if (n < 2 || !is_power_of_two(n)) throw std::invalid_argument("FFT length must be a power of two");
}

}  // namespace

void rfft(std::span<const double> in, std::span<std::complex<double>> out)
{
    const std::size_t n = in.size();
    check_length(n);
    if (out.size() != n / 2 + 1) throw std::invalid_argument("rfft output length mismatch");
    const PlanPair& pp = plans_for(n);
    RealBuffer tmp;
    const double* src = in.data();
    if (!aligned(src)) {
        tmp = RealBuffer(n);
        std::copy(in.begin(), in.end(), tmp.data());
        src = tmp.data();
    }
    ComplexBuffer otmp;
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    if (!aligned(dst)) {
        otmp = ComplexBuffer(n / 2 + 1);
        dst = reinterpret_cast<fftw_complex*>(otmp.data());
    }
    // r2c does not modify its input.
    fftw_execute_dft_r2c(pp.forward, const_cast<double*>(src), dst);
    if (otmp.size() != 0) std::copy(otmp.data(), otmp.data() + otmp.size(), out.data());
}

void irfft(std::span<const std::complex<double>> in, std::span<double> out)
{
    const std::size_t n = out.size();
    check_length(n);
    if (in.size() != n / 2 + 1) throw std::invalid_argument("irfft input length mismatch");
    const PlanPair& pp = plans_for(n);
    // c2r destroys its input.
    ComplexBuffer work(n / 2 + 1);
    std::copy(in.begin(), in.end(), work.data());
    RealBuffer otmp;
    double* dst = out.data();
    if (!aligned(dst)) {
        otmp = RealBuffer(n);
        dst = otmp.data();
    }
    fftw_execute_dft_c2r(pp.backward, reinterpret_cast<fftw_complex*>(work.data()), dst);
    const double s = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) dst[i] *= s;
    if (otmp.size() != 0) std::copy(otmp.data(), otmp.data() + n, out.data());
}

SpectralKernel::SpectralKernel(std::span<const double> samples) : n_(samples.size()), spec_(samples.size() / 2 + 1)
{
    check_length(n_);
    rfft(samples, spec_.span());
}

void SpectralKernel::convolve(std::span<const double> f, std::span<double> out, Semantics s) const
{
    if (f.size() != n_ || out.size() != n_) throw std::invalid_argument("convolution length mismatch");
    ComplexBuffer fs(n_ / 2 + 1);
    rfft(f, fs.span());
    const double scale = s == Semantics::Density ? 1.0 / static_cast<double>(n_) : 1.0;
    for (std::size_t i = 0; i < fs.size(); ++i) fs[i] *= spec_[i] * scale;
    irfft(fs.span(), out);
}

std::vector<double> circular_convolve(std::span<const double> kernel, std::span<const double> f, Semantics s)
{
    if (kernel.size() != f.size()) throw std::invalid_argument("convolution length mismatch");
    SpectralKernel k(kernel);
    std::vector<double> out(f.size());
    k.convolve(f, out, s);
    return out;
}

std::vector<double> circular_correlate(std::span<const double> a, std::span<const double> b)
{
    const std::size_t n = a.size();
    if (b.size() != n) throw std::invalid_argument("correlation length mismatch");
    check_length(n);
    ComplexBuffer fa(n / 2 + 1), fb(n / 2 + 1);
    rfft(a, fa.span());
    rfft(b, fb.span());
    for (std::size_t i = 0; i < fa.size(); ++i) fa[i] = std::conj(fa[i]) * fb[i];
    std::vector<double> out(n);
    irfft(fa.span(), out);
    return out;
}

}  // namespace skewfield
