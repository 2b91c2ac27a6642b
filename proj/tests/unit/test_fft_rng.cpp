#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <vector>

#include "skewfield/fft.hpp"
#include "skewfield/rng.hpp"

using namespace skewfield;

namespace {

std::vector<double> ramp(std::size_t n, double a, double b)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(a * static_cast<double>(i) + b) + 0.1 * static_cast<double>(i % 7);
    return v;
}

}  // namespace

TEST_CASE("rfft against a direct DFT")
{
    const std::size_t n = 64;
    const auto x = ramp(n, 0.37, 0.2);
    std::vector<std::complex<double>> X(n / 2 + 1);
    rfft(x, X);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        std::complex<double> s = 0;
        for (std::size_t j = 0; j < n; ++j)
            s += x[j] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(n));
        CHECK(std::abs(X[k] - s) < 1e-12);
    }
    std::vector<double> back(n);
    irfft(X, back);
    for (std::size_t j = 0; j < n; ++j) CHECK(back[j] == doctest::Approx(x[j]).epsilon(1e-14));
}

TEST_CASE("circular convolution matches the direct sum")
{
    const std::size_t n = 256;
    const auto k = ramp(n, 0.11, 0.7);
    const auto f = ramp(n, 0.53, -0.4);
    const auto meas = circular_convolve(k, f, Semantics::Measure);
    const auto dens = circular_convolve(k, f, Semantics::Density);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += k[(i + n - j) % n] * f[j];
        scale = std::max(scale, std::fabs(s));
        CHECK(std::fabs(meas[i] - s) <= 1e-10 * scale + 1e-12);
        CHECK(dens[i] == doctest::Approx(s / static_cast<double>(n)).epsilon(1e-10));
    }
}

TEST_CASE("delta kernel and odd kernels")
{
    const std::size_t n = 128;
    std::vector<double> delta(n, 0.0);
    delta[0] = 1.0;
    const auto f = ramp(n, 0.3, 0.1);
    const auto out = circular_convolve(delta, f, Semantics::Measure);
    for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == doctest::Approx(f[i]).epsilon(1e-13));

    std::vector<double> odd(n, 0.0);
    for (std::size_t i = 1; i < n / 2; ++i) {
        odd[i] = 1.0 / std::sqrt(static_cast<double>(i));
        odd[n - i] = -odd[i];
    }
    const auto z = circular_convolve(odd, std::vector<double>(n, 2.5), Semantics::Measure);
    for (double v : z) CHECK(std::fabs(v) < 1e-12);
}

TEST_CASE("circular correlation")
{
    const std::size_t n = 32;
    const auto a = ramp(n, 0.2, 0.0), b = ramp(n, 0.9, 1.0);
    const auto c = circular_correlate(a, b);
    for (std::size_t h = 0; h < n; ++h) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += a[j] * b[(j + h) % n];
        CHECK(c[h] == doctest::Approx(s).epsilon(1e-11).scale(1.0));
    }
}

TEST_CASE("spectral kernel reuse")
{
    const auto k = ramp(64, 0.4, 0.3);
    SpectralKernel sk(k);
    CHECK(sk.size() == 64);
    for (double shift : {0.0, 1.0}) {
        const auto f = ramp(64, 0.7, shift);
        std::vector<double> out(64);
        sk.convolve(f, out, Semantics::Measure);
        const auto ref = circular_convolve(k, f, Semantics::Measure);
        for (std::size_t i = 0; i < 64; ++i) CHECK(out[i] == doctest::Approx(ref[i]).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("counter rng is a pure function of key and counter")
{
    const CounterRng a(7, 3, 0), b(7, 3, 0), c(7, 4, 0), d(7, 3, 1);
    CHECK(a.key() == b.key());
    CHECK(a.key() != c.key());
    CHECK(a.key() != d.key());
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        CHECK(a.bits(i) == b.bits(i));
        seen.insert(a.bits(i));
        const double u = a.uniform(i);
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
    CHECK(seen.size() == 1000);

    // a split fill reproduces the whole
    std::vector<double> whole(1000), part(1000);
    a.fill_normal(whole, 1.0);
    a.fill_normal(std::span<double>(part).first(400), 1.0, 0);
    a.fill_normal(std::span<double>(part).subspan(400), 1.0, 400);
    CHECK(whole == part);
}

TEST_CASE("normal draws have the right moments")
{
    const std::size_t n = 1u << 18;
    std::vector<double> x(n);
    CounterRng(11, 0, 0).fill_normal(x, 2.0);
    double m1 = 0, m2 = 0, m4 = 0;
    for (double v : x) {
        m1 += v;
        m2 += v * v;
        m4 += v * v * v * v;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    const double rn = std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(m1) < 5.0 * 2.0 / rn);
    CHECK(std::fabs(m2 / 4.0 - 1.0) < 5.0 * std::sqrt(2.0) / rn);
    CHECK(std::fabs(m4 / 48.0 - 1.0) < 5.0 * std::sqrt(96.0) / 3.0 / rn);
}
