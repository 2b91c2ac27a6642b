#include "skewfield/kernels.hpp"

#include <cmath>
#include <numbers>

namespace skewfield {

double regularized_norm(double x, double epsilon) { return std::hypot(x, epsilon); }

double cutoff_varphi(double x, double L) { return std::exp(-x * x / (2.0 * L * L)); }

double bump_cutoff(double x, double L)
{
    const double ax = std::fabs(x);
    if (ax >= L) return 0.0;
    return std::exp(-x * x / ((L - ax) * (L + ax)));
}

double cutoff_value(Cutoff kind, double x, double L)
{
    return kind == Cutoff::Gaussian ? cutoff_varphi(x, L) : bump_cutoff(x, L);
}

double cutoff_derivative(Cutoff kind, double x, double L)
{
    if (kind == Cutoff::Gaussian) return -x / (L * L) * cutoff_varphi(x, L);
    const double ax = std::fabs(x);
    if (ax >= L) return 0.0;
    const double d = (L - ax) * (L + ax);
    return -2.0 * x * L * L / (d * d) * std::exp(-x * x / d);
}

double phi_kernel(double x, const ModelParams& p)
{
    const double c = cutoff_value(p.cutoff, x, p.L);
    if (c == 0.0) return 0.0;
    return c * std::pow(regularized_norm(x, p.epsilon), p.H - 0.5);
}

namespace {

double coupling(double x, double htilde, const ModelParams& p)
{
    if (std::fabs(x) > p.L) return 0.0;
    return x * std::pow(regularized_norm(x, p.epsilon), htilde - 1.5);
}

}  // namespace

double k_kernel(double x, const ModelParams& p) { return coupling(x, p.Htilde, p); }

double khat_kernel(double x, const ModelParams& p) { return coupling(x, 0.0, p); }

double increment_kernel(double x, double ell, const ModelParams& p)
{
    return phi_kernel(x + 0.5 * ell, p) - phi_kernel(x - 0.5 * ell, p);
}

double grid_coordinate(std::uint64_t i, std::uint64_t N)
{
    const auto n = static_cast<double>(N);
    const auto di = static_cast<double>(i);
    return i < N / 2 ? di / n : (di - n) / n;
}

KernelGrid make_kernel_grid(KernelKind kind, const ModelParams& p)
{
    validate(p);
    KernelGrid g;
    g.kind = kind;
    g.params_hash = params_hash(p);
    g.samples.resize(p.N);
    const std::uint64_t N = p.N;
    const std::uint64_t half = N / 2;

    auto eval = [&](double x) {
        switch (kind) {
        case KernelKind::Phi: return phi_kernel(x, p);
        case KernelKind::K: return k_kernel(x, p);
        case KernelKind::KHat: return khat_kernel(x, p);
        case KernelKind::Cutoff: return cutoff_value(p.cutoff, x, p.L);
        }
        return 0.0;
    };

    // Evaluate on x >= 0 and mirror so parity holds bit-for-bit.
    const bool odd = kind == KernelKind::K || kind == KernelKind::KHat;
    g.samples[0] = odd ? 0.0 : eval(0.0);
    for (std::uint64_t i = 1; i < half; ++i) {
        const double v = eval(static_cast<double>(i) / static_cast<double>(N));
        g.samples[i] = v;
        g.samples[N - i] = odd ? -v : v;
    }
    // x = ±1/2 is its own mirror on the torus.
    g.samples[half] = odd ? 0.0 : eval(-0.5);
    return g;
}

double discrete_c_epsilon(const ModelParams& p)
{
    const KernelGrid g = make_kernel_grid(KernelKind::KHat, p);
    double s = 0.0;
    for (double v : g.samples) s += v * v;
    return 0.5 * s * p.dx();
}

double khat_autocorrelation_unit(double h)
{
    const double a = std::fabs(h);
    if (a >= 2.0) return 0.0;
    if (a <= 1.0) return 4.0 * std::log1p(std::sqrt(1.0 - a)) - 2.0 * std::log(a) - std::numbers::pi;
    return -2.0 * std::asin((2.0 - a) / a);
}

}  // namespace skewfield
