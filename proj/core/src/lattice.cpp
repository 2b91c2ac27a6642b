#include "skewfield/lattice.hpp"

#include <cmath>
#include <optional>

#include "skewfield/fft.hpp"
#include "skewfield/kernels.hpp"

namespace skewfield {

namespace {

// Kernel-level ingredients shared by every increment scale.
struct Weights {
    std::vector<double> w;      // k² e^{4γ²Ĉ}
    std::vector<double> kappa;  // k e^{4γ²Ĉ}
    std::vector<double> kappa_corr;
    double w_sum = 0.0;
};

Weights make_weights(const ModelParams& p)
{
    const std::vector<double> k = make_kernel_grid(KernelKind::K, p).samples;
    const std::vector<double> kh = make_kernel_grid(KernelKind::KHat, p).samples;
    std::vector<double> C = circular_correlate(kh, kh);
    const double g2 = p.gamma2();
    Weights r;
    r.w.resize(p.N);
    r.kappa.resize(p.N);
    for (std::size_t i = 0; i < p.N; ++i) {
        const double e = std::exp(4.0 * g2 * C[i] * p.dx() * 0.5);
        r.w[i] = k[i] * k[i] * e;
        r.kappa[i] = k[i] * e;
        r.w_sum += r.w[i];
    }
    r.kappa_corr = circular_correlate(r.kappa, r.kappa);
    return r;
}

// dx² [(ΣΦ²)(Σw) - Σ_h w_h Σ_a Φ_a Φ_{a+h}]
double second_moment(std::span<const double> Phi, const Weights& W, double dx)
{
    const std::vector<double> A = circular_correlate(Phi, Phi);
    double sq = 0.0, cross = 0.0;
    for (std::size_t i = 0; i < Phi.size(); ++i) {
        sq += Phi[i] * Phi[i];
        cross += W.w[i] * A[i];
    }
    return dx * dx * (sq * W.w_sum - cross);
}

double third_moment(std::span<const double> Phi, const Weights& W, double dx)
{
    std::vector<double> sq(Phi.size());
    for (std::size_t i = 0; i < Phi.size(); ++i) sq[i] = Phi[i] * Phi[i];
    const std::vector<double> B = circular_correlate(Phi, sq);
    double s = 0.0;
    for (std::size_t i = 0; i < Phi.size(); ++i) s += W.kappa[i] * W.kappa_corr[i] * B[i];
    return 6.0 * dx * dx * dx * s;
}

}  // namespace

LatticeMoments lattice_increment_moments(const ModelParams& p, std::span<const std::uint64_t> ell_cells)
{
    validate(p);
    const std::vector<double> phi = make_kernel_grid(KernelKind::Phi, p).samples;
    const std::size_t N = p.N;
    const double dx = p.dx();
    LatticeMoments r;
    r.ell_cells.assign(ell_cells.begin(), ell_cells.end());
    std::optional<Weights> W;
    if (p.variant == Variant::Skewed) W = make_weights(p);
    std::vector<double> Phi(N);
    for (std::uint64_t l : ell_cells) {
        // Φ_a = φ_{l-a} - φ_{-a}: the forward increment kernel, reflected
        for (std::size_t a = 0; a < N; ++a) {
            const std::size_t m = (N - a) % N;
            Phi[a] = phi[(m + l) % N] - phi[m];
        }
        if (!W) {
            double s = 0.0;
            for (double v : Phi) s += v * v;
            r.m2.push_back(dx * s);
            r.m3.push_back(0.0);
            continue;
        }
        r.m2.push_back(second_moment(Phi, *W, dx));
        r.m3.push_back(third_moment(Phi, *W, dx));
    }
    return r;
}

double lattice_variance(const ModelParams& p)
{
    validate(p);
    const std::vector<double> phi = make_kernel_grid(KernelKind::Phi, p).samples;
    if (p.variant == Variant::GaussianBaseline) {
        double s = 0.0;
        for (double v : phi) s += v * v;
        return p.dx() * s;
    }
    return second_moment(phi, make_weights(p), p.dx());
}

}  // namespace skewfield
