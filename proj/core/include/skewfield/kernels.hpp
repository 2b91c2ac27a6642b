#pragma once

#include <cstdint>
#include <vector>

#include "skewfield/model.hpp"

namespace skewfield {

double regularized_norm(double x, double epsilon);

// Gaussian cutoff exp(-x²/2L²).
double cutoff_varphi(double x, double L);
// Compactly supported exp(-x²/(L²-x²)) on |x| < L.
double bump_cutoff(double x, double L);
double cutoff_value(Cutoff kind, double x, double L);
double cutoff_derivative(Cutoff kind, double x, double L);

// Simulation kernels use the regularized norm |x|_ε.
double phi_kernel(double x, const ModelParams& p);
double k_kernel(double x, const ModelParams& p);
// Kernel of the log-correlated driver: k with Htilde = 0.
double khat_kernel(double x, const ModelParams& p);
double increment_kernel(double x, double ell, const ModelParams& p);

// Physical coordinate of grid index i; index 0 holds x = 0, index N/2 holds -1/2.
double grid_coordinate(std::uint64_t i, std::uint64_t N);

enum class KernelKind : std::uint8_t { Phi, K, KHat, Cutoff };

struct KernelGrid {
    std::vector<double> samples;
    KernelKind kind = KernelKind::Phi;
    std::uint64_t params_hash = 0;
};

KernelGrid make_kernel_grid(KernelKind kind, const ModelParams& p);

// Exact variance of the discrete driver X̂ = (k̂ ∗ Ŵ)/√2.
double discrete_c_epsilon(const ModelParams& p);

// Autocorrelation of x|x|^{-3/2} 1_{|x|<=1}; log-singular at 0, zero beyond 2.
double khat_autocorrelation_unit(double h);

}  // namespace skewfield
