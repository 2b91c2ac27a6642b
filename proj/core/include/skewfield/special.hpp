#pragma once

#include <optional>
#include <vector>

#include "skewfield/model.hpp"
#include "skewfield/quadrature.hpp"

namespace skewfield {

// Cutoff shape and length used by the ε → 0 formulas (unit length by default).
struct CutoffSpec {
    Cutoff kind = Cutoff::Gaussian;
    double L = 1.0;

    double value(double x) const;
    double derivative(double x) const;
    // Beyond this distance the cutoff is zero (bump) or below 1e-31 (Gaussian).
    double reach() const;
};

// Covariance of the log-correlated driver used by the variance formulas.
enum class CovarianceModel {
    Canonical,      // ln₊(L/|h|)
    KernelInduced,  // autocorrelation of the normalized driver kernel at ε = 0
};

struct VarianceModel {
    CutoffSpec cutoff;
    CovarianceModel covariance = CovarianceModel::Canonical;
    double Htilde = 0.0;
};

// Integration point with a known endpoint behaviour |x - x0|^{-alpha}.
// alpha > 0 triggers a smoothing substitution; every knot is a panel boundary.
struct Knot {
    double x = 0.0;
    double alpha = 0.0;
};

// Integrand evaluated at x = base + offset, where base is the nearest knot. Factors
// singular at a knot c should use (base - c) + offset, which stays exact near c.
using KnotIntegrand = std::function<double(double base, double offset)>;

// Integrates over [knots.front().x, knots.back().x]; either end may be infinite,
// in which case cfg's tail settings apply to the unbounded piece.
QuadResult integrate_knots(const KnotIntegrand& f, std::vector<Knot> knots, const QuadratureConfig& cfg);
QuadResult integrate_knots(const Integrand& f, std::vector<Knot> knots, const QuadratureConfig& cfg);

// f_H(h) = ∫ψ(x)ψ(x+h)² dx, ψ(x) = |x+1/2|_ε^{H-1/2} - |x-1/2|_ε^{H-1/2}; ε = 0 uses the bare norm.
QuadResult f_H_eval(double H, double h, double epsilon = 0.0);
// Same function through the shifted form ∫|x-h|^{H-1/2} G(x) dx (valid for H < 5/6).
QuadResult f_H_shifted_form(double H, double h);
// Constant c with f_H(h) ~ c h as h → 0.
QuadResult f_H_small_h_constant(double H);
// Constant c with f_H(h) ~ c h^{H-3/2} as h → ∞.
QuadResult f_H_large_h_constant(double H);

// d_H = ∫ |y+1|^{H-1/2} |y|^{2H-1} dy, H < 1/6.
QuadResult d_H_integral(double H);
double d_H_closed_form(double H);

struct SingularityDiagnostics {
    double H = 0.0;
    std::string branch;            // "power", "log" or "bounded"
    double predicted_exponent = 0.0;
    double fitted_exponent = 0.0;  // power branch: α in A + C δ^α
    double fitted_coefficient = 0.0;
    double d_H = 0.0;
    double log_slope = 0.0;        // log branch: df/d ln(1/δ)
    double ratio_at_min = 0.0;     // log branch: f/ln(1/δ) at the smallest δ
    double max_near_one = 0.0;     // bounded branch
    double reference = 0.0;        // bounded branch: f_H(0.9)
    double deviation = 0.0;
    bool ok = false;
};

SingularityDiagnostics f_H_singularity_check(double H);

// (φ⋆φ)'(h) through the smooth term plus (H-1/2) times the convergent PV form.
QuadResult phi_star_phi_deriv(double h, double H, const CutoffSpec& cutoff = {});

// PV ∫|x|^{H-1/2}(x+1)|x+1|^{H-5/2} dx = ∫₀^∞ x^{H-3/2}[|x-1|^{H-1/2} - |x+1|^{H-1/2}] dx.
QuadResult pv_constant(double H);

// E[u²] by the symmetric double integral.
QuadResult variance_symmetric(double H, double gamma, const VarianceModel& model = {});
// E[u²] by integration by parts against (φ⋆φ)'.
QuadResult variance_ibp(double H, double gamma, const VarianceModel& model = {});

// a_{γ,H} = ∫₀^∞ h^{-4γ²}[2h^{2H-1} - (h+1)^{2H-1} - sign(h-1)|h-1|^{2H-1}] dh.
QuadResult a_gamma_H(double H, double gamma);
inline QuadResult a_H(double H) { return a_gamma_H(H, 0.0); }

// C₂ from the four-term double integral (φ(0) = 1).
QuadResult increment_variance_constant(double H, double gamma);
// C₂ from -(a_{γ,H}/2γ²)(H-1/2)·PV (φ(0) = 1).
QuadResult increment_variance_constant_pv(double H, double gamma);

// Small-h constant of C_γ: C_γ(h) h^{8γ²} → r_γ.
QuadResult r_gamma_const(double gamma);
double r_gamma_closed_form(double gamma);

// C_γ(h) = ∫k(x)k(x+h)|x|^{-4γ²}|x+h|^{-4γ²} dx, k(x) = x|x|^{-3/2}1_{|x|<=1}.
QuadResult c_gamma_eval(double h, double gamma);

// (Φ_ℓ⋆Φ_ℓ²)(h) through the shifted form.
QuadResult phi_ell_star_sq(double h, double ell, double H, const CutoffSpec& cutoff = {});
// Same quantity from the defining integral ∫Φ_ℓ(x)Φ_ℓ(x+h)² dx.
QuadResult phi_ell_star_sq_direct(double h, double ell, double H, const CutoffSpec& cutoff = {});
// Limit of (Φ_ℓ⋆Φ_ℓ²)(h)/h as h → 0.
QuadResult phi_ell_star_sq_small_h(double ell, double H, const CutoffSpec& cutoff = {});

enum class ThirdMomentMode { Exact, Equivalent };

// ∫₀^∞ f_H(h) h^{-1/2-12γ²} dh.
QuadResult third_moment_f_integral(double H, double gamma);

// E[(δ_ℓ u)³] in the unit-length normalization with the cutoff shape of p.
QuadResult third_moment_prediction(double ell, const ModelParams& p, ThirdMomentMode mode);

}  // namespace skewfield
