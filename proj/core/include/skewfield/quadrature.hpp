#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace skewfield {

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TailExtrapolation { None, PowerLaw };

struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 20000;
    // Known integrable singularities; they become panel boundaries and are never sampled.
    std::vector<double> singularity_points;
    // Infinite bounds are truncated here.
    double tail_cut = 1e6;
    TailExtrapolation tail_extrapolation = TailExtrapolation::None;
    // Integrand decays like |x|^{-tail_exponent}; must exceed 1 for extrapolation.
    double tail_exponent = 0.0;
};

struct QuadResult {
    double value = 0.0;
    double abs_err_estimate = 0.0;
    int subdivisions_used = 0;
    bool converged = false;
    // Set when the parameters sit on a case the underlying formula excludes.
    bool degenerate = false;
};

QuadResult& operator+=(QuadResult& a, const QuadResult& b);
QuadResult operator*(double s, QuadResult r);

using Integrand = std::function<double(double)>;

// a may be -inf and b may be +inf (truncated at ∓tail_cut).
QuadResult adaptive_integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg = {});

// Endpoint behaviour |x - a|^{-alpha} (alpha < 1) removed by x = a + (b-a) s^{1/(1-alpha)}.
QuadResult integrate_left_singular(const Integrand& f, double a, double b, double alpha,
                                   const QuadratureConfig& cfg = {});
QuadResult integrate_right_singular(const Integrand& f, double a, double b, double alpha,
                                    const QuadratureConfig& cfg = {});

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace skewfield
