#include "skewfield/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "skewfield/kernels.hpp"

namespace skewfield {

double CutoffSpec::value(double x) const { return cutoff_value(kind, x, L); }
double CutoffSpec::derivative(double x) const { return cutoff_derivative(kind, x, L); }
double CutoffSpec::reach() const { return kind == Cutoff::Bump ? L : 12.0 * L; }

namespace {

double apow(double x, double p) { return std::pow(std::fabs(x), p); }

QuadratureConfig inner_cfg()
{
    QuadratureConfig c;
    c.abs_tol = 1e-14;
    c.rel_tol = 1e-11;
    c.max_subdivisions = 6000;
    return c;
}

// Stand-alone constants: the tail estimate limits the attainable relative error near 1e-11.
QuadratureConfig constant_cfg()
{
    QuadratureConfig c = inner_cfg();
    c.rel_tol = 1e-10;
    return c;
}

QuadratureConfig outer_cfg()
{
    QuadratureConfig c;
    c.abs_tol = 1e-13;
    c.rel_tol = 1e-8;
    c.max_subdivisions = 3000;
    return c;
}

QuadratureConfig with_tail(QuadratureConfig c, double cut, double beta)
{
    c.tail_cut = cut;
    c.tail_extrapolation = TailExtrapolation::PowerLaw;
    c.tail_exponent = beta;
    return c;
}

// Signed distance x - c for x = b + t; exact when c is the base knot b.
inline double rel(double b, double t, double c) { return (b - c) + t; }
inline double pw(double b, double t, double c, double p) { return std::pow(std::fabs(rel(b, t, c)), p); }

// b + t, kept off b when t is below one ulp of b.
inline double at(double b, double t)
{
    const double x = b + t;
    return (x == b && t != 0.0) ? std::nextafter(b, t > 0.0 ? kInf : -kInf) : x;
}

// Exponent of an algebraic singularity |x|^{-a}; non-positive values mean none.
double sing(double a) { return a > 0.0 ? a : 0.0; }

void require_H(double H)
{
    if (!(H > 0.0 && H < 1.0)) throw ParamError("H must lie in (0, 1)");
}

// h^{q} [2 - (1 + 1/h)^q - (1 - 1/h)^q] for h > 1, without cancellation.
double even_second_difference(double h, double q)
{
    const double t = 1.0 / h;
    return -std::pow(h, q) * (std::expm1(q * std::log1p(t)) + std::expm1(q * std::log1p(-t)));
}

// x^{q} [(1 - 1/x)^q - (1 + 1/x)^q] for x > 1.
double odd_difference(double x, double q)
{
    const double t = 1.0 / x;
    return std::pow(x, q) * (std::expm1(q * std::log1p(-t)) - std::expm1(q * std::log1p(t)));
}

}  // namespace

QuadResult integrate_knots(const KnotIntegrand& f, std::vector<Knot> knots, const QuadratureConfig& cfg)
{
    if (knots.size() < 2) throw QuadratureError("integrate_knots needs at least two knots");
    std::sort(knots.begin(), knots.end(), [](const Knot& a, const Knot& b) { return a.x < b.x; });
    // Coinciding knots multiply their local factors, so exponents add.
    std::vector<Knot> k;
    for (const Knot& kn : knots) {
        if (!k.empty() && k.back().x == kn.x)
            k.back().alpha = sing(k.back().alpha) + sing(kn.alpha);
        else
            k.push_back({kn.x, sing(kn.alpha)});
    }
    for (const Knot& kn : k)
        if (kn.alpha >= 1.0) throw QuadratureError("non-integrable singularity at x = " + std::to_string(kn.x));

    QuadratureConfig plain = cfg;
    plain.singularity_points.clear();
    QuadratureConfig local = plain;
    local.singularity_points = {0.0};
    QuadResult total;
    total.converged = true;

    std::size_t first = 0, last = k.size() - 1;
    const bool left_inf = std::isinf(k.front().x);
    const bool right_inf = std::isinf(k.back().x);
    if (left_inf) ++first;
    if (right_inf) --last;
    if (first > last || std::isinf(k[first].x) || std::isinf(k[last].x))
        throw QuadratureError("integrate_knots needs a finite knot");
    const double d = std::max(1.0, 0.5 * (k[last].x - k[first].x));

    // Offsets t from a knot base, with the singularity (if any) at t = 0.
    auto after = [&](double base, double len, double alpha) {
        return integrate_left_singular([&](double t) { return f(base, t); }, 0.0, len, alpha, local);
    };
    auto before = [&](double base, double len, double alpha) {
        return integrate_right_singular([&](double t) { return f(base, t); }, -len, 0.0, alpha, local);
    };

    if (left_inf) {
        const double x0 = k[first].x;
        total += before(x0, d, k[first].alpha);
        QuadratureConfig c = plain;
        if (!(c.tail_cut > d - x0)) c.tail_cut = 4.0 * (d - x0);
        total += adaptive_integrate([&](double x) { return f(x0, x - x0); }, -kInf, x0 - d, c);
    }
    for (std::size_t i = first; i < last; ++i) {
        const double a = k[i].x, b = k[i + 1].x;
        const double mid = 0.5 * (a + b);
        total += after(a, mid - a, k[i].alpha);
        total += before(b, b - mid, k[i + 1].alpha);
    }
    if (right_inf) {
        const double x0 = k[last].x;
        total += after(x0, d, k[last].alpha);
        QuadratureConfig c = plain;
        if (!(c.tail_cut > x0 + d)) c.tail_cut = 4.0 * (x0 + d);
        total += adaptive_integrate([&](double x) { return f(x0, x - x0); }, x0 + d, kInf, c);
    }
    return total;
}

QuadResult integrate_knots(const Integrand& f, std::vector<Knot> knots, const QuadratureConfig& cfg)
{
    return integrate_knots(KnotIntegrand([&f](double b, double t) { return f(at(b, t)); }), std::move(knots), cfg);
}

// ---------------------------------------------------------------- f_H family

QuadResult f_H_eval(double H, double h, double epsilon)
{
    require_H(H);
    const double p = H - 0.5;
    const double c1 = -h - 0.5, c2 = -h + 0.5;
    auto norm = [epsilon](double x) { return epsilon > 0.0 ? std::hypot(x, epsilon) : std::fabs(x); };
    auto f = [&](double b, double t) {
        const double s0 = std::pow(norm(rel(b, t, -0.5)), p) - std::pow(norm(rel(b, t, 0.5)), p);
        const double s1 = std::pow(norm(rel(b, t, c1)), p) - std::pow(norm(rel(b, t, c2)), p);
        return s0 * s1 * s1;
    };
    const bool reg = epsilon > 0.0;
    const double a1 = reg ? 0.0 : 0.5 - H;
    const double a2 = reg ? 0.0 : 1.0 - 2.0 * H;
    std::vector<Knot> knots{{-kInf, 0}, {-0.5, a1}, {0.5, a1}, {c1, a2}, {c2, a2}, {kInf, 0}};
    const auto cfg = with_tail(inner_cfg(), std::max(1e4, 100.0 * (std::fabs(h) + 1.0)), 4.5 - 3.0 * H);
    QuadResult r = integrate_knots(KnotIntegrand(f), knots, cfg);
    r.degenerate = H == 0.5;
    return r;
}

QuadResult f_H_shifted_form(double H, double h)
{
    require_H(H);
    const double p = H - 0.5;
    auto f = [&](double x0, double t) {
        const double a = pw(x0, t, 1.0, p), b = pw(x0, t, -1.0, p), c = pw(x0, t, 0.0, p);
        return pw(x0, t, h, p) * (a - b) * (a + b - 2.0 * c);
    };
    std::vector<Knot> knots{{-kInf, 0}, {-1.0, 1.0 - 2.0 * H}, {0.0, 0.5 - H}, {1.0, 1.0 - 2.0 * H}, {h, 0.5 - H}, {kInf, 0}};
    const auto cfg = with_tail(inner_cfg(), std::max(1e4, 100.0 * (std::fabs(h) + 1.0)), 4.5 - 3.0 * H);
    return integrate_knots(KnotIntegrand(f), knots, cfg);
}

QuadResult f_H_small_h_constant(double H)
{
    require_H(H);
    const double p = H - 0.5;
    auto f = [&](double x0, double t) {
        const double a = pw(x0, t, 1.0, p), b = pw(x0, t, -1.0, p), c = pw(x0, t, 0.0, p);
        const double x = rel(x0, t, 0.0);
        return x * std::pow(std::fabs(x), H - 2.5) * (a - b) * (a + b - 2.0 * c);
    };
    std::vector<Knot> knots{{-kInf, 0}, {-1.0, 1.0 - 2.0 * H}, {0.0, 1.0 - 2.0 * H}, {1.0, 1.0 - 2.0 * H}, {kInf, 0}};
    QuadResult r = integrate_knots(KnotIntegrand(f), knots, with_tail(inner_cfg(), 1e4, 5.5 - 3.0 * H));
    r = (0.5 - H) * r;
    r.degenerate = H == 0.5;
    return r;
}

QuadResult f_H_large_h_constant(double H)
{
    require_H(H);
    const double p = H - 0.5;
    auto f = [&](double x0, double t) {
        const double x = rel(x0, t, 0.0);
        if (std::fabs(x) > 2.0) {
            // a - b and a + b - 2c expanded in 1/|x| to avoid cancellation
            const double ax = std::fabs(x);
            const double diff = (x > 0 ? 1.0 : -1.0) * odd_difference(ax, p);
            const double sum2 = -even_second_difference(ax, p);
            return x * diff * sum2;
        }
        const double a = pw(x0, t, 1.0, p), b = pw(x0, t, -1.0, p), c = pw(x0, t, 0.0, p);
        return x * (a - b) * (a + b - 2.0 * c);
    };
    std::vector<Knot> knots{{-kInf, 0}, {-1.0, 1.0 - 2.0 * H}, {0.0, 0.5 - H}, {1.0, 1.0 - 2.0 * H}, {kInf, 0}};
    QuadResult r = integrate_knots(KnotIntegrand(f), knots, with_tail(inner_cfg(), 1e6, 3.0 - 2.0 * H));
    r = (0.5 - H) * r;
    r.degenerate = H == 0.5;
    return r;
}

QuadResult d_H_integral(double H)
{
    if (!(H > 0.0 && H < 1.0 / 6.0)) throw ParamError("d_H needs 0 < H < 1/6");
    auto f = KnotIntegrand([&](double b, double t) { return pw(b, t, -1.0, H - 0.5) * pw(b, t, 0.0, 2.0 * H - 1.0); });
    std::vector<Knot> knots{{-kInf, 0}, {-1.0, 0.5 - H}, {0.0, 1.0 - 2.0 * H}, {kInf, 0}};
    auto cfg = with_tail(inner_cfg(), 1e7, 1.5 - 3.0 * H);
    cfg.rel_tol = 1e-10;
    return integrate_knots(f, knots, cfg);
}

double d_H_closed_form(double H)
{
    if (!(H > 0.0 && H < 1.0 / 6.0)) throw ParamError("d_H needs 0 < H < 1/6");
    const double q = 0.5 - H;
    return std::beta(1.0 - 2.0 * q, 3.0 * q - 1.0) + std::beta(1.0 - 2.0 * q, 1.0 - q) +
           std::beta(1.0 - q, 3.0 * q - 1.0);
}

namespace {

struct PowerFit {
    double alpha = 0.0, A = 0.0, C = 0.0, rss = 0.0;
};

// Weighted least squares of y ≈ A + C x^alpha for fixed alpha (weights 1/y²).
PowerFit fit_fixed_alpha(const std::vector<double>& x, const std::vector<double>& y, double alpha)
{
    double s00 = 0, s01 = 0, s11 = 0, t0 = 0, t1 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = 1.0 / (y[i] * y[i]);
        const double g = std::pow(x[i], alpha);
        s00 += w;
        s01 += w * g;
        s11 += w * g * g;
        t0 += w * y[i];
        t1 += w * g * y[i];
    }
    const double det = s00 * s11 - s01 * s01;
    PowerFit r;
    r.alpha = alpha;
    r.A = (s11 * t0 - s01 * t1) / det;
    r.C = (s00 * t1 - s01 * t0) / det;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = (y[i] - r.A - r.C * std::pow(x[i], alpha)) / y[i];
        r.rss += e * e;
    }
    return r;
}

}  // namespace

SingularityDiagnostics f_H_singularity_check(double H)
{
    require_H(H);
    SingularityDiagnostics d;
    d.H = H;
    d.predicted_exponent = 3.0 * H - 0.5;
    if (std::fabs(H - 1.0 / 6.0) < 1e-9) {
        d.branch = "log";
        const double f6 = f_H_eval(H, 1.0 + 1e-6).value;
        const double f8 = f_H_eval(H, 1.0 + 1e-8).value;
        d.log_slope = (f8 - f6) / std::log(100.0);
        d.ratio_at_min = f8 / std::log(1e8);
        d.deviation = std::fabs(d.log_slope - 2.0) / 2.0;
        d.ok = d.deviation <= 0.1;
        return d;
    }
    if (H < 1.0 / 6.0) {
        d.branch = "power";
        d.d_H = d_H_closed_form(H);
        const int n = 24;
        std::vector<double> xs(n), ys(n);
        for (int i = 0; i < n; ++i) {
            xs[i] = 1e-6 * std::pow(0.05 / 1e-6, static_cast<double>(i) / (n - 1));
            ys[i] = f_H_eval(H, 1.0 + xs[i]).value;
        }
        PowerFit best;
        best.rss = std::numeric_limits<double>::infinity();
        for (double a = -0.9; a <= 0.3; a += 1e-3) {
            if (std::fabs(a) < 5e-4) continue;
            const PowerFit f = fit_fixed_alpha(xs, ys, a);
            if (f.rss < best.rss) best = f;
        }
        // golden-section refinement around the grid minimum
        double lo = best.alpha - 1e-3, hi = best.alpha + 1e-3;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 40; ++it) {
            const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
            if (fit_fixed_alpha(xs, ys, m1).rss < fit_fixed_alpha(xs, ys, m2).rss)
                hi = m2;
            else
                lo = m1;
        }
        best = fit_fixed_alpha(xs, ys, 0.5 * (lo + hi));
        d.fitted_exponent = best.alpha;
        d.fitted_coefficient = best.C;
        d.deviation = std::fabs(best.alpha - d.predicted_exponent);
        d.ok = d.deviation <= 0.03;
        return d;
    }
    d.branch = "bounded";
    d.reference = f_H_eval(H, 0.9).value;
    for (int i = -20; i <= 20; ++i) {
        const double h = 1.0 + 0.01 * i / 21.0;
        d.max_near_one = std::max(d.max_near_one, std::fabs(f_H_eval(H, h).value));
    }
    d.deviation = d.max_near_one / std::fabs(d.reference);
    d.ok = std::isfinite(d.max_near_one) && d.deviation < 10.0;
    return d;
}

// ---------------------------------------------------------------- variance

QuadResult phi_star_phi_deriv(double h, double H, const CutoffSpec& c)
{
    require_H(H);
    if (h == 0.0) throw ParamError("phi_star_phi_deriv needs h != 0");
    const double p = H - 0.5;
    const double R = c.reach() + std::fabs(h);
    auto smooth = KnotIntegrand([&](double b, double t) {
        const double x = rel(b, t, 0.0), y = rel(b, t, -h);
        return c.value(x) * c.derivative(y) * apow(x, p) * apow(y, p);
    });
    const auto cfg = inner_cfg();
    QuadResult r = integrate_knots(smooth, {{-R, 0}, {0.0, 0.5 - H}, {-h, 0.5 - H}, {R, 0}}, cfg);
    if (H != 0.5) {
        auto pv = KnotIntegrand([&](double b, double t) {
            const double x = rel(b, t, 0.0), ym = rel(b, t, h), yp = rel(b, t, -h);
            return c.value(x) * std::pow(x, H - 1.5) * (c.value(ym) * apow(ym, p) - c.value(yp) * apow(yp, p));
        });
        r += p * integrate_knots(pv, {{0.0, 0.5 - H}, {std::fabs(h), 0.5 - H}, {R, 0}}, cfg);
    }
    r.degenerate = H == 0.5;
    return r;
}

QuadResult pv_constant(double H)
{
    require_H(H);
    const double p = H - 0.5;
    auto f = [&](double b, double t) {
        const double x = rel(b, t, 0.0);
        const double w = std::pow(x, H - 1.5);
        if (x > 2.0) return w * odd_difference(x, p);
        return w * (pw(b, t, 1.0, p) - pw(b, t, -1.0, p));
    };
    auto cfg = with_tail(constant_cfg(), 1e6, 3.0 - 2.0 * H);
    QuadResult r = integrate_knots(KnotIntegrand(f), {{0.0, 0.5 - H}, {1.0, 0.5 - H}, {kInf, 0}}, cfg);
    r.degenerate = H == 0.5;
    return r;
}

namespace {

void require_variance_domain(double H, double gamma, const VarianceModel& m)
{
    require_H(H);
    if (!(gamma >= 0.0)) throw ParamError("gamma must be >= 0");
    if (!(2.0 * gamma * gamma < H)) throw ParamError("variance needs gamma^2 < H/2");
    if (!(m.cutoff.L > 0.0)) throw ParamError("cutoff length must be positive");
    if (!(m.Htilde >= 0.0 && 4.0 * gamma * gamma < 2.0 * H + 2.0 * m.Htilde))
        throw ParamError("Htilde outside the admissible range");
}

// s^{2Htilde-1} e^{4γ²Ĉ(s)} on 0 < s <= L.
double driver_weight(double s, double gamma, const VarianceModel& m)
{
    const double L = m.cutoff.L;
    const double base = std::pow(s, 2.0 * m.Htilde - 1.0);
    if (m.covariance == CovarianceModel::Canonical) return base * std::exp(4.0 * gamma * gamma * std::log(L / s));
    return base * std::exp(2.0 * gamma * gamma * khat_autocorrelation_unit(s / L));
}

}  // namespace

QuadResult variance_symmetric(double H, double gamma, const VarianceModel& m)
{
    require_variance_domain(H, gamma, m);
    const double p = H - 0.5;
    const double L = m.cutoff.L;
    const double R = m.cutoff.reach();
    auto phi = [&](double y) { return m.cutoff.value(y) * apow(y, p); };
    auto D = [&](double h) {
        auto f = KnotIntegrand([&](double b, double t) {
            const double v = phi(rel(b, t, -h)) - phi(rel(b, t, 0.0));
            return v * v;
        });
        return integrate_knots(f, {{-h - R, 0}, {-h, 1.0 - 2.0 * H}, {0.0, 1.0 - 2.0 * H}, {R, 0}}, inner_cfg()).value;
    };
    auto outer = [&](double h) { return driver_weight(h, gamma, m) * D(h); };
    const double b = 4.0 * gamma * gamma;
    const double alpha0 = 1.0 - 2.0 * H - 2.0 * m.Htilde + b;
    return integrate_knots(outer, {{0.0, alpha0}, {L, 0}}, outer_cfg());
}

QuadResult variance_ibp(double H, double gamma, const VarianceModel& m)
{
    require_variance_domain(H, gamma, m);
    const double L = m.cutoff.L;
    const double b = 4.0 * gamma * gamma;
    const double c = 2.0 * m.Htilde - b;
    // Ω(h) = -∫_h^L s^{2Htilde-1} e^{4γ²Ĉ(s)} ds
    auto omega = [&](double h) {
        if (m.covariance == CovarianceModel::Canonical) {
            const double t = std::log(h / L);  // <= 0
            const double z = c * t;
            const double rel = z == 0.0 ? 1.0 : std::expm1(z) / z;
            return std::pow(L, 2.0 * m.Htilde) * t * rel;
        }
        QuadratureConfig cfg = inner_cfg();
        cfg.singularity_points = {L};
        return -adaptive_integrate([&](double s) { return driver_weight(s, gamma, m); }, h, L, cfg).value;
    };
    auto outer = [&](double h) { return phi_star_phi_deriv(h, H, m.cutoff).value * omega(h); };
    const double alpha0 = 1.0 - 2.0 * H - std::min(0.0, c);
    QuadResult r = 2.0 * integrate_knots(outer, {{0.0, alpha0}, {L, 0}}, outer_cfg());
    r.degenerate = H == 0.5;
    return r;
}

QuadResult a_gamma_H(double H, double gamma)
{
    require_H(H);
    const double b = 4.0 * gamma * gamma;
    if (!(b < 2.0 * H)) throw ParamError("a_{gamma,H} needs gamma^2 < H/2");
    const double q = 2.0 * H - 1.0;
    auto f = [&](double x0, double t) {
        const double h = rel(x0, t, 0.0);
        const double w = std::pow(h, -b);
        if (h > 2.0) return w * even_second_difference(h, q);
        const double d1 = rel(x0, t, 1.0);
        const double s = d1 > 0.0 ? 1.0 : (d1 < 0.0 ? -1.0 : 0.0);
        return w * (2.0 * std::pow(h, q) - std::pow(h + 1.0, q) - s * std::pow(std::fabs(d1), q));
    };
    auto cfg = with_tail(inner_cfg(), 1e5, 3.0 - 2.0 * H + b);
    return integrate_knots(KnotIntegrand(f), {{0.0, 1.0 - 2.0 * H + b}, {1.0, 1.0 - 2.0 * H}, {kInf, 0}}, cfg);
}

QuadResult increment_variance_constant(double H, double gamma)
{
    require_H(H);
    const double b = 4.0 * gamma * gamma;
    if (!(gamma > 0.0)) throw ParamError("C2 by the double integral needs gamma > 0");
    if (!(b < 2.0 * H)) throw ParamError("C2 needs gamma^2 < H/2");
    const double p = H - 0.5;
    const double beta = 3.0 - 2.0 * H;
    // ψ(y) and ψ(y + h) with the singular centres passed explicitly
    auto psi0 = [&](double b, double t) { return pw(b, t, -0.5, p) - pw(b, t, 0.5, p); };
    auto psih = [&](double b, double t, double h) { return pw(b, t, -h - 0.5, p) - pw(b, t, -h + 0.5, p); };
    auto knots_for = [&](double h, double a_self, double a_shift) {
        std::vector<Knot> k{{-kInf, 0}, {-0.5, a_self}, {0.5, a_self}, {kInf, 0}};
        for (double s : {-h - 0.5, -h + 0.5})
            if (s != -0.5 && s != 0.5) k.push_back({s, a_shift});
        return k;
    };
    const auto cfg = with_tail(inner_cfg(), 1e5, beta);
    const double R0 = integrate_knots(KnotIntegrand([&](double b, double t) {
                                          const double v = psi0(b, t);
                                          return v * v;
                                      }),
                                      knots_for(0.0, 1.0 - 2.0 * H, 0.0), cfg)
                          .value;
    auto corr = [&](double h) {
        auto f = KnotIntegrand([&](double b, double t) { return psi0(b, t) * psih(b, t, h); });
        return integrate_knots(f, knots_for(h, 0.5 - H, 0.5 - H), cfg).value;
    };
    const double switch_h = 4.0;
    auto D = [&](double h) {
        if (h > switch_h) return 2.0 * R0 - 2.0 * corr(h);
        auto f = KnotIntegrand([&](double b, double t) {
            const double v = psih(b, t, h) - psi0(b, t);
            return v * v;
        });
        return integrate_knots(f, knots_for(h, 1.0 - 2.0 * H, 1.0 - 2.0 * H), cfg).value;
    };
    const double T = 1e3;
    auto outer = [&](double h) { return std::pow(h, -1.0 - b) * D(h); };
    QuadResult r = integrate_knots(outer, {{0.0, 1.0 + b - 2.0 * H}, {1.0, 0}, {T, 0}}, outer_cfg());
    // ∫_T^∞ h^{-1-b}(2R0 - 2R(h)) dh with R(h) ∝ h^{2H-2} beyond T
    const double RT = corr(T);
    r.value += 2.0 * R0 * std::pow(T, -b) / b - 2.0 * RT * std::pow(T, -b) / (2.0 - 2.0 * H + b);
    return r;
}

QuadResult increment_variance_constant_pv(double H, double gamma)
{
    if (!(gamma > 0.0)) throw ParamError("C2 by the PV route needs gamma > 0");
    const QuadResult a = a_gamma_H(H, gamma);
    const QuadResult P = pv_constant(H);
    QuadResult r;
    const double s = -(H - 0.5) / (2.0 * gamma * gamma);
    r.value = s * a.value * P.value;
    r.abs_err_estimate = std::fabs(s) * (std::fabs(a.value) * P.abs_err_estimate + std::fabs(P.value) * a.abs_err_estimate);
    r.subdivisions_used = a.subdivisions_used + P.subdivisions_used;
    r.converged = a.converged && P.converged;
    r.degenerate = H == 0.5;
    return r;
}

// ---------------------------------------------------------------- third moment

QuadResult r_gamma_const(double gamma)
{
    const double b = 4.0 * gamma * gamma;
    if (!(b > 0.0 && b < 0.5)) throw ParamError("r_gamma needs 0 < 4 gamma^2 < 1/2");
    const double e = -0.5 - b;
    auto f = [&](double x0, double t) {
        const double x = rel(x0, t, 0.0);
        const double w = std::pow(x, e);
        if (x > 2.0) {
            const double u = 1.0 / x;
            return w * std::pow(x, e) * (std::exp(e * std::log1p(u)) + std::exp(e * std::log1p(-u)));
        }
        const double d1 = rel(x0, t, 1.0);
        const double s = d1 > 0.0 ? 1.0 : -1.0;
        return w * (std::pow(x + 1.0, e) + s * std::pow(std::fabs(d1), e));
    };
    auto cfg = with_tail(constant_cfg(), 1e6, 1.0 + 2.0 * b);
    return integrate_knots(KnotIntegrand(f), {{0.0, 0.5 + b}, {1.0, 0.5 + b}, {kInf, 0}}, cfg);
}

double r_gamma_closed_form(double gamma)
{
    const double b = 4.0 * gamma * gamma;
    if (!(b > 0.0 && b < 0.5)) throw ParamError("r_gamma needs 0 < 4 gamma^2 < 1/2");
    return 2.0 * std::beta(0.5 - b, 2.0 * b) - std::beta(0.5 - b, 0.5 - b);
}

QuadResult c_gamma_eval(double h, double gamma)
{
    const double b = 4.0 * gamma * gamma;
    if (!(b < 0.5)) throw ParamError("C_gamma needs 4 gamma^2 < 1/2");
    h = std::fabs(h);
    if (h == 0.0) throw ParamError("C_gamma is infinite at h = 0");
    QuadResult r;
    r.converged = true;
    if (h >= 2.0) return r;
    const double lo = std::max(-1.0, -1.0 - h), hi = std::min(1.0, 1.0 - h);
    const double e = -0.5 - b;
    auto f = [&](double b0, double t) {
        const double x = rel(b0, t, 0.0), y = rel(b0, t, -h);
        const double s = (x > 0) == (y > 0) ? 1.0 : -1.0;
        return s * std::pow(std::fabs(x), e) * std::pow(std::fabs(y), e);
    };
    std::vector<Knot> k{{lo, 0}, {hi, 0}};
    for (double s : {0.0, -h})
        if (s >= lo && s <= hi) k.push_back({s, 0.5 + b});
    return integrate_knots(KnotIntegrand(f), k, inner_cfg());
}

namespace {

double phi_cut(double x, double p, const CutoffSpec& c)
{
    const double v = c.value(x);
    return v == 0.0 ? 0.0 : v * apow(x, p);
}

}  // namespace

QuadResult phi_ell_star_sq(double h, double ell, double H, const CutoffSpec& c)
{
    require_H(H);
    if (!(ell > 0.0)) throw ParamError("ell must be positive");
    const double p = H - 0.5;
    auto f = KnotIntegrand([&](double x0, double t) {
        const double a = phi_cut(rel(x0, t, ell), p, c), b = phi_cut(rel(x0, t, -ell), p, c);
        return phi_cut(rel(x0, t, h), p, c) * (a - b) * (a + b - 2.0 * phi_cut(rel(x0, t, 0.0), p, c));
    });
    const double R = c.reach();
    std::vector<Knot> k{{std::min(-ell, h) - R, 0}, {-ell, 1.0 - 2.0 * H}, {0.0, 0.5 - H},
                        {ell, 1.0 - 2.0 * H},      {h, 0.5 - H},          {std::max(ell, h) + R, 0}};
    return integrate_knots(f, k, inner_cfg());
}

QuadResult phi_ell_star_sq_direct(double h, double ell, double H, const CutoffSpec& c)
{
    require_H(H);
    if (!(ell > 0.0)) throw ParamError("ell must be positive");
    const double p = H - 0.5;
    const double hl = 0.5 * ell, c1 = -h - hl, c2 = -h + hl;
    auto f = KnotIntegrand([&](double x0, double t) {
        const double s0 = phi_cut(rel(x0, t, -hl), p, c) - phi_cut(rel(x0, t, hl), p, c);
        const double s1 = phi_cut(rel(x0, t, c1), p, c) - phi_cut(rel(x0, t, c2), p, c);
        return s0 * s1 * s1;
    });
    const double R = c.reach() + ell;
    std::vector<Knot> k{{std::min(0.0, -h) - R, 0}, {-hl, 0.5 - H}, {hl, 0.5 - H},
                        {c1, 1.0 - 2.0 * H},       {c2, 1.0 - 2.0 * H}, {std::max(0.0, -h) + R, 0}};
    return integrate_knots(f, k, inner_cfg());
}

QuadResult phi_ell_star_sq_small_h(double ell, double H, const CutoffSpec& c)
{
    require_H(H);
    if (!(ell > 0.0)) throw ParamError("ell must be positive");
    const double p = H - 0.5;
    auto f = KnotIntegrand([&](double x0, double t) {
        const double x = rel(x0, t, 0.0);
        const double a = phi_cut(rel(x0, t, ell), p, c), b = phi_cut(rel(x0, t, -ell), p, c);
        const double lead = (0.5 - H) * c.value(x) - x * c.derivative(x);
        return lead * x * apow(x, H - 2.5) * (a - b) * (a + b - 2.0 * phi_cut(x, p, c));
    });
    const double R = c.reach() + ell;
    const double a0 = H < 0.5 ? 1.0 - 2.0 * H : 0.5 - H;
    std::vector<Knot> k{{-R, 0}, {-ell, 1.0 - 2.0 * H}, {0.0, a0}, {ell, 1.0 - 2.0 * H}, {R, 0}};
    return integrate_knots(f, k, inner_cfg());
}

QuadResult third_moment_f_integral(double H, double gamma)
{
    require_H(H);
    const double e = -0.5 - 12.0 * gamma * gamma;
    if (!(12.0 * gamma * gamma < 1.5)) throw ParamError("third moment needs gamma^2 < 1/8");
    auto f = [&](double h) { return f_H_eval(H, h).value * std::pow(h, e); };
    auto cfg = with_tail(outer_cfg(), 1e4, 2.0 - H + 12.0 * gamma * gamma);
    cfg.rel_tol = 1e-7;
    cfg.abs_tol = 1e-11;
    return integrate_knots(f, {{0.0, 0}, {1.0, 0.5 - 3.0 * H}, {kInf, 0}}, cfg);
}

QuadResult third_moment_prediction(double ell, const ModelParams& p, ThirdMomentMode mode)
{
    require_H(p.H);
    if (!(ell > 0.0 && ell < 1.0)) throw ParamError("ell must lie in (0, 1)");
    const double H = p.H;
    const double g2 = p.gamma * p.gamma;
    if (!(g2 < 0.125)) throw ParamError("third moment needs gamma^2 < 1/8");
    const CutoffSpec c{p.cutoff, 1.0};
    if (mode == ThirdMomentMode::Exact) {
        const double e = -0.5 - 4.0 * g2;
        auto f = [&](double h) {
            const double C = p.gamma == 0.0 ? khat_autocorrelation_unit(h) : c_gamma_eval(h, p.gamma).value;
            return phi_ell_star_sq(h, ell, H, c).value * std::pow(h, e) * C;
        };
        auto cfg = outer_cfg();
        cfg.rel_tol = 1e-7;
        cfg.abs_tol = 1e-16;
        QuadResult r = -12.0 * integrate_knots(f, {{0.0, 0}, {ell, 0.5 - 3.0 * H}, {1.0, 0}}, cfg);
        r.degenerate = H == 0.5;
        return r;
    }
    const QuadResult I = third_moment_f_integral(H, p.gamma);
    const double phi0 = c.value(0.0);
    double scale;
    if (p.gamma == 0.0)
        scale = -24.0 * std::pow(ell, 3.0 * H) * std::log(1.0 / ell);
    else
        scale = -12.0 * r_gamma_const(p.gamma).value * std::pow(ell, 3.0 * H - 12.0 * g2);
    QuadResult r = (scale * phi0 * phi0 * phi0) * I;
    r.degenerate = H == 0.5;
    return r;
}

}  // namespace skewfield
