#include "skewfield/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>

namespace skewfield {

QuadResult& operator+=(QuadResult& a, const QuadResult& b)
{
    a.value += b.value;
    a.abs_err_estimate += b.abs_err_estimate;
    a.subdivisions_used += b.subdivisions_used;
    a.converged = a.converged && b.converged;
    a.degenerate = a.degenerate || b.degenerate;
    return a;
}

QuadResult operator*(double s, QuadResult r)
{
    r.value *= s;
    r.abs_err_estimate *= std::fabs(s);
    return r;
}

namespace {

// Kronrod 15 / Gauss 7 nodes and weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Closed Newton-Cotes 9-point weights, scaled by 4h/14175.
constexpr std::array<double, 9> kNc9 = {989.0, 5888.0, -928.0, 10496.0, -4540.0, 10496.0, -928.0, 5888.0, 989.0};

struct Panel {
    double a = 0.0, b = 0.0;
    bool sing_a = false, sing_b = false;
    double value = 0.0, err = 0.0;
    std::array<double, 9> f{};  // samples at a + i(b-a)/8 when neither end is singular
    bool operator<(const Panel& o) const { return err < o.err; }
};

class Engine {
public:
    explicit Engine(const Integrand& f) : f_(f) {}

    double eval(double x)
    {
        const double v = f_(x);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os.precision(17);
            os << "non-finite integrand value at x = " << x;
            throw QuadratureError(os.str());
        }
        return v;
    }

    void gk15(Panel& p)
    {
        const double c = 0.5 * (p.a + p.b);
        const double h = 0.5 * (p.b - p.a);
        const double fc = eval(c);
        double k = fc * kWgk[7];
        double g = fc * kWg[3];
        for (int j = 0; j < 7; ++j) {
            const double dx = h * kXgk[j];
            const double s = eval(c - dx) + eval(c + dx);
            k += kWgk[j] * s;
            if (j % 2 == 1) g += kWg[j / 2] * s;
        }
        p.value = k * h;
        p.err = std::fabs((k - g) * h);
    }

    void nc(Panel& p)
    {
        const double h = (p.b - p.a) / 8.0;
        double q9 = 0.0;
        for (int i = 0; i < 9; ++i) q9 += kNc9[i] * p.f[i];
        q9 *= 4.0 * h / 14175.0;
        const double q5 = 2.0 * (2.0 * h) / 45.0 * (7.0 * p.f[0] + 32.0 * p.f[2] + 12.0 * p.f[4] + 32.0 * p.f[6] + 7.0 * p.f[8]);
        p.value = q9;
        p.err = std::fabs(q9 - q5);
    }

    Panel make(double a, double b, bool sa, bool sb)
    {
        Panel p;
        p.a = a;
        p.b = b;
        p.sing_a = sa;
        p.sing_b = sb;
        if (sa || sb) {
            gk15(p);
        } else {
            const double h = (b - a) / 8.0;
            for (int i = 0; i < 9; ++i) p.f[i] = eval(i == 8 ? b : a + h * i);
            nc(p);
        }
        return p;
    }

    // Children reuse the parent's closed samples.
    std::pair<Panel, Panel> split(const Panel& p)
    {
        const double m = 0.5 * (p.a + p.b);
        if (p.sing_a || p.sing_b) return {make(p.a, m, p.sing_a, false), make(m, p.b, false, p.sing_b)};
        Panel l, r;
        l.a = p.a;
        l.b = m;
        r.a = m;
        r.b = p.b;
        const double h = (m - p.a) / 8.0;
        for (int i = 0; i < 5; ++i) {
            l.f[2 * i] = p.f[i];
            r.f[2 * i] = p.f[4 + i];
        }
        for (int i = 0; i < 4; ++i) {
            l.f[2 * i + 1] = eval(p.a + h * (2 * i + 1));
            r.f[2 * i + 1] = eval(m + h * (2 * i + 1));
        }
        nc(l);
        nc(r);
        return {l, r};
    }

private:
    const Integrand& f_;
};

QuadResult integrate_finite(const Integrand& f, double a, double b, const QuadratureConfig& cfg)
{
    QuadResult res;
    if (a == b) {
        res.converged = true;
        return res;
    }
    std::vector<double> cuts{a, b};
    for (double s : cfg.singularity_points)
        if (s >= a && s <= b) cuts.push_back(s);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto singular = [&](double x) {
        return std::find(cfg.singularity_points.begin(), cfg.singularity_points.end(), x) !=
               cfg.singularity_points.end();
    };

    Engine eng(f);
    std::priority_queue<Panel> heap;
    std::vector<Panel> frozen;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        heap.push(eng.make(cuts[i], cuts[i + 1], singular(cuts[i]), singular(cuts[i + 1])));

    auto totals = [&](double& v, double& e) {
        v = 0.0;
        e = 0.0;
        auto copy = heap;
        while (!copy.empty()) {
            v += copy.top().value;
            e += copy.top().err;
            copy.pop();
        }
        for (const Panel& p : frozen) {
            v += p.value;
            e += p.err;
        }
    };

    double value = 0.0, err = 0.0;
    totals(value, err);
    int subdiv = 0;
    while (!heap.empty()) {
        const double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(value));
        if (err <= tol || subdiv >= cfg.max_subdivisions) break;
        Panel worst = heap.top();
        heap.pop();
        const double width = worst.b - worst.a;
        const double mid = 0.5 * (worst.a + worst.b);
        if (width <= 64.0 * std::numeric_limits<double>::epsilon() * std::max({1e-300, std::fabs(worst.a), std::fabs(worst.b)}) ||
            mid <= worst.a || mid >= worst.b) {
            frozen.push_back(worst);
            continue;
        }
        auto [l, r] = eng.split(worst);
        value += l.value + r.value - worst.value;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        ++subdiv;
        if (subdiv % 256 == 0) totals(value, err);
    }
    totals(value, err);
    res.value = value;
    res.abs_err_estimate = err;
    res.subdivisions_used = subdiv;
    res.converged = err <= std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(value));
    return res;
}

double tail_estimate(const Integrand& f, double x, double beta, double& err)
{
    const double ax = std::fabs(x);
    const double fx = f(x);
    const double fh = f(0.5 * x);
    const double tail = fx * ax / (beta - 1.0);
    if (fx != 0.0 && fh != 0.0 && (fx > 0.0) == (fh > 0.0)) {
        const double local = std::log(fh / fx) / std::log(2.0);
        err = local > 1.0 ? std::fabs(tail - fx * ax / (local - 1.0)) : std::fabs(tail);
    } else {
        err = std::fabs(tail);
    }
    return tail;
}

}  // namespace

QuadResult adaptive_integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg)
{
    if (!(a < b)) throw QuadratureError("adaptive_integrate requires a < b");
    if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0)) throw QuadratureError("tolerances must be positive");
    if (cfg.max_subdivisions < 16) throw QuadratureError("max_subdivisions must be >= 16");
    const bool inf_a = std::isinf(a);
    const bool inf_b = std::isinf(b);
    const double lo = inf_a ? -cfg.tail_cut : a;
    const double hi = inf_b ? cfg.tail_cut : b;
    if ((inf_a || inf_b) && !(lo < hi)) throw QuadratureError("tail_cut does not exceed the finite bound");
    QuadResult r = integrate_finite(f, lo, hi, cfg);
    if (cfg.tail_extrapolation == TailExtrapolation::PowerLaw && (inf_a || inf_b)) {
        if (!(cfg.tail_exponent > 1.0)) throw QuadratureError("power-law tail needs exponent > 1");
        double e = 0.0;
        if (inf_b) {
            r.value += tail_estimate(f, hi, cfg.tail_exponent, e);
            r.abs_err_estimate += e;
        }
        if (inf_a) {
            r.value += tail_estimate(f, lo, cfg.tail_exponent, e);
            r.abs_err_estimate += e;
        }
        r.converged = r.converged && r.abs_err_estimate <= std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(r.value));
    }
    return r;
}

QuadResult integrate_left_singular(const Integrand& f, double a, double b, double alpha, const QuadratureConfig& cfg)
{
    if (!(alpha < 1.0)) throw QuadratureError("endpoint exponent must be < 1");
    if (alpha <= 0.0) return adaptive_integrate(f, a, b, cfg);
    const double m = 1.0 / (1.0 - alpha);
    const double w = b - a;
    QuadratureConfig c = cfg;
    c.singularity_points.clear();
    c.singularity_points.push_back(0.0);
    for (double s : cfg.singularity_points)
        if (s > a && s < b) c.singularity_points.push_back(std::pow((s - a) / w, 1.0 / m));
    // Below s_floor the offset w s^m is under 1e-280 w; there g(s) equals its limit at s = 0
    // to full precision, while f itself would overflow for alpha near 1.
    const double s_floor = std::pow(1e-280, 1.0 / m);
    auto g = [&](double s) {
        s = std::max(s, s_floor);
        const double sm1 = std::pow(s, m - 1.0);
        double x = a + w * sm1 * s;
        // distances below one ulp of a are not representable
        if (x == a) x = std::nextafter(a, b);
        return f(x) * w * m * sm1;
    };
    return adaptive_integrate(g, 0.0, 1.0, c);
}

QuadResult integrate_right_singular(const Integrand& f, double a, double b, double alpha, const QuadratureConfig& cfg)
{
    QuadratureConfig c = cfg;
    for (double& s : c.singularity_points) s = -s;
    return integrate_left_singular([&](double x) { return f(-x); }, -b, -a, alpha, c);
}

}  // namespace skewfield
