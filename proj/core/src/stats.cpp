#include "skewfield/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace skewfield {

FixedSum::FixedSum(double max_abs, std::uint64_t count)
{
    if (!(max_abs > 0.0) || !std::isfinite(max_abs)) return;
    int e = 0;
    std::frexp(max_abs, &e);  // max_abs < 2^e
    const int log2n = static_cast<int>(std::bit_width(std::max<std::uint64_t>(count, 1)));
    const int budget = 61 - log2n;  // |Σ hi| < 2^61
    const int shift = budget - e;
    scale_ = std::ldexp(1.0, shift);
    inv_scale_ = std::ldexp(1.0, -shift);
}

double FixedSum::value() const
{
    const long double v = static_cast<long double>(hi_) + static_cast<long double>(lo_) * 0x1.0p-20L;
    return static_cast<double>(v * static_cast<long double>(inv_scale_));
}

double reproducible_sum(std::span<const double> x)
{
    double m = 0.0;
    for (double v : x) m = std::max(m, std::fabs(v));
    FixedSum s(m, x.size());
    for (double v : x) s.add(v);
    return s.value();
}

std::vector<double> increments(std::span<const double> u, std::uint64_t ell_cells)
{
    const std::uint64_t n = u.size();
    if (ell_cells < 1 || ell_cells >= n) throw StatsError("increment lag out of range");
    std::vector<double> d(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint64_t j = i + ell_cells;
        if (j >= n) j -= n;
        d[i] = u[j] - u[i];
    }
    return d;
}

std::vector<std::uint64_t> dyadic_scales(const ModelParams& p)
{
    std::vector<std::uint64_t> s;
    const double top = static_cast<double>(p.N) * p.L / 4.0;
    for (std::uint64_t c = 1; static_cast<double>(c) <= top && c < p.N; c *= 2) s.push_back(c);
    return s;
}

namespace {

bool is_integer_q(double q, int& k)
{
    if (q >= 1.0 && q <= 8.0 && q == std::floor(q)) {
        k = static_cast<int>(q);
        return true;
    }
    return false;
}

double ipow(double a, int k)
{
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= a;
    return r;
}

ScaleRow scale_row(std::span<const double> u, double dx, std::uint64_t ell, std::span<const double> q_list)
{
    const std::uint64_t n = u.size();
    if (ell < 1 || ell >= n) throw StatsError("scale out of range");
    ScaleRow r;
    r.ell_cells = ell;
    r.scale = static_cast<double>(ell) * dx;
    r.count = n;

    auto delta = [&](std::uint64_t i) {
        std::uint64_t j = i + ell;
        if (j >= n) j -= n;
        return u[j] - u[i];
    };

    double mx = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) mx = std::max(mx, std::fabs(delta(i)));

    FixedSum s1(mx, n), s2(mx * mx, n), s3(mx * mx * mx, n), s4(mx * mx * mx * mx, n);
    std::vector<FixedSum> sq;
    std::vector<int> qi(q_list.size(), 0);
    sq.reserve(q_list.size());
    for (std::size_t k = 0; k < q_list.size(); ++k) {
        if (!(q_list[k] > 0.0)) throw StatsError("q must be positive");
        is_integer_q(q_list[k], qi[k]);
        sq.emplace_back(std::pow(mx, q_list[k]) * (1.0 + 1e-12), n);
    }

    for (std::uint64_t i = 0; i < n; ++i) {
        const double d = delta(i);
        const double d2 = d * d;
        s1.add(d);
        s2.add(d2);
        s3.add(d2 * d);
        s4.add(d2 * d2);
        const double ad = std::fabs(d);
        for (std::size_t k = 0; k < sq.size(); ++k)
            sq[k].add(qi[k] != 0 ? ipow(ad, qi[k]) : std::pow(ad, q_list[k]));
    }
    const double inv = 1.0 / static_cast<double>(n);
    r.m1 = s1.value() * inv;
    r.m2 = s2.value() * inv;
    r.m3 = s3.value() * inv;
    r.m4 = s4.value() * inv;
    r.abs_q.resize(sq.size());
    for (std::size_t k = 0; k < sq.size(); ++k) r.abs_q[k] = sq[k].value() * inv;
    r.skewness = r.m2 > 0.0 ? r.m3 / std::pow(r.m2, 1.5) : 0.0;
    r.flatness = r.m2 > 0.0 ? r.m4 / (r.m2 * r.m2) : 0.0;
    return r;
}

}  // namespace

IncrementStats moment_table(std::span<const double> u, double dx, std::span<const std::uint64_t> scales_cells,
                            std::span<const double> q_list)
{
    if (scales_cells.empty()) throw StatsError("no scales requested");
    for (std::size_t i = 1; i < scales_cells.size(); ++i)
        if (scales_cells[i] <= scales_cells[i - 1]) throw StatsError("scales must be strictly increasing");
    IncrementStats s;
    s.q_list.assign(q_list.begin(), q_list.end());
    s.rows.reserve(scales_cells.size());
    for (std::uint64_t ell : scales_cells) s.rows.push_back(scale_row(u, dx, ell, q_list));
    return s;
}

IncrementStats moment_table(const FieldRealization& f, std::span<const std::uint64_t> scales_cells,
                            std::span<const double> q_list)
{
    return moment_table(f.samples, f.params.dx(), scales_cells, q_list);
}

FieldMoments field_moments(std::span<const double> u)
{
    double mx = 0.0;
    for (double v : u) mx = std::max(mx, std::fabs(v));
    FixedSum s1(mx, u.size()), s2(mx * mx, u.size());
    for (double v : u) {
        s1.add(v);
        s2.add(v * v);
    }
    const double inv = 1.0 / static_cast<double>(u.size());
    return {s1.value() * inv, s2.value() * inv};
}

Histogram histogram_standardized(std::span<const double> values, double sigma, std::size_t bins, double clip)
{
    if (!(sigma > 0.0)) throw StatsError("degenerate scale: zero variance");
    if (bins == 0 || !(clip > 0.0)) throw StatsError("invalid histogram shape");
    Histogram h;
    h.clip = clip;
    h.sigma = sigma;
    h.edges.resize(bins + 1);
    const double w = 2.0 * clip / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = -clip + w * static_cast<double>(i);
    h.counts.assign(bins, 0);
    for (double v : values) {
        const double z = v / sigma;
        ++h.n_total;
        if (z < -clip) {
            ++h.underflow;
        } else if (z >= clip) {
            ++h.overflow;
        } else {
            auto b = static_cast<std::size_t>((z + clip) / w);
            if (b >= bins) b = bins - 1;
            ++h.counts[b];
        }
    }
    return h;
}

Histogram standardized_pdf(std::span<const double> u, double dx, std::uint64_t ell_cells, std::size_t bins,
                           double clip)
{
    const std::vector<double> d = increments(u, ell_cells);
    double mx = 0.0;
    for (double v : d) mx = std::max(mx, std::fabs(v));
    FixedSum s2(mx * mx, d.size());
    for (double v : d) s2.add(v * v);
    const double m2 = s2.value() / static_cast<double>(d.size());
    Histogram h = histogram_standardized(d, std::sqrt(m2), bins, clip);
    h.ell_cells = ell_cells;
    h.scale = static_cast<double>(ell_cells) * dx;
    return h;
}

void merge_into(Histogram& acc, const Histogram& h)
{
    if (acc.counts.empty()) {
        acc = h;
        return;
    }
    if (acc.counts.size() != h.counts.size() || acc.clip != h.clip || acc.ell_cells != h.ell_cells)
        throw StatsError("histogram shapes differ");
    for (std::size_t i = 0; i < acc.counts.size(); ++i) acc.counts[i] += h.counts[i];
    acc.n_total += h.n_total;
    acc.underflow += h.underflow;
    acc.overflow += h.overflow;
}

FitResult least_squares_line(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw StatsError("least squares needs >= 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        rss += e * e;
    }
    f.residual_rms = std::sqrt(rss / static_cast<double>(n));
    f.points = n;
    return f;
}

FitResult fit_scaling_exponent(const IncrementStats& s, double q, FitRange range, FitMode mode)
{
    std::size_t col = s.q_list.size();
    if (mode == FitMode::AbsMoment) {
        for (std::size_t k = 0; k < s.q_list.size(); ++k)
            if (s.q_list[k] == q) col = k;
        if (col == s.q_list.size() && q != 2.0 && q != 4.0) throw StatsError("q not present in the moment table");
    }
    std::vector<double> x, y;
    const double tol = 1e-9;
    for (const ScaleRow& r : s.rows) {
        if (r.scale < range.lmin * (1.0 - tol) || r.scale > range.lmax * (1.0 + tol)) continue;
        double v = 0.0;
        if (mode == FitMode::NegativeThird) {
            if (!(r.m3 < 0.0)) {
                std::ostringstream os;
                os << "signed third moment is not negative at scale " << r.scale << " (m3 = " << r.m3 << ")";
                throw StatsError(os.str());
            }
            v = -r.m3;
        } else if (col < s.q_list.size()) {
            v = r.abs_q[col];
        } else {
            v = q == 2.0 ? r.m2 : r.m4;
        }
        if (!(v > 0.0)) throw StatsError("non-positive moment inside the fit range");
        x.push_back(std::log(r.scale));
        y.push_back(std::log(v));
    }
    if (x.size() < 5) throw StatsError("fewer than 5 scales inside the fit range");
    FitResult f = least_squares_line(x, y);
    f.range = range;
    return f;
}

EnsembleStats ensemble_average(std::span<const IncrementStats> list)
{
    if (list.empty()) throw StatsError("empty ensemble");
    const IncrementStats& first = list.front();
    for (const IncrementStats& s : list) {
        if (s.q_list != first.q_list || s.rows.size() != first.rows.size())
            throw StatsError("mismatched moment tables");
        for (std::size_t r = 0; r < s.rows.size(); ++r)
            if (s.rows[r].ell_cells != first.rows[r].ell_cells || s.rows[r].scale != first.rows[r].scale)
                throw StatsError("mismatched moment tables");
    }
    const std::size_t k = list.size();
    const double kd = static_cast<double>(k);
    EnsembleStats e;
    e.replicates = k;
    e.mean = first;
    e.se = first;

    auto mean_se = [&](auto get, double& mean, double& se) {
        double s = 0.0;
        for (const IncrementStats& t : list) s += get(t);
        mean = s / kd;
        if (k < 2) {
            se = 0.0;
            return;
        }
        double ss = 0.0;
        for (const IncrementStats& t : list) ss += (get(t) - mean) * (get(t) - mean);
        se = std::sqrt(ss / (kd - 1.0) / kd);
    };

    for (std::size_t r = 0; r < first.rows.size(); ++r) {
        ScaleRow& m = e.mean.rows[r];
        ScaleRow& se = e.se.rows[r];
        std::uint64_t count = 0;
        for (const IncrementStats& t : list) count += t.rows[r].count;
        m.count = count;
        se.count = count;
        mean_se([&](const IncrementStats& t) { return t.rows[r].m1; }, m.m1, se.m1);
        mean_se([&](const IncrementStats& t) { return t.rows[r].m2; }, m.m2, se.m2);
        mean_se([&](const IncrementStats& t) { return t.rows[r].m3; }, m.m3, se.m3);
        mean_se([&](const IncrementStats& t) { return t.rows[r].m4; }, m.m4, se.m4);
        for (std::size_t c = 0; c < first.q_list.size(); ++c)
            mean_se([&](const IncrementStats& t) { return t.rows[r].abs_q[c]; }, m.abs_q[c], se.abs_q[c]);
        m.skewness = m.m2 > 0.0 ? m.m3 / std::pow(m.m2, 1.5) : 0.0;
        m.flatness = m.m2 > 0.0 ? m.m4 / (m.m2 * m.m2) : 0.0;
        se.skewness = 0.0;
        se.flatness = 0.0;
        if (k >= 2) {
            double t2 = 0.0, t3 = 0.0, t4 = 0.0;
            for (const IncrementStats& t : list) {
                t2 += t.rows[r].m2;
                t3 += t.rows[r].m3;
                t4 += t.rows[r].m4;
            }
            std::vector<double> sk(k), fl(k);
            double msk = 0.0, mfl = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                const double a2 = (t2 - list[i].rows[r].m2) / (kd - 1.0);
                const double a3 = (t3 - list[i].rows[r].m3) / (kd - 1.0);
                const double a4 = (t4 - list[i].rows[r].m4) / (kd - 1.0);
                sk[i] = a3 / std::pow(a2, 1.5);
                fl[i] = a4 / (a2 * a2);
                msk += sk[i];
                mfl += fl[i];
            }
            msk /= kd;
            mfl /= kd;
            double ssk = 0.0, sfl = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                ssk += (sk[i] - msk) * (sk[i] - msk);
                sfl += (fl[i] - mfl) * (fl[i] - mfl);
            }
            se.skewness = std::sqrt(ssk * (kd - 1.0) / kd);
            se.flatness = std::sqrt(sfl * (kd - 1.0) / kd);
        }
    }
    return e;
}

JackknifeEstimate jackknife_fit(std::span<const IncrementStats> list, double q, FitRange range, FitMode mode)
{
    return jackknife(list, [&](const IncrementStats& s) { return fit_scaling_exponent(s, q, range, mode).slope; });
}

}  // namespace skewfield
