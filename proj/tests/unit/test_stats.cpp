#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "skewfield/ensemble.hpp"
#include "skewfield/lattice.hpp"
#include "skewfield/rng.hpp"
#include "skewfield/stats.hpp"
#include "skewfield/synth.hpp"

using namespace skewfield;

namespace {

ModelParams sized(ModelParams p, std::uint64_t N)
{
    p.N = N;
    p.epsilon = 2.0 / static_cast<double>(N);
    p.seed = 5;
    return p;
}

std::vector<double> noise(std::size_t n, std::uint64_t seed)
{
    std::vector<double> v(n);
    CounterRng(seed, 0, 0).fill_normal(v, 1.0);
    return v;
}

const std::vector<double> kQ{1.0, 2.0, 3.0, 2.5};

}  // namespace

TEST_CASE("increments")
{
    const std::vector<double> c(64, 3.0);
    for (double d : increments(c, 5)) CHECK(d == 0.0);
    CHECK_THROWS_AS(increments(c, 64), StatsError);
    CHECK_THROWS_AS(increments(c, 0), StatsError);
    const auto u = noise(64, 1);
    const auto d = increments(u, 7);
    CHECK(std::fabs(std::accumulate(d.begin(), d.end(), 0.0)) < 1e-12);
    CHECK(d[60] == u[3] - u[60]);
}

TEST_CASE("fixed-point sums are order independent")
{
    auto v = noise(10000, 2);
    for (double& x : v) x *= 1e3;
    const double a = reproducible_sum(v);
    std::reverse(v.begin(), v.end());
    CHECK(reproducible_sum(v) == a);
    std::sort(v.begin(), v.end());
    CHECK(reproducible_sum(v) == a);
    long double ref = 0;
    for (double x : v) ref += x;
    CHECK(a == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
}

TEST_CASE("moment table invariants")
{
    const FieldRealization f = synthesize(sized(turbulence_preset(), 1u << 12), 0);
    const std::vector<std::uint64_t> sc{1, 2, 8, 32, 100};
    const IncrementStats t = moment_table(f, sc, kQ);
    REQUIRE(t.rows.size() == sc.size());

    std::vector<double> shifted(f.samples.size()), neg(f.samples.size());
    std::rotate_copy(f.samples.begin(), f.samples.begin() + 777, f.samples.end(), shifted.begin());
    std::transform(f.samples.begin(), f.samples.end(), neg.begin(), [](double x) { return -x; });
    const IncrementStats ts = moment_table(shifted, f.params.dx(), sc, kQ);
    const IncrementStats tn = moment_table(neg, f.params.dx(), sc, kQ);
    for (std::size_t i = 0; i < sc.size(); ++i) {
        const ScaleRow &r = t.rows[i], &s = ts.rows[i], &n = tn.rows[i];
        CHECK(r.scale == doctest::Approx(static_cast<double>(sc[i]) / 4096.0));
        CHECK(s.m1 == r.m1);
        CHECK(s.m2 == r.m2);
        CHECK(s.m3 == r.m3);
        CHECK(s.m4 == r.m4);
        CHECK(s.abs_q == r.abs_q);
        CHECK(n.m1 == -r.m1);
        CHECK(n.m3 == -r.m3);
        CHECK(n.m2 == r.m2);
        CHECK(n.m4 == r.m4);
        CHECK(n.abs_q == r.abs_q);
        CHECK(r.flatness >= r.skewness * r.skewness + 1.0);
        CHECK(r.abs_q[1] == doctest::Approx(r.m2).epsilon(1e-14));
        CHECK(std::fabs(r.m1) < 1e-12);
    }
    CHECK_THROWS_AS(moment_table(f, std::vector<std::uint64_t>{4, 2}, kQ), StatsError);
}

TEST_CASE("dyadic scales stop at NL/4")
{
    const ModelParams p = sized(turbulence_preset(), 1u << 12);
    const auto s = dyadic_scales(p);
    CHECK(s.front() == 1);
    CHECK(s.back() == 256);  // 4096/3/4 = 341
}

TEST_CASE("power-law fits")
{
    IncrementStats s;
    s.q_list = {1.0, 2.0};
    for (int j = 0; j < 10; ++j) {
        ScaleRow r;
        r.scale = std::pow(2.0, -j);
        r.abs_q = {std::pow(r.scale, 0.7), std::pow(r.scale, 1.3)};
        r.m2 = r.abs_q[1];
        r.m3 = -2.0 * r.scale;
        s.rows.insert(s.rows.begin(), r);
    }
    const FitRange all{1e-4, 1.0};
    const FitResult f = fit_scaling_exponent(s, 1.0, all);
    CHECK(f.slope == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(f.residual_rms < 1e-12);
    CHECK(f.points == 10);
    CHECK(fit_scaling_exponent(s, 3.0, all, FitMode::NegativeThird).slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit_scaling_exponent(s, 2.0, FitRange{0.01, 0.3}).points == 5);
    CHECK_THROWS_AS(fit_scaling_exponent(s, 5.0, all), StatsError);
    CHECK_THROWS_AS(fit_scaling_exponent(s, 1.0, FitRange{0.2, 1.0}), StatsError);
    s.rows[3].m3 = 1e-3;
    CHECK_THROWS_AS(fit_scaling_exponent(s, 3.0, all, FitMode::NegativeThird), StatsError);
}

TEST_CASE("ensemble averages")
{
    const FieldRealization f = synthesize(sized(turbulence_preset(), 1u << 10), 0);
    const std::vector<std::uint64_t> sc{1, 4};
    const IncrementStats t = moment_table(f, sc, kQ);
    const std::vector<IncrementStats> one{t}, same{t, t, t};
    const EnsembleStats e1 = ensemble_average(one);
    CHECK(e1.mean.rows[1].m2 == t.rows[1].m2);
    CHECK(e1.replicates == 1);
    const EnsembleStats e3 = ensemble_average(same);
    CHECK(e3.mean.rows[0].m3 == doctest::Approx(t.rows[0].m3).epsilon(1e-15));
    CHECK(e3.se.rows[0].m2 == 0.0);

    // standard errors shrink like 1/sqrt(K)
    auto synth_table = [](std::uint64_t seed) {
        IncrementStats s;
        s.q_list = {2.0};
        ScaleRow r;
        r.scale = 1.0;
        const auto v = noise(4, seed);
        r.m2 = 1.0 + v[0];
        r.m3 = v[1];
        r.m4 = 3.0 + v[2];
        r.abs_q = {r.m2};
        s.rows.push_back(r);
        return s;
    };
    std::vector<double> ratio;
    for (std::size_t K : {64u, 256u, 1024u}) {
        std::vector<IncrementStats> list;
        for (std::uint64_t i = 0; i < K; ++i) list.push_back(synth_table(100 + i));
        ratio.push_back(ensemble_average(list).se.rows[0].m2 * std::sqrt(static_cast<double>(K)));
    }
    for (double r : ratio) CHECK(r == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("jackknife of a linear statistic equals the standard error")
{
    std::vector<IncrementStats> list;
    for (std::uint64_t i = 0; i < 40; ++i) {
        IncrementStats s;
        s.q_list = {2.0};
        ScaleRow r;
        r.scale = 1.0;
        r.m2 = 1.0 + noise(1, 500 + i)[0];
        r.m4 = 3.0;
        r.abs_q = {r.m2};
        s.rows.push_back(r);
        list.push_back(s);
    }
    const JackknifeEstimate j = jackknife(std::span<const IncrementStats>(list), [](const IncrementStats& s) { return s.rows[0].m2; });
    CHECK(j.se == doctest::Approx(ensemble_average(list).se.rows[0].m2).epsilon(1e-10));
}

TEST_CASE("gaussian baseline: skewness zero and flatness three")
{
    const ModelParams p = sized(baseline_preset(), 1u << 14);
    EnsembleConfig cfg;
    cfg.replicates = 24;
    cfg.scales_cells = {1, 4, 16, 64, 256};
    const EnsembleResult e = run_ensemble(p, cfg);
    for (std::size_t i = 0; i < cfg.scales_cells.size(); ++i) {
        const ScaleRow &m = e.pooled.mean.rows[i], &s = e.pooled.se.rows[i];
        CHECK(std::fabs(m.skewness) < 5.0 * s.skewness);
        CHECK(std::fabs(m.flatness - 3.0) < 5.0 * s.flatness);
    }
}

TEST_CASE("skewed preset: negative third moment and heavier left tail")
{
    const ModelParams p = sized(turbulence_preset(), 1u << 16);
    EnsembleConfig cfg;
    cfg.replicates = 4;
    cfg.scales_cells = {2, 8, 32, 128, 512, 2048};
    cfg.pdf_scales_cells = {1};
    cfg.pdf_bins = 64;
    const EnsembleResult e = run_ensemble(p, cfg);
    for (const ScaleRow& r : e.pooled.mean.rows) CHECK(r.m3 < 0.0);
    const Histogram& h = e.pdfs.at(0);
    std::uint64_t left = h.underflow, right = h.overflow;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        if (h.edges[b + 1] <= -3.0) left += h.counts[b];
        if (h.edges[b] >= 3.0) right += h.counts[b];
    }
    CHECK(left > right);
}

TEST_CASE("histogram bookkeeping")
{
    const std::vector<double> v{-10, -1, -0.5, 0.0, 0.25, 3.9, 4.0, 12};
    const Histogram h = histogram_standardized(v, 1.0, 8, 4.0);
    CHECK(h.edges.size() == 9);
    CHECK(h.edges.front() == -4.0);
    CHECK(h.edges.back() == 4.0);
    CHECK(h.underflow == 1);
    CHECK(h.overflow == 2);
    CHECK(h.n_total == v.size());
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}) + h.underflow + h.overflow == h.n_total);
    CHECK_THROWS_AS(histogram_standardized(v, 0.0, 8, 4.0), StatsError);
    Histogram acc = h;
    merge_into(acc, h);
    CHECK(acc.n_total == 2 * h.n_total);
    CHECK_THROWS_AS(merge_into(acc, histogram_standardized(v, 1.0, 4, 4.0)), StatsError);
    CHECK_THROWS_AS(standardized_pdf(std::vector<double>(32, 1.0), 1.0 / 32, 4, 8, 8.0), StatsError);
}

TEST_CASE("baseline increments at ell ~ L are standard normal")
{
    // With the compact cutoff, increments from distinct fields are independent draws.
    ModelParams p = sized(baseline_preset(), 1u << 10);
    p.cutoff = Cutoff::Bump;
    const std::uint64_t ell = 341;  // ~ L
    const std::vector<std::uint64_t> one{ell};
    const double sigma = std::sqrt(lattice_increment_moments(p, one).m2[0]);
    const Synthesizer s(p);
    std::vector<double> x;
    for (std::uint64_t r = 0; r < 20000; ++r) {
        const auto f = s.realize(r);
        x.push_back(f.samples[ell] - f.samples[0]);
    }
    const Histogram h = histogram_standardized(x, sigma, 64, 4.0);
    const boost::math::normal z;
    const double n = static_cast<double>(x.size());
    std::vector<double> cell_e{n * boost::math::cdf(z, -4.0)}, cell_o{static_cast<double>(h.underflow)};
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        cell_e.push_back(n * (boost::math::cdf(z, h.edges[b + 1]) - boost::math::cdf(z, h.edges[b])));
        cell_o.push_back(static_cast<double>(h.counts[b]));
    }
    cell_e.push_back(n * boost::math::cdf(z, -4.0));
    cell_o.push_back(static_cast<double>(h.overflow));
    // merge sparse cells so every group expects at least 5
    std::vector<double> expect, observe;
    double e = 0.0, o = 0.0;
    for (std::size_t i = 0; i < cell_e.size(); ++i) {
        e += cell_e[i];
        o += cell_o[i];
        if (e >= 5.0) {
            expect.push_back(e);
            observe.push_back(o);
            e = o = 0.0;
        }
    }
    expect.back() += e;
    observe.back() += o;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < expect.size(); ++i) chi2 += (observe[i] - expect[i]) * (observe[i] - expect[i]) / expect[i];
    const boost::math::chi_squared dist(static_cast<double>(expect.size() - 1));
    const double pval = boost::math::cdf(boost::math::complement(dist, chi2));
    INFO("chi2 = " << chi2 << " over " << expect.size() << " cells, p = " << pval);
    CHECK(pval > 0.01);
}

TEST_CASE("clip 8 captures all baseline mass")
{
    const FieldRealization f = synthesize(sized(baseline_preset(), 1u << 16), 0);
    for (std::uint64_t ell : {1u, 64u, 4096u}) {
        const Histogram h = standardized_pdf(f.samples, f.params.dx(), ell, 64, 8.0);
        CHECK(h.underflow + h.overflow == 0);
    }
}
