#include "doctest.h"

#include <cmath>

#include "skewfield/quadrature.hpp"
#include "skewfield/special.hpp"

using namespace skewfield;

TEST_CASE("closed-form corpus")
{
    CHECK(adaptive_integrate([](double x) { return x * x; }, 0.0, 1.0).value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    QuadratureConfig cfg;
    cfg.singularity_points = {0.0};
    const QuadResult r = adaptive_integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, cfg);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(r.converged);
    CHECK(adaptive_integrate([](double x) { return std::exp(-x); }, 0.0, kInf, [] {
              QuadratureConfig c;
              c.tail_cut = 60.0;
              return c;
          }()).value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("single-panel exactness up to degree 9")
{
    QuadratureConfig loose;
    loose.abs_tol = 1e6;
    loose.max_subdivisions = 16;
    for (int d = 0; d <= 9; ++d) {
        const QuadResult r = adaptive_integrate([d](double x) { return std::pow(x, d); }, -0.5, 1.5, loose);
        const double exact = (std::pow(1.5, d + 1) - std::pow(-0.5, d + 1)) / (d + 1);
        CHECK(r.subdivisions_used == 0);
        CHECK(r.value == doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("a_H = 1/H")
{
    for (double H : {0.2, 1.0 / 3.0, 0.7, 0.45}) {
        const QuadResult r = a_H(H);
        CHECK(r.value == doctest::Approx(1.0 / H).epsilon(1e-6));
        CHECK(std::fabs(r.value - 1.0 / H) <= r.abs_err_estimate + 1e-12 * (1.0 / H));
    }
}

TEST_CASE("converged results honour their error bound")
{
    // ∫_0^1 x^{-0.7} log(1/x) dx = 1/0.09
    QuadratureConfig cfg;
    cfg.rel_tol = 1e-9;
    const QuadResult r = integrate_left_singular([](double x) { return std::pow(x, -0.7) * -std::log(x); }, 0.0, 1.0, 0.75, cfg);
    CHECK(r.converged);
    CHECK(std::fabs(r.value - 1.0 / 0.09) <= std::max(r.abs_err_estimate, 1e-9 * r.value) * 10.0);
    const QuadResult s =
        integrate_right_singular([](double x) { return std::pow(1.0 - x, -0.5); }, 0.0, 1.0, 0.5, cfg);
    CHECK(s.value == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("power-law tail extrapolation")
{
    QuadratureConfig cfg;
    cfg.tail_cut = 50.0;
    cfg.tail_extrapolation = TailExtrapolation::PowerLaw;
    cfg.tail_exponent = 2.5;
    const QuadResult r = adaptive_integrate([](double x) { return std::pow(1.0 + x, -2.5); }, 0.0, kInf, cfg);
    CHECK(r.value == doctest::Approx(1.0 / 1.5).epsilon(1e-3));
    cfg.tail_exponent = 1.0;
    CHECK_THROWS_AS(adaptive_integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, kInf, cfg), QuadratureError);
}

TEST_CASE("errors")
{
    CHECK_THROWS_AS(adaptive_integrate([](double) { return 1.0; }, 1.0, 0.0), QuadratureError);
    CHECK_THROWS_AS(adaptive_integrate([](double x) { return 1.0 / x; }, -1.0, 1.0), QuadratureError);
    CHECK_THROWS_AS(integrate_left_singular([](double) { return 1.0; }, 0.0, 1.0, 1.0), QuadratureError);
    QuadratureConfig tiny;
    tiny.max_subdivisions = 16;
    tiny.rel_tol = 1e-14;
    tiny.abs_tol = 1e-16;
    const QuadResult r = adaptive_integrate([](double x) { return std::sin(200.0 * x); }, 0.0, 3.0, tiny);
    CHECK_FALSE(r.converged);
}

TEST_CASE("knot integration")
{
    // ∫_R |x|^{-1/2}|x-1|^{-1/2} e^{-x^2} dx has two singular knots and an infinite domain
    KnotIntegrand f = [](double base, double t) {
        const double x = base + t;
        const double d0 = base == 0.0 ? t : x;
        const double d1 = base == 1.0 ? t : x - 1.0;
        return std::pow(std::fabs(d0), -0.5) * std::pow(std::fabs(d1), -0.5) * std::exp(-x * x);
    };
    QuadratureConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.tail_cut = 30.0;
    const QuadResult r = integrate_knots(f, {{-kInf, 0}, {0.0, 0.5}, {1.0, 0.5}, {kInf, 0}}, cfg);
    // reference: plain singular pieces with a brute-force split
    QuadratureConfig c2 = cfg;
    c2.singularity_points = {0.0, 1.0};
    auto g = [](double x) { return std::pow(std::fabs(x), -0.5) * std::pow(std::fabs(x - 1.0), -0.5) * std::exp(-x * x); };
    double ref = integrate_right_singular(g, -30.0, 0.0, 0.5, c2).value + integrate_left_singular(g, 0.0, 0.5, 0.5, c2).value +
                 integrate_right_singular(g, 0.5, 1.0, 0.5, c2).value + integrate_left_singular(g, 1.0, 30.0, 0.5, c2).value;
    CHECK(r.value == doctest::Approx(ref).epsilon(1e-8));
    CHECK_THROWS(integrate_knots(f, {{0.0, 0.6}, {0.0, 0.6}, {1.0, 0}}, cfg));
}
