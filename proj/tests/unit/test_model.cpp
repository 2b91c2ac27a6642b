#include "doctest.h"

#include <cmath>

#include "skewfield/model.hpp"

using namespace skewfield;

namespace {

ModelParams with(double H, double gamma2, double Htilde = 0.0)
{
    ModelParams p;
    p.H = H;
    p.gamma = std::sqrt(gamma2);
    p.Htilde = Htilde;
    return p;
}

}  // namespace

TEST_CASE("validate rejects each broken rule")
{
    CHECK_NOTHROW(validate(ModelParams{}));
    auto bad = [](auto mutate) {
        ModelParams p;
        mutate(p);
        CHECK_THROWS_AS(validate(p), ParamError);
    };
    bad([](ModelParams& p) { p.H = 0.0; });
    bad([](ModelParams& p) { p.H = 1.0; });
    bad([](ModelParams& p) { p.gamma = -0.1; });
    bad([](ModelParams& p) { p.gamma = std::sqrt(0.5); });
    bad([](ModelParams& p) { p.Htilde = -1e-3; });
    bad([](ModelParams& p) { p.N = 1000; });
    bad([](ModelParams& p) { p.L = 0.6; });
    bad([](ModelParams& p) { p.epsilon = 1.0 / static_cast<double>(p.N); });
    ModelParams edge;
    edge.H = 0.5;
    CHECK_NOTHROW(validate(edge));
}

TEST_CASE("xi spectrum values")
{
    CHECK(xi_spectrum(0.0, turbulence_preset()) == 0.0);
    CHECK(xi_spectrum(3.0, with(1.0 / 3.0 + 0.025, 0.00625)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(xi_spectrum(2.0, with(1.0 / 3.0, 0.0)) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(xi_spectrum(2.0, turbulence_preset()) == doctest::Approx(0.691666666666667).epsilon(1e-13));
}

TEST_CASE("xi is concave with curvature -4 gamma^2")
{
    for (double g2 : {0.0, 0.00625, 0.05, 0.2}) {
        const ModelParams p = with(0.4, g2, 0.1);
        for (double q = 0.5; q < 6.0; q += 0.37) {
            const double h = 0.25;
            const double d2 = (xi_spectrum(q + h, p) - 2.0 * xi_spectrum(q, p) + xi_spectrum(q - h, p)) / (h * h);
            CHECK(d2 == doctest::Approx(-4.0 * g2).epsilon(1e-9).scale(1.0));
            const double lin = 0.5 * (xi_spectrum(q - h, p) + xi_spectrum(q + h, p));
            if (g2 > 0)
                CHECK(xi_spectrum(q, p) > lin);
            else
                CHECK(xi_spectrum(q, p) == doctest::Approx(lin).epsilon(1e-14));
        }
        CHECK(xi_spectrum(2.0, p) == doctest::Approx(2.0 * (p.H + p.Htilde) - 4.0 * g2).epsilon(1e-14));
    }
}

TEST_CASE("gamma zero gives a linear spectrum")
{
    const ModelParams p = with(0.27, 0.0);
    for (double q : {1.0, 2.5, 4.0, 7.0}) CHECK(xi_spectrum(q, p) == doctest::Approx(q * 0.27).epsilon(1e-14));
}

TEST_CASE("moment existence bound")
{
    CHECK(moment_existence_bound(with(0.358333333333333, 0.00625)) == doctest::Approx(29.6666666666667).epsilon(1e-10));
    CHECK(moment_existence_bound(with(0.4, 0.2)) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::isinf(moment_existence_bound(with(0.4, 0.0))));
    double prev = INFINITY;
    for (double g2 : {0.001, 0.01, 0.05, 0.1, 0.2, 0.3}) {
        const double b = moment_existence_bound(with(0.4, g2));
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("third moment existence is strict at 1/8")
{
    CHECK(third_moment_exists(with(0.35, 0.00625)));
    CHECK_FALSE(third_moment_exists(with(0.35, 0.125)));
    CHECK(third_moment_exists(with(0.35, 0.12)));
}

TEST_CASE("holder exponent")
{
    CHECK(holder_exponent(with(0.9, 0.0)).value() == doctest::Approx(0.9));
    const ModelParams t = turbulence_preset();
    const double expect = t.H + std::pow(std::sqrt(2.0) * t.gamma - 1.0, 2) - 1.0;  // 0.147227
    CHECK(holder_exponent(t).value() == doctest::Approx(expect).epsilon(1e-14));
    CHECK(holder_exponent(t).value() == doctest::Approx(0.147227).epsilon(1e-5));
    CHECK_FALSE(holder_exponent(with(0.1, 0.25)).has_value());
}

TEST_CASE("presets")
{
    const ModelParams t = turbulence_preset();
    CHECK(t.gamma2() == doctest::Approx(0.00625).epsilon(1e-14));
    CHECK(t.H == doctest::Approx(1.0 / 3.0 + 0.025).epsilon(1e-14));
    CHECK(xi_spectrum(3.0, t) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t.variant == Variant::Skewed);
    const ModelParams b = baseline_preset();
    CHECK(b.variant == Variant::GaussianBaseline);
    CHECK(b.H == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("params hash ignores the seed")
{
    ModelParams a = turbulence_preset(), b = a;
    b.seed = 99;
    CHECK(params_hash(a) == params_hash(b));
    b.L = 0.25;
    CHECK(params_hash(a) != params_hash(b));
    CHECK(parse_variant(to_string(Variant::GaussianBaseline)) == Variant::GaussianBaseline);
    CHECK(parse_cutoff(to_string(Cutoff::Bump)) == Cutoff::Bump);
    CHECK_THROWS(parse_cutoff("boxcar"));
}
