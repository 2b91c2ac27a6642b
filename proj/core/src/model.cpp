#include "skewfield/model.hpp"

#include <cmath>
#include <cstring>
#include <limits>

namespace skewfield {

bool is_power_of_two(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

void validate(const ModelParams& p)
{
    if (!(p.H > 0.0 && p.H < 1.0)) throw ParamError("H must lie in (0,1)");
    if (!(p.gamma >= 0.0) || !std::isfinite(p.gamma)) throw ParamError("gamma must be >= 0");
    if (!(2.0 * p.gamma * p.gamma < 1.0)) throw ParamError("2 gamma^2 must be < 1");
    if (!(p.Htilde >= 0.0) || !std::isfinite(p.Htilde)) throw ParamError("Htilde must be >= 0");
    if (p.N < 4 || !is_power_of_two(p.N)) throw ParamError("N must be a power of two >= 4");
    if (!(p.L > 0.0 && p.L <= 0.5)) throw ParamError("L must lie in (0, 1/2]");
    // ε = 2/N is the intended minimum; allow for decimal round-off in configs.
    if (!(p.epsilon >= 2.0 * p.dx() * (1.0 - 1e-12)) || !std::isfinite(p.epsilon))
        throw ParamError("epsilon must be >= 2/N");
    if (p.variant != Variant::Skewed && p.variant != Variant::GaussianBaseline)
        throw ParamError("unknown variant");
    if (p.cutoff != Cutoff::Gaussian && p.cutoff != Cutoff::Bump)
        throw ParamError("unknown cutoff");
}

double xi_spectrum(double q, const ModelParams& p)
{
    if (p.variant == Variant::GaussianBaseline) return q * p.H;
    const double g2 = p.gamma2();
    return (p.H + p.Htilde + 2.0 * g2) * q - 2.0 * g2 * q * q;
}

double moment_existence_bound(const ModelParams& p)
{
    const double g2 = p.gamma2();
    if (p.variant == Variant::GaussianBaseline || g2 == 0.0)
        return std::numeric_limits<double>::infinity();
    return std::min(1.0 / (2.0 * g2), 1.0 + (p.H + p.Htilde) / (2.0 * g2));
}

bool third_moment_exists(const ModelParams& p)
{
    if (p.variant == Variant::GaussianBaseline) return true;
    return p.gamma2() < 0.125;
}

std::optional<double> holder_exponent(const ModelParams& p)
{
    const double g = p.variant == Variant::GaussianBaseline ? 0.0 : p.gamma;
    const double s = std::sqrt(2.0) * g - 1.0;
    const double v = p.H + s * s;
    if (v > 1.0) return v - 1.0;
    return std::nullopt;
}

ModelParams turbulence_preset()
{
    ModelParams p;
    p.gamma = std::sqrt(0.025) / 2.0;
    p.H = 1.0 / 3.0 + 0.025;
    p.Htilde = 0.0;
    p.L = 1.0 / 3.0;
    p.N = std::uint64_t{1} << 20;
    p.epsilon = 2.0 / static_cast<double>(p.N);
    p.seed = 0;
    p.variant = Variant::Skewed;
    p.cutoff = Cutoff::Gaussian;
    return p;
}

ModelParams baseline_preset()
{
    ModelParams p = turbulence_preset();
    p.variant = Variant::GaussianBaseline;
    p.gamma = 0.0;
    p.H = 1.0 / 3.0;
    return p;
}

namespace {

struct Fnv1a {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void bytes(const void* data, std::size_t n)
    {
        const auto* c = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= c[i];
            h *= 0x100000001b3ULL;
        }
    }
    template <class T>
    void value(T v) { bytes(&v, sizeof v); }
};

}  // namespace

std::uint64_t params_hash(const ModelParams& p)
{
    Fnv1a f;
    f.value(p.H);
    f.value(p.gamma);
    f.value(p.Htilde);
    f.value(p.L);
    f.value(p.epsilon);
    f.value(p.N);
    f.value(static_cast<std::uint8_t>(p.variant));
    f.value(static_cast<std::uint8_t>(p.cutoff));
    return f.h;
}

std::string to_string(Variant v)
{
    return v == Variant::Skewed ? "skewed" : "gaussian_baseline";
}

std::string to_string(Cutoff c) { return c == Cutoff::Gaussian ? "gaussian" : "bump"; }

Variant parse_variant(const std::string& s)
{
    if (s == "skewed") return Variant::Skewed;
    if (s == "gaussian_baseline" || s == "gaussian" || s == "baseline")
        return Variant::GaussianBaseline;
    throw ParamError("unknown variant '" + s + "'");
}

Cutoff parse_cutoff(const std::string& s)
{
    if (s == "gaussian") return Cutoff::Gaussian;
    if (s == "bump") return Cutoff::Bump;
    throw ParamError("unknown cutoff '" + s + "'");
}

}  // namespace skewfield
