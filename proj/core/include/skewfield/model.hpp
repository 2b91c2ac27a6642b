#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace skewfield {

enum class Variant : std::uint8_t { Skewed = 0, GaussianBaseline = 1 };
enum class Cutoff : std::uint8_t { Gaussian = 0, Bump = 1 };

class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Full parameter set of one field law on the periodic unit domain.
struct ModelParams {
    double H = 1.0 / 3.0;
    double gamma = 0.0;
    double Htilde = 0.0;
    double L = 1.0 / 3.0;
    double epsilon = 2.0 / 1024.0;
    std::uint64_t N = 1024;
    std::uint64_t seed = 0;
    Variant variant = Variant::Skewed;
    Cutoff cutoff = Cutoff::Gaussian;

    double dx() const { return 1.0 / static_cast<double>(N); }
    double gamma2() const { return gamma * gamma; }
};

bool is_power_of_two(std::uint64_t n);

// Throws ParamError with the first violated rule.
void validate(const ModelParams& p);

double xi_spectrum(double q, const ModelParams& p);

// +infinity when gamma == 0.
double moment_existence_bound(const ModelParams& p);

bool third_moment_exists(const ModelParams& p);

// Lower-bound regularity estimate; absent when the corollary does not apply.
std::optional<double> holder_exponent(const ModelParams& p);

ModelParams turbulence_preset();
ModelParams baseline_preset();

// Hash of the law (everything except the seed).
std::uint64_t params_hash(const ModelParams& p);

std::string to_string(Variant v);
std::string to_string(Cutoff c);
Variant parse_variant(const std::string& s);
Cutoff parse_cutoff(const std::string& s);

}  // namespace skewfield
