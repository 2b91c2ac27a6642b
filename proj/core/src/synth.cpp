#include "skewfield/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skewfield/rng.hpp"

namespace skewfield {

NoisePair sample_noise_pair(const ModelParams& p, std::uint64_t replicate)
{
    validate(p);
    NoisePair np;
    np.W.resize(p.N);
    np.What.resize(p.N);
    const double sigma = std::sqrt(p.dx());
    CounterRng(p.seed, replicate, 0).fill_normal(np.W, sigma);
    CounterRng(p.seed, replicate, 1).fill_normal(np.What, sigma);
    return np;
}

std::vector<double> circular_convolve(const KernelGrid& kernel, std::span<const double> f, Semantics s)
{
    return circular_convolve(std::span<const double>(kernel.samples), f, s);
}

namespace {

std::vector<double> weight_from_driver(std::vector<double> x, double gamma, double c_eps)
{
    if (gamma == 0.0) {
        std::fill(x.begin(), x.end(), 1.0);
        return x;
    }
    const double mx = *std::max_element(x.begin(), x.end());
    if (gamma * mx > kGmcExponentLimit) {
        std::ostringstream os;
        os << "GMC exponent overflow: gamma*max(Xhat) = " << gamma * mx << " > " << kGmcExponentLimit;
        throw OverflowError(os.str());
    }
    const double shift = gamma * gamma * c_eps;
    for (double& v : x) v = std::exp(gamma * v - shift);
    return x;
}

}  // namespace

Synthesizer::Synthesizer(const ModelParams& p)
    : p_((validate(p), p)), phi_(make_kernel_grid(KernelKind::Phi, p).samples)
{
    if (p_.variant == Variant::Skewed) {
        c_eps_ = discrete_c_epsilon(p_);
        k_.emplace(make_kernel_grid(KernelKind::K, p_).samples);
        khat_.emplace(make_kernel_grid(KernelKind::KHat, p_).samples);
    }
}

std::vector<double> Synthesizer::driver(std::span<const double> What) const
{
    if (!khat_) throw std::logic_error("driver requested for the Gaussian baseline");
    std::vector<double> x(p_.N);
    khat_->convolve(What, x, Semantics::Measure);
    const double s = 1.0 / std::sqrt(2.0);
    for (double& v : x) v *= s;
    return x;
}

std::vector<double> Synthesizer::weight(std::span<const double> What) const
{
    if (p_.gamma == 0.0) return std::vector<double>(p_.N, 1.0);
    return weight_from_driver(driver(What), p_.gamma, c_eps_);
}

FieldRealization Synthesizer::realize(const NoisePair& noise, std::uint64_t replicate) const
{
    FieldRealization f;
    f.params = p_;
    f.model = p_.variant;
    f.rng_stream_id = replicate;
    f.samples.resize(p_.N);
    if (p_.variant == Variant::GaussianBaseline) {
        phi_.convolve(noise.W, f.samples, Semantics::Measure);
        return f;
    }
    const std::vector<double> g = weight(noise.What);
    std::vector<double> gw(p_.N);
    for (std::size_t i = 0; i < gw.size(); ++i) gw[i] = g[i] * noise.W[i];
    std::vector<double> x(p_.N);
    k_->convolve(gw, x, Semantics::Measure);
    for (std::size_t i = 0; i < gw.size(); ++i) x[i] *= gw[i];
    phi_.convolve(x, f.samples, Semantics::Measure);
    return f;
}

FieldRealization Synthesizer::realize(std::uint64_t replicate) const
{
    if (p_.variant == Variant::GaussianBaseline) {
        NoisePair np;
        np.W.resize(p_.N);
        CounterRng(p_.seed, replicate, 0).fill_normal(np.W, std::sqrt(p_.dx()));
        return realize(np, replicate);
    }
    return realize(sample_noise_pair(p_, replicate), replicate);
}

std::vector<double> gmc_weight(std::span<const double> What, const ModelParams& p)
{
    if (p.variant != Variant::Skewed) throw ParamError("gmc_weight requires the skewed variant");
    validate(p);
    if (What.size() != p.N) throw std::invalid_argument("noise length mismatch");
    if (p.gamma == 0.0) return std::vector<double>(p.N, 1.0);
    std::vector<double> x = circular_convolve(make_kernel_grid(KernelKind::KHat, p), What, Semantics::Measure);
    const double s = 1.0 / std::sqrt(2.0);
    for (double& v : x) v *= s;
    return weight_from_driver(std::move(x), p.gamma, discrete_c_epsilon(p));
}

FieldRealization synthesize(const ModelParams& p, std::uint64_t replicate)
{
    return Synthesizer(p).realize(replicate);
}

}  // namespace skewfield
