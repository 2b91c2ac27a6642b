#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "skewfield/synth.hpp"

namespace skewfield {

class StatsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fixed-point accumulator: the result does not depend on summation order.
class FixedSum {
public:
    FixedSum(double max_abs, std::uint64_t count);
    void add(double x)
    {
        const double a = x * scale_;
        const auto h = static_cast<std::int64_t>(a);
        hi_ += h;
        lo_ += static_cast<std::int64_t>((a - static_cast<double>(h)) * 0x1.0p20);
    }
    double value() const;

private:
    double scale_ = 1.0;
    double inv_scale_ = 1.0;
    std::int64_t hi_ = 0;
    std::int64_t lo_ = 0;
};

double reproducible_sum(std::span<const double> x);

std::vector<double> increments(std::span<const double> u, std::uint64_t ell_cells);

struct ScaleRow {
    double scale = 0.0;  // physical ℓ = ell_cells · dx
    std::uint64_t ell_cells = 0;
    std::uint64_t count = 0;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
    std::vector<double> abs_q;
    double skewness = 0.0;
    double flatness = 0.0;
};

struct IncrementStats {
    std::vector<double> q_list;
    std::vector<ScaleRow> rows;
};

// ℓ = 2^j cells for j = 0 .. floor(log2(N·L/4)).
std::vector<std::uint64_t> dyadic_scales(const ModelParams& p);

IncrementStats moment_table(std::span<const double> u, double dx, std::span<const std::uint64_t> scales_cells,
                            std::span<const double> q_list);
IncrementStats moment_table(const FieldRealization& f, std::span<const std::uint64_t> scales_cells,
                            std::span<const double> q_list);

struct FieldMoments {
    double mean = 0.0;
    double second = 0.0;  // spatial average of u²
};
FieldMoments field_moments(std::span<const double> u);

struct Histogram {
    double scale = 0.0;
    std::uint64_t ell_cells = 0;
    double clip = 0.0;
    double sigma = 0.0;
    std::vector<double> edges;
    std::vector<std::uint64_t> counts;
    std::uint64_t n_total = 0;
    std::uint64_t underflow = 0;
    std::uint64_t overflow = 0;
};

Histogram histogram_standardized(std::span<const double> values, double sigma, std::size_t bins, double clip);
Histogram standardized_pdf(std::span<const double> u, double dx, std::uint64_t ell_cells, std::size_t bins,
                           double clip);
void merge_into(Histogram& acc, const Histogram& h);

enum class FitMode { AbsMoment, NegativeThird };

struct FitRange {
    double lmin = 0.0;
    double lmax = 0.0;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    std::size_t points = 0;
    FitRange range;
};

FitResult fit_scaling_exponent(const IncrementStats& s, double q, FitRange range,
                               FitMode mode = FitMode::AbsMoment);

// Plain OLS slope of y against x.
FitResult least_squares_line(std::span<const double> x, std::span<const double> y);

struct EnsembleStats {
    IncrementStats mean;
    IncrementStats se;
    std::size_t replicates = 0;
};

// Pooled means with across-replicate standard errors; skewness and flatness are
// ratios of pooled moments with delete-one jackknife errors.
EnsembleStats ensemble_average(std::span<const IncrementStats> list);

struct JackknifeEstimate {
    double value = 0.0;
    double se = 0.0;
};

JackknifeEstimate jackknife_fit(std::span<const IncrementStats> list, double q, FitRange range,
                                FitMode mode = FitMode::AbsMoment);

// Delete-one jackknife of an arbitrary statistic of the pooled table.
template <class F>
JackknifeEstimate jackknife(std::span<const IncrementStats> list, F&& stat);

}  // namespace skewfield

#include "skewfield/detail/jackknife.ipp"
