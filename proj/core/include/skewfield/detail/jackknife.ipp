#pragma once

#include <cmath>

namespace skewfield {

template <class F>
JackknifeEstimate jackknife(std::span<const IncrementStats> list, F&& stat)
{
    JackknifeEstimate out;
    const std::size_t k = list.size();
    if (k == 0) throw StatsError("jackknife of an empty ensemble");
    out.value = stat(ensemble_average(list).mean);
    if (k == 1) return out;
    std::vector<double> loo(k);
    std::vector<IncrementStats> sub;
    sub.reserve(k - 1);
    for (std::size_t i = 0; i < k; ++i) {
        sub.clear();
        for (std::size_t j = 0; j < k; ++j)
            if (j != i) sub.push_back(list[j]);
        loo[i] = stat(ensemble_average(sub).mean);
    }
    double mean = 0.0;
    for (double v : loo) mean += v;
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    out.se = std::sqrt(ss * static_cast<double>(k - 1) / static_cast<double>(k));
    return out;
}

}  // namespace skewfield
