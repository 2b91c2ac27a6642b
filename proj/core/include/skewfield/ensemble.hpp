#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "skewfield/stats.hpp"
#include "skewfield/synth.hpp"

namespace skewfield {

// SKEWFIELD_THREADS if set and positive, else hardware concurrency.
unsigned default_thread_count();

// Runs task(i) for i in [0, count) on up to `threads` workers. Each index runs
// exactly once; exceptions are rethrown (lowest index first) after all joins.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

struct EnsembleConfig {
    std::size_t replicates = 1;
    std::uint64_t first_replicate = 0;
    std::vector<std::uint64_t> scales_cells;
    std::vector<double> q_list{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    std::vector<std::uint64_t> pdf_scales_cells;
    std::size_t pdf_bins = 64;
    double pdf_clip = 8.0;
    unsigned threads = 0;  // 0: default_thread_count()
};

struct EnsembleResult {
    std::vector<IncrementStats> per_replicate;
    std::vector<FieldMoments> field_moments;
    std::vector<Histogram> pdfs;  // pooled, one per pdf scale
    EnsembleStats pooled;
};

EnsembleResult run_ensemble(const ModelParams& p, const EnsembleConfig& cfg);

}  // namespace skewfield
