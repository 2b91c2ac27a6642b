#include "skewfield/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace skewfield {

unsigned default_thread_count()
{
    if (const char* env = std::getenv("SKEWFIELD_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task)
{
    if (count == 0) return;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

EnsembleResult run_ensemble(const ModelParams& p, const EnsembleConfig& cfg)
{
    const Synthesizer synth(p);
    std::vector<std::uint64_t> scales = cfg.scales_cells.empty() ? dyadic_scales(p) : cfg.scales_cells;
    EnsembleResult res;
    res.per_replicate.resize(cfg.replicates);
    res.field_moments.resize(cfg.replicates);
    std::vector<std::vector<Histogram>> hists(cfg.replicates);
    const unsigned threads = cfg.threads == 0 ? default_thread_count() : cfg.threads;

    parallel_for(cfg.replicates, threads, [&](std::size_t i) {
        const FieldRealization f = synth.realize(cfg.first_replicate + i);
        res.per_replicate[i] = moment_table(f, scales, cfg.q_list);
        res.field_moments[i] = field_moments(f.samples);
        for (std::uint64_t ell : cfg.pdf_scales_cells)
            hists[i].push_back(standardized_pdf(f.samples, p.dx(), ell, cfg.pdf_bins, cfg.pdf_clip));
    });

    res.pdfs.resize(cfg.pdf_scales_cells.size());
    for (std::size_t i = 0; i < cfg.replicates; ++i)
        for (std::size_t j = 0; j < hists[i].size(); ++j) merge_into(res.pdfs[j], hists[i][j]);
    res.pooled = ensemble_average(res.per_replicate);
    return res;
}

}  // namespace skewfield
