#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "skewfield/ensemble.hpp"
#include "skewfield/io.hpp"
#include "skewfield/model.hpp"
#include "skewfield/stats.hpp"

namespace skewfield::app {

namespace fs = std::filesystem;

// Fit range used throughout: [8ε, L/8].
FitRange default_fit_range(const ModelParams& p);

// Human-readable notes for q values at or beyond the moment-existence bound.
std::vector<std::string> regime_warnings(const ModelParams& p, const std::vector<double>& q_list);

struct SimulateReport {
    std::vector<fs::path> files;
    double seconds = 0.0;
    double samples_per_second = 0.0;
};

SimulateReport simulate(const RunConfig& c, unsigned threads, std::ostream& log);

struct AnalyzeOptions {
    std::vector<double> q_list{1, 2, 3, 4, 5, 6};
    std::string scales = "dyadic";
    std::vector<std::uint64_t> pdf_scales_cells;
    std::size_t pdf_bins = 64;
    double pdf_clip = 8.0;
    std::size_t path_points = 4096;
    unsigned threads = 0;
};

struct Analysis {
    ModelParams params;
    std::vector<IncrementStats> per_replicate;
    std::vector<FieldMoments> field_moments;
    EnsembleStats stats;
    std::vector<Histogram> pdfs;
    Sidecar sidecar;
    std::vector<double> path;  // first field, for the sample-path export
};

Analysis analyze_files(const std::vector<fs::path>& inputs, const AnalyzeOptions& opt);
// Builds the fits and pdf entries of the sidecar from an ensemble already in memory.
Sidecar make_sidecar(const ModelParams& p, const std::vector<IncrementStats>& per_replicate,
                     const std::vector<Histogram>& pdfs);
// stats.csv, stats.json, pdf_<cells>.csv, path.csv
void write_analysis(const Analysis& a, const fs::path& out_dir, std::size_t path_points);

// Regular files with the field-file extension in a directory, sorted by name.
std::vector<fs::path> field_files_in(const fs::path& dir);

struct SpecialOptions {
    std::vector<double> H_list;
    double gamma = 0.0;
    std::vector<double> h_list;
    double ell = 1e-3;
    double epsilon = 0.0;
};

// CSV report for one of f_H_table, sign_scan, constants, third_moment, pv_deriv.
// Rows that violate a regime carry the error text and the run continues.
void special_report(const std::string& task, const SpecialOptions& opt, std::ostream& out);

void predict_report(const ModelParams& p, const std::vector<double>& q_list, std::ostream& out);

}  // namespace skewfield::app
