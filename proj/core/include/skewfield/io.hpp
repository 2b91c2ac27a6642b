#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "skewfield/model.hpp"
#include "skewfield/stats.hpp"
#include "skewfield/synth.hpp"

namespace skewfield {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- field files
// Layout (little-endian): "SKF1", version u32, N u64, dx f64, model u8, cutoff u8,
// H, gamma, Htilde, L, epsilon (f64), seed u64, stream_id u64, N × f64 samples,
// then a u64 FNV-1a checksum of everything before it.
inline constexpr std::uint32_t kFieldFileVersion = 1;
inline constexpr std::size_t kFieldHeaderBytes = 82;

void write_field_file(const std::filesystem::path& path, const FieldRealization& f);
FieldRealization read_field_file(const std::filesystem::path& path);
// Header only (params are revalidated, payload is not read).
FieldRealization read_field_header(const std::filesystem::path& path);

std::string field_file_name(std::uint64_t replicate);

// ---- statistics
// Every number is written with 17 significant digits.
std::string format_double(double x);

void write_stats_csv(const std::filesystem::path& path, const EnsembleStats& s);
EnsembleStats read_stats_csv(const std::filesystem::path& path);

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h);

// Decimated sample path: columns x,u.
void write_path_csv(const std::filesystem::path& path, std::span<const double> u, double dx,
                    std::size_t max_points);

struct FitEntry {
    double q = 0.0;
    std::string mode;  // "abs" or "neg_third"
    double xi_fitted = 0.0;
    double xi_se = 0.0;
    double xi_analytic = 0.0;
    FitRange range;
    std::size_t points = 0;
};

struct PdfEntry {
    double scale = 0.0;
    std::uint64_t ell_cells = 0;
    std::string file;
    std::uint64_t n_total = 0;
    std::uint64_t underflow = 0;
    std::uint64_t overflow = 0;
};

struct Sidecar {
    ModelParams params;
    std::size_t replicates = 0;
    std::vector<FitEntry> fits;
    std::vector<PdfEntry> pdfs;
    std::map<std::string, double> extra;
};

std::string sidecar_json(const Sidecar& s);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// ---- configuration
// Flat key=value text; '#' starts a comment. A "preset" key is applied before
// every other key regardless of its position.
struct RunConfig {
    ModelParams params;
    std::size_t replicates = 1;
    std::filesystem::path out_dir = "out";
    std::vector<double> q_list{1, 2, 3, 4, 5, 6};
    std::string scales = "dyadic";
    std::vector<std::uint64_t> pdf_scales_cells;
    std::size_t pdf_bins = 64;
    double pdf_clip = 8.0;
    std::string tier = "smoke";
    std::size_t path_points = 4096;
};

ModelParams preset_params(const std::string& name);
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
// Applies a single key=value assignment (same keys as the file format).
void apply_config_key(RunConfig& c, const std::string& key, const std::string& value);

std::vector<double> parse_double_list(const std::string& s);
// "dyadic" or a comma list of cell counts.
std::vector<std::uint64_t> resolve_scales(const std::string& spec, const ModelParams& p);

}  // namespace skewfield
