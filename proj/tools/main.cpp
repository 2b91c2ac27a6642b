#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "acceptance.hpp"
#include "app.hpp"
#include "skewfield/io.hpp"

namespace {

using namespace skewfield;
namespace fs = std::filesystem;

struct ConfigFlags {
    std::string config, preset, out, q, scales, tier;
    std::optional<std::size_t> replicates;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> set;

    void add_to(CLI::App* cmd)
    {
        cmd->add_option("--config", config, "key = value config file")->check(CLI::ExistingFile);
        cmd->add_option("--preset", preset, "turbulence or baseline");
        cmd->add_option("--out", out, "output directory");
        cmd->add_option("--replicates", replicates, "number of replicates");
        cmd->add_option("--seed", seed, "base seed");
        cmd->add_option("--q", q, "comma list of moment orders");
        cmd->add_option("--scales", scales, "dyadic or comma list of cell counts");
        cmd->add_option("--set", set, "extra key=value assignment (repeatable)");
    }

    // Command-line values are appended after the file so they take precedence.
    RunConfig resolve() const
    {
        std::ostringstream text;
        if (!config.empty()) text << read_text(config) << '\n';
        auto put = [&](const char* k, const std::string& v) {
            if (!v.empty()) text << k << " = " << v << '\n';
        };
        put("preset", preset);
        put("out", out);
        put("q", q);
        put("scales", scales);
        put("tier", tier);
        if (replicates) text << "replicates = " << *replicates << '\n';
        if (seed) text << "seed = " << *seed << '\n';
        for (const std::string& s : set) {
            if (s.find('=') == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got " + s);
            text << s << '\n';
        }
        return parse_config(text.str());
    }
};

std::vector<fs::path> expand_inputs(const std::vector<std::string>& in)
{
    std::vector<fs::path> files;
    for (const std::string& s : in) {
        if (fs::is_directory(s)) {
            for (const fs::path& f : app::field_files_in(s)) files.push_back(f);
        } else {
            files.emplace_back(s);
        }
    }
    return files;
}

void print_fits(const Sidecar& s)
{
    for (const FitEntry& f : s.fits)
        std::cout << "  q = " << f.q << (f.mode == "neg_third" ? " (-m3)" : "") << ": fitted " << f.xi_fitted
                  << " +/- " << f.xi_se << ", analytic " << f.xi_analytic << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App cli{"skewfield: skewed multifractal field synthesis, statistics and quadrature"};
    cli.require_subcommand(1);

    ConfigFlags sim_flags;
    CLI::App* sim = cli.add_subcommand("simulate", "write one field file per replicate");
    sim_flags.add_to(sim);

    ConfigFlags an_flags;
    std::vector<std::string> an_inputs;
    std::string pdf_scales;
    CLI::App* an = cli.add_subcommand("analyze", "ensemble statistics of field files");
    an->add_option("inputs", an_inputs, "field files or directories")->required();
    an->add_option("--out", an_flags.out, "output directory")->required();
    an->add_option("--q", an_flags.q, "comma list of moment orders");
    an->add_option("--scales", an_flags.scales, "dyadic or comma list of cell counts");
    an->add_option("--pdf-scales", pdf_scales, "comma list of cell counts for histograms");
    std::size_t pdf_bins = 64, path_points = 4096;
    double pdf_clip = 8.0;
    an->add_option("--pdf-bins", pdf_bins);
    an->add_option("--pdf-clip", pdf_clip);
    an->add_option("--path-points", path_points, "decimated sample-path length");

    std::string sp_task, sp_H, sp_h, sp_out;
    app::SpecialOptions sp_opt;
    CLI::App* sp = cli.add_subcommand("special", "special functions and constants by quadrature");
    sp->add_option("task", sp_task, "f_H_table, sign_scan, constants, third_moment or pv_deriv")
        ->required()
        ->check(CLI::IsMember({"f_H_table", "sign_scan", "constants", "third_moment", "pv_deriv"}));
    sp->add_option("--H", sp_H, "comma list of H values");
    sp->add_option("--hs", sp_h, "comma list of h values (ell values for third_moment)");
    sp->add_option("--gamma", sp_opt.gamma);
    sp->add_option("--ell", sp_opt.ell);
    sp->add_option("--epsilon", sp_opt.epsilon, "regularization for f_H_table");
    sp->add_option("--out", sp_out, "CSV output file (default stdout)");

    ConfigFlags pr_flags;
    CLI::App* pr = cli.add_subcommand("predict", "analytic scaling spectrum and regime flags");
    pr_flags.add_to(pr);

    ConfigFlags va_flags;
    std::string va_json;
    CLI::App* va = cli.add_subcommand("validate", "run the acceptance suite");
    va->add_option("--config", va_flags.config)->check(CLI::ExistingFile);
    va->add_option("--tier", va_flags.tier, "smoke, desk or full");
    va->add_option("--out", va_json, "JSON verdict path (default stdout)");

    CLI11_PARSE(cli, argc, argv);

    std::string stage = "setup";
    try {
        if (sim->parsed()) {
            stage = "simulate";
            app::simulate(sim_flags.resolve(), 0, std::cout);
        } else if (an->parsed()) {
            stage = "analyze";
            app::AnalyzeOptions opt;
            if (!an_flags.q.empty()) opt.q_list = parse_double_list(an_flags.q);
            if (!an_flags.scales.empty()) opt.scales = an_flags.scales;
            for (double s : pdf_scales.empty() ? std::vector<double>{} : parse_double_list(pdf_scales))
                opt.pdf_scales_cells.push_back(static_cast<std::uint64_t>(s));
            opt.pdf_bins = pdf_bins;
            opt.pdf_clip = pdf_clip;
            opt.path_points = path_points;
            const app::Analysis a = app::analyze_files(expand_inputs(an_inputs), opt);
            for (const std::string& w : app::regime_warnings(a.params, opt.q_list))
                std::cerr << "warning: " << w << '\n';
            app::write_analysis(a, an_flags.out, opt.path_points);
            std::cout << "analyzed " << a.per_replicate.size() << " fields into " << an_flags.out << '\n';
            print_fits(a.sidecar);
        } else if (sp->parsed()) {
            stage = "special";
            if (!sp_H.empty()) sp_opt.H_list = parse_double_list(sp_H);
            if (!sp_h.empty()) sp_opt.h_list = parse_double_list(sp_h);
            if (sp_out.empty()) {
                app::special_report(sp_task, sp_opt, std::cout);
            } else {
                std::ostringstream os;
                app::special_report(sp_task, sp_opt, os);
                write_text(sp_out, os.str());
            }
        } else if (pr->parsed()) {
            stage = "predict";
            const RunConfig c = pr_flags.resolve();
            app::predict_report(c.params, c.q_list, std::cout);
        } else if (va->parsed()) {
            stage = "validate";
            std::string tier = va_flags.tier;
            if (tier.empty()) tier = va_flags.config.empty() ? "smoke" : va_flags.resolve().tier;
            const app::Budget b = app::tier_budget(tier);
            const auto results = app::run_acceptance(b, std::cerr);
            const std::string json = app::verdict_json(b, results);
            if (va_json.empty())
                std::cout << json;
            else
                write_text(va_json, json);
            return app::all_pass(results) ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error in " << stage << ": " << e.what() << '\n';
        return 2;
    }
    return 0;
}
