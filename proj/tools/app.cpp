#include "app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "skewfield/kernels.hpp"
#include "skewfield/special.hpp"
#include "skewfield/synth.hpp"

namespace skewfield::app {

FitRange default_fit_range(const ModelParams& p) { return {8.0 * p.epsilon, p.L / 8.0}; }

std::vector<std::string> regime_warnings(const ModelParams& p, const std::vector<double>& q_list)
{
    std::vector<std::string> out;
    const double bound = moment_existence_bound(p);
    for (double q : q_list)
        if (q >= bound) {
            std::ostringstream os;
            os << "q = " << q << " is at or beyond the moment-existence bound " << bound
               << "; its structure function does not converge as epsilon -> 0";
            out.push_back(os.str());
        }
    if (p.variant == Variant::Skewed && !third_moment_exists(p))
        out.push_back("gamma^2 >= 1/8: the third moment of increments is not defined");
    return out;
}

SimulateReport simulate(const RunConfig& c, unsigned threads, std::ostream& log)
{
    validate(c.params);
    for (const auto& w : regime_warnings(c.params, c.q_list)) log << "warning: " << w << '\n';
    fs::create_directories(c.out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    const Synthesizer synth(c.params);
    SimulateReport r;
    r.files.resize(c.replicates);
    parallel_for(c.replicates, threads == 0 ? default_thread_count() : threads, [&](std::size_t i) {
        const FieldRealization f = synth.realize(i);
        r.files[i] = c.out_dir / field_file_name(i);
        write_field_file(r.files[i], f);
    });
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double samples = static_cast<double>(c.params.N) * static_cast<double>(c.replicates);
    r.samples_per_second = r.seconds > 0.0 ? samples / r.seconds : 0.0;
    log << "simulated " << c.replicates << " field(s) of N = " << c.params.N << " in " << r.seconds << " s ("
        << r.samples_per_second << " samples/s)\n";
    return r;
}

std::vector<fs::path> field_files_in(const fs::path& dir)
{
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".skf") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

Sidecar make_sidecar(const ModelParams& p, const std::vector<IncrementStats>& per_replicate,
                     const std::vector<Histogram>& pdfs)
{
    Sidecar s;
    s.params = p;
    s.replicates = per_replicate.size();
    const FitRange range = default_fit_range(p);
    const std::span<const IncrementStats> list(per_replicate);
    auto add_fit = [&](double q, FitMode mode) {
        try {
            const EnsembleStats pooled = ensemble_average(list);
            const FitResult f = fit_scaling_exponent(pooled.mean, q, range, mode);
            FitEntry e;
            e.q = q;
            e.mode = mode == FitMode::AbsMoment ? "abs" : "neg_third";
            e.xi_fitted = f.slope;
            e.xi_analytic = xi_spectrum(q, p);
            e.range = range;
            e.points = f.points;
            try {
                e.xi_se = jackknife_fit(list, q, range, mode).se;
            } catch (const StatsError&) {
                e.xi_se = std::nan("");
            }
            s.fits.push_back(e);
        } catch (const StatsError&) {
            // not enough scales or a sign change: the fit is omitted
        }
    };
    if (!per_replicate.empty()) {
        for (double q : per_replicate.front().q_list) add_fit(q, FitMode::AbsMoment);
        add_fit(3.0, FitMode::NegativeThird);
    }
    for (const Histogram& h : pdfs) {
        PdfEntry e;
        e.scale = h.scale;
        e.ell_cells = h.ell_cells;
        e.file = "pdf_" + std::to_string(h.ell_cells) + ".csv";
        e.n_total = h.n_total;
        e.underflow = h.underflow;
        e.overflow = h.overflow;
        s.pdfs.push_back(e);
    }
    return s;
}

Analysis analyze_files(const std::vector<fs::path>& inputs, const AnalyzeOptions& opt)
{
    if (inputs.empty()) throw IoError("analyze: no input field files");
    Analysis a;
    a.params = read_field_header(inputs.front()).params;
    const std::uint64_t hash = params_hash(a.params);
    for (const auto& path : inputs) {
        const ModelParams q = read_field_header(path).params;
        if (params_hash(q) != hash || q.seed != a.params.seed)
            throw IoError("analyze: " + path.string() + " has parameters inconsistent with " + inputs.front().string());
    }
    const std::vector<std::uint64_t> scales = resolve_scales(opt.scales, a.params);
    const std::size_t n = inputs.size();
    a.per_replicate.resize(n);
    a.field_moments.resize(n);
    std::vector<std::vector<Histogram>> hists(n);
    const unsigned threads = opt.threads == 0 ? default_thread_count() : opt.threads;
    parallel_for(n, threads, [&](std::size_t i) {
        FieldRealization f = read_field_file(inputs[i]);
        if (params_hash(f.params) != hash) throw IoError("analyze: " + inputs[i].string() + ": params hash mismatch");
        a.per_replicate[i] = moment_table(f, scales, opt.q_list);
        a.field_moments[i] = field_moments(f.samples);
        for (std::uint64_t ell : opt.pdf_scales_cells)
            hists[i].push_back(standardized_pdf(f.samples, a.params.dx(), ell, opt.pdf_bins, opt.pdf_clip));
        if (i == 0) a.path = std::move(f.samples);
    });
    a.pdfs.resize(opt.pdf_scales_cells.size());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < hists[i].size(); ++j) merge_into(a.pdfs[j], hists[i][j]);
    a.stats = ensemble_average(a.per_replicate);
    a.sidecar = make_sidecar(a.params, a.per_replicate, a.pdfs);
    return a;
}

void write_analysis(const Analysis& a, const fs::path& out_dir, std::size_t path_points)
{
    fs::create_directories(out_dir);
    write_stats_csv(out_dir / "stats.csv", a.stats);
    write_text(out_dir / "stats.json", sidecar_json(a.sidecar));
    for (const Histogram& h : a.pdfs) write_histogram_csv(out_dir / ("pdf_" + std::to_string(h.ell_cells) + ".csv"), h);
    if (!a.path.empty() && path_points > 0) write_path_csv(out_dir / "path.csv", a.path, a.params.dx(), path_points);
}

// ---------------------------------------------------------------- special

namespace {

std::string fmt(double x) { return format_double(x); }

void emit_quad(std::ostream& out, const std::string& prefix, const QuadResult& r)
{
    out << prefix << ',' << fmt(r.value) << ',' << fmt(r.abs_err_estimate) << ',' << (r.converged ? 1 : 0) << ','
        << r.subdivisions_used << ",\n";
}

void emit_error(std::ostream& out, const std::string& prefix, const std::exception& e)
{
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    out << prefix << ",nan,nan,0,0," << msg << '\n';
}

void guarded(std::ostream& out, const std::string& prefix, const std::function<QuadResult()>& f)
{
    try {
        emit_quad(out, prefix, f());
    } catch (const std::exception& e) {
        emit_error(out, prefix, e);
    }
}

std::vector<double> log_grid(double a, double b, int n)
{
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = a * std::pow(b / a, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
    return g;
}

}  // namespace

void special_report(const std::string& task, const SpecialOptions& opt, std::ostream& out)
{
    const std::vector<double> Hs = opt.H_list.empty() ? std::vector<double>{0.3, 0.35, 0.38, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}
                                                      : opt.H_list;
    const std::vector<double> hs = opt.h_list.empty() ? log_grid(1e-2, 1e2, 41) : opt.h_list;
    const std::string tail = "value,abs_err,converged,subdivisions,error";
    if (task == "f_H_table" || task == "sign_scan") {
        out << "H,h," << tail << (task == "sign_scan" ? ",sign_ok" : "") << '\n';
        for (double H : Hs)
            for (double h : hs) {
                const std::string prefix = fmt(H) + ',' + fmt(h);
                if (task == "f_H_table") {
                    guarded(out, prefix, [&] { return f_H_eval(H, h, opt.epsilon); });
                    continue;
                }
                try {
                    const QuadResult r = f_H_eval(H, h, opt.epsilon);
                    const bool ok = H == 0.5 ? std::fabs(r.value) < 1e-10 : (0.5 - H) * r.value > 0.0;
                    out << prefix << ',' << fmt(r.value) << ',' << fmt(r.abs_err_estimate) << ',' << (r.converged ? 1 : 0)
                        << ',' << r.subdivisions_used << ",," << (ok ? 1 : 0) << '\n';
                } catch (const std::exception& e) {
                    std::string msg = e.what();
                    std::replace(msg.begin(), msg.end(), ',', ';');
                    out << prefix << ",nan,nan,0,0," << msg << ",0\n";
                }
            }
        return;
    }
    if (task == "constants") {
        out << "name,H,gamma," << tail << '\n';
        const double g = opt.gamma;
        for (double H : opt.H_list.empty() ? std::vector<double>{1.0 / 3.0} : opt.H_list) {
            const std::string hg = fmt(H) + ',' + fmt(g);
            guarded(out, "a_H," + hg, [&] { return a_H(H); });
            guarded(out, "a_gamma_H," + hg, [&] { return a_gamma_H(H, g); });
            guarded(out, "pv_constant," + hg, [&] { return pv_constant(H); });
            guarded(out, "d_H," + hg, [&] { return d_H_integral(H); });
            guarded(out, "r_gamma," + hg, [&] { return r_gamma_const(g); });
            guarded(out, "C2_double_integral," + hg, [&] { return increment_variance_constant(H, g); });
            guarded(out, "C2_pv_route," + hg, [&] { return increment_variance_constant_pv(H, g); });
            guarded(out, "variance_symmetric," + hg, [&] { return variance_symmetric(H, g); });
            guarded(out, "variance_ibp," + hg, [&] { return variance_ibp(H, g); });
        }
        return;
    }
    if (task == "third_moment") {
        out << "mode,H,gamma,ell," << tail << '\n';
        for (double H : opt.H_list.empty() ? std::vector<double>{1.0 / 3.0 + 4.0 * opt.gamma * opt.gamma} : opt.H_list) {
            ModelParams p;
            p.H = H;
            p.gamma = opt.gamma;
            const std::string rest = fmt(H) + ',' + fmt(opt.gamma) + ',' + fmt(opt.ell);
            guarded(out, "exact," + rest, [&] { return third_moment_prediction(opt.ell, p, ThirdMomentMode::Exact); });
            guarded(out, "equivalent," + rest,
                    [&] { return third_moment_prediction(opt.ell, p, ThirdMomentMode::Equivalent); });
        }
        return;
    }
    if (task == "pv_deriv") {
        out << "H,h," << tail << '\n';
        for (double H : opt.H_list.empty() ? std::vector<double>{1.0 / 3.0} : opt.H_list)
            for (double h : opt.h_list.empty() ? log_grid(1e-4, 1.0, 17) : opt.h_list)
                guarded(out, fmt(H) + ',' + fmt(h), [&] { return phi_star_phi_deriv(h, H); });
        return;
    }
    throw std::invalid_argument("unknown special task '" + task +
                                "' (expected f_H_table, sign_scan, constants, third_moment, pv_deriv)");
}

void predict_report(const ModelParams& p, const std::vector<double>& q_list, std::ostream& out)
{
    validate(p);
    const double bound = moment_existence_bound(p);
    const auto holder = holder_exponent(p);
    out << "q,xi,moment_bound,exists,gamma2_below_1_8,holder\n";
    for (double q : q_list) {
        out << fmt(q) << ',' << fmt(xi_spectrum(q, p)) << ',' << fmt(bound) << ','
            << (q < bound ? "yes" : "nonexistent moment") << ',' << (p.gamma2() < 0.125 ? 1 : 0) << ','
            << (holder ? fmt(*holder) : std::string("nan")) << '\n';
    }
}

}  // namespace skewfield::app
