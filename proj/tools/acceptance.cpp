#include "acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include <unistd.h>

#include "app.hpp"
#include "json.hpp"
#include "skewfield/ensemble.hpp"
#include "skewfield/io.hpp"
#include "skewfield/lattice.hpp"
#include "skewfield/quadrature.hpp"
#include "skewfield/special.hpp"

namespace skewfield::app {

namespace {

// Tolerances of the acceptance criteria.
constexpr double kXi2Tol = 0.05;
constexpr double kBaselineSlopeTol = 0.03;
constexpr double kBaselineSkewMax = 0.05;
constexpr double kBaselineFlatTol = 0.15;
constexpr double kXi3Tol = 0.12;
constexpr double kIntermittencyMax = -0.02;
constexpr double kIntermittencySigmas = 3.0;
constexpr double kAHRelTol = 1e-6;
constexpr double kPolyAbsTol = 1e-12;
constexpr double kSqrtRelTol = 1e-8;
constexpr double kVarianceRoutesRelTol = 1e-4;
constexpr double kC2RoutesRelTol = 1e-3;
constexpr double kThirdMomentRelTol = 0.10;
constexpr double kThirdMomentEll = 1e-3;
constexpr double kFHalfAbsTol = 1e-10;
constexpr double kSingularExponentTol = 0.03;
constexpr double kLargeHExponentTol = 0.05;
constexpr double kMcSigmas = 3.0;

std::string num(double x, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

Criterion named(std::string id, std::string title)
{
    Criterion c;
    c.id = std::move(id);
    c.title = std::move(title);
    return c;
}

double rel_diff(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b)); }

Criterion timed(const std::function<Criterion()>& f)
{
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c = f();
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return c;
}

ModelParams sized(ModelParams p, std::uint64_t N)
{
    p.N = N;
    p.epsilon = 2.0 / static_cast<double>(N);
    return p;
}

struct Ensembles {
    ModelParams skew, base;
    EnsembleResult s, b;
};

Ensembles run_ensembles(const Budget& bud, std::ostream& log)
{
    Ensembles e;
    e.skew = sized(turbulence_preset(), bud.N);
    e.base = sized(baseline_preset(), bud.N);
    EnsembleConfig cfg;
    cfg.replicates = bud.replicates;
    cfg.threads = bud.threads;
    const auto t0 = std::chrono::steady_clock::now();
    e.s = run_ensemble(e.skew, cfg);
    e.b = run_ensemble(e.base, cfg);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << "  ensembles: 2 x " << bud.replicates << " fields of N = " << bud.N << " in " << num(dt, 3) << " s\n";
    return e;
}

std::vector<const ScaleRow*> rows_in(const IncrementStats& s, FitRange r)
{
    std::vector<const ScaleRow*> out;
    for (const ScaleRow& row : s.rows)
        if (row.scale >= r.lmin * (1 - 1e-9) && row.scale <= r.lmax * (1 + 1e-9)) out.push_back(&row);
    return out;
}

Criterion xi2_criterion(const Ensembles& e)
{
    Criterion c = named("xi2", "xi(2) reproduction, turbulence preset");
    const FitRange r = default_fit_range(e.skew);
    const JackknifeEstimate j = jackknife_fit(e.s.per_replicate, 2.0, r);
    const double target = xi_spectrum(2.0, e.skew);
    c.pass = std::fabs(j.value - target) <= kXi2Tol;
    c.measured = "slope " + num(j.value) + " (jackknife se " + num(j.se, 2) + ")";
    c.target = num(target, 7) + " +/- " + num(kXi2Tol);
    return c;
}

Criterion baseline_criterion(const Ensembles& e)
{
    Criterion c = named("baseline", "Gaussian baseline control");
    const FitRange r = default_fit_range(e.base);
    const JackknifeEstimate j = jackknife_fit(e.b.per_replicate, 2.0, r);
    const double target = 2.0 * e.base.H;
    double max_skew = 0.0, max_flat_dev = 0.0;
    for (const ScaleRow* row : rows_in(e.b.pooled.mean, r)) {
        max_skew = std::max(max_skew, std::fabs(row->skewness));
        max_flat_dev = std::max(max_flat_dev, std::fabs(row->flatness - 3.0));
    }
    const bool slope_ok = std::fabs(j.value - target) <= kBaselineSlopeTol;
    const bool shape_ok = max_skew < kBaselineSkewMax && max_flat_dev <= kBaselineFlatTol;
    c.pass = slope_ok && shape_ok;
    // The slope bias comes from the eps-regularized kernel at the small end of the fit
    // range and is present in the exact lattice expectation, so only it is excused.
    c.known_unattainable = !slope_ok && shape_ok;
    c.measured = "slope " + num(j.value) + " (se " + num(j.se, 2) + "), max|S| " + num(max_skew, 3) +
                 ", max|F-3| " + num(max_flat_dev, 3);
    c.target = "slope " + num(target) + " +/- " + num(kBaselineSlopeTol) + ", |S| < " + num(kBaselineSkewMax) +
               ", |F-3| <= " + num(kBaselineFlatTol);
    const std::vector<std::uint64_t> sc = dyadic_scales(e.base);
    const LatticeMoments lm = lattice_increment_moments(e.base, sc);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < sc.size(); ++i) {
        const double l = static_cast<double>(sc[i]) * e.base.dx();
        if (l < r.lmin * (1 - 1e-9) || l > r.lmax * (1 + 1e-9)) continue;
        x.push_back(std::log(l));
        y.push_back(std::log(lm.m2[i]));
    }
    c.notes.push_back("exact lattice expectation gives slope " + num(least_squares_line(x, y).slope) +
                      " on the same range");
    return c;
}

Criterion xi3_criterion(const Ensembles& e)
{
    Criterion c = named("xi3", "skewness sign and xi(3)");
    const FitRange r = default_fit_range(e.skew);
    double worst = -INFINITY;
    for (const ScaleRow* row : rows_in(e.s.pooled.mean, r)) worst = std::max(worst, row->m3);
    const double target = xi_spectrum(3.0, e.skew);
    c.target = "m3 < 0 on [8eps, L/8], slope " + num(target, 6) + " +/- " + num(kXi3Tol);
    if (!(worst < 0.0)) {
        c.measured = "max m3 in range " + num(worst);
        return c;
    }
    const FitResult f = fit_scaling_exponent(e.s.pooled.mean, 3.0, r, FitMode::NegativeThird);
    double se = std::nan("");
    try {
        se = jackknife_fit(e.s.per_replicate, 3.0, r, FitMode::NegativeThird).se;
    } catch (const StatsError&) {
    }
    c.pass = std::fabs(f.slope - target) <= kXi3Tol;
    c.measured = "max m3 " + num(worst) + ", slope " + num(f.slope) + " (se " + num(se, 2) + ")";
    return c;
}

JackknifeEstimate intermittency(const std::vector<IncrementStats>& list, FitRange r)
{
    return jackknife(std::span<const IncrementStats>(list), [&](const IncrementStats& s) {
        return fit_scaling_exponent(s, 4.0, r).slope - 2.0 * fit_scaling_exponent(s, 2.0, r).slope;
    });
}

Criterion intermittency_criterion(const Ensembles& e)
{
    Criterion c = named("intermittency", "intermittency detection");
    const FitRange r = default_fit_range(e.skew);
    const JackknifeEstimate ds = intermittency(e.s.per_replicate, r);
    const JackknifeEstimate db = intermittency(e.b.per_replicate, default_fit_range(e.base));
    const double sep = (db.value - ds.value) / std::hypot(ds.se, db.se);
    c.pass = ds.value < kIntermittencyMax && sep >= kIntermittencySigmas;
    c.measured = "xi4-2xi2 = " + num(ds.value) + " (se " + num(ds.se, 2) + "), baseline " + num(db.value) + " (se " +
                 num(db.se, 2) + "), separation " + num(sep, 3) + " sigma";
    c.target = "< " + num(kIntermittencyMax) + " and >= " + num(kIntermittencySigmas) + " sigma from baseline";
    c.notes.push_back("analytic xi4-2xi2 = " + num(xi_spectrum(4.0, e.skew) - 2.0 * xi_spectrum(2.0, e.skew)));
    return c;
}

Criterion quadrature_corpus()
{
    Criterion c = named("quadrature", "quadrature closed-form corpus");
    bool ok = true;
    std::ostringstream m;
    for (double H : {0.2, 1.0 / 3.0, 0.7}) {
        const QuadResult r = a_H(H);
        const double e = rel_diff(r.value, 1.0 / H);
        ok = ok && e <= kAHRelTol;
        m << "a_H(" << num(H, 3) << ") rel " << num(e, 2) << "; ";
    }
    double poly_err = 0.0;
    {
        const QuadResult r = adaptive_integrate([](double x) { return x * x; }, 0.0, 1.0);
        poly_err = std::max(poly_err, std::fabs(r.value - 1.0 / 3.0));
        // degree 9 on one panel: the 9-point rule must be exact without refinement
        QuadratureConfig single;
        single.max_subdivisions = 16;
        single.abs_tol = 1.0;
        const QuadResult p9 = adaptive_integrate(
            [](double x) { return 1.0 - 2.0 * x + 3.0 * std::pow(x, 5) - std::pow(x, 9); }, -1.0, 2.0, single);
        const double exact = 3.0 - 3.0 + 0.5 * (64.0 - 1.0) - 0.1 * (1024.0 - 1.0);
        poly_err = std::max(poly_err, std::fabs(p9.value - exact) / std::fabs(exact));
    }
    ok = ok && poly_err <= kPolyAbsTol;
    QuadratureConfig cfg;
    cfg.singularity_points = {0.0};
    const QuadResult s = adaptive_integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, cfg);
    const double se = rel_diff(s.value, 2.0);
    ok = ok && se <= kSqrtRelTol;
    m << "polynomial err " << num(poly_err, 2) << "; x^-1/2 rel " << num(se, 2);
    c.pass = ok;
    c.measured = m.str();
    c.target = "a_H rel <= 1e-6, polynomial <= 1e-12, x^-1/2 rel <= 1e-8";
    return c;
}

Criterion cross_formula()
{
    Criterion c = named("cross_formula", "cross-formula identities");
    const ModelParams p = turbulence_preset();
    const QuadResult vs = variance_symmetric(p.H, p.gamma);
    const QuadResult vi = variance_ibp(p.H, p.gamma);
    const double dv = rel_diff(vs.value, vi.value);
    const QuadResult c1 = increment_variance_constant(p.H, p.gamma);
    const QuadResult c2 = increment_variance_constant_pv(p.H, p.gamma);
    const double dc = rel_diff(c1.value, c2.value);
    const double ex = third_moment_prediction(kThirdMomentEll, p, ThirdMomentMode::Exact).value;
    const double eq = third_moment_prediction(kThirdMomentEll, p, ThirdMomentMode::Equivalent).value;
    const double dt = std::fabs(ex - eq) / std::fabs(eq);
    const bool routes_ok = dv <= kVarianceRoutesRelTol && dc <= kC2RoutesRelTol;
    const bool third_ok = dt <= kThirdMomentRelTol;
    c.pass = routes_ok && third_ok;
    c.known_unattainable = routes_ok && !third_ok;
    c.measured = "variance rel " + num(dv, 2) + ", C2 rel " + num(dc, 2) + ", third moment exact " + num(ex, 5) +
                 " vs equivalent " + num(eq, 5) + " (rel " + num(dt, 3) + ")";
    c.target = "variance <= 1e-4, C2 <= 1e-3, third moment <= 10% at ell = 1e-3";
    ModelParams q = p;
    q.gamma = std::sqrt(0.05);
    const double ex2 = third_moment_prediction(kThirdMomentEll, q, ThirdMomentMode::Exact).value;
    const double eq2 = third_moment_prediction(kThirdMomentEll, q, ThirdMomentMode::Equivalent).value;
    c.notes.push_back("gamma^2 = 0.05 diagnostic: exact " + num(ex2, 5) + " vs equivalent " + num(eq2, 5) + " (ratio " +
                      num(ex2 / eq2, 3) + ")");
    const double rg = r_gamma_const(p.gamma).value;
    const double C = c_gamma_eval(kThirdMomentEll, p.gamma).value;
    c.notes.push_back("C_gamma(1e-3) h^{8 gamma^2} / r_gamma = " +
                      num(C * std::pow(kThirdMomentEll, 8.0 * p.gamma2()) / rg, 3) +
                      " (the equivalent assumes 1)");
    return c;
}

Criterion f_H_suite()
{
    Criterion c = named("f_H", "f_H suite");
    std::ostringstream m;
    double half_max = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double h = 1e-2 * std::pow(1e4, i / 19.0);
        half_max = std::max(half_max, std::fabs(f_H_eval(0.5, h).value));
    }
    const bool half_ok = half_max <= kFHalfAbsTol;
    int sign_bad = 0, sign_total = 0;
    for (double H : {0.3, 0.35, 0.38, 0.4, 0.6, 0.7, 0.8, 0.9})
        for (int i = 0; i < 21; ++i) {
            const double h = 1e-2 * std::pow(1e4, i / 20.0);
            ++sign_total;
            if (!((0.5 - H) * f_H_eval(H, h).value > 0.0)) ++sign_bad;
        }
    const SingularityDiagnostics d = f_H_singularity_check(0.1);
    const bool sing_ok = std::fabs(d.fitted_exponent - d.predicted_exponent) <= kSingularExponentTol;
    bool large_ok = true;
    m << "max|f_1/2| " << num(half_max, 2) << ", sign violations " << sign_bad << "/" << sign_total
      << ", singular exponent " << num(d.fitted_exponent) << " (predicted " << num(d.predicted_exponent) << ")";
    for (double H : {1.0 / 3.0, 0.7}) {
        std::vector<double> x, y;
        for (int i = 0; i < 9; ++i) {
            const double h = 1e2 * std::pow(1e2, i / 8.0);
            x.push_back(std::log(h));
            y.push_back(std::log(std::fabs(f_H_eval(H, h).value)));
        }
        const double slope = least_squares_line(x, y).slope;
        large_ok = large_ok && std::fabs(slope - (H - 1.5)) <= kLargeHExponentTol;
        m << ", decay(" << num(H, 3) << ") " << num(slope);
    }
    c.pass = half_ok && sign_bad == 0 && sing_ok && large_ok;
    c.measured = m.str();
    c.target = "f_1/2 <= 1e-10, no sign violation, exponent +/- 0.03, decay H-3/2 +/- 0.05";
    return c;
}

Criterion mc_variance(const Budget& b)
{
    Criterion c = named("mc_variance", "Monte-Carlo vs quadrature variance");
    ModelParams p = sized(turbulence_preset(), b.mc_N);
    p.cutoff = Cutoff::Bump;
    VarianceModel m;
    m.cutoff = {Cutoff::Bump, p.L};
    m.covariance = CovarianceModel::KernelInduced;
    const QuadResult q = variance_ibp(p.H, p.gamma, m);
    EnsembleConfig cfg;
    cfg.replicates = b.mc_replicates;
    cfg.threads = b.threads;
    cfg.scales_cells = {1};
    cfg.q_list = {2.0};
    const EnsembleResult e = run_ensemble(p, cfg);
    double s = 0.0, s2 = 0.0;
    for (const FieldMoments& f : e.field_moments) {
        s += f.second;
        s2 += f.second * f.second;
    }
    const double n = static_cast<double>(e.field_moments.size());
    const double mean = s / n;
    const double se = std::sqrt(std::max(0.0, s2 / n - mean * mean) / (n - 1.0));
    const double combined = std::hypot(se, q.abs_err_estimate);
    const bool agree = std::fabs(mean - q.value) <= kMcSigmas * combined;
    std::vector<double> gaps;
    std::ostringstream gs;
    for (int e2 : b.gap_log2N) {
        const ModelParams pl = sized(p, std::uint64_t{1} << e2);
        gaps.push_back(std::fabs(lattice_variance(pl) - q.value));
        gs << (gaps.size() > 1 ? ", " : "") << num(gaps.back(), 3);
    }
    bool shrinking = true;
    for (std::size_t i = 1; i < gaps.size(); ++i) shrinking = shrinking && gaps[i] < gaps[i - 1];
    c.pass = agree && shrinking;
    c.measured = "MC " + num(mean, 6) + " +/- " + num(se, 2) + " vs quadrature " + num(q.value, 6) +
                 " (|diff| = " + num(std::fabs(mean - q.value) / combined, 3) + " se); exact-lattice gaps " + gs.str();
    c.target = "within 3 combined se, gaps strictly decreasing as eps halves";
    return c;
}

bool same_bytes(const std::filesystem::path& a, const std::filesystem::path& b)
{
    return read_text(a) == read_text(b);
}

std::vector<std::string> dir_diff(const std::filesystem::path& a, const std::filesystem::path& b)
{
    std::vector<std::string> names, out;
    for (const auto& e : std::filesystem::directory_iterator(a)) names.push_back(e.path().filename().string());
    std::size_t nb = 0;
    for (const auto& e : std::filesystem::directory_iterator(b)) {
        (void)e;
        ++nb;
    }
    if (nb != names.size()) out.push_back("file count differs");
    for (const auto& n : names)
        if (!std::filesystem::exists(b / n) || !same_bytes(a / n, b / n)) out.push_back(n);
    return out;
}

Criterion determinism(const Budget& b)
{
    Criterion c = named("determinism", "determinism across runs and thread counts");
    namespace fs = std::filesystem;
    const fs::path root = b.work_dir / "determinism";
    fs::remove_all(root);
    RunConfig rc;
    rc.params = sized(turbulence_preset(), b.det_N);
    rc.params.seed = 20240611;
    rc.replicates = b.det_replicates;
    std::ostringstream sink;
    const std::pair<const char*, unsigned> runs[] = {{"run1_t1", 1u}, {"run2_t1", 1u}, {"run3_t8", 8u}};
    for (const auto& [name, threads] : runs) {
        rc.out_dir = root / name / "fields";
        simulate(rc, threads, sink);
        AnalyzeOptions opt;
        opt.threads = threads;
        opt.pdf_scales_cells = {1, 64};
        const Analysis a = analyze_files(field_files_in(rc.out_dir), opt);
        write_analysis(a, root / name / "stats", opt.path_points);
    }
    std::vector<std::string> diffs;
    for (const char* sub : {"fields", "stats"})
        for (const char* other : {"run2_t1", "run3_t8"})
            for (const auto& d : dir_diff(root / "run1_t1" / sub, root / other / sub))
                diffs.push_back(std::string(other) + "/" + sub + "/" + d);
    c.pass = diffs.empty();
    std::size_t nfiles = 0;
    for (const char* sub : {"fields", "stats"})
        for (const auto& e : fs::directory_iterator(root / "run1_t1" / sub)) {
            (void)e;
            ++nfiles;
        }
    c.measured = std::to_string(nfiles) + " files compared over 3 runs, " + std::to_string(diffs.size()) + " differ";
    for (const auto& d : diffs) c.notes.push_back("differs: " + d);
    c.target = "byte-identical field files and CSV/JSON outputs (threads 1 vs 8)";
    fs::remove_all(root);
    return c;
}

}  // namespace

Budget tier_budget(const std::string& tier)
{
    Budget b;
    b.tier = tier;
    if (tier == "smoke") {
        b.N = 1u << 14;
        b.replicates = 4;
        b.mc_N = 1u << 12;
        b.mc_replicates = 8;
        b.gap_log2N = {12, 13, 14};
        b.det_N = 1u << 12;
        b.det_replicates = 2;
    } else if (tier == "full") {
        b.replicates = 64;
        b.mc_replicates = 128;
        b.gap_log2N = {16, 17, 18, 19, 20, 21};
    } else if (tier != "desk") {
        throw std::invalid_argument("unknown tier '" + tier + "' (expected smoke, desk or full)");
    }
    return b;
}

std::vector<Criterion> run_acceptance(const Budget& budget, std::ostream& log)
{
    Budget b = budget;
    if (b.work_dir.empty())
        b.work_dir = std::filesystem::temp_directory_path() / ("skewfield_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(b.work_dir);
    std::vector<Criterion> out;
    auto record = [&](Criterion c) {
        log << format_line(c) << '\n';
        for (const auto& n : c.notes) log << "      " << n << '\n';
        log.flush();
        out.push_back(std::move(c));
    };
    std::optional<Ensembles> ens;
    auto with_ens = [&](const std::function<Criterion(const Ensembles&)>& f) {
        return timed([&] {
            if (!ens) ens = run_ensembles(b, log);
            return f(*ens);
        });
    };
    record(with_ens(xi2_criterion));
    record(with_ens(baseline_criterion));
    record(with_ens(xi3_criterion));
    record(with_ens(intermittency_criterion));
    ens.reset();
    record(timed(quadrature_corpus));
    record(timed([&] { return cross_formula(); }));
    record(timed(f_H_suite));
    record(timed([&] { return mc_variance(b); }));
    record(timed([&] { return determinism(b); }));
    std::filesystem::remove_all(b.work_dir);
    return out;
}

std::string format_line(const Criterion& c)
{
    std::ostringstream os;
    os << (c.pass ? "PASS" : "FAIL") << "  " << c.id << ": " << c.title << " | measured " << c.measured << " | target "
       << c.target;
    if (!c.pass && c.known_unattainable) os << " | known unattainable";
    os << " | " << num(c.seconds, 3) << " s";
    return os.str();
}

std::string verdict_json(const Budget& b, const std::vector<Criterion>& results)
{
    nlohmann::ordered_json j;
    j["tier"] = b.tier;
    j["N"] = b.N;
    j["replicates"] = b.replicates;
    j["all_pass"] = all_pass(results);
    j["only_known_failures"] = only_known_failures(results);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Criterion& c : results)
        arr.push_back({{"id", c.id},
                       {"title", c.title},
                       {"pass", c.pass},
                       {"known_unattainable", c.known_unattainable},
                       {"measured", c.measured},
                       {"target", c.target},
                       {"notes", c.notes},
                       {"seconds", c.seconds}});
    j["criteria"] = arr;
    return j.dump(2) + "\n";
}

bool all_pass(const std::vector<Criterion>& results)
{
    for (const Criterion& c : results)
        if (!c.pass) return false;
    return true;
}

bool only_known_failures(const std::vector<Criterion>& results)
{
    for (const Criterion& c : results)
        if (!c.pass && !c.known_unattainable) return false;
    return true;
}

}  // namespace skewfield::app
