#include "skewfield/io.hpp"

#include <bit>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace skewfield {

static_assert(std::endian::native == std::endian::little, "field files assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'K', 'F', '1'};

std::uint64_t fnv1a(const unsigned char* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL)
{
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <class T>
void put(std::vector<unsigned char>& buf, T v)
{
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    buf.insert(buf.end(), b, b + sizeof(T));
}

template <class T>
T get(const unsigned char*& p)
{
    T v;
    std::memcpy(&v, p, sizeof(T));
    p += sizeof(T);
    return v;
}

std::vector<unsigned char> encode_header(const FieldRealization& f)
{
    const ModelParams& p = f.params;
    std::vector<unsigned char> h;
    h.reserve(kFieldHeaderBytes);
    h.insert(h.end(), kMagic, kMagic + 4);
    put<std::uint32_t>(h, kFieldFileVersion);
    put<std::uint64_t>(h, p.N);
    put<double>(h, p.dx());
    put<std::uint8_t>(h, static_cast<std::uint8_t>(p.variant));
    put<std::uint8_t>(h, static_cast<std::uint8_t>(p.cutoff));
    put<double>(h, p.H);
    put<double>(h, p.gamma);
    put<double>(h, p.Htilde);
    put<double>(h, p.L);
    put<double>(h, p.epsilon);
    put<std::uint64_t>(h, p.seed);
    put<std::uint64_t>(h, f.rng_stream_id);
    return h;
}

FieldRealization decode_header(const unsigned char* data, const std::string& where)
{
    if (std::memcmp(data, kMagic, 4) != 0) throw IoError(where + ": bad magic");
    const unsigned char* p = data + 4;
    const auto version = get<std::uint32_t>(p);
    if (version != kFieldFileVersion) throw IoError(where + ": unsupported version " + std::to_string(version));
    FieldRealization f;
    ModelParams& m = f.params;
    m.N = get<std::uint64_t>(p);
    const double dx = get<double>(p);
    const auto model = get<std::uint8_t>(p);
    const auto cutoff = get<std::uint8_t>(p);
    if (model > 1) throw IoError(where + ": unknown model tag");
    if (cutoff > 1) throw IoError(where + ": unknown cutoff tag");
    m.variant = static_cast<Variant>(model);
    m.cutoff = static_cast<Cutoff>(cutoff);
    m.H = get<double>(p);
    m.gamma = get<double>(p);
    m.Htilde = get<double>(p);
    m.L = get<double>(p);
    m.epsilon = get<double>(p);
    m.seed = get<std::uint64_t>(p);
    f.rng_stream_id = get<std::uint64_t>(p);
    f.model = m.variant;
    try {
        validate(m);
    } catch (const ParamError& e) {
        throw IoError(where + ": invalid header parameters: " + e.what());
    }
    if (dx != m.dx()) throw IoError(where + ": dx does not match N");
    return f;
}

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

}  // namespace

std::string field_file_name(std::uint64_t replicate)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "field_%06llu.skf", static_cast<unsigned long long>(replicate));
    return buf;
}

void write_field_file(const std::filesystem::path& path, const FieldRealization& f)
{
    validate(f.params);
    if (f.samples.size() != f.params.N) throw IoError("sample count does not match N");
    const std::vector<unsigned char> header = encode_header(f);
    const auto* payload = reinterpret_cast<const unsigned char*>(f.samples.data());
    const std::size_t payload_bytes = f.samples.size() * sizeof(double);
    std::uint64_t sum = fnv1a(header.data(), header.size());
    sum = fnv1a(payload, payload_bytes, sum);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(header.data()), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
    out.write(reinterpret_cast<const char*>(&sum), sizeof sum);
    if (!out) throw IoError("write failed: " + path.string());
}

FieldRealization read_field_header(const std::filesystem::path& path)
{
    std::ifstream in = open_in(path);
    unsigned char header[kFieldHeaderBytes];
    if (!in.read(reinterpret_cast<char*>(header), kFieldHeaderBytes)) throw IoError(path.string() + ": truncated header");
    return decode_header(header, path.string());
}

FieldRealization read_field_file(const std::filesystem::path& path)
{
    std::ifstream in = open_in(path);
    unsigned char header[kFieldHeaderBytes];
    if (!in.read(reinterpret_cast<char*>(header), kFieldHeaderBytes)) throw IoError(path.string() + ": truncated header");
    FieldRealization f = decode_header(header, path.string());
    const auto size = std::filesystem::file_size(path);
    const std::uint64_t expected = kFieldHeaderBytes + f.params.N * sizeof(double) + sizeof(std::uint64_t);
    if (size != expected) throw IoError(path.string() + ": payload length does not match N");
    f.samples.resize(f.params.N);
    in.read(reinterpret_cast<char*>(f.samples.data()), static_cast<std::streamsize>(f.params.N * sizeof(double)));
    std::uint64_t stored = 0;
    in.read(reinterpret_cast<char*>(&stored), sizeof stored);
    if (!in) throw IoError(path.string() + ": read failed");
    std::uint64_t sum = fnv1a(header, kFieldHeaderBytes);
    sum = fnv1a(reinterpret_cast<const unsigned char*>(f.samples.data()), f.params.N * sizeof(double), sum);
    if (sum != stored) throw IoError(path.string() + ": checksum mismatch");
    return f;
}

// ---------------------------------------------------------------- CSV

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string q_label(double q)
{
    if (q == std::round(q)) return std::to_string(static_cast<long long>(q));
    std::string s = format_double(q);
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& s)
{
    const std::string t = trim(s);
    if (t == "nan") return std::nan("");
    if (t == "inf") return INFINITY;
    if (t == "-inf") return -INFINITY;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) throw IoError("not a number: '" + s + "'");
    return v;
}

std::uint64_t to_u64(const std::string& s)
{
    const std::string t = trim(s);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw IoError("not an unsigned integer: '" + s + "'");
    return v;
}

void row_values(const ScaleRow& r, std::vector<double>& out)
{
    out = {r.m1, r.m2, r.m3, r.m4, r.skewness, r.flatness};
    out.insert(out.end(), r.abs_q.begin(), r.abs_q.end());
}

}  // namespace

void write_stats_csv(const std::filesystem::path& path, const EnsembleStats& s)
{
    const IncrementStats& m = s.mean;
    std::vector<std::string> names{"m1", "m2", "m3", "m4", "skewness", "flatness"};
    for (double q : m.q_list) names.push_back("a_" + q_label(q));
    std::ostringstream out;
    out << "scale,ell_cells,count";
    for (const auto& n : names) out << ',' << n;
    for (const auto& n : names) out << ",se_" << n;
    out << '\n';
    double prev = -1.0;
    std::vector<double> v, e;
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        const ScaleRow& r = m.rows[i];
        if (!(r.scale > prev)) throw IoError("stats rows must have strictly increasing scales");
        prev = r.scale;
        row_values(r, v);
        if (i < s.se.rows.size())
            row_values(s.se.rows[i], e);
        else
            e.assign(v.size(), 0.0);
        out << format_double(r.scale) << ',' << r.ell_cells << ',' << r.count;
        for (double x : v) out << ',' << format_double(x);
        for (double x : e) out << ',' << format_double(x);
        out << '\n';
    }
    write_text(path, out.str());
}

EnsembleStats read_stats_csv(const std::filesystem::path& path)
{
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty stats file");
    const auto cols = split(line, ',');
    if (cols.size() < 9 || cols[0] != "scale" || cols[3] != "m1") throw IoError(path.string() + ": unexpected header");
    const std::size_t nv = (cols.size() - 3) / 2;
    const std::size_t nq = nv - 6;
    EnsembleStats s;
    for (std::size_t j = 0; j < nq; ++j) {
        std::string lab = cols[3 + 6 + j].substr(2);
        for (char& c : lab)
            if (c == 'p') c = '.';
        s.mean.q_list.push_back(to_double(lab));
    }
    s.se.q_list = s.mean.q_list;
    auto fill = [&](ScaleRow& r, const std::vector<std::string>& f, std::size_t off) {
        r.m1 = to_double(f[off]);
        r.m2 = to_double(f[off + 1]);
        r.m3 = to_double(f[off + 2]);
        r.m4 = to_double(f[off + 3]);
        r.skewness = to_double(f[off + 4]);
        r.flatness = to_double(f[off + 5]);
        r.abs_q.clear();
        for (std::size_t j = 0; j < nq; ++j) r.abs_q.push_back(to_double(f[off + 6 + j]));
    };
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != cols.size()) throw IoError(path.string() + ": ragged row");
        ScaleRow m, e;
        m.scale = e.scale = to_double(f[0]);
        m.ell_cells = e.ell_cells = to_u64(f[1]);
        m.count = e.count = to_u64(f[2]);
        fill(m, f, 3);
        fill(e, f, 3 + nv);
        s.mean.rows.push_back(std::move(m));
        s.se.rows.push_back(std::move(e));
    }
    return s;
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h)
{
    std::ostringstream out;
    out << "bin_lo,bin_hi,center,count,density\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double lo = h.edges[i], hi = h.edges[i + 1];
        const double dens = h.n_total ? static_cast<double>(h.counts[i]) / (static_cast<double>(h.n_total) * (hi - lo)) : 0.0;
        out << format_double(lo) << ',' << format_double(hi) << ',' << format_double(0.5 * (lo + hi)) << ','
            << h.counts[i] << ',' << format_double(dens) << '\n';
    }
    write_text(path, out.str());
}

void write_path_csv(const std::filesystem::path& path, std::span<const double> u, double dx, std::size_t max_points)
{
    if (max_points == 0) throw IoError("path export needs at least one point");
    const std::size_t stride = std::max<std::size_t>(1, (u.size() + max_points - 1) / max_points);
    std::ostringstream out;
    out << "x,u\n";
    for (std::size_t i = 0; i < u.size(); i += stride)
        out << format_double(static_cast<double>(i) * dx) << ',' << format_double(u[i]) << '\n';
    write_text(path, out.str());
}

std::string sidecar_json(const Sidecar& s)
{
    using nlohmann::ordered_json;
    const ModelParams& p = s.params;
    ordered_json j;
    j["params"] = {{"H", p.H},         {"gamma", p.gamma}, {"gamma2", p.gamma2()},         {"Htilde", p.Htilde},
                   {"L", p.L},         {"epsilon", p.epsilon}, {"N", p.N},                {"seed", p.seed},
                   {"variant", to_string(p.variant)}, {"cutoff", to_string(p.cutoff)}};
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(params_hash(p)));
    j["params_hash"] = hash;
    j["replicates"] = s.replicates;
    ordered_json fits = ordered_json::array();
    for (const FitEntry& f : s.fits)
        fits.push_back({{"q", f.q},
                        {"mode", f.mode},
                        {"xi_fitted", f.xi_fitted},
                        {"xi_se", f.xi_se},
                        {"xi_analytic", f.xi_analytic},
                        {"lmin", f.range.lmin},
                        {"lmax", f.range.lmax},
                        {"points", f.points}});
    j["fits"] = fits;
    ordered_json pdfs = ordered_json::array();
    for (const PdfEntry& h : s.pdfs)
        pdfs.push_back({{"scale", h.scale},
                        {"ell_cells", h.ell_cells},
                        {"file", h.file},
                        {"n_total", h.n_total},
                        {"underflow", h.underflow},
                        {"overflow", h.overflow}});
    j["pdfs"] = pdfs;
    if (!s.extra.empty()) {
        ordered_json extra = ordered_json::object();
        for (const auto& [k, v] : s.extra) extra[k] = v;
        j["extra"] = extra;
    }
    return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- config

ModelParams preset_params(const std::string& name)
{
    if (name == "turbulence") return turbulence_preset();
    if (name == "baseline") return baseline_preset();
    throw IoError("unknown preset '" + name + "'");
}

std::vector<double> parse_double_list(const std::string& s)
{
    std::vector<double> out;
    for (const auto& part : split(s, ','))
        if (!trim(part).empty()) out.push_back(to_double(part));
    if (out.empty()) throw IoError("empty list '" + s + "'");
    return out;
}

std::vector<std::uint64_t> resolve_scales(const std::string& spec, const ModelParams& p)
{
    if (trim(spec) == "dyadic") return dyadic_scales(p);
    std::vector<std::uint64_t> out;
    for (const auto& part : split(spec, ','))
        if (!trim(part).empty()) out.push_back(to_u64(part));
    if (out.empty()) throw IoError("empty scale list");
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] == 0 || out[i] >= p.N) throw IoError("scale out of range: " + std::to_string(out[i]));
        if (i > 0 && out[i] <= out[i - 1]) throw IoError("scales must be strictly increasing");
    }
    return out;
}

void apply_config_key(RunConfig& c, const std::string& key, const std::string& value)
{
    ModelParams& p = c.params;
    const std::string v = trim(value);
    if (key == "preset") p = preset_params(v);
    else if (key == "H") p.H = to_double(v);
    else if (key == "gamma") p.gamma = to_double(v);
    else if (key == "gamma2") {
        const double g2 = to_double(v);
        if (g2 < 0.0) throw IoError("gamma2 must be >= 0");
        p.gamma = std::sqrt(g2);
    }
    else if (key == "Htilde") p.Htilde = to_double(v);
    else if (key == "L") p.L = to_double(v);
    else if (key == "epsilon") p.epsilon = to_double(v);
    else if (key == "epsilon_cells") p.epsilon = to_double(v) * p.dx();
    else if (key == "N") p.N = to_u64(v);
    else if (key == "log2N") {
        const auto e = to_u64(v);
        if (e > 40) throw IoError("log2N too large");
        p.N = std::uint64_t{1} << e;
    }
    else if (key == "seed") p.seed = to_u64(v);
    else if (key == "variant") p.variant = parse_variant(v);
    else if (key == "cutoff") p.cutoff = parse_cutoff(v);
    else if (key == "replicates") c.replicates = to_u64(v);
    else if (key == "out") c.out_dir = v;
    else if (key == "q") c.q_list = parse_double_list(v);
    else if (key == "scales") c.scales = v;
    else if (key == "pdf_scales") {
        c.pdf_scales_cells.clear();
        for (const auto& part : split(v, ','))
            if (!trim(part).empty()) c.pdf_scales_cells.push_back(to_u64(part));
    }
    else if (key == "pdf_bins") c.pdf_bins = to_u64(v);
    else if (key == "pdf_clip") c.pdf_clip = to_double(v);
    else if (key == "tier") c.tier = v;
    else if (key == "path_points") c.path_points = to_u64(v);
    else throw IoError("unknown config key '" + key + "'");
}

RunConfig parse_config(const std::string& text)
{
    std::vector<std::pair<std::string, std::string>> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("line " + std::to_string(lineno) + ": expected key = value");
        kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    RunConfig c;
    // epsilon_cells depends on N, so it is applied after everything else.
    for (const auto& [k, v] : kv)
        if (k == "preset") apply_config_key(c, k, v);
    for (const auto& [k, v] : kv)
        if (k != "preset" && k != "epsilon_cells") apply_config_key(c, k, v);
    for (const auto& [k, v] : kv)
        if (k == "epsilon_cells") apply_config_key(c, k, v);
    validate(c.params);
    if (c.replicates == 0) throw IoError("replicates must be >= 1");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_text(path)); }

}  // namespace skewfield
