#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "skewfield/io.hpp"
#include "skewfield/synth.hpp"

using namespace skewfield;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("skewfield_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++)))
    {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter()
    {
        static int c = 0;
        return c;
    }
};

ModelParams small()
{
    ModelParams p = turbulence_preset();
    p.N = 1024;
    p.epsilon = 2.0 / 1024;
    p.seed = 77;
    return p;
}

void flip_byte(const fs::path& f, std::streamoff at)
{
    std::fstream s(f, std::ios::in | std::ios::out | std::ios::binary);
    s.seekg(at);
    char c = 0;
    s.read(&c, 1);
    c ^= 0x5a;
    s.seekp(at);
    s.write(&c, 1);
}

}  // namespace

TEST_CASE("field file round trip")
{
    TempDir d;
    const FieldRealization f = synthesize(small(), 3);
    const fs::path p = d.path / field_file_name(3);
    CHECK(p.filename() == "field_000003.skf");
    write_field_file(p, f);
    CHECK(fs::file_size(p) == kFieldHeaderBytes + 8 * 1024 + 8);
    const FieldRealization g = read_field_file(p);
    CHECK(g.samples == f.samples);
    CHECK(params_hash(g.params) == params_hash(f.params));
    CHECK(g.params.seed == 77);
    CHECK(g.rng_stream_id == 3);
    CHECK(g.model == Variant::Skewed);
    const FieldRealization h = read_field_header(p);
    CHECK(h.samples.empty());
    CHECK(h.params.N == 1024);
}

TEST_CASE("tampering is detected")
{
    TempDir d;
    const fs::path p = d.path / "f.skf";
    write_field_file(p, synthesize(small(), 0));
    SUBCASE("payload byte")
    {
        flip_byte(p, kFieldHeaderBytes + 100);
        CHECK_THROWS_AS(read_field_file(p), IoError);
    }
    SUBCASE("magic")
    {
        flip_byte(p, 0);
        CHECK_THROWS_WITH_AS(read_field_file(p), doctest::Contains("magic"), IoError);
    }
    SUBCASE("header parameter")
    {
        flip_byte(p, 40);
        CHECK_THROWS_AS(read_field_file(p), IoError);
    }
    SUBCASE("truncation")
    {
        fs::resize_file(p, fs::file_size(p) - 16);
        CHECK_THROWS_AS(read_field_file(p), IoError);
    }
    CHECK_THROWS_AS(read_field_file(d.path / "missing.skf"), IoError);
}

TEST_CASE("format_double round trips")
{
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("stats csv round trip")
{
    TempDir d;
    EnsembleStats s;
    s.replicates = 2;
    s.mean.q_list = s.se.q_list = {1.0, 2.0, 2.5};
    for (int i = 0; i < 3; ++i) {
        ScaleRow r;
        r.scale = std::ldexp(1.0, i - 10);
        r.ell_cells = 1u << i;
        r.count = 1024;
        r.m1 = 1e-19 * i;
        r.m2 = 0.1 / 3 * (i + 1);
        r.m3 = -1e-5 * (i + 1);
        r.m4 = 1e-3;
        r.abs_q = {0.3, r.m2, 0.07};
        r.skewness = -0.4;
        r.flatness = 4.1;
        s.mean.rows.push_back(r);
        s.se.rows.push_back(r);
    }
    const fs::path p = d.path / "stats.csv";
    write_stats_csv(p, s);
    const std::string head = read_text(p).substr(0, read_text(p).find('\n'));
    CHECK(head.rfind("scale,ell_cells,count,m1,m2,m3,m4,skewness,flatness,a_1,a_2,a_2p5,se_m1", 0) == 0);
    const EnsembleStats t = read_stats_csv(p);
    REQUIRE(t.mean.rows.size() == 3);
    CHECK(t.mean.q_list == s.mean.q_list);
    for (int i = 0; i < 3; ++i) {
        CHECK(t.mean.rows[i].m2 == s.mean.rows[i].m2);
        CHECK(t.mean.rows[i].m3 == s.mean.rows[i].m3);
        CHECK(t.mean.rows[i].abs_q == s.mean.rows[i].abs_q);
        CHECK(t.se.rows[i].flatness == s.se.rows[i].flatness);
    }
    std::swap(s.mean.rows[0], s.mean.rows[1]);
    CHECK_THROWS_AS(write_stats_csv(p, s), IoError);
}

TEST_CASE("histogram and path csv")
{
    TempDir d;
    Histogram h;
    h.edges = {-1, 0, 1};
    h.counts = {3, 1};
    h.n_total = 4;
    h.clip = 1;
    h.sigma = 1;
    write_histogram_csv(d.path / "h.csv", h);
    const std::string t = read_text(d.path / "h.csv");
    CHECK(t.rfind("bin_lo,bin_hi,center,count,density\n", 0) == 0);
    CHECK(t.find("-1,0,-0.5,3,0.75") != std::string::npos);
    std::vector<double> u(1000);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = static_cast<double>(i);
    write_path_csv(d.path / "p.csv", u, 1e-3, 100);
    const std::string pc = read_text(d.path / "p.csv");
    CHECK(std::count(pc.begin(), pc.end(), '\n') == 101);
}

TEST_CASE("sidecar json")
{
    Sidecar s;
    s.params = small();
    s.replicates = 4;
    s.fits.push_back({2.0, "abs", 0.66, 0.01, 0.691666, {1e-3, 0.04}, 6});
    s.extra["elapsed"] = 1.5;
    const auto j = nlohmann::json::parse(sidecar_json(s));
    CHECK(j["replicates"] == 4);
    CHECK(j["params"]["N"] == 1024);
    CHECK(j["fits"][0]["q"] == 2.0);
    CHECK(j["fits"][0]["mode"] == "abs");
    CHECK(j["params_hash"].get<std::string>().size() == 16);
}

TEST_CASE("config parsing")
{
    const RunConfig a = parse_config("preset = turbulence\nlog2N = 12\nepsilon_cells = 2\nreplicates = 4\n");
    CHECK(a.params.N == 4096);
    CHECK(a.params.epsilon == 2.0 / 4096);
    CHECK(a.replicates == 4);
    // explicit spelling of the preset gives the same law
    const RunConfig b = parse_config(
        "# explicit\nH = 0.35833333333333334\ngamma2 = 0.00625\nHtilde = 0\nL = 0.3333333333333333\n"
        "N = 4096\nepsilon_cells = 2\nvariant = skewed\ncutoff = gaussian\nreplicates = 4\n");
    CHECK(params_hash(a.params) == params_hash(b.params));
    CHECK_THROWS_AS(parse_config("colour = blue\n"), IoError);
    CHECK_THROWS_AS(parse_config("H\n"), IoError);
    CHECK_THROWS(parse_config("H = 1.5\n"));
    CHECK_THROWS(parse_config("replicates = 0\n"));
    CHECK(parse_double_list("1, 2.5,3") == std::vector<double>{1.0, 2.5, 3.0});
    CHECK(resolve_scales("1,4,16", a.params) == std::vector<std::uint64_t>{1, 4, 16});
    CHECK(resolve_scales("dyadic", a.params) == dyadic_scales(a.params));
    CHECK_THROWS_AS(resolve_scales("4,1", a.params), IoError);
    CHECK_THROWS_AS(resolve_scales("0,4096", a.params), IoError);
    CHECK(preset_params("baseline").variant == Variant::GaussianBaseline);
    CHECK_THROWS_AS(preset_params("ocean"), IoError);
}
