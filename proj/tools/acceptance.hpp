#pragma once

#include <cstdint>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace skewfield::app {

struct Criterion {
    std::string id;
    std::string title;
    bool pass = false;
    // Failure analysed as a property of the model at this budget rather than of the code.
    bool known_unattainable = false;
    std::string measured;
    std::string target;
    std::vector<std::string> notes;
    double seconds = 0.0;
};

struct Budget {
    std::string tier = "desk";
    std::uint64_t N = 1u << 20;
    std::size_t replicates = 32;
    std::uint64_t mc_N = 1u << 18;
    std::size_t mc_replicates = 64;
    std::vector<int> gap_log2N{16, 17, 18, 19, 20};
    std::uint64_t det_N = 1u << 16;
    std::size_t det_replicates = 3;
    unsigned threads = 0;
    std::filesystem::path work_dir;
};

// smoke: N = 2^14, 4 replicates; desk: the documented acceptance budget; full: doubled ensembles.
Budget tier_budget(const std::string& tier);

std::vector<Criterion> run_acceptance(const Budget& b, std::ostream& log);

std::string format_line(const Criterion& c);
std::string verdict_json(const Budget& b, const std::vector<Criterion>& results);
bool all_pass(const std::vector<Criterion>& results);
bool only_known_failures(const std::vector<Criterion>& results);

}  // namespace skewfield::app
