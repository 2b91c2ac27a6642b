#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "skewfield/model.hpp"

namespace skewfield {

// Exact expectations of the synthesized lattice field, computed from the kernels
// alone (no sampling). Increments are forward differences over ell_cells cells.
struct LatticeMoments {
    std::vector<std::uint64_t> ell_cells;
    std::vector<double> m2;
    std::vector<double> m3;
};

LatticeMoments lattice_increment_moments(const ModelParams& p, std::span<const std::uint64_t> ell_cells);

// E[u_i²] of the lattice field.
double lattice_variance(const ModelParams& p);

}  // namespace skewfield
