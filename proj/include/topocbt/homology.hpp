#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topocbt/complex.hpp"
#include "topocbt/gf2.hpp"

namespace topocbt {

/// Boundary map from k-chains to (k-1)-chains with GF(2) coefficients.
struct BoundaryMatrix {
    int k = 0;
    std::vector<Simplex> rows;  ///< (k-1)-simplices, canonical order
    std::vector<Simplex> cols;  ///< k-simplices, canonical order
    Gf2Matrix matrix;
};

/// Throws std::out_of_range unless 1 <= k <= complex.dimension().
BoundaryMatrix boundary_matrix(const SimplicialComplex& complex, int k);

/// Betti numbers beta_0 .. beta_dim over GF(2). Empty for the empty complex.
using BettiVector = std::vector<std::size_t>;

BettiVector betti_numbers(const SimplicialComplex& complex);

/// Alternating sum of simplex counts by dimension.
std::int64_t euler_characteristic(const SimplicialComplex& complex);

/// Alternating sum of a Betti vector.
std::int64_t alternating_sum(const BettiVector& betti);

/// "(1, 4, 0, 0)"
std::string to_string(const BettiVector& betti);

}  // namespace topocbt
