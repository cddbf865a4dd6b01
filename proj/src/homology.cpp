#include "topocbt/homology.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace topocbt {

namespace {

Gf2Matrix build_matrix(const std::vector<Simplex>& rows, const std::vector<Simplex>& cols) {
    std::map<Simplex, std::size_t> row_index;
    for (std::size_t i = 0; i < rows.size(); ++i)
        row_index.emplace(rows[i], i);

    Gf2Matrix m(rows.size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (const auto& f : cols[c].facets())
            m.set(row_index.at(f), c);
    return m;
}

}  // namespace

BoundaryMatrix boundary_matrix(const SimplicialComplex& complex, int k) {
    if (k < 1 || k > complex.dimension())
        throw std::out_of_range("boundary_matrix: k=" + std::to_string(k) +
                                " outside [1, " + std::to_string(complex.dimension()) + "]");
    BoundaryMatrix b;
    b.k = k;
    b.rows = complex.simplices(k - 1);
    b.cols = complex.simplices(k);
    b.matrix = build_matrix(b.rows, b.cols);
    return b;
}

BettiVector betti_numbers(const SimplicialComplex& complex) {
    const int dim = complex.dimension();
    if (dim < 0)
        return {};

    std::vector<std::vector<Simplex>> by_dim(static_cast<std::size_t>(dim) + 1);
    for (const auto& s : complex.members())
        by_dim[static_cast<std::size_t>(s.dimension())].push_back(s);

    // rank[k] = rank of the boundary map out of dimension k; rank[0] = 0.
    std::vector<std::size_t> rank(static_cast<std::size_t>(dim) + 2, 0);
    for (int k = 1; k <= dim; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        rank[uk] = build_matrix(by_dim[uk - 1], by_dim[uk]).rank();
    }

    BettiVector betti(static_cast<std::size_t>(dim) + 1);
    for (std::size_t k = 0; k < betti.size(); ++k)
        betti[k] = by_dim[k].size() - rank[k] - rank[k + 1];
    return betti;
}

std::int64_t euler_characteristic(const SimplicialComplex& complex) {
    std::int64_t chi = 0;
    for (const auto& s : complex.members())
        chi += (s.dimension() % 2 == 0) ? 1 : -1;
    return chi;
}

std::int64_t alternating_sum(const BettiVector& betti) {
    std::int64_t sum = 0;
    for (std::size_t k = 0; k < betti.size(); ++k) {
        const auto b = static_cast<std::int64_t>(betti[k]);
        sum += (k % 2 == 0) ? b : -b;
    }
    return sum;
}

std::string to_string(const BettiVector& betti) {
    std::string s = "(";
    for (std::size_t i = 0; i < betti.size(); ++i) {
        if (i)
            s += ", ";
        s += std::to_string(betti[i]);
    }
    return s + ")";
}

}  // namespace topocbt
