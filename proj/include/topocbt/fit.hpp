#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace topocbt {

struct LinearFit {
    std::vector<double> coefficients;
    double residual_ratio = 0;  ///< ||y - X b|| / ||y||
};

/// Ordinary least squares. Each row of `design` is one observation.
LinearFit least_squares(const std::vector<std::vector<double>>& design,
                        const std::vector<double>& y);

struct GridPoint {
    std::size_t n = 0;  ///< |B_T|
    std::size_t m = 0;  ///< sub-transactions
    double topocbt_ops = 0;
    double ac2s_ops = 0;
};

struct FitVerdict {
    std::vector<GridPoint> points;
    LinearFit topocbt;       ///< basis (n^2, n*m, 1)
    LinearFit ac2s_mn2;      ///< basis (m*n^2, 1)
    LinearFit ac2s_default;  ///< basis (n^2, n*m, 1)
    double tolerance = 0.15;

    bool topocbt_fits() const;
    bool coefficients_nonnegative() const;
    /// The n^2 term outweighs the n*m term at (n_max, 1).
    bool n2_dominates() const;
    bool ac2s_prefers_mn2() const;
    bool pass() const;
};

/// Runs the failure-free grid n in [2, n_max], m in [1, m_max] under
/// TopoCBT and AC2S and fits both. Throws std::invalid_argument when the
/// grid has fewer than six points.
FitVerdict complexity_fit(std::size_t n_max, std::size_t m_max);

void write_fit(std::ostream& out, const FitVerdict& verdict);

}  // namespace topocbt
