#include "topocbt/fit.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

#include "topocbt/harness.hpp"

namespace topocbt {

LinearFit least_squares(const std::vector<std::vector<double>>& design,
                        const std::vector<double>& y) {
    if (design.empty() || design.size() != y.size())
        throw std::invalid_argument("least squares: row count mismatch");
    const auto rows = static_cast<Eigen::Index>(design.size());
    const auto cols = static_cast<Eigen::Index>(design.front().size());
    Eigen::MatrixXd x(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(design[i].size()) != cols)
            throw std::invalid_argument("least squares: ragged design matrix");
        for (Eigen::Index j = 0; j < cols; ++j)
            x(i, j) = design[i][j];
        b(i) = y[i];
    }
    const Eigen::VectorXd coef = x.colPivHouseholderQr().solve(b);
    LinearFit fit;
    fit.coefficients.assign(coef.data(), coef.data() + coef.size());
    const double norm = b.norm();
    fit.residual_ratio = norm == 0 ? 0 : (x * coef - b).norm() / norm;
    return fit;
}

bool FitVerdict::topocbt_fits() const { return topocbt.residual_ratio < tolerance; }

bool FitVerdict::coefficients_nonnegative() const {
    // Allow for floating point noise around an exact zero.
    return std::all_of(topocbt.coefficients.begin(), topocbt.coefficients.end(),
                       [](double c) { return c > -1e-9; });
}

bool FitVerdict::n2_dominates() const {
    std::size_t n_max = 0;
    for (const auto& p : points)
        n_max = std::max(n_max, p.n);
    const double n = static_cast<double>(n_max);
    return topocbt.coefficients[0] * n * n > topocbt.coefficients[1] * n;
}

bool FitVerdict::ac2s_prefers_mn2() const {
    return ac2s_mn2.residual_ratio < ac2s_default.residual_ratio;
}

bool FitVerdict::pass() const {
    return topocbt_fits() && coefficients_nonnegative() && n2_dominates() && ac2s_prefers_mn2();
}

FitVerdict complexity_fit(std::size_t n_max, std::size_t m_max) {
    if (n_max < 2 || (n_max - 1) * m_max < 6)
        throw std::invalid_argument("fit grid needs at least 6 points, got n_max=" +
                                    std::to_string(n_max) + " m_max=" + std::to_string(m_max));
    FitVerdict v;
    std::vector<std::vector<double>> basis, mn2;
    std::vector<double> topo_y, ac2s_y;
    for (std::size_t n = 2; n <= n_max; ++n) {
        for (std::size_t m = 1; m <= m_max; ++m) {
            const auto sc = grid_scenario(n, m);
            RunOptions opts;
            opts.compute_betti = false;
            opts.protocol = Protocol::topocbt;
            const auto topo = run_scenario(sc, 1, opts);
            opts.protocol = Protocol::ac2s;
            const auto ac2s = run_scenario(sc, 1, opts);
            if (!topo.ok() || topo.txns.front().status != "Committed" ||
                ac2s.txns.front().status != "Committed")
                throw std::logic_error("fit grid run " + sc.name + " did not commit cleanly");

            GridPoint p{n, m, static_cast<double>(topo.txns.front().primitive_ops),
                        static_cast<double>(ac2s.txns.front().primitive_ops)};
            const double dn = static_cast<double>(n);
            const double dm = static_cast<double>(m);
            basis.push_back({dn * dn, dn * dm, 1.0});
            mn2.push_back({dm * dn * dn, 1.0});
            topo_y.push_back(p.topocbt_ops);
            ac2s_y.push_back(p.ac2s_ops);
            v.points.push_back(p);
        }
    }
    v.topocbt = least_squares(basis, topo_y);
    v.ac2s_default = least_squares(basis, ac2s_y);
    v.ac2s_mn2 = least_squares(mn2, ac2s_y);
    return v;
}

void write_fit(std::ostream& out, const FitVerdict& v) {
    out << "n,m,topocbt_ops,ac2s_ops\n";
    for (const auto& p : v.points)
        out << p.n << ',' << p.m << ',' << p.topocbt_ops << ',' << p.ac2s_ops << '\n';
    const auto flags = out.flags();
    out << std::fixed << std::setprecision(4);
    out << "# topocbt n^2=" << v.topocbt.coefficients[0] << " nm=" << v.topocbt.coefficients[1]
        << " const=" << v.topocbt.coefficients[2] << " residual=" << v.topocbt.residual_ratio
        << '\n';
    out << "# ac2s m*n^2 residual=" << v.ac2s_mn2.residual_ratio
        << " n^2+nm residual=" << v.ac2s_default.residual_ratio << '\n';
    out.flags(flags);
    out << "# verdict " << (v.pass() ? "PASS" : "FAIL") << '\n';
}

}  // namespace topocbt
