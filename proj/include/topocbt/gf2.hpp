#pragma once

#include <cstdint>
#include <vector>

namespace topocbt {

/// Dense matrix over GF(2), stored column-major with 64 rows per word.
class Gf2Matrix {
public:
    Gf2Matrix() = default;
    Gf2Matrix(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    bool get(std::size_t r, std::size_t c) const;
    void set(std::size_t r, std::size_t c, bool value = true);
    void flip(std::size_t r, std::size_t c);

    std::size_t column_weight(std::size_t c) const;
    bool is_zero() const;

    /// Rank by column reduction; each column is reduced against existing
    /// pivots keyed by their first nonzero row.
    std::size_t rank() const;

    friend Gf2Matrix operator*(const Gf2Matrix& a, const Gf2Matrix& b);
    friend bool operator==(const Gf2Matrix&, const Gf2Matrix&) = default;

private:
    using Column = std::vector<std::uint64_t>;
    std::size_t words() const { return (rows_ + 63) / 64; }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Column> columns_;
};

}  // namespace topocbt
