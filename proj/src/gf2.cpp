#include "topocbt/gf2.hpp"

#include <algorithm>
#include <bit>
#include <optional>
#include <stdexcept>

namespace topocbt {

namespace {

std::optional<std::size_t> first_set_row(const std::vector<std::uint64_t>& col) {
    for (std::size_t w = 0; w < col.size(); ++w)
        if (col[w])
            return w * 64 + static_cast<std::size_t>(std::countr_zero(col[w]));
    return std::nullopt;
}

}  // namespace

Gf2Matrix::Gf2Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), columns_(cols, Column(words(), 0)) {}

bool Gf2Matrix::get(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_)
        throw std::out_of_range("Gf2Matrix index");
    return (columns_[c][r / 64] >> (r % 64)) & 1u;
}

void Gf2Matrix::set(std::size_t r, std::size_t c, bool value) {
    if (r >= rows_ || c >= cols_)
        throw std::out_of_range("Gf2Matrix index");
    const std::uint64_t bit = std::uint64_t{1} << (r % 64);
    if (value)
        columns_[c][r / 64] |= bit;
    else
        columns_[c][r / 64] &= ~bit;
}

void Gf2Matrix::flip(std::size_t r, std::size_t c) {
    set(r, c, !get(r, c));
}

std::size_t Gf2Matrix::column_weight(std::size_t c) const {
    std::size_t w = 0;
    for (auto word : columns_.at(c))
        w += static_cast<std::size_t>(std::popcount(word));
    return w;
}

bool Gf2Matrix::is_zero() const {
    return std::all_of(columns_.begin(), columns_.end(), [](const Column& col) {
        return std::all_of(col.begin(), col.end(), [](std::uint64_t w) { return w == 0; });
    });
}

std::size_t Gf2Matrix::rank() const {
    // pivot[r] holds a reduced column whose first nonzero row is r
    std::vector<std::optional<Column>> pivot(rows_);
    std::size_t rank = 0;
    for (const auto& original : columns_) {
        Column col = original;
        while (auto lead = first_set_row(col)) {
            auto& p = pivot[*lead];
            if (!p) {
                p = std::move(col);
                ++rank;
                break;
            }
            for (std::size_t w = *lead / 64; w < col.size(); ++w)
                col[w] ^= (*p)[w];
        }
    }
    return rank;
}

Gf2Matrix operator*(const Gf2Matrix& a, const Gf2Matrix& b) {
    if (a.cols_ != b.rows_)
        throw std::invalid_argument("Gf2Matrix product: shape mismatch");
    Gf2Matrix out(a.rows_, b.cols_);
    for (std::size_t j = 0; j < b.cols_; ++j)
        for (std::size_t k = 0; k < b.rows_; ++k)
            if (b.get(k, j))
                for (std::size_t w = 0; w < out.words(); ++w)
                    out.columns_[j][w] ^= a.columns_[k][w];
    return out;
}

}  // namespace topocbt
