#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace topocbt {

using VertexId = std::uint32_t;

/// A k-simplex stored as its k+1 vertex ids in strictly ascending order.
///
/// Equality is set equality; ordering is lexicographic on the vertex list,
/// which is the canonical order used for boundary matrix rows and columns.
class Simplex {
public:
    Simplex() = default;

    /// Throws std::invalid_argument unless `vertices` is non-empty and
    /// strictly ascending.
    explicit Simplex(std::vector<VertexId> vertices);
    Simplex(std::initializer_list<VertexId> vertices);

    /// Sorts and deduplicates before constructing. Rejects empty input.
    static Simplex from_unordered(std::vector<VertexId> vertices);

    int dimension() const { return static_cast<int>(vertices_.size()) - 1; }
    std::size_t size() const { return vertices_.size(); }
    bool empty() const { return vertices_.empty(); }
    std::span<const VertexId> vertices() const { return vertices_; }

    bool contains(VertexId v) const;
    bool is_face_of(const Simplex& other) const;

    /// The k+1 codimension-1 faces, in canonical order. Empty for a vertex.
    std::vector<Simplex> facets() const;

    /// All 2^(k+1)-1 non-empty faces including the simplex itself.
    std::vector<Simplex> all_faces() const;

    std::string to_string() const;

    friend bool operator==(const Simplex&, const Simplex&) = default;
    friend std::strong_ordering operator<=>(const Simplex& a, const Simplex& b) {
        return a.vertices_ <=> b.vertices_;
    }

private:
    std::vector<VertexId> vertices_;
};

}  // namespace topocbt
