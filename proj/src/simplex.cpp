#include "topocbt/simplex.hpp"

#include <algorithm>
#include <stdexcept>

namespace topocbt {

Simplex::Simplex(std::vector<VertexId> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.empty())
        throw std::invalid_argument("simplex must have at least one vertex");
    if (vertices_.size() > 63)
        throw std::invalid_argument("simplex dimension too large");
    for (std::size_t i = 1; i < vertices_.size(); ++i) {
        if (vertices_[i - 1] >= vertices_[i])
            throw std::invalid_argument("simplex vertices must be strictly ascending: " +
                                        to_string());
    }
}

Simplex::Simplex(std::initializer_list<VertexId> vertices)
    : Simplex(std::vector<VertexId>(vertices)) {}

Simplex Simplex::from_unordered(std::vector<VertexId> vertices) {
    std::sort(vertices.begin(), vertices.end());
    vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
    return Simplex(std::move(vertices));
}

bool Simplex::contains(VertexId v) const {
    return std::binary_search(vertices_.begin(), vertices_.end(), v);
}

bool Simplex::is_face_of(const Simplex& other) const {
    return std::includes(other.vertices_.begin(), other.vertices_.end(),
                         vertices_.begin(), vertices_.end());
}

std::vector<Simplex> Simplex::facets() const {
    std::vector<Simplex> out;
    if (vertices_.size() < 2)
        return out;
    out.reserve(vertices_.size());
    // Dropping the last vertex first yields canonical (ascending) order.
    for (std::size_t skip = vertices_.size(); skip-- > 0;) {
        std::vector<VertexId> face;
        face.reserve(vertices_.size() - 1);
        for (std::size_t i = 0; i < vertices_.size(); ++i)
            if (i != skip)
                face.push_back(vertices_[i]);
        out.emplace_back(std::move(face));
    }
    return out;
}

std::vector<Simplex> Simplex::all_faces() const {
    const std::size_t n = vertices_.size();
    std::vector<Simplex> out;
    out.reserve((std::size_t{1} << n) - 1);
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<VertexId> face;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::uint64_t{1} << i))
                face.push_back(vertices_[i]);
        out.emplace_back(std::move(face));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string Simplex::to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        if (i)
            s += ',';
        s += std::to_string(vertices_[i]);
    }
    return s + "}";
}

}  // namespace topocbt
