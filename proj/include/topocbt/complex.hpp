#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "topocbt/simplex.hpp"

namespace topocbt {

/// Controls what `SimplicialComplex::remove` does with the proper faces of the
/// removed simplex.
enum class FacePolicy {
    retain,        ///< keep every proper face (default)
    drop_orphans,  ///< also drop proper faces of dim >= 1 left without a coface
};

/// Abstract simplicial complex over integer vertex ids.
///
/// Every mutation keeps the member set face-closed. The class is a plain
/// value: copy it to branch a history.
class SimplicialComplex {
public:
    SimplicialComplex() = default;

    /// Builds the closure of the given generators.
    static SimplicialComplex closure_of(const std::vector<Simplex>& generators);

    /// Inserts `s` together with all of its non-empty faces. Idempotent.
    void insert(const Simplex& s);

    /// Removes `s` and every simplex that contains it. Returns false (and
    /// leaves the complex untouched) when `s` is not a member.
    bool remove(const Simplex& s, FacePolicy policy = FacePolicy::retain);

    bool contains(const Simplex& s) const { return members_.contains(s); }
    bool empty() const { return members_.empty(); }
    std::size_t size() const { return members_.size(); }

    /// Max simplex dimension; -1 for the empty complex.
    int dimension() const;

    /// Number of k-simplices.
    std::size_t count(int k) const;

    /// k-simplices in canonical (lexicographic) order.
    std::vector<Simplex> simplices(int k) const;

    /// Members not contained in any other member.
    std::vector<Simplex> maximal_simplices() const;

    std::vector<VertexId> vertices() const;

    const std::set<Simplex>& members() const { return members_; }

    friend bool operator==(const SimplicialComplex&, const SimplicialComplex&) = default;

private:
    std::set<Simplex> members_;
};

/// True iff every non-empty subset of every member is itself a member.
bool is_valid_complex(const std::set<Simplex>& members);

// Complex text format: one simplex per line, ascending base-10 vertex ids
// separated by single spaces; lines starting with '#' are comments. Reading
// applies face closure.

/// Writes every member, ordered by dimension and then lexicographically.
void write_complex(std::ostream& out, const SimplicialComplex& complex);

/// Writes the given simplices verbatim, one per line, in the given order.
void write_simplices(std::ostream& out, const std::vector<Simplex>& simplices);

/// Throws std::runtime_error naming the line on malformed input.
SimplicialComplex read_complex(std::istream& in);

}  // namespace topocbt
