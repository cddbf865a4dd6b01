#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "topocbt/gf2.hpp"
#include "topocbt/homology.hpp"

using namespace topocbt;

namespace {

SimplicialComplex parse(const std::string& text) {
    std::istringstream in(text);
    return read_complex(in);
}

}  // namespace

TEST_CASE("simplex rejects unsorted, duplicate and empty vertex lists") {
    CHECK_THROWS_AS(Simplex({2, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Simplex({1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Simplex(std::vector<VertexId>{}), std::invalid_argument);
    CHECK(Simplex::from_unordered({3, 1, 2}) == Simplex{1, 2, 3});
}

TEST_CASE("simplex faces") {
    const Simplex s{0, 1, 2};
    CHECK(s.dimension() == 2);
    CHECK(s.facets() == std::vector<Simplex>{{0, 1}, {0, 2}, {1, 2}});
    CHECK(s.all_faces().size() == 7);
    CHECK(Simplex{0, 2}.is_face_of(s));
    CHECK_FALSE(Simplex{0, 3}.is_face_of(s));
    CHECK(s.to_string() == "{0,1,2}");
}

TEST_CASE("insert closes under faces") {
    SimplicialComplex cx;
    cx.insert({0, 1, 2});
    CHECK(cx.size() == 7);
    CHECK(cx.count(0) == 3);
    CHECK(cx.count(1) == 3);
    CHECK(cx.dimension() == 2);
    CHECK(is_valid_complex(cx.members()));
    cx.insert({0, 1});
    CHECK(cx.size() == 7);
}

TEST_CASE("remove takes cofaces along") {
    auto cx = SimplicialComplex::closure_of({{0, 1, 2}});
    CHECK(cx.remove({0, 1}));
    CHECK_FALSE(cx.contains({0, 1, 2}));
    CHECK(cx.contains({0}));
    CHECK(is_valid_complex(cx.members()));
    CHECK_FALSE(cx.remove({5}));

    // Orphaned faces of dimension >= 1 go; vertices always stay.
    auto orphaned = SimplicialComplex::closure_of({{0, 1, 2}, {2, 3}});
    orphaned.remove({0, 1, 2}, FacePolicy::drop_orphans);
    CHECK_FALSE(orphaned.contains({0, 1}));
    CHECK(orphaned.contains({2, 3}));
    CHECK(orphaned.vertices() == std::vector<VertexId>{0, 1, 2, 3});
}

TEST_CASE("complex file round trip") {
    const auto cx = parse("# comment\n0 1 2\n3\n");
    std::ostringstream out;
    write_complex(out, cx);
    CHECK(parse(out.str()) == cx);
}

TEST_CASE("complex file errors name the line") {
    CHECK_THROWS_WITH(parse("0 1\n1 0\n"), doctest::Contains("line 2"));
    CHECK_THROWS_WITH(parse("0  1\n"), doctest::Contains("line 1"));
    CHECK_THROWS_WITH(parse("0 x\n"), doctest::Contains("line 1"));
}

TEST_CASE("gf2 rank agrees with row reduction") {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        const auto rows = static_cast<std::size_t>(rng.between(1, 80));
        const auto cols = static_cast<std::size_t>(rng.between(1, 40));
        Gf2Matrix m(rows, cols);
        std::vector<std::vector<bool>> dense(rows, std::vector<bool>(cols));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                if (rng.chance(1, 3)) {
                    m.set(r, c);
                    dense[r][c] = true;
                }
        CHECK(m.rank() == oracle::gf2_rank(dense));
    }
}

TEST_CASE("boundary of a boundary vanishes") {
    const auto cx = SimplicialComplex::closure_of({{0, 1, 2, 3}, {3, 4, 5}});
    for (int k = 2; k <= cx.dimension(); ++k)
        CHECK((boundary_matrix(cx, k - 1).matrix * boundary_matrix(cx, k).matrix).is_zero());
    CHECK_THROWS_AS(boundary_matrix(cx, 0), std::out_of_range);
    CHECK_THROWS_AS(boundary_matrix(cx, 4), std::out_of_range);
}

TEST_CASE("betti numbers of small shapes") {
    CHECK(betti_numbers(SimplicialComplex{}).empty());
    CHECK(betti_numbers(parse("0 1\n1 2\n0 2\n")) == BettiVector{1, 1});
    CHECK(betti_numbers(parse("0 1 2\n")) == BettiVector{1, 0, 0});
    // Hollow tetrahedron: a 2-sphere.
    CHECK(betti_numbers(parse("0 1 2\n0 1 3\n0 2 3\n1 2 3\n")) == BettiVector{1, 0, 1});
    CHECK(betti_numbers(parse("0\n1\n2\n")) == BettiVector{3});
    CHECK(to_string(BettiVector{1, 4, 0, 0}) == "(1, 4, 0, 0)");
}

TEST_CASE("tetrahedron, triangle and a joining edge") {
    const auto cx = parse("0 1 2 3\n4 5 6\n3 4\n");
    CHECK(betti_numbers(cx) == BettiVector{1, 0, 0, 0});
    CHECK(euler_characteristic(cx) == 1);
}

TEST_CASE("Euler characteristic and components against counting oracles") {
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
        const auto masks = oracle::random_complex(rng);
        std::vector<Simplex> gens;
        for (auto m : masks) {
            std::vector<VertexId> vs;
            for (VertexId v = 0; v < 64; ++v)
                if (m >> v & 1)
                    vs.push_back(v);
            gens.emplace_back(vs);
        }
        const auto cx = SimplicialComplex::closure_of(gens);
        CHECK(cx.size() == oracle::all_faces(masks).size());
        CHECK(euler_characteristic(cx) == oracle::euler_by_count(masks));
        const auto b = betti_numbers(cx);
        CHECK(alternating_sum(b) == oracle::euler_by_count(masks));
        CHECK(b[0] == oracle::components_by_union_find(masks));
    }
}
