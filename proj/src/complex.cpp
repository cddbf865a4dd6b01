#include "topocbt/complex.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace topocbt {

SimplicialComplex SimplicialComplex::closure_of(const std::vector<Simplex>& generators) {
    SimplicialComplex c;
    for (const auto& g : generators)
        c.insert(g);
    return c;
}

void SimplicialComplex::insert(const Simplex& s) {
    if (members_.contains(s))
        return;  // members are face-closed, so all faces are present too
    for (auto& face : s.all_faces())
        members_.insert(std::move(face));
}

bool SimplicialComplex::remove(const Simplex& s, FacePolicy policy) {
    if (!members_.contains(s)) {
        spdlog::debug("remove_simplex: {} is not a member, ignoring", s.to_string());
        return false;
    }
    std::erase_if(members_, [&](const Simplex& m) { return s.is_face_of(m); });

    if (policy == FacePolicy::drop_orphans) {
        auto faces = s.all_faces();
        // Highest dimension first so a dropped face can orphan its own faces.
        std::sort(faces.begin(), faces.end(), [](const Simplex& a, const Simplex& b) {
            return a.dimension() > b.dimension();
        });
        for (const auto& f : faces) {
            if (f.dimension() < 1 || f == s || !members_.contains(f))
                continue;
            bool has_coface = std::any_of(members_.begin(), members_.end(), [&](const Simplex& m) {
                return m.dimension() > f.dimension() && f.is_face_of(m);
            });
            if (!has_coface)
                members_.erase(f);
        }
    }
    return true;
}

int SimplicialComplex::dimension() const {
    int dim = -1;
    for (const auto& s : members_)
        dim = std::max(dim, s.dimension());
    return dim;
}

std::size_t SimplicialComplex::count(int k) const {
    return static_cast<std::size_t>(std::count_if(
        members_.begin(), members_.end(), [k](const Simplex& s) { return s.dimension() == k; }));
}

std::vector<Simplex> SimplicialComplex::simplices(int k) const {
    std::vector<Simplex> out;
    for (const auto& s : members_)
        if (s.dimension() == k)
            out.push_back(s);
    return out;  // std::set iteration is already lexicographic
}

std::vector<Simplex> SimplicialComplex::maximal_simplices() const {
    std::vector<Simplex> out;
    for (const auto& s : members_) {
        bool maximal = std::none_of(members_.begin(), members_.end(), [&](const Simplex& m) {
            return m.dimension() > s.dimension() && s.is_face_of(m);
        });
        if (maximal)
            out.push_back(s);
    }
    return out;
}

std::vector<VertexId> SimplicialComplex::vertices() const {
    std::vector<VertexId> out;
    for (const auto& s : members_)
        if (s.dimension() == 0)
            out.push_back(s.vertices()[0]);
    return out;
}

bool is_valid_complex(const std::set<Simplex>& members) {
    for (const auto& s : members)
        for (const auto& f : s.facets())
            if (!members.contains(f))
                return false;  // facets suffice: closure is transitive
    return true;
}

void write_simplices(std::ostream& out, const std::vector<Simplex>& simplices) {
    for (const auto& s : simplices) {
        auto v = s.vertices();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i)
                out << ' ';
            out << v[i];
        }
        out << '\n';
    }
}

void write_complex(std::ostream& out, const SimplicialComplex& complex) {
    for (int k = 0; k <= complex.dimension(); ++k)
        write_simplices(out, complex.simplices(k));
}

SimplicialComplex read_complex(std::istream& in) {
    SimplicialComplex c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        std::vector<VertexId> vs;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            VertexId v{};
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc{})
                throw std::runtime_error("complex line " + std::to_string(lineno) +
                                         ": expected vertex id");
            vs.push_back(v);
            p = next;
            if (p < end) {
                if (*p != ' ' || p + 1 == end)
                    throw std::runtime_error("complex line " + std::to_string(lineno) +
                                             ": vertices must be separated by single spaces");
                ++p;
            }
        }
        try {
            c.insert(Simplex(std::move(vs)));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("complex line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

}  // namespace topocbt
