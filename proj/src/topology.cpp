#include "topocbt/topology.hpp"

#include <algorithm>
#include <ostream>

#include <spdlog/spdlog.h>

namespace topocbt {

std::string to_string(TopologyMode mode) {
    return mode == TopologyMode::abstract ? "abstract" : "replicated";
}

TopologyMode parse_topology_mode(const std::string& s) {
    if (s == "abstract")
        return TopologyMode::abstract;
    if (s == "replicated")
        return TopologyMode::replicated;
    throw std::invalid_argument("unknown topology mode '" + s + "'");
}

std::vector<ChainId> CrossChainTransaction::chains() const {
    std::vector<ChainId> out;
    for (const auto& b : blocks)
        out.push_back(b.chain);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::size_t CrossChainTransaction::total_updates() const {
    std::size_t n = 0;
    for (const auto& s : sub_transactions)
        n += s.updates.size();
    return n;
}

void validate_shape(const CrossChainTransaction& txn) {
    const auto where = "txn " + std::to_string(txn.id) + ": ";
    if (txn.parties.size() < 2)
        throw TxnError(where + "needs at least two parties");
    std::map<ChainId, Height> height_of;
    for (const auto& b : txn.blocks) {
        auto [it, inserted] = height_of.emplace(b.chain, b.height);
        if (!inserted && it->second != b.height)
            throw TxnError(where + "chain " + std::to_string(b.chain) +
                           " referenced at more than one height");
    }
    if (height_of.size() < 2)
        throw TxnError(where + "must span at least two chains");
    for (std::size_t i = 0; i < txn.sub_transactions.size(); ++i) {
        const auto& sub = txn.sub_transactions[i];
        const auto sub_where = where + "sub-transaction " + std::to_string(i + 1) + ": ";
        if (sub.face.empty())
            throw TxnError(sub_where + "empty face");
        for (const auto& f : sub.face)
            if (std::find(txn.blocks.begin(), txn.blocks.end(), f) == txn.blocks.end())
                throw TxnError(sub_where + to_string(f) + " is not a transaction block");
        for (const auto& u : sub.updates) {
            bool on_face = std::any_of(sub.face.begin(), sub.face.end(),
                                       [&](const BlockRef& f) { return f.chain == u.chain; });
            if (!on_face)
                throw TxnError(sub_where + "update on chain " + std::to_string(u.chain) +
                               " outside its face");
        }
    }
}

void validate(const Federation& federation, const CrossChainTransaction& txn) {
    validate_shape(txn);
    for (const auto& b : txn.blocks) {
        if (!federation.has_chain(b.chain) || !federation.chain(b.chain).find(b))
            throw TxnError("txn " + std::to_string(txn.id) + ": missing block " + to_string(b));
        if (!federation.is_live(b))
            throw TxnError("txn " + std::to_string(txn.id) + ": block " + to_string(b) +
                           " is on a dead branch");
    }
}

VertexIndex::VertexIndex(const Federation& federation, TopologyMode mode) : mode_(mode) {
    VertexId next = 0;
    for (const auto& [id, chain] : federation.chains()) {
        std::set<BlockRef> canonical;
        if (mode == TopologyMode::replicated)
            for (const auto& ref : chain.canonical_path())
                canonical.insert(ref);
        for (const auto& [ref, blk] : chain.blocks()) {
            const std::uint32_t slots = canonical.contains(ref) ? chain.replicas() : 1;
            auto& ids = ids_[ref];
            for (std::uint32_t r = 0; r < slots; ++r)
                ids.push_back(next++);
        }
    }
}

const std::vector<VertexId>& VertexIndex::vertices(const BlockRef& ref) const {
    auto it = ids_.find(ref);
    if (it == ids_.end())
        throw TxnError("no vertex for block " + to_string(ref));
    return it->second;
}

std::vector<BlockRef> touched_blocks(const Federation& federation,
                                     const CrossChainTransaction& txn) {
    std::set<std::pair<ChainId, Height>> heights;
    for (const auto& b : txn.blocks)
        heights.emplace(b.chain, b.height);
    std::vector<BlockRef> out;
    for (const auto& [chain, height] : heights)
        for (const auto& ref : federation.chain(chain).live_blocks_at(height))
            out.push_back(ref);
    return out;
}

TransactionSimplex transaction_simplex(const Federation& federation,
                                       const CrossChainTransaction& txn, TopologyMode mode) {
    validate(federation, txn);
    TransactionSimplex out;
    out.blocks = touched_blocks(federation, txn);

    // Pairwise check that blocks sharing a chain share a height.
    for (const auto& a : out.blocks) {
        for (const auto& b : out.blocks) {
            ++out.pair_checks;
            if (a.chain == b.chain && a.height != b.height)
                throw TxnError("txn " + std::to_string(txn.id) + ": inconsistent heights");
        }
    }

    const VertexIndex index(federation, mode);
    std::vector<VertexId> vs;
    for (const auto& ref : out.blocks)
        for (auto v : index.vertices(ref))
            vs.push_back(v);
    out.simplex = Simplex::from_unordered(std::move(vs));
    return out;
}

int expected_transaction_dimension(const Federation& federation,
                                   const CrossChainTransaction& txn, TopologyMode mode) {
    std::map<ChainId, Height> heights;
    for (const auto& b : txn.blocks)
        heights.emplace(b.chain, b.height);
    int total = 0;
    for (const auto& [id, height] : heights) {
        const auto& chain = federation.chain(id);
        const int m = mode == TopologyMode::replicated ? static_cast<int>(chain.replicas()) : 1;
        const int f = static_cast<int>(chain.live_fork_count(height));
        total += m + f;
    }
    return total - 1;
}

void TaggedComplex::add_vertex(VertexId v) {
    vertices_.insert(v);
    complex_.insert(Simplex{v});
}

void TaggedComplex::add_structural(const Simplex& s) {
    if (s.dimension() < 1) {
        add_vertex(s.vertices()[0]);
        return;
    }
    structural_generators_.push_back(s);
    for (auto& f : s.all_faces())
        if (f.dimension() >= 1)
            structural_.insert(std::move(f));
    complex_.insert(s);
}

void TaggedComplex::add_transaction(TxnId txn, const Simplex& s) {
    if (transactions_.contains(txn))
        teardown(txn);
    transactions_.emplace(txn, s);
    complex_.insert(s);
}

bool TaggedComplex::teardown(TxnId txn) {
    auto it = transactions_.find(txn);
    if (it == transactions_.end()) {
        spdlog::debug("teardown: txn {} has no simplex, ignoring", txn);
        return false;
    }
    const Simplex sigma = it->second;
    transactions_.erase(it);

    auto faces = sigma.all_faces();
    std::stable_sort(faces.begin(), faces.end(), [](const Simplex& a, const Simplex& b) {
        return a.dimension() > b.dimension();
    });
    for (const auto& f : faces) {
        if (f.dimension() < 1 || structural_.contains(f) || !complex_.contains(f))
            continue;
        bool shared = std::any_of(transactions_.begin(), transactions_.end(),
                                  [&](const auto& kv) { return f.is_face_of(kv.second); });
        if (!shared)
            complex_.remove(f);
    }
    return true;
}

std::vector<std::pair<Simplex, std::string>> TaggedComplex::tagged_generators() const {
    std::vector<std::pair<Simplex, std::string>> out;
    for (auto v : vertices_)
        out.emplace_back(Simplex{v}, "structural");
    auto gens = structural_generators_;
    std::sort(gens.begin(), gens.end());
    gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
    for (auto& g : gens)
        out.emplace_back(std::move(g), "structural");
    for (const auto& [id, s] : transactions_)
        out.emplace_back(s, "txn:" + std::to_string(id));
    return out;
}

TaggedComplex build_federation_complex(const Federation& federation,
                                       const std::vector<CrossChainTransaction>& transactions,
                                       const BuildOptions& options) {
    for (const auto& txn : transactions)
        validate(federation, txn);

    std::map<ChainId, std::vector<Height>> referenced;
    for (const auto& txn : transactions)
        for (const auto& b : txn.blocks)
            referenced[b.chain].push_back(b.height);

    auto included = [&](const Chain& chain, const BlockRef& ref) {
        if (!chain.is_live(ref))
            return false;
        if (!options.window_radius)
            return true;
        auto it = referenced.find(ref.chain);
        if (it == referenced.end())
            return false;
        return std::any_of(it->second.begin(), it->second.end(), [&](Height h) {
            const Height lo = h > *options.window_radius ? h - *options.window_radius : 0;
            return ref.height >= lo && ref.height <= h + *options.window_radius;
        });
    };

    const VertexIndex index(federation, options.mode);
    TaggedComplex tc;
    for (const auto& [id, chain] : federation.chains()) {
        for (const auto& [ref, blk] : chain.blocks()) {
            if (!included(chain, ref))
                continue;
            const auto& vs = index.vertices(ref);
            for (auto v : vs)
                tc.add_vertex(v);
            if (vs.size() >= 2)
                tc.add_structural(Simplex(vs));

            // One edge per adjacency, between first replicas. Linking every
            // replica to its own parent copy would leave unfilled squares
            // between consecutive blocks and count them as holes.
            if (auto parent = chain.parent_of(ref); parent && included(chain, *parent))
                tc.add_structural(
                    Simplex::from_unordered({vs.front(), index.vertices(*parent).front()}));
        }

        // A fork tip is stitched to the block that follows it on the branch
        // it forked from.
        for (const auto& branch : chain.branches()) {
            if (branch.label == 0 || !branch.live || !branch.tip)
                continue;
            const BlockRef tip{id, *branch.tip, branch.label};
            auto succ = chain.path_block(branch.parent, *branch.tip + 1);
            if (!succ || !chain.find(*succ) || !included(chain, tip) || !included(chain, *succ))
                continue;
            tc.add_structural(Simplex::from_unordered(
                {index.vertices(tip).front(), index.vertices(*succ).front()}));
        }
    }

    for (const auto& txn : transactions)
        tc.add_transaction(txn.id, transaction_simplex(federation, txn, options.mode).simplex);
    return tc;
}

void write_tagged(std::ostream& complex_out, std::ostream& tags_out, const TaggedComplex& tc) {
    for (const auto& [s, tag] : tc.tagged_generators()) {
        write_simplices(complex_out, {s});
        tags_out << tag << '\n';
    }
}

}  // namespace topocbt
