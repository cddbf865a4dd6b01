#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "topocbt/complex.hpp"
#include "topocbt/federation.hpp"

namespace topocbt {

enum class TopologyMode {
    abstract,    ///< one vertex per block; a chain is a path
    replicated,  ///< a block on the canonical path contributes one vertex per replica
};

std::string to_string(TopologyMode mode);
TopologyMode parse_topology_mode(const std::string& s);

/// Updates bound to the chain whose ledger they move.
struct ScopedUpdate {
    ChainId chain = 0;
    AssetUpdate update;

    friend bool operator==(const ScopedUpdate&, const ScopedUpdate&) = default;
};

/// One face of the transaction simplex together with the updates applied
/// when the protocol visits it.
struct SubTransaction {
    std::vector<BlockRef> face;
    std::vector<ScopedUpdate> updates;
};

struct CrossChainTransaction {
    TxnId id = 0;
    std::vector<PartyId> parties;
    std::vector<BlockRef> blocks;  ///< one height per chain; listed forks optional
    std::vector<SubTransaction> sub_transactions;

    /// Distinct chains touched, ascending.
    std::vector<ChainId> chains() const;
    std::size_t total_updates() const;
};

struct TxnError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Structural checks that need no federation: >= 2 chains, one height per
/// chain, faces inside the block set, updates on chains of their face.
void validate_shape(const CrossChainTransaction& txn);

/// validate_shape plus: every block exists and is live.
void validate(const Federation& federation, const CrossChainTransaction& txn);

/// Stable numbering of (block, replica slot) pairs by canonical order
/// (chain, height, branch, replica) over every stored block.
class VertexIndex {
public:
    VertexIndex(const Federation& federation, TopologyMode mode);

    /// Vertices standing for `ref`: one per replica slot.
    const std::vector<VertexId>& vertices(const BlockRef& ref) const;
    TopologyMode mode() const { return mode_; }

private:
    TopologyMode mode_;
    std::map<BlockRef, std::vector<VertexId>> ids_;
};

/// Every live block at each height the transaction references, forks included.
std::vector<BlockRef> touched_blocks(const Federation& federation,
                                     const CrossChainTransaction& txn);

struct TransactionSimplex {
    Simplex simplex;
    std::vector<BlockRef> blocks;  ///< B_T with live forks expanded
    std::size_t pair_checks = 0;   ///< pairwise consistency checks performed
};

TransactionSimplex transaction_simplex(const Federation& federation,
                                       const CrossChainTransaction& txn,
                                       TopologyMode mode = TopologyMode::abstract);

/// Sum over touched chains of (m_i + f_i), minus one to turn a vertex count
/// into a dimension. m_i is 1 in abstract mode.
int expected_transaction_dimension(const Federation& federation,
                                   const CrossChainTransaction& txn,
                                   TopologyMode mode = TopologyMode::abstract);

/// A complex whose simplices are tagged by origin.
class TaggedComplex {
public:
    void add_vertex(VertexId v);
    void add_structural(const Simplex& s);
    /// Replaces any previous simplex registered for `txn`.
    void add_transaction(TxnId txn, const Simplex& s);

    /// Removes the transaction simplex and those of its faces that are neither
    /// structural nor shared with another transaction. Returns false for an
    /// unknown transaction.
    bool teardown(TxnId txn);

    const SimplicialComplex& complex() const { return complex_; }
    /// Closure of the structural generators, vertices excluded.
    const std::set<Simplex>& structural() const { return structural_; }
    const std::map<TxnId, Simplex>& transactions() const { return transactions_; }

    /// Generator lines with tags: vertices and structural generators tagged
    /// "structural", then one "txn:<id>" line per transaction.
    std::vector<std::pair<Simplex, std::string>> tagged_generators() const;

private:
    SimplicialComplex complex_;
    std::set<VertexId> vertices_;
    std::vector<Simplex> structural_generators_;
    std::set<Simplex> structural_;
    std::map<TxnId, Simplex> transactions_;
};

struct BuildOptions {
    TopologyMode mode = TopologyMode::abstract;
    /// Keep only blocks within this many heights of a referenced block on the
    /// same chain. nullopt keeps every live block.
    std::optional<Height> window_radius;
};

/// Throws TxnError if a transaction references a missing or dead block.
TaggedComplex build_federation_complex(const Federation& federation,
                                       const std::vector<CrossChainTransaction>& transactions,
                                       const BuildOptions& options = {});

/// Writes the generators to `complex_out` and their tags, line for line, to
/// `tags_out`.
void write_tagged(std::ostream& complex_out, std::ostream& tags_out, const TaggedComplex& tc);

}  // namespace topocbt
