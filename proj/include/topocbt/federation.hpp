#pragma once

#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "topocbt/chain.hpp"

namespace topocbt {

struct LockGrant {
    std::vector<BlockRef> refs;  ///< canonical acquisition order
};

struct LockConflict {
    BlockRef block;
    TxnId holder = 0;
};

using LockResult = std::variant<LockGrant, LockConflict>;

/// A cluster of chains, iterated in ascending chain id.
class Federation {
public:
    Chain& add_chain(Chain chain);

    bool has_chain(ChainId id) const { return chains_.contains(id); }
    Chain& chain(ChainId id);
    const Chain& chain(ChainId id) const;
    const std::map<ChainId, Chain>& chains() const { return chains_; }

    const Block& block(const BlockRef& ref) const;
    bool is_live(const BlockRef& ref) const;

    /// All-or-nothing: either every ref ends up held by `txn` or nothing
    /// changes and the first conflicting holder (canonical order) is named.
    /// Refs already held by `txn` count as granted.
    LockResult lock_blocks(std::span<const BlockRef> refs, TxnId txn);

    /// Throws std::logic_error, releasing nothing, if any ref is not held by
    /// `txn`.
    void release_blocks(std::span<const BlockRef> refs, TxnId txn);

    std::optional<TxnId> holder(const BlockRef& ref) const;
    std::size_t locks_held() const;
    void clear_locks();

    /// Appends `updates` as one block on the canonical branch of `chain`.
    /// Returns nullopt, appending nothing, if the updates cannot apply.
    std::optional<BlockRef> apply(ChainId chain, std::vector<AssetUpdate> updates);

    std::map<ChainId, Balances> balances() const;
    Digest state_digest() const;

    std::uint64_t epoch() const { return epoch_; }
    void advance_epoch() { ++epoch_; }

    /// Resolves forks on every chain.
    void resolve_all_forks();

private:
    std::map<ChainId, Chain> chains_;
    std::uint64_t epoch_ = 0;
};

/// Canonical digest of per-chain balances, zero entries excluded.
Digest digest_balances(const std::map<ChainId, Balances>& balances);

/// Incremental lock acquisition in canonical order, one block per step.
///
/// Used by the scheduler to interleave competing requests. Every request
/// climbs the same global order, so a holder that is itself waiting does so
/// on a strictly larger block than the one it blocks; waits-for edges cannot
/// close a cycle.
class LockAcquisition {
public:
    enum class Status { acquired, waiting, complete };

    struct Step {
        Status status;
        std::optional<BlockRef> block;
        std::optional<TxnId> waiting_on;
    };

    LockAcquisition(std::vector<BlockRef> refs, TxnId txn);

    Step step(Federation& federation);

    TxnId txn() const { return txn_; }
    bool complete() const { return next_ == refs_.size(); }
    std::span<const BlockRef> acquired() const { return {refs_.data(), next_}; }
    std::span<const BlockRef> refs() const { return refs_; }

private:
    std::vector<BlockRef> refs_;
    TxnId txn_;
    std::size_t next_ = 0;
};

}  // namespace topocbt
