#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "topocbt/digest.hpp"

namespace topocbt {

using ChainId = std::uint32_t;
using Height = std::uint32_t;
using BranchLabel = std::uint32_t;
using TxnId = std::uint64_t;
using PartyId = std::string;
using Amount = std::int64_t;

/// The `height`-th block of chain `chain` on branch `branch` (0 = main).
struct BlockRef {
    ChainId chain = 0;
    Height height = 0;
    BranchLabel branch = 0;

    friend auto operator<=>(const BlockRef&, const BlockRef&) = default;
};

std::string to_string(const BlockRef& ref);

/// Moves `amount` of `asset` from one party to another. An empty `from` is
/// the issuer, used only by genesis payloads to mint initial balances.
struct AssetUpdate {
    PartyId from;
    PartyId to;
    std::string asset;
    Amount amount = 0;

    friend bool operator==(const AssetUpdate&, const AssetUpdate&) = default;
};

/// Effective holdings keyed by (party, asset).
using Balances = std::map<std::pair<PartyId, std::string>, Amount>;

/// Applies `updates` in order. Returns false, leaving `balances` untouched,
/// if any non-issuer sender would go negative or an amount is not positive.
bool apply_updates(Balances& balances, std::span<const AssetUpdate> updates);

/// Canonical bytes of the non-zero entries, in key order.
std::vector<std::uint8_t> encode_balances(const Balances& balances);
Balances decode_balances(std::span<const std::uint8_t> bytes);

struct Block {
    BlockRef ref;
    Digest parent_hash{};
    std::vector<AssetUpdate> payload;
    Digest hash{};
    std::optional<TxnId> locked_by;
};

/// Digest over (ref, parent_hash, payload); the lock flag is excluded.
Digest compute_block_hash(const BlockRef& ref, const Digest& parent_hash,
                          std::span<const AssetUpdate> payload);

struct ChainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An append-only, hash-linked chain with fork branches.
///
/// Branch 0 is the main branch and starts at the genesis block. A fork
/// branch spawned at height j hangs off the block at height j-1 of the
/// branch that was canonical at spawn time.
class Chain {
public:
    struct Branch {
        BranchLabel label = 0;
        BranchLabel parent = 0;
        Height fork_height = 0;          ///< height of the branch's first block
        std::optional<Height> tip;       ///< nullopt until the first append
        bool live = true;
    };

    struct HashCheck {
        bool ok = true;
        std::optional<BlockRef> first_violation;
    };

    Chain(ChainId id, std::uint32_t replicas, std::vector<AssetUpdate> genesis_payload = {});

    ChainId id() const { return id_; }
    std::uint32_t replicas() const { return replicas_; }

    /// Appends at the next height of `branch`. When `at` is given it must be
    /// that next height, otherwise the parent would be missing.
    BlockRef append_block(BranchLabel branch, std::vector<AssetUpdate> payload,
                          std::optional<Height> at = std::nullopt);

    /// Opens a new branch whose first block will sit at `at_height`.
    BranchLabel spawn_fork(Height at_height);

    /// Keeps the longest live branch (ties: lowest label) and marks the rest
    /// dead. Their blocks stay in the store.
    BranchLabel resolve_forks();

    HashCheck verify_hash_chain() const;

    const std::map<BlockRef, Block>& blocks() const { return blocks_; }
    const Block* find(const BlockRef& ref) const;
    const Block& at(const BlockRef& ref) const;

    const std::vector<Branch>& branches() const { return branches_; }
    const Branch& branch(BranchLabel label) const;

    /// Height of the last block on the branch's path from genesis.
    Height path_tip(BranchLabel label) const;

    /// The block at `height` on the path from genesis to `label`'s tip.
    std::optional<BlockRef> path_block(BranchLabel label, Height height) const;

    std::optional<BlockRef> parent_of(const BlockRef& ref) const;

    /// The live branch fork resolution would keep right now.
    BranchLabel canonical_branch() const;
    std::vector<BlockRef> canonical_path() const;

    bool is_live(const BlockRef& ref) const;
    /// Live blocks at `height`, ascending by branch label.
    std::vector<BlockRef> live_blocks_at(Height height) const;
    std::size_t live_fork_count(Height height) const;

    /// Fold of payloads along the canonical path.
    Balances balances() const;

    /// Lock flag is the only field that may change after append.
    void set_lock(const BlockRef& ref, std::optional<TxnId> holder);

    /// Bypasses the append-only contract; only for tamper-evidence tests.
    Block& mutable_block_for_testing(const BlockRef& ref);

private:
    ChainId id_;
    std::uint32_t replicas_;
    std::map<BlockRef, Block> blocks_;
    std::vector<Branch> branches_;
};

}  // namespace topocbt
