#include "topocbt/federation.hpp"

#include <algorithm>
#include <stdexcept>

namespace topocbt {

namespace {

std::vector<BlockRef> canonical(std::span<const BlockRef> refs) {
    std::vector<BlockRef> out(refs.begin(), refs.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

Chain& Federation::add_chain(Chain chain) {
    const auto id = chain.id();
    auto [it, inserted] = chains_.emplace(id, std::move(chain));
    if (!inserted)
        throw ChainError("duplicate chain id " + std::to_string(id));
    return it->second;
}

Chain& Federation::chain(ChainId id) {
    auto it = chains_.find(id);
    if (it == chains_.end())
        throw ChainError("unknown chain " + std::to_string(id));
    return it->second;
}

const Chain& Federation::chain(ChainId id) const {
    auto it = chains_.find(id);
    if (it == chains_.end())
        throw ChainError("unknown chain " + std::to_string(id));
    return it->second;
}

const Block& Federation::block(const BlockRef& ref) const {
    return chain(ref.chain).at(ref);
}

bool Federation::is_live(const BlockRef& ref) const {
    return has_chain(ref.chain) && chain(ref.chain).is_live(ref);
}

LockResult Federation::lock_blocks(std::span<const BlockRef> refs, TxnId txn) {
    auto ordered = canonical(refs);
    for (const auto& ref : ordered) {
        const auto& blk = block(ref);
        if (blk.locked_by && *blk.locked_by != txn)
            return LockConflict{ref, *blk.locked_by};
    }
    for (const auto& ref : ordered)
        chain(ref.chain).set_lock(ref, txn);
    return LockGrant{std::move(ordered)};
}

void Federation::release_blocks(std::span<const BlockRef> refs, TxnId txn) {
    auto ordered = canonical(refs);
    for (const auto& ref : ordered) {
        const auto& blk = block(ref);
        if (blk.locked_by != txn)
            throw std::logic_error("release of " + to_string(ref) + " by txn " +
                                   std::to_string(txn) + " which does not hold it");
    }
    for (const auto& ref : ordered)
        chain(ref.chain).set_lock(ref, std::nullopt);
}

std::optional<TxnId> Federation::holder(const BlockRef& ref) const {
    return block(ref).locked_by;
}

std::size_t Federation::locks_held() const {
    std::size_t n = 0;
    for (const auto& [id, c] : chains_)
        for (const auto& [ref, blk] : c.blocks())
            n += blk.locked_by.has_value();
    return n;
}

void Federation::clear_locks() {
    for (auto& [id, c] : chains_)
        for (const auto& [ref, blk] : c.blocks())
            if (blk.locked_by)
                c.set_lock(ref, std::nullopt);
}

std::optional<BlockRef> Federation::apply(ChainId id, std::vector<AssetUpdate> updates) {
    auto& c = chain(id);
    auto bal = c.balances();
    if (!apply_updates(bal, updates))
        return std::nullopt;
    return c.append_block(c.canonical_branch(), std::move(updates));
}

std::map<ChainId, Balances> Federation::balances() const {
    std::map<ChainId, Balances> out;
    for (const auto& [id, c] : chains_)
        out.emplace(id, c.balances());
    return out;
}

Digest Federation::state_digest() const {
    return digest_balances(balances());
}

void Federation::resolve_all_forks() {
    for (auto& [id, c] : chains_)
        c.resolve_forks();
}

Digest digest_balances(const std::map<ChainId, Balances>& balances) {
    ByteWriter w;
    for (const auto& [id, bal] : balances) {
        w.u32(id);
        w.bytes(encode_balances(bal));
    }
    return sha256(w.data());
}

LockAcquisition::LockAcquisition(std::vector<BlockRef> refs, TxnId txn)
    : refs_(canonical(refs)), txn_(txn) {}

LockAcquisition::Step LockAcquisition::step(Federation& federation) {
    if (complete())
        return {Status::complete, std::nullopt, std::nullopt};
    const auto& ref = refs_[next_];
    auto holder = federation.holder(ref);
    if (holder && *holder != txn_)
        return {Status::waiting, ref, holder};
    federation.chain(ref.chain).set_lock(ref, txn_);
    ++next_;
    return {Status::acquired, ref, std::nullopt};
}

}  // namespace topocbt
