#include "topocbt/baselines.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace topocbt {

namespace {

constexpr const char* kWitnessParty = "witness";

std::size_t step_bytes(const SwapStep& s) {
    ByteWriter w;
    w.str(s.from);
    w.str(s.to);
    w.str(s.asset);
    w.i64(s.amount);
    w.u32(s.chain);
    w.u64(s.deadline);
    w.u8(static_cast<std::uint8_t>(s.state));
    return w.data().size();
}

std::size_t block_bytes(const Block& b) {
    ByteWriter w;
    w.u32(b.ref.chain);
    w.u32(b.ref.height);
    w.u32(b.ref.branch);
    w.bytes(b.parent_hash);
    for (const auto& u : b.payload) {
        w.str(u.from);
        w.str(u.to);
        w.str(u.asset);
        w.i64(u.amount);
    }
    w.bytes(b.hash);
    return w.data().size();
}

using NetChange = std::map<PartyId, std::map<std::string, Amount>>;

NetChange net_change(const std::vector<AssetUpdate>& updates) {
    NetChange net;
    for (const auto& u : updates) {
        net[u.from][u.asset] -= u.amount;
        net[u.to][u.asset] += u.amount;
    }
    for (auto& [party, assets] : net)
        std::erase_if(assets, [](const auto& kv) { return kv.second == 0; });
    return net;
}

}  // namespace

std::string to_string(BaselineStatus status) {
    switch (status) {
    case BaselineStatus::committed: return "Committed";
    case BaselineStatus::aborted: return "Aborted";
    case BaselineStatus::partial_commit: return "PartialCommit";
    case BaselineStatus::blocked: return "Blocked";
    }
    return "?";
}

std::string to_string(SwapState state) {
    switch (state) {
    case SwapState::offered: return "Offered";
    case SwapState::claimed: return "Claimed";
    case SwapState::expired: return "Expired";
    }
    return "?";
}

std::vector<std::vector<SwapStep>> decompose_swaps(const CrossChainTransaction& txn) {
    std::vector<std::vector<SwapStep>> swaps;
    for (std::size_t i = 0; i < txn.sub_transactions.size(); ++i) {
        const auto& sub = txn.sub_transactions[i];
        std::set<PartyId> parties;
        for (const auto& u : sub.updates) {
            parties.insert(u.update.from);
            parties.insert(u.update.to);
        }
        if (parties.size() != 2)
            throw TxnError("txn " + std::to_string(txn.id) + ": sub-transaction " +
                           std::to_string(i + 1) + " is not a two-party swap");
        std::vector<SwapStep> steps;
        for (const auto& u : sub.updates)
            steps.push_back({u.update.from, u.update.to, u.update.asset, u.update.amount, u.chain,
                             0, SwapState::offered});
        swaps.push_back(std::move(steps));
    }
    return swaps;
}

std::set<PartyId> worse_off_parties(const CrossChainTransaction& txn,
                                    const std::vector<AssetUpdate>& executed) {
    std::vector<AssetUpdate> intended;
    for (const auto& sub : txn.sub_transactions)
        for (const auto& u : sub.updates)
            intended.push_back(u.update);
    auto want = net_change(intended);
    auto got = net_change(executed);

    std::set<PartyId> out;
    for (const auto& [party, assets] : got) {
        if (assets.empty() || assets == want[party])
            continue;
        bool lost = std::any_of(assets.begin(), assets.end(),
                                [](const auto& kv) { return kv.second < 0; });
        if (lost)
            out.insert(party);
    }
    return out;
}

Ac2sResult ac2s_execute(Federation& federation, const CrossChainTransaction& txn,
                        const FailurePlan& plan, SimClock& clock, const BaselineConfig& config) {
    validate(federation, txn);
    Ac2sResult result;
    result.swaps = decompose_swaps(txn);
    auto& out = result.outcome;

    const std::size_t n = touched_blocks(federation, txn).size();
    const std::uint64_t t0 = clock.now();
    std::vector<AssetUpdate> executed;
    std::size_t total_steps = 0;

    for (std::size_t k = 0; k < result.swaps.size(); ++k) {
        auto& swap = result.swaps[k];
        total_steps += swap.size();
        // A time clock between every pair of parties in the touched blocks.
        out.primitive_ops += n * n;

        std::set<PartyId> walkers = plan.walk_away;
        if (auto it = plan.sub_failures.find(k);
            it != plan.sub_failures.end() && it->second != SubFailure::none && !swap.empty())
            walkers.insert(swap.front().to);

        std::size_t live_bytes = 0;
        for (auto& step : swap) {
            const std::uint64_t deadline = clock.now() + config.timelock;
            step.deadline = deadline;
            live_bytes += step_bytes(step);
            ++out.primitive_ops;

            const auto have = federation.chain(step.chain).balances()[{step.from, step.asset}];
            if (walkers.contains(step.from) || have < step.amount) {
                step.state = SwapState::expired;  // never funded
                continue;
            }
            clock.send();  // offer / escrow
            ++out.messages;

            std::uint64_t claim_at = 0;
            if (walkers.contains(step.to))
                claim_at = deadline + 1;
            else if (plan.late.contains(step.to))
                claim_at = std::max(clock.now(), deadline) + 1;
            else
                claim_at = clock.send();
            ++out.messages;

            AssetUpdate u{step.from, step.to, step.asset, step.amount};
            if (claim_at <= deadline && federation.apply(step.chain, {u})) {
                step.state = SwapState::claimed;
                executed.push_back(std::move(u));
                ++out.applied_updates;
            } else {
                step.state = SwapState::expired;  // escrow refunded to the sender
            }
        }
        out.space_bytes = std::max(out.space_bytes, live_bytes);
        clock.advance(1);
    }

    if (out.applied_updates == total_steps)
        out.status = BaselineStatus::committed;
    else if (out.applied_updates == 0)
        out.status = BaselineStatus::aborted;
    else
        out.status = BaselineStatus::partial_commit;
    out.worse_off = worse_off_parties(txn, executed);
    out.ticks = clock.now() - t0;
    return result;
}

WitnessChain::WitnessChain() : chain_(kChainId, 1) {}

AssetUpdate WitnessChain::encode(const Decision& d) {
    const char* asset = d.kind == DecisionKind::prepared        ? "2pc:prepared"
                        : d.kind == DecisionKind::global_commit ? "2pc:global-commit"
                                                                : "2pc:global-abort";
    return {kWitnessParty, "txn:" + std::to_string(d.txn), asset, Amount{d.sub} + 1};
}

std::optional<Decision> WitnessChain::decode(const AssetUpdate& u) {
    if (u.from != kWitnessParty || u.to.rfind("txn:", 0) != 0 || u.amount < 1)
        return std::nullopt;
    Decision d;
    if (u.asset == "2pc:prepared")
        d.kind = DecisionKind::prepared;
    else if (u.asset == "2pc:global-commit")
        d.kind = DecisionKind::global_commit;
    else if (u.asset == "2pc:global-abort")
        d.kind = DecisionKind::global_abort;
    else
        return std::nullopt;
    d.txn = std::stoull(u.to.substr(4));
    d.sub = static_cast<std::uint32_t>(u.amount - 1);
    return d;
}

BlockRef WitnessChain::append(const Decision& d) {
    if (d.kind != DecisionKind::prepared && decision_for(d.txn))
        throw std::logic_error("witness: txn " + std::to_string(d.txn) +
                               " already has a global decision");
    return chain_.append_block(0, {encode(d)});
}

std::vector<Decision> WitnessChain::records() const {
    std::vector<Decision> out;
    for (const auto& ref : chain_.canonical_path())
        for (const auto& u : chain_.at(ref).payload)
            if (auto d = decode(u))
                out.push_back(*d);
    return out;
}

std::optional<DecisionKind> WitnessChain::decision_for(TxnId txn) const {
    for (const auto& d : records())
        if (d.txn == txn && d.kind != DecisionKind::prepared)
            return d.kind;
    return std::nullopt;
}

std::size_t WitnessChain::block_bytes(TxnId txn) const {
    std::size_t n = 0;
    for (const auto& [ref, blk] : chain_.blocks()) {
        bool mine = std::any_of(blk.payload.begin(), blk.payload.end(), [&](const AssetUpdate& u) {
            auto d = decode(u);
            return d && d->txn == txn;
        });
        if (mine)
            n += topocbt::block_bytes(blk);
    }
    return n;
}

BaselineOutcome ac3wn_execute(Federation& federation, WitnessChain& witness,
                              const CrossChainTransaction& txn, const FailurePlan& plan,
                              SimClock& clock, const BaselineConfig& config) {
    validate(federation, txn);
    BaselineOutcome out;
    const auto blocks = touched_blocks(federation, txn);
    const std::size_t n = blocks.size();
    const std::uint64_t t0 = clock.now();

    out.messages += n;
    out.primitive_ops += n;
    auto lock = federation.lock_blocks(blocks, txn.id);
    if (std::holds_alternative<LockConflict>(lock)) {
        out.status = BaselineStatus::aborted;
        out.ticks = clock.now() - t0;
        return out;
    }

    // Prepare phase: each sub-transaction is validated by its participants
    // against a scratch copy and, on a yes vote, recorded on the witness.
    out.messages += n;
    clock.send();
    auto scratch = federation.balances();
    bool all_yes = true;
    std::uint32_t prepared = 0;
    for (std::size_t k = 0; k < txn.sub_transactions.size(); ++k) {
        const auto& sub = txn.sub_transactions[k];
        out.primitive_ops += n;
        bool yes = plan.failure_for(txn, k) == SubFailure::none;
        if (yes) {
            std::map<ChainId, std::vector<AssetUpdate>> per_chain;
            for (const auto& u : sub.updates)
                per_chain[u.chain].push_back(u.update);
            for (const auto& [chain, updates] : per_chain)
                yes = yes && apply_updates(scratch[chain], updates);
        }
        if (!yes) {
            all_yes = false;
            break;
        }
        witness.append({DecisionKind::prepared, txn.id, static_cast<std::uint32_t>(k)});
        ++prepared;
        out.primitive_ops += prepared;  // checked against earlier witness records
    }
    out.messages += n;  // votes
    clock.send();
    out.primitive_ops += n * n;

    if (plan.coordinator == CoordinatorCrash::after_prepare) {
        // No decision will ever appear; participants keep their locks and
        // poll until the blocking horizon.
        clock.advance(config.horizon_factor * config.timelock + 1);
        spdlog::debug("ac3wn txn {}: coordinator lost after prepare, blocked", txn.id);
        out.status = BaselineStatus::blocked;
        out.locks_held = n;
        out.space_bytes = witness.block_bytes(txn.id);
        out.ticks = clock.now() - t0;
        return out;
    }

    const auto decision = all_yes ? DecisionKind::global_commit : DecisionKind::global_abort;
    witness.append({decision, txn.id, 0});
    ++out.primitive_ops;
    out.messages += n;  // participants read the decision
    clock.send();

    if (decision == DecisionKind::global_commit) {
        for (const auto& sub : txn.sub_transactions) {
            std::map<ChainId, std::vector<AssetUpdate>> per_chain;
            for (const auto& u : sub.updates)
                per_chain[u.chain].push_back(u.update);
            for (auto& [chain, updates] : per_chain) {
                if (witness.decision_for(txn.id) != DecisionKind::global_commit)
                    throw std::logic_error("ac3wn: apply without a global commit");
                const auto count = updates.size();
                if (!federation.apply(chain, std::move(updates)))
                    throw std::logic_error("ac3wn: prepared update rejected at commit");
                out.applied_updates += count;
                ++out.primitive_ops;
            }
        }
    }

    federation.release_blocks(blocks, txn.id);
    out.messages += n;
    out.primitive_ops += n;
    out.status = decision == DecisionKind::global_commit ? BaselineStatus::committed
                                                         : BaselineStatus::aborted;
    out.space_bytes = witness.block_bytes(txn.id);
    out.ticks = clock.now() - t0;
    return out;
}

}  // namespace topocbt
