#include "topocbt/engine.hpp"

#include <algorithm>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace topocbt {

bool FailurePlan::empty() const {
    return sub_failures.empty() && !crash && coordinator == CoordinatorCrash::none &&
           walk_away.empty() && late.empty() && vote_abort.empty();
}

SubFailure FailurePlan::failure_for(const CrossChainTransaction& txn, std::size_t sub) const {
    if (auto it = sub_failures.find(sub); it != sub_failures.end())
        return it->second;

    auto misbehaves = [&](const PartyId& p) {
        return walk_away.contains(p) || late.contains(p) || vote_abort.contains(p);
    };
    // The first face in which a misbehaving party has to send fails.
    for (std::size_t i = 0; i <= sub && i < txn.sub_transactions.size(); ++i) {
        for (const auto& u : txn.sub_transactions[i].updates) {
            if (misbehaves(u.update.from))
                return i == sub ? SubFailure::update_failure : SubFailure::none;
        }
    }
    return SubFailure::none;
}

std::string to_string(TxnStatus status) {
    switch (status) {
    case TxnStatus::committed: return "Committed";
    case TxnStatus::aborted: return "Aborted";
    case TxnStatus::pending: return "Pending";
    }
    return "?";
}

bool restore_balances(Federation& federation, ChainId chain, const Balances& snapshot) {
    const Balances current = federation.chain(chain).balances();

    // delta > 0: the party must receive; delta < 0: the party must give.
    std::map<std::string, std::vector<std::pair<PartyId, Amount>>> give, take;
    std::set<std::pair<PartyId, std::string>> keys;
    for (const auto& [k, v] : current)
        keys.insert(k);
    for (const auto& [k, v] : snapshot)
        keys.insert(k);
    for (const auto& key : keys) {
        auto get = [&](const Balances& b) {
            auto it = b.find(key);
            return it == b.end() ? Amount{0} : it->second;
        };
        const Amount delta = get(snapshot) - get(current);
        if (delta > 0)
            take[key.second].emplace_back(key.first, delta);
        else if (delta < 0)
            give[key.second].emplace_back(key.first, -delta);
    }
    if (give.empty() && take.empty())
        return false;

    std::vector<AssetUpdate> updates;
    for (auto& [asset, receivers] : take) {
        auto& givers = give[asset];
        std::size_t gi = 0;
        for (auto& [to, need] : receivers) {
            while (need > 0) {
                if (gi == givers.size())
                    throw std::logic_error("restore_balances: asset " + asset +
                                           " not conserved on chain " + std::to_string(chain));
                auto& [from, avail] = givers[gi];
                const Amount x = std::min(need, avail);
                updates.push_back({from, to, asset, x});
                need -= x;
                avail -= x;
                if (avail == 0)
                    ++gi;
            }
        }
        if (gi != givers.size())
            throw std::logic_error("restore_balances: asset " + asset + " not conserved on chain " +
                                   std::to_string(chain));
    }
    for (const auto& [asset, givers] : give)
        if (!take.contains(asset))
            throw std::logic_error("restore_balances: asset " + asset +
                                   " not conserved on chain " + std::to_string(chain));

    if (!federation.apply(chain, std::move(updates)))
        throw std::logic_error("restore_balances: compensation rejected on chain " +
                               std::to_string(chain));
    return true;
}

Engine::Engine(Federation& federation, Wal& wal, TaggedComplex* topology, TopologyMode mode)
    : federation_(federation), wal_(wal), topology_(topology), mode_(mode) {}

TxnOutcome Engine::execute(const CrossChainTransaction& txn, const FailurePlan& plan) {
    validate(federation_, txn);

    TxnOutcome out;
    std::size_t records = 0;
    // A crash "at k" strikes once k records are durable, either immediately
    // or right before the (k+1)-th record is written.
    auto crash_now = [&] {
        if (plan.crash && !plan.crash->after_actions && plan.crash->records == records)
            throw Crash{};
    };
    auto crash_before_record = [&] {
        if (plan.crash && plan.crash->after_actions && plan.crash->records == records)
            throw Crash{};
    };
    auto write_undo = [&](const BlockRef& ref) {
        crash_before_record();
        wal_.append_undo(txn.id, ref, encode_balances(federation_.chain(ref.chain).balances()));
        ++records;
        ++out.primitive_ops;
        crash_now();
    };
    auto write_terminal = [&](WalKind kind) {
        crash_before_record();
        wal_.append_terminal(txn.id, kind);
        ++records;
        ++out.primitive_ops;
        crash_now();
    };

    try {
        crash_now();
        const auto blocks = touched_blocks(federation_, txn);
        const std::size_t n = blocks.size();

        // Line 2: lock B_T.
        out.messages += n;
        out.primitive_ops += n;
        auto lock = federation_.lock_blocks(blocks, txn.id);
        if (auto* conflict = std::get_if<LockConflict>(&lock)) {
            out.status = TxnStatus::aborted;
            out.conflict = *conflict;
            return out;
        }
        auto release = [&] {
            federation_.release_blocks(blocks, txn.id);
            out.primitive_ops += n;
            out.messages += n;
        };
        auto break_down = [&] {
            if (topology_)
                topology_->teardown(txn.id);
            out.primitive_ops += n * n;
        };

        // Line 3: construct sigma.
        const auto sigma = transaction_simplex(federation_, txn, mode_);
        out.primitive_ops += sigma.pair_checks;
        if (topology_)
            topology_->add_transaction(txn.id, sigma.simplex);

        std::size_t applied = 0;
        for (std::size_t i = 0; i < txn.sub_transactions.size(); ++i) {
            const auto& sub = txn.sub_transactions[i];
            const auto failure = plan.failure_for(txn, i);

            for (const auto& ref : sub.face)
                write_undo(ref);
            if (failure == SubFailure::crash_after_undo)
                throw Crash{};

            out.primitive_ops += n;
            bool ok = failure != SubFailure::update_failure;
            if (ok) {
                // Group by chain, keeping declared order within a chain.
                std::map<ChainId, std::vector<AssetUpdate>> per_chain;
                for (const auto& u : sub.updates)
                    per_chain[u.chain].push_back(u.update);
                for (auto& [chain, updates] : per_chain) {
                    const auto count = updates.size();
                    ++out.messages;
                    if (!federation_.apply(chain, std::move(updates))) {
                        ok = false;
                        break;
                    }
                    applied += count;
                }
            }

            if (!ok) {
                // Lines 8-12: abort, roll back, break down, release.
                spdlog::debug("txn {}: sub-transaction {} failed, aborting", txn.id, i + 1);
                out.failed_sub = i;
                write_terminal(WalKind::abort);
                const auto mine = wal_.records();
                for (auto it = mine.rbegin(); it != mine.rend(); ++it) {
                    if (it->txn != txn.id || it->kind != WalKind::undo)
                        continue;
                    restore_balances(federation_, it->block.chain, decode_balances(it->snapshot));
                    ++out.primitive_ops;
                }
                break_down();
                release();
                crash_before_record();
                out.status = TxnStatus::aborted;
                out.applied_updates = 0;
                return out;
            }
            if (failure == SubFailure::crash_before_commit)
                throw Crash{};
        }

        // Lines 16-18.
        write_terminal(WalKind::commit);
        break_down();
        release();
        crash_before_record();
        out.status = TxnStatus::committed;
        out.applied_updates = applied;
        return out;
    } catch (const Crash&) {
        spdlog::debug("txn {}: node crashed after {} WAL records", txn.id, records);
        out.status = TxnStatus::pending;
        out.crashed = true;
        return out;
    }
}

RecoveryReport recover(Federation& federation, Wal& wal, TaggedComplex* topology) {
    validate_wal(wal.records());
    RecoveryReport report;

    std::vector<TxnId> order;  // first appearance
    std::set<TxnId> terminal;
    for (const auto& r : wal.records()) {
        if (std::find(order.begin(), order.end(), r.txn) == order.end())
            order.push_back(r.txn);
        if (r.terminal())
            terminal.insert(r.txn);
    }

    std::set<TxnId> targets;
    for (auto id : order)
        if (!terminal.contains(id))
            targets.insert(id);
    if (!wal.empty() && wal.records().back().kind == WalKind::abort)
        targets.insert(wal.records().back().txn);

    // Undo records are applied newest first to a scratch copy; each chain
    // then gets at most one compensating block, and none if it already
    // matches. Appending every intermediate snapshot would grow the chain
    // again on each pass.
    std::map<ChainId, Balances> restored;
    const auto records = std::vector<WalRecord>(wal.records().begin(), wal.records().end());
    for (auto it = records.rbegin(); it != records.rend(); ++it) {
        if (it->kind != WalKind::undo || !targets.contains(it->txn))
            continue;
        ++report.undo_records_applied;
        restored[it->block.chain] = decode_balances(it->snapshot);
    }
    for (const auto& [chain, snapshot] : restored)
        if (restore_balances(federation, chain, snapshot))
            ++report.compensation_blocks;
    // Nothing is in flight after a restart. This covers transactions that
    // crashed after Commit and those that crashed before their first record.
    if (topology) {
        std::vector<TxnId> registered;
        for (const auto& [id, simplex] : topology->transactions())
            registered.push_back(id);
        for (auto id : registered)
            topology->teardown(id);
    }
    for (auto id : order) {
        if (!targets.contains(id))
            continue;
        report.rolled_back.push_back(id);
        if (!terminal.contains(id)) {
            wal.append_terminal(id, WalKind::abort);
            report.aborts_appended.push_back(id);
        }
    }

    report.locks_cleared = federation.locks_held();
    federation.clear_locks();
    return report;
}

TxnOutcome topocbt_execute(Federation& federation, Wal& wal, const CrossChainTransaction& txn,
                           const FailurePlan& plan, TaggedComplex* topology, TopologyMode mode) {
    Engine engine(federation, wal, topology, mode);
    auto out = engine.execute(txn, plan);
    if (out.crashed) {
        const bool committed = std::any_of(wal.records().begin(), wal.records().end(),
                                           [&](const WalRecord& r) {
                                               return r.txn == txn.id && r.kind == WalKind::commit;
                                           });
        recover(federation, wal, topology);
        out.recovered = true;
        out.status = committed ? TxnStatus::committed : TxnStatus::aborted;
        if (committed)
            out.applied_updates = txn.total_updates();
    }
    return out;
}

ComplexityCheck count_complexity(const TxnOutcome& outcome, std::size_t n, std::size_t m,
                                 double c) {
    ComplexityCheck check;
    check.primitive_ops = outcome.primitive_ops;
    check.bound = c * static_cast<double>(n * n + n * m);
    check.within = static_cast<double>(check.primitive_ops) <= check.bound;
    return check;
}

double calibrate_complexity_constant(const std::vector<ComplexitySample>& samples) {
    double c = 0;
    for (const auto& s : samples) {
        const auto denom = static_cast<double>(s.n * s.n + s.n * s.m);
        if (denom > 0)
            c = std::max(c, static_cast<double>(s.primitive_ops) / denom);
    }
    return c;
}

}  // namespace topocbt
