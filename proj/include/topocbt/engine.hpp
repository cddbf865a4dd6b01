#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "topocbt/federation.hpp"
#include "topocbt/topology.hpp"
#include "topocbt/wal.hpp"

namespace topocbt {

enum class SubFailure {
    none,
    update_failure,       ///< the face's updates are rejected
    crash_before_commit,  ///< node dies right after the face's updates land
    crash_after_undo,     ///< node dies after the face's undo records, before updates
};

enum class CoordinatorCrash {
    none,
    after_prepare,  ///< coordinator (witness) dies once every vote is in
};

/// Crash at a WAL record boundary: the node dies once `records` records of
/// the transaction are durable. With `after_actions` it first performs the
/// work that precedes the next record (updates, rollback, release).
struct CrashPoint {
    std::size_t records = 0;
    bool after_actions = false;
};

/// Deterministic failure injection shared by all three protocols.
///
/// Party sets are read per protocol: TopoCBT turns a walk-away, late or
/// abort-voting party into an update failure on the first sub-transaction
/// where that party sends; AC2S and AC3WN consume them directly.
struct FailurePlan {
    std::map<std::size_t, SubFailure> sub_failures;  ///< keyed by 0-based sub index
    std::optional<CrashPoint> crash;
    CoordinatorCrash coordinator = CoordinatorCrash::none;
    std::set<PartyId> walk_away;
    std::set<PartyId> late;
    std::set<PartyId> vote_abort;

    bool empty() const;
    SubFailure failure_for(const CrossChainTransaction& txn, std::size_t sub) const;
};

enum class TxnStatus { committed, aborted, pending };

std::string to_string(TxnStatus status);

struct TxnOutcome {
    TxnStatus status = TxnStatus::pending;
    std::size_t applied_updates = 0;  ///< net: zero after a rollback
    std::size_t messages = 0;
    std::size_t primitive_ops = 0;
    bool crashed = false;
    bool recovered = false;
    std::optional<LockConflict> conflict;
    std::optional<std::size_t> failed_sub;
};

struct RecoveryReport {
    std::vector<TxnId> rolled_back;
    std::vector<TxnId> aborts_appended;
    std::size_t undo_records_applied = 0;
    std::size_t compensation_blocks = 0;
    std::size_t locks_cleared = 0;
};

/// Executes the topological commit protocol against a federation.
///
/// Primitive operations are counted with the protocol's per-line costing:
/// locking and releasing B_T cost n each, building and breaking down the
/// transaction simplex cost n^2 each, every face costs one per undo record
/// plus n to locate its vertices, and each WAL terminal record and each
/// rollback step costs one. Messages count lock requests, per-chain update
/// applications and releases.
class Engine {
public:
    Engine(Federation& federation, Wal& wal, TaggedComplex* topology = nullptr,
           TopologyMode mode = TopologyMode::abstract);

    /// Runs the protocol. Returns Pending with `crashed` set when the plan
    /// kills the node; the durable WAL prefix and federation are left as the
    /// crash found them. Throws TxnError before locking a malformed txn.
    TxnOutcome execute(const CrossChainTransaction& txn, const FailurePlan& plan = {});

private:
    struct Crash {};

    Federation& federation_;
    Wal& wal_;
    TaggedComplex* topology_;
    TopologyMode mode_;
};

/// Restores chain balances from undo snapshots for every transaction that
/// may be incomplete, appends the missing Abort records, tears down every
/// registered transaction simplex and clears all locks.
///
/// Transactions without a terminal record are rolled back. Executions are
/// serialized, so only the transaction owning the last record can have been
/// interrupted mid-rollback; it is rolled back again when that record is an
/// Abort. Restoring a snapshot is a no-op when the chain already matches it,
/// which makes recovery idempotent. Throws WalError on a corrupt log.
RecoveryReport recover(Federation& federation, Wal& wal, TaggedComplex* topology = nullptr);

/// Engine::execute followed, after a crash, by restart and recovery. Never
/// returns Pending.
TxnOutcome topocbt_execute(Federation& federation, Wal& wal, const CrossChainTransaction& txn,
                           const FailurePlan& plan = {}, TaggedComplex* topology = nullptr,
                           TopologyMode mode = TopologyMode::abstract);

/// Sets `chain`'s effective balances back to `snapshot` by appending one
/// compensating block. Returns false when nothing needed to change.
bool restore_balances(Federation& federation, ChainId chain, const Balances& snapshot);

struct ComplexityCheck {
    std::size_t primitive_ops = 0;
    double bound = 0;  ///< c * (n^2 + n*m)
    bool within = false;
};

ComplexityCheck count_complexity(const TxnOutcome& outcome, std::size_t n, std::size_t m,
                                 double c);

/// Smallest c with ops <= c * (n^2 + n*m) on every calibration sample.
struct ComplexitySample {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t primitive_ops = 0;
};
double calibrate_complexity_constant(const std::vector<ComplexitySample>& samples);

}  // namespace topocbt
