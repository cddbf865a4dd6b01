#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "topocbt/baselines.hpp"
#include "topocbt/homology.hpp"
#include "topocbt/scenario.hpp"

namespace topocbt {

/// Balances reconstructed by walking blocks through their parent hashes,
/// without consulting the chain's own bookkeeping.
struct AuditView {
    std::map<ChainId, Balances> balances;
    std::vector<std::string> problems;  ///< broken links or bad hashes
};

AuditView audit_federation(const Federation& federation);

/// Digest of the audited balances of `chains`, zero entries dropped.
Digest audit_digest(const std::map<ChainId, Balances>& balances, const std::vector<ChainId>& chains);

/// Balances after applying every update of `txn`, or nullopt if some update
/// could not apply.
std::optional<std::map<ChainId, Balances>> all_applied(std::map<ChainId, Balances> balances,
                                                       const CrossChainTransaction& txn);

enum class Verdict { pass, fail, pending };

std::string to_string(Verdict v);

struct TxnReport {
    TxnId txn = 0;
    Protocol protocol = Protocol::topocbt;
    std::string status;
    std::size_t applied_updates = 0;
    std::size_t messages = 0;
    std::size_t primitive_ops = 0;
    std::size_t space_bytes = 0;
    std::uint64_t ticks = 0;
    std::set<PartyId> worse_off;
    BettiVector betti_pre;   ///< transaction simplex still in the complex
    BettiVector betti_post;  ///< after teardown
    Verdict atomicity = Verdict::pending;
    bool crashed = false;
    bool recovered = false;
    bool partial_commit = false;
    bool blocked = false;
};

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    Protocol protocol = Protocol::topocbt;
    std::vector<TxnReport> txns;
    std::vector<std::string> violations;  ///< invariant failures
    std::map<ChainId, Balances> final_balances;
    Digest final_digest{};
    bool stopped_at_crash = false;

    bool ok() const { return violations.empty(); }
};

struct RunOptions {
    std::optional<Protocol> protocol;  ///< overrides the scenario's protocol
    bool stop_at_crash = false;        ///< leave a crashed node unrecovered
    bool compute_betti = true;
};

/// Deterministic single run of a scenario. State stays inspectable after
/// run() so crash demos can hand the WAL to recovery.
class Simulation {
public:
    Simulation(Scenario scenario, std::uint64_t seed, RunOptions options = {});

    RunReport run();

    Federation& federation() { return federation_; }
    Wal& wal() { return wal_; }
    const WitnessChain& witness() const { return witness_; }

private:
    TxnReport run_topocbt(const CrossChainTransaction& txn, const FailurePlan& plan,
                          RunReport& report);
    TxnReport run_baseline(Protocol protocol, const CrossChainTransaction& txn,
                           const FailurePlan& plan);

    Scenario scenario_;
    std::uint64_t seed_;
    RunOptions options_;
    Protocol protocol_;
    Federation federation_;
    Wal wal_;
    WitnessChain witness_;
    SimClock clock_;
};

RunReport run_scenario(const Scenario& scenario, std::uint64_t seed, const RunOptions& options = {});

/// CSV with columns txn,protocol,scenario,seed,status,applied_updates,
/// messages,primitive_ops,space_bytes,ticks,worse_off,betti_pre,betti_post,
/// atomicity, followed by "# violation", "# balance" and "# digest" lines.
void write_report(std::ostream& out, const RunReport& report);

// --- protocol comparison ----------------------------------------------------

struct ComparisonRow {
    Protocol protocol = Protocol::topocbt;
    std::string scenario;
    std::uint64_t seed = 0;
    std::string status;
    std::size_t messages = 0;
    std::size_t primitive_ops = 0;
    std::size_t space_bytes = 0;
    std::set<PartyId> worse_off;
};

struct ProtocolSummary {
    std::size_t runs = 0;
    std::size_t committed = 0;
    std::size_t aborted = 0;
    std::size_t partial_commits = 0;
    std::size_t blocked = 0;
    std::size_t atomicity_failures = 0;  ///< from the digest auditor

    bool atomic() const { return partial_commits == 0 && atomicity_failures == 0; }
    bool nonblocking() const { return blocked == 0; }
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    std::map<Protocol, ProtocolSummary> summary;
    std::vector<std::string> violations;  ///< TopoCBT invariant failures
};

ComparisonTable compare_protocols(const std::vector<Scenario>& scenarios,
                                  const std::vector<std::uint64_t>& seeds);

/// Every *.scn file in `dir`, sorted by file name.
std::vector<Scenario> load_scenario_dir(const std::filesystem::path& dir);

void write_comparison(std::ostream& out, const ComparisonTable& table);

// --- topology snapshots -----------------------------------------------------

struct BettiSnapshot {
    TaggedComplex complex;
    BettiVector betti;
};

/// Federation complex with the first `at` transactions in flight. Throws
/// std::out_of_range when `at` exceeds the transaction count.
BettiSnapshot betti_report(const Scenario& scenario, std::size_t at);

// --- generated workloads ----------------------------------------------------

/// n chains, one party per chain, and m two-party swaps; swap k runs over
/// chains k mod n and (k+1) mod n. Failure free.
Scenario grid_scenario(std::size_t n, std::size_t m);

}  // namespace topocbt
