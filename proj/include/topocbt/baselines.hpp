#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "topocbt/engine.hpp"
#include "topocbt/rng.hpp"

namespace topocbt {

enum class BaselineStatus { committed, aborted, partial_commit, blocked };

std::string to_string(BaselineStatus status);

struct BaselineOutcome {
    BaselineStatus status = BaselineStatus::aborted;
    std::set<PartyId> worse_off;
    std::size_t messages = 0;
    std::size_t primitive_ops = 0;
    std::size_t space_bytes = 0;
    std::size_t applied_updates = 0;
    std::size_t locks_held = 0;  ///< still held when the run ended
    std::uint64_t ticks = 0;     ///< simulated time consumed
};

struct BaselineConfig {
    std::uint64_t timelock = 10;        ///< ticks per swap step
    std::uint64_t horizon_factor = 10;  ///< blocked after factor * timelock
};

/// Shared simulation clock. Every message takes 1-3 ticks, drawn from the
/// run's seeded generator.
class SimClock {
public:
    explicit SimClock(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t now() const { return now_; }
    void advance(std::uint64_t ticks) { now_ += ticks; }
    /// Advances by one message latency and returns the arrival time.
    std::uint64_t send() {
        now_ += 1 + rng_.below(3);
        return now_;
    }

private:
    Rng rng_;
    std::uint64_t now_ = 0;
};

// --- AC2S ------------------------------------------------------------------

enum class SwapState { offered, claimed, expired };

std::string to_string(SwapState state);

struct SwapStep {
    PartyId from;
    PartyId to;
    std::string asset;
    Amount amount = 0;
    ChainId chain = 0;
    std::uint64_t deadline = 0;
    SwapState state = SwapState::offered;
};

/// One pairwise swap per sub-transaction, in declared order. Throws TxnError
/// unless every sub-transaction moves assets between exactly two parties.
std::vector<std::vector<SwapStep>> decompose_swaps(const CrossChainTransaction& txn);

struct Ac2sResult {
    BaselineOutcome outcome;
    std::vector<std::vector<SwapStep>> swaps;
};

/// Runs each swap independently under its own timelock. A walk-away party
/// neither funds nor claims; a late party funds on time but claims after
/// the deadline. Expired steps refund the sender; claimed steps stand. An
/// injected sub-transaction failure makes that swap's second party walk away.
Ac2sResult ac2s_execute(Federation& federation, const CrossChainTransaction& txn,
                        const FailurePlan& plan, SimClock& clock,
                        const BaselineConfig& config = {});

/// Parties whose holdings ended neither at their starting nor at their
/// intended final value while having lost some asset.
std::set<PartyId> worse_off_parties(const CrossChainTransaction& txn,
                                    const std::vector<AssetUpdate>& executed);

// --- AC3WN -----------------------------------------------------------------

enum class DecisionKind { prepared, global_commit, global_abort };

struct Decision {
    DecisionKind kind = DecisionKind::prepared;
    TxnId txn = 0;
    std::uint32_t sub = 0;  ///< prepared records only

    friend bool operator==(const Decision&, const Decision&) = default;
};

/// A chain from the chain model whose payloads carry 2PC records. Each
/// record is packed into an AssetUpdate from the "witness" pseudo-party.
class WitnessChain {
public:
    static constexpr ChainId kChainId = 0xffffffffu;

    WitnessChain();

    /// Throws std::logic_error on a second global decision for a txn.
    BlockRef append(const Decision& d);

    std::vector<Decision> records() const;
    std::optional<DecisionKind> decision_for(TxnId txn) const;
    const Chain& chain() const { return chain_; }
    std::size_t block_bytes(TxnId txn) const;

    static AssetUpdate encode(const Decision& d);
    static std::optional<Decision> decode(const AssetUpdate& u);

private:
    Chain chain_;
};

/// Two-phase commit with the witness chain as coordinator. Participants
/// apply updates only after reading a GlobalCommit off the witness chain.
/// A coordinator crash after the votes leaves participants holding their
/// locks; once the horizon passes the run is reported Blocked.
BaselineOutcome ac3wn_execute(Federation& federation, WitnessChain& witness,
                              const CrossChainTransaction& txn, const FailurePlan& plan,
                              SimClock& clock, const BaselineConfig& config = {});

}  // namespace topocbt
