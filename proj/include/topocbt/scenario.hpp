#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topocbt/baselines.hpp"
#include "topocbt/engine.hpp"
#include "topocbt/topology.hpp"

namespace topocbt {

enum class Protocol { topocbt, ac2s, ac3wn };

std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& s);

struct ForkSpec {
    Height height = 0;
    std::uint32_t branches = 1;
    Height length = 1;  ///< blocks appended to each new branch
};

struct BalanceSpec {
    PartyId party;
    std::string asset;
    Amount amount = 0;
};

struct ChainSpec {
    ChainId id = 0;
    std::string name;
    std::uint32_t replicas = 1;
    Height length = 0;  ///< main-branch blocks after genesis
    std::vector<ForkSpec> forks;
    std::vector<BalanceSpec> balances;
};

struct Scenario {
    std::string name = "unnamed";
    TopologyMode mode = TopologyMode::abstract;
    Protocol protocol = Protocol::topocbt;
    /// Forks on every chain are resolved before this transaction index runs.
    std::optional<std::size_t> resolve_before;
    std::optional<Height> window;
    BaselineConfig baseline;
    std::vector<ChainSpec> chains;
    std::vector<CrossChainTransaction> transactions;
    std::map<TxnId, FailurePlan> failures;

    FailurePlan failure_for(TxnId txn) const;
};

/// Error with the offending line and field, formatted "line N: field: msg".
struct ParseError : std::runtime_error {
    ParseError(std::size_t line, const std::string& field, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + field + ": " + msg),
          line(line),
          field(field) {}
    std::size_t line;
    std::string field;
};

Scenario parse_scenario(std::istream& in);

/// `source` is either a built-in name ("car-trading") or a file path.
Scenario load_scenario(const std::string& source);

/// Alice holds ETH, Bob BTC and Cindy a car title, each on its own chain.
/// Sub-transaction 1 swaps Alice's ETH for Bob's BTC; sub-transaction 2
/// swaps that BTC for Cindy's title.
Scenario car_trading_scenario();

/// Genesis mints each chain's balances; forks are spawned when the main
/// branch reaches the height below them.
Federation build_federation(const Scenario& scenario);

}  // namespace topocbt
