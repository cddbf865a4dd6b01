#include <doctest.h>

#include "topocbt/baselines.hpp"
#include "topocbt/scenario.hpp"

using namespace topocbt;

namespace {

struct Fixture {
    Scenario sc = car_trading_scenario();
    Federation fed = build_federation(sc);
    SimClock clock{1};
    const CrossChainTransaction& txn() const { return sc.transactions.front(); }
};

}  // namespace

TEST_CASE("swaps decompose per sub-transaction") {
    const auto sc = car_trading_scenario();
    const auto swaps = decompose_swaps(sc.transactions.front());
    REQUIRE(swaps.size() == 2);
    CHECK(swaps[0][0].from == "Alice");
    CHECK(swaps[0][0].to == "Bob");
    CHECK(swaps[1][1].asset == "title");

    auto t = sc.transactions.front();
    t.sub_transactions[0].updates[1].update.to = "Cindy";
    CHECK_THROWS_AS(decompose_swaps(t), TxnError);
}

TEST_CASE("ac2s commits when everyone claims in time") {
    Fixture f;
    const auto r = ac2s_execute(f.fed, f.txn(), {}, f.clock);
    CHECK(r.outcome.status == BaselineStatus::committed);
    CHECK(r.outcome.worse_off.empty());
    for (const auto& swap : r.swaps)
        for (const auto& step : swap)
            CHECK(step.state == SwapState::claimed);
    CHECK(f.fed.balances().at(3).at({"Alice", "title"}) == 1);
}

TEST_CASE("ac2s walk-away leaves Alice holding BTC") {
    Fixture f;
    FailurePlan plan;
    plan.walk_away.insert("Cindy");
    const auto r = ac2s_execute(f.fed, f.txn(), plan, f.clock);
    CHECK(r.outcome.status == BaselineStatus::partial_commit);
    CHECK(r.outcome.worse_off == std::set<PartyId>{"Alice"});
    CHECK(f.fed.balances().at(2).at({"Alice", "BTC"}) == 1);
    CHECK(f.fed.balances().at(1).at({"Bob", "ETH"}) == 10);
}

TEST_CASE("ac2s late claim expires and earlier transfers stand") {
    Fixture f;
    FailurePlan plan;
    plan.late.insert("Bob");
    const auto r = ac2s_execute(f.fed, f.txn(), plan, f.clock);
    CHECK(r.outcome.status == BaselineStatus::partial_commit);
    CHECK(r.swaps[0][0].state == SwapState::expired);
    CHECK(r.swaps[0][1].state == SwapState::claimed);
    CHECK(r.swaps[0][0].deadline > 0);
    CHECK(r.outcome.worse_off.contains("Bob"));
    CHECK(f.fed.balances().at(1).at({"Alice", "ETH"}) == 10);
}

TEST_CASE("witness chain decisions") {
    WitnessChain w;
    w.append({DecisionKind::prepared, 1, 0});
    CHECK_FALSE(w.decision_for(1));
    w.append({DecisionKind::global_commit, 1, 0});
    CHECK(w.decision_for(1) == DecisionKind::global_commit);
    CHECK_THROWS_AS(w.append({DecisionKind::global_abort, 1, 0}), std::logic_error);
    CHECK(w.records().size() == 2);
    CHECK(w.chain().verify_hash_chain().ok);
    const Decision d{DecisionKind::prepared, 7, 3};
    CHECK(WitnessChain::decode(WitnessChain::encode(d)) == d);
}

TEST_CASE("ac3wn commits through the witness chain") {
    Fixture f;
    WitnessChain w;
    const auto out = ac3wn_execute(f.fed, w, f.txn(), {}, f.clock);
    CHECK(out.status == BaselineStatus::committed);
    CHECK(w.decision_for(1) == DecisionKind::global_commit);
    CHECK(f.fed.locks_held() == 0);
    CHECK(f.fed.balances().at(2).at({"Cindy", "BTC"}) == 1);
}

TEST_CASE("ac3wn abort vote applies nothing") {
    Fixture f;
    WitnessChain w;
    const auto pre = f.fed.state_digest();
    FailurePlan plan;
    plan.vote_abort.insert("Cindy");
    const auto out = ac3wn_execute(f.fed, w, f.txn(), plan, f.clock);
    CHECK(out.status == BaselineStatus::aborted);
    CHECK(w.decision_for(1) == DecisionKind::global_abort);
    CHECK(f.fed.state_digest() == pre);
}

TEST_CASE("ac3wn blocks when the coordinator dies after prepare") {
    Fixture f;
    WitnessChain w;
    FailurePlan plan;
    plan.coordinator = CoordinatorCrash::after_prepare;
    const auto pre = f.fed.state_digest();
    const auto out = ac3wn_execute(f.fed, w, f.txn(), plan, f.clock);
    CHECK(out.status == BaselineStatus::blocked);
    CHECK(out.ticks > BaselineConfig{}.horizon_factor * BaselineConfig{}.timelock);
    CHECK(f.fed.locks_held() == 3);
    CHECK_FALSE(w.decision_for(1));
    CHECK(f.fed.state_digest() == pre);
}

TEST_CASE("ac3wn space grows with sub-transactions") {
    Fixture f;
    WitnessChain w;
    auto one = f.txn();
    one.id = 2;
    one.sub_transactions.resize(1);
    ac3wn_execute(f.fed, w, one, {}, f.clock);
    const auto small = w.block_bytes(2);
    Fixture g;
    WitnessChain w2;
    ac3wn_execute(g.fed, w2, g.txn(), {}, g.clock);
    CHECK(w2.block_bytes(1) > small);
}

TEST_CASE("failure-free runs leave identical balances under all protocols") {
    Fixture a, b, c;
    Wal wal;
    topocbt_execute(a.fed, wal, a.txn());
    ac2s_execute(b.fed, b.txn(), {}, b.clock);
    WitnessChain w;
    ac3wn_execute(c.fed, w, c.txn(), {}, c.clock);
    CHECK(a.fed.balances() == b.fed.balances());
    CHECK(a.fed.balances() == c.fed.balances());
}
