#include <doctest.h>

#include <sstream>

#include "topocbt/fit.hpp"
#include "topocbt/harness.hpp"

using namespace topocbt;

namespace {

Scenario parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

std::string text_of(const RunReport& r) {
    std::ostringstream out;
    write_report(out, r);
    return out.str();
}

}  // namespace

TEST_CASE("scenario file matches the built-in car trade") {
    const auto file = load_scenario(std::string(TOPOCBT_SOURCE_DIR) + "/scenarios/car-trading.scn");
    const auto builtin = car_trading_scenario();
    CHECK(build_federation(file).state_digest() == build_federation(builtin).state_digest());
    CHECK(text_of(run_scenario(file, 1)) == text_of(run_scenario(builtin, 1)));
}

TEST_CASE("scenario parse errors carry line and field") {
    try {
        parse("[chain]\nid = 1\nlength = two\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
        CHECK(e.field == "length");
    }
    CHECK_THROWS_AS(parse("[chain]\nid = 1\nbogus = 1\n"), ParseError);
    CHECK_THROWS_AS(parse("id = 1\n"), ParseError);
    CHECK_THROWS_AS(parse("[scenario]\nprotocol = paxos\n"), ParseError);
    CHECK_THROWS_AS(parse("[txn]\nid = 1\nparties = A B\nsub = 1 2\n"), ParseError);
    CHECK_THROWS_AS(parse("[failure]\ntxn = 4\nkind = walk_away\nparty = A\n"), ParseError);
    CHECK_THROWS_AS(parse("[chain]\nid = 1\n[chain]\nid = 1\n"), ParseError);
}

TEST_CASE("failure sections build plans") {
    const auto sc = parse(R"(
[chain]
id = 1
length = 2
[chain]
id = 2
length = 2
[txn]
id = 1
parties = A B
blocks = 1@1 2@1
sub = 1 2
sub = 2
[failure]
txn = 1
kind = crash_before_commit
sub = 2
[failure]
txn = 1
kind = crash_at
records = 3
after_actions = true
)");
    const auto plan = sc.failure_for(1);
    CHECK(plan.sub_failures.at(1) == SubFailure::crash_before_commit);
    REQUIRE(plan.crash);
    CHECK(plan.crash->records == 3);
    CHECK(plan.crash->after_actions);
    CHECK(sc.failure_for(2).empty());
}

TEST_CASE("empty scenario gives an empty report") {
    const auto report = run_scenario(parse(""), 1);
    CHECK(report.ok());
    CHECK(report.txns.empty());
    CHECK(text_of(report).find("# digest ") != std::string::npos);
}

TEST_CASE("forks are spawned off the main branch") {
    const auto sc = parse("[chain]\nid = 1\nlength = 4\nfork = 2 2 3\n");
    const auto fed = build_federation(sc);
    const auto& c = fed.chain(1);
    CHECK(c.branches().size() == 3);
    CHECK(c.live_blocks_at(2).size() == 3);
    CHECK(c.path_tip(1) == 4);
    CHECK(c.path_tip(0) == 4);
    CHECK(c.branch(2).parent == 0);
}

TEST_CASE("auditor sees tampering and reconstructs balances") {
    auto fed = build_federation(car_trading_scenario());
    auto view = audit_federation(fed);
    CHECK(view.problems.empty());
    CHECK(view.balances == fed.balances());
    fed.chain(1).mutable_block_for_testing({1, 2, 0}).payload.push_back({"", "Eve", "ETH", 1});
    view = audit_federation(fed);
    CHECK_FALSE(view.problems.empty());
}

TEST_CASE("all_applied refuses overdrafts") {
    const auto sc = car_trading_scenario();
    const auto fed = build_federation(sc);
    auto t = sc.transactions.front();
    CHECK(all_applied(fed.balances(), t));
    t.sub_transactions[0].updates[0].update.amount = 11;
    CHECK_FALSE(all_applied(fed.balances(), t));
}

TEST_CASE("resolving forks before a transaction") {
    auto sc = parse(R"(
[scenario]
resolve_before = 1
[chain]
id = 1
length = 3
fork = 2 1 3
balance = A x 2
[chain]
id = 2
length = 3
balance = B y 2
[txn]
id = 1
parties = A B
blocks = 1@3/1 2@3
sub = 1 2 : 1 A B x 1 ; 2 B A y 1
[txn]
id = 2
parties = A B
blocks = 1@2/1 2@2
sub = 1 2 : 1 B A x 1 ; 2 A B y 1
)");
    Simulation sim(sc, 1);
    const auto report = sim.run();
    CHECK(report.ok());
    REQUIRE(report.txns.size() == 2);
    CHECK(report.txns[0].status == "Committed");
    CHECK(report.txns[1].status == "Committed");
    CHECK_FALSE(sim.federation().chain(1).branch(0).live);
}

TEST_CASE("stop at crash leaves the node down") {
    auto sc = load_scenario(std::string(TOPOCBT_SOURCE_DIR) + "/scenarios/suite/crash-before-commit.scn");
    RunOptions opts;
    opts.stop_at_crash = true;
    Simulation sim(sc, 1, opts);
    const auto report = sim.run();
    CHECK(report.stopped_at_crash);
    CHECK(report.txns.back().status == "Pending");
    CHECK(sim.federation().locks_held() > 0);
    const auto wal = decode_wal(sim.wal().encode());
    CHECK(wal.size() == sim.wal().size());
}

TEST_CASE("comparison summary flags") {
    ProtocolSummary s;
    CHECK(s.atomic());
    CHECK(s.nonblocking());
    s.partial_commits = 1;
    CHECK_FALSE(s.atomic());
    s.blocked = 1;
    CHECK_FALSE(s.nonblocking());
}

TEST_CASE("least squares recovers exact coefficients") {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 1; i <= 6; ++i) {
        x.push_back({double(i * i), double(i), 1});
        y.push_back(2.0 * i * i + 3.0 * i + 5);
    }
    const auto fit = least_squares(x, y);
    CHECK(fit.coefficients[0] == doctest::Approx(2));
    CHECK(fit.coefficients[1] == doctest::Approx(3));
    CHECK(fit.coefficients[2] == doctest::Approx(5));
    CHECK(fit.residual_ratio < 1e-9);
}

TEST_CASE("fit needs at least six grid points") {
    CHECK_THROWS_AS(complexity_fit(2, 5), std::invalid_argument);
    CHECK_THROWS_AS(complexity_fit(1, 9), std::invalid_argument);
}

TEST_CASE("with no sub-transactions the count ignores m") {
    const auto a = run_scenario(grid_scenario(4, 0), 1).txns.front().primitive_ops;
    const auto b = run_scenario(grid_scenario(4, 0), 2).txns.front().primitive_ops;
    CHECK(a == b);
    CHECK(a == 4 + 16 + 1 + 16 + 4);
}
