// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "topocbt/fit.hpp"
#include "topocbt/harness.hpp"

using namespace topocbt;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = TOPOCBT_SOURCE_DIR;

struct Result {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

SimplicialComplex from_masks(const oracle::Masks& masks) {
    std::vector<Simplex> gens;
    for (auto m : masks) {
        std::vector<VertexId> vs;
        for (VertexId v = 0; v < 64; ++v)
            if (m >> v & 1)
                vs.push_back(v);
        gens.emplace_back(vs);
    }
    return SimplicialComplex::closure_of(gens);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string report_text(const RunReport& r) {
    std::ostringstream out;
    write_report(out, r);
    return out.str();
}

Result betti_reproduction() {
    Result r;
    {
        const auto t0 = Clock::now();
        std::ifstream in(kSource / "scenarios/fig1.cx");
        const auto b = betti_numbers(read_complex(in));
        r.require(b == BettiVector{1, 0, 0, 0}, "fig1 gave " + to_string(b));
        r.require(seconds_since(t0) < 1.0, "fig1 too slow");
    }
    {
        const auto t0 = Clock::now();
        const auto b = betti_report(load_scenario((kSource / "scenarios/fig4.scn").string()), 2).betti;
        r.require(b == BettiVector{1, 1, 0}, "fig4 gave " + to_string(b));
        r.require(seconds_since(t0) < 1.0, "fig4 too slow");
    }
    {
        const auto t0 = Clock::now();
        const auto b = betti_report(load_scenario((kSource / "scenarios/fig5.scn").string()), 1).betti;
        r.require(b == BettiVector{1, 4, 0, 0}, "fig5 gave " + to_string(b));
        r.require(seconds_since(t0) < 1.0, "fig5 too slow");
    }
    r.detail = r.pass ? "fig1 (1,0,0,0), fig4 (1,1,0), fig5 (1,4,0,0)" : r.detail;
    return r;
}

Result euler_betti_oracle() {
    Result r;
    const auto t0 = Clock::now();
    Rng rng(20240501);
    for (int i = 0; i < 500 && r.pass; ++i) {
        const auto masks = oracle::random_complex(rng, 12, 4);
        const auto cx = from_masks(masks);
        const auto b = betti_numbers(cx);
        r.require(alternating_sum(b) == oracle::euler_by_count(masks),
                  "complex " + std::to_string(i) + ": alternating Betti sum != counted Euler");
        r.require(!b.empty() && b[0] == oracle::components_by_union_find(masks),
                  "complex " + std::to_string(i) + ": beta0 != union-find components");
    }
    const double s = seconds_since(t0);
    r.require(s < 30.0, "took " + std::to_string(s) + " s");
    if (r.pass)
        r.detail = "500 complexes in " + std::to_string(s) + " s";
    return r;
}

Result atomicity_suite() {
    Result r;
    const auto t0 = Clock::now();
    Rng rng(7);
    std::size_t txns = 0, crashed = 0, aborted = 0, committed = 0;
    for (int i = 0; i < 1000 && r.pass; ++i) {
        const auto sc = oracle::random_scenario(rng);
        RunOptions opts;
        opts.protocol = Protocol::topocbt;
        opts.compute_betti = false;
        const auto report = run_scenario(sc, static_cast<std::uint64_t>(i), opts);
        r.require(report.ok(), "run " + std::to_string(i) + ": " +
                                   (report.violations.empty() ? "" : report.violations.front()));
        for (const auto& t : report.txns) {
            ++txns;
            crashed += t.crashed;
            aborted += t.status == "Aborted";
            committed += t.status == "Committed";
            r.require(t.atomicity == Verdict::pass,
                      "run " + std::to_string(i) + " txn " + std::to_string(t.txn) + " not atomic");
            r.require(t.status == "Committed" || t.status == "Aborted",
                      "run " + std::to_string(i) + " left " + t.status);
        }
    }
    const double s = seconds_since(t0);
    r.require(crashed > 0 && aborted > 0 && committed > 0, "suite did not mix outcomes");
    r.require(s < 60.0, "took " + std::to_string(s) + " s");
    if (r.pass)
        r.detail = std::to_string(txns) + " txns (" + std::to_string(committed) + " committed, " +
                   std::to_string(aborted) + " aborted, " + std::to_string(crashed) +
                   " crashed) in " + std::to_string(s) + " s";
    return r;
}

Result table1_pattern() {
    Result r;
    const auto table = compare_protocols(load_scenario_dir(kSource / "scenarios/suite"), {1, 2, 3});
    const auto& topo = table.summary.at(Protocol::topocbt);
    const auto& ac2s = table.summary.at(Protocol::ac2s);
    const auto& ac3wn = table.summary.at(Protocol::ac3wn);
    r.require(table.violations.empty(),
              table.violations.empty() ? "" : table.violations.front());
    r.require(ac2s.partial_commits >= 1 && ac2s.blocked == 0, "ac2s pattern wrong");
    r.require(ac3wn.partial_commits == 0 && ac3wn.blocked >= 1, "ac3wn pattern wrong");
    r.require(topo.partial_commits == 0 && topo.blocked == 0 && topo.atomicity_failures == 0,
              "topocbt pattern wrong");
    r.require(!ac2s.atomic() && ac2s.nonblocking(), "ac2s checkmarks wrong");
    r.require(ac3wn.atomic() && !ac3wn.nonblocking(), "ac3wn checkmarks wrong");
    r.require(topo.atomic() && topo.nonblocking(), "topocbt checkmarks wrong");
    if (r.pass)
        r.detail = "ac2s partial=" + std::to_string(ac2s.partial_commits) +
                   " ac3wn blocked=" + std::to_string(ac3wn.blocked) + " topocbt 0/0";
    return r;
}

Result car_trading() {
    Result r;
    RunOptions topo_opts;
    topo_opts.protocol = Protocol::topocbt;
    const auto topo = run_scenario(car_trading_scenario(), 1, topo_opts);
    const auto& b = topo.final_balances;
    r.require(topo.ok() && topo.txns.size() == 1 && topo.txns[0].status == "Committed",
              "topocbt run did not commit");
    r.require(b.at(3).at({"Alice", "title"}) == 1, "title not with Alice");
    r.require(b.at(1).at({"Bob", "ETH"}) == 10, "ETH not with Bob");
    r.require(b.at(2).at({"Cindy", "BTC"}) == 1, "BTC not with Cindy");
    r.require(b.at(1).size() == 1 && b.at(2).size() == 1 && b.at(3).size() == 1,
              "assets not conserved");
    r.require(report_text(topo) == slurp(kSource / "tests/golden/car-trading-topocbt-seed1.csv"),
              "topocbt report differs from golden file");

    RunOptions ac2s_opts;
    ac2s_opts.protocol = Protocol::ac2s;
    const auto walk =
        run_scenario(load_scenario((kSource / "scenarios/suite/walkaway.scn").string()), 1, ac2s_opts);
    r.require(walk.txns.size() == 1 && walk.txns[0].status == "PartialCommit",
              "walk-away run not PartialCommit");
    r.require(walk.final_balances.at(2).contains({"Alice", "BTC"}), "Alice does not hold BTC");
    r.require(walk.txns[0].worse_off.contains("Alice"), "Alice not flagged worse off");
    r.require(walk.txns[0].atomicity == Verdict::fail, "auditor did not flag the baseline");
    r.require(report_text(walk) == slurp(kSource / "tests/golden/walkaway-ac2s-seed1.csv"),
              "walk-away report differs from golden file");
    if (r.pass)
        r.detail = "golden files match";
    return r;
}

Result complexity() {
    Result r;
    const auto v = complexity_fit(6, 4);
    r.require(v.topocbt_fits(), "residual " + std::to_string(v.topocbt.residual_ratio));
    r.require(v.coefficients_nonnegative(), "negative coefficient");
    r.require(v.n2_dominates(), "n^2 term does not dominate");
    r.require(v.ac2s_prefers_mn2(), "ac2s does not fit m*n^2 better");
    if (r.pass) {
        std::ostringstream d;
        d << "residual " << v.topocbt.residual_ratio << ", ac2s m*n^2 " << v.ac2s_mn2.residual_ratio
          << " vs " << v.ac2s_default.residual_ratio;
        r.detail = d.str();
    }
    return r;
}

// Crash at every WAL record boundary of the three-party car trade, on both
// the commit path and the rollback path.
Result wal_recovery() {
    Result r;
    const auto t0 = Clock::now();
    const auto sc = car_trading_scenario();
    const auto& txn = sc.transactions.front();
    std::size_t points = 0;

    for (bool failing : {false, true}) {
        FailurePlan base;
        if (failing)
            base.sub_failures[1] = SubFailure::update_failure;

        std::size_t total = 0;
        std::map<ChainId, Balances> committed_state;
        {
            auto fed = build_federation(sc);
            Wal wal;
            Engine(fed, wal).execute(txn, base);
            total = wal.size();
            committed_state = fed.balances();
        }

        for (std::size_t k = 0; k <= total; ++k) {
            for (bool after : {false, true}) {
                auto fed = build_federation(sc);
                const auto pre = fed.state_digest();
                Wal wal;
                FailurePlan plan = base;
                plan.crash = CrashPoint{k, after};
                const auto out = Engine(fed, wal).execute(txn, plan);
                const auto where = std::string(failing ? "rollback" : "commit") + " path, crash at " +
                                   std::to_string(k) + (after ? "+" : "");
                const bool has_commit = std::any_of(
                    wal.records().begin(), wal.records().end(),
                    [](const WalRecord& rec) { return rec.kind == WalKind::commit; });
                if (!out.crashed) {
                    r.require(k == total && after, where + ": expected a crash");
                    continue;
                }
                ++points;
                const auto bytes = wal.encode();
                Wal reloaded(decode_wal(bytes));
                recover(fed, reloaded);
                const auto once = fed.state_digest();
                const auto expected = has_commit ? digest_balances(committed_state) : pre;
                r.require(once == expected, where + ": wrong state after recovery");
                r.require(fed.locks_held() == 0, where + ": locks held after recovery");
                const auto size = reloaded.size();
                const auto blocks = fed.chain(1).blocks().size() + fed.chain(2).blocks().size() +
                                    fed.chain(3).blocks().size();
                recover(fed, reloaded);
                r.require(fed.state_digest() == once && reloaded.size() == size &&
                              fed.chain(1).blocks().size() + fed.chain(2).blocks().size() +
                                      fed.chain(3).blocks().size() ==
                                  blocks,
                          where + ": second recovery changed something");
            }
        }
    }
    const double s = seconds_since(t0);
    r.require(s < 10.0, "took " + std::to_string(s) + " s");
    if (r.pass)
        r.detail = std::to_string(points) + " crash points";
    return r;
}

Result dimension_consistency() {
    Result r;
    Rng rng(99);
    oracle::RandomScenarioOptions opt;
    opt.failures = false;
    opt.max_txns = 1;
    for (int i = 0; i < 200 && r.pass; ++i) {
        const auto sc = oracle::random_scenario(rng, opt);
        const auto fed = build_federation(sc);
        const auto& txn = sc.transactions.front();
        const auto sigma = transaction_simplex(fed, txn, sc.mode);
        const auto want = static_cast<int>(oracle::expected_vertices(fed, txn, sc.mode)) - 1;
        r.require(sigma.simplex.dimension() == want,
                  "federation " + std::to_string(i) + ": dimension " +
                      std::to_string(sigma.simplex.dimension()) + " != " + std::to_string(want));
        r.require(expected_transaction_dimension(fed, txn, sc.mode) == want,
                  "federation " + std::to_string(i) + ": formula disagrees with count");
    }
    const auto fig5 = load_scenario((kSource / "scenarios/fig5.scn").string());
    const auto fed = build_federation(fig5);
    const int dim = transaction_simplex(fed, fig5.transactions.front()).simplex.dimension();
    r.require(dim == 3, "fig5 simplex has dimension " + std::to_string(dim));
    if (r.pass)
        r.detail = "200 federations, fig5 dimension 3";
    return r;
}

Result determinism() {
    Result r;
    std::vector<Scenario> scenarios = load_scenario_dir(kSource / "scenarios/suite");
    scenarios.push_back(car_trading_scenario());
    scenarios.push_back(load_scenario((kSource / "scenarios/fig4.scn").string()));
    scenarios.push_back(load_scenario((kSource / "scenarios/fig5.scn").string()));
    Rng rng(5);
    for (int i = 0; i < 50; ++i)
        scenarios.push_back(oracle::random_scenario(rng));

    std::size_t runs = 0;
    for (const auto& sc : scenarios) {
        for (auto p : {Protocol::topocbt, Protocol::ac2s, Protocol::ac3wn}) {
            for (std::uint64_t seed : {1, 42}) {
                RunOptions opts;
                opts.protocol = p;
                std::string text[2];
                std::vector<std::uint8_t> wal[2];
                bool skipped = false;
                for (int k = 0; k < 2; ++k) {
                    try {
                        Simulation sim(sc, seed, opts);
                        text[k] = report_text(sim.run());
                        wal[k] = sim.wal().encode();
                    } catch (const TxnError&) {
                        skipped = true;  // random swaps need not be two-party for ac2s
                    }
                }
                if (skipped)
                    continue;
                ++runs;
                r.require(text[0] == text[1], sc.name + "/" + to_string(p) + ": reports differ");
                r.require(wal[0] == wal[1], sc.name + "/" + to_string(p) + ": WAL bytes differ");
            }
        }
    }
    if (r.pass)
        r.detail = std::to_string(runs) + " replayed runs";
    return r;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
        {"Betti reproduction", betti_reproduction},
        {"Euler-Betti oracle", euler_betti_oracle},
        {"Atomicity property suite", atomicity_suite},
        {"Table 1 qualitative pattern", table1_pattern},
        {"Car-trading scenario", car_trading},
        {"Complexity fit", complexity},
        {"WAL recovery", wal_recovery},
        {"Dimension consistency", dimension_consistency},
        {"Determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Result r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        failures += !r.pass;
        std::cout << "criterion " << i + 1 << ": " << (r.pass ? "PASS" : "FAIL") << " "
                  << criteria[i].first << " (" << r.detail << ")" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
