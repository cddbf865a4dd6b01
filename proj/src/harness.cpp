#include "topocbt/harness.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <unordered_map>

#include <spdlog/spdlog.h>

namespace topocbt {

namespace {

struct DigestHash {
    std::size_t operator()(const Digest& d) const {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i)
            h = (h << 8) | d[i];
        return h;
    }
};

void fold(Balances& balances, const AssetUpdate& u) {
    if (!u.from.empty())
        balances[{u.from, u.asset}] -= u.amount;
    balances[{u.to, u.asset}] += u.amount;
}

void drop_zeros(Balances& balances) {
    std::erase_if(balances, [](const auto& kv) { return kv.second == 0; });
}

std::map<std::string, Amount> asset_totals(const std::map<ChainId, Balances>& balances) {
    std::map<std::string, Amount> totals;
    for (const auto& [chain, b] : balances)
        for (const auto& [key, amount] : b)
            totals[key.second] += amount;
    std::erase_if(totals, [](const auto& kv) { return kv.second == 0; });
    return totals;
}

std::string join(const std::set<PartyId>& parties) {
    std::string out;
    for (const auto& p : parties) {
        if (!out.empty())
            out += ';';
        out += p;
    }
    return out;
}

std::string betti_field(const BettiVector& b) {
    return b.empty() ? std::string() : "\"" + to_string(b) + "\"";
}

}  // namespace

AuditView audit_federation(const Federation& federation) {
    AuditView view;
    for (const auto& [id, chain] : federation.chains()) {
        std::unordered_map<Digest, const Block*, DigestHash> by_hash;
        for (const auto& [ref, blk] : chain.blocks())
            by_hash.emplace(blk.hash, &blk);

        // Walk every live branch tip back to genesis; the longest walk wins,
        // the lowest label breaking ties.
        std::vector<const Block*> best;
        for (const auto& branch : chain.branches()) {
            if (!branch.live || !branch.tip)
                continue;
            const Block* cur = chain.find({id, *branch.tip, branch.label});
            std::vector<const Block*> path;
            while (cur) {
                if (compute_block_hash(cur->ref, cur->parent_hash, cur->payload) != cur->hash) {
                    view.problems.push_back("chain " + std::to_string(id) + ": block " +
                                            to_string(cur->ref) + " hash mismatch");
                    break;
                }
                path.push_back(cur);
                if (cur->ref.height == 0)
                    break;
                auto it = by_hash.find(cur->parent_hash);
                if (it == by_hash.end() || it->second->ref.height + 1 != cur->ref.height) {
                    view.problems.push_back("chain " + std::to_string(id) + ": block " +
                                            to_string(cur->ref) + " has no parent");
                    break;
                }
                cur = it->second;
            }
            if (path.size() > best.size())
                best = std::move(path);
        }

        Balances b;
        for (auto it = best.rbegin(); it != best.rend(); ++it)
            for (const auto& u : (*it)->payload)
                fold(b, u);
        drop_zeros(b);
        view.balances[id] = std::move(b);
    }
    return view;
}

Digest audit_digest(const std::map<ChainId, Balances>& balances,
                    const std::vector<ChainId>& chains) {
    ByteWriter w;
    for (auto id : chains) {
        w.u32(id);
        auto it = balances.find(id);
        const auto bytes = encode_balances(it == balances.end() ? Balances{} : it->second);
        w.u32(static_cast<std::uint32_t>(bytes.size()));
        w.bytes(bytes);
    }
    return sha256(w.data());
}

std::optional<std::map<ChainId, Balances>> all_applied(std::map<ChainId, Balances> balances,
                                                       const CrossChainTransaction& txn) {
    for (const auto& sub : txn.sub_transactions) {
        for (const auto& u : sub.updates) {
            if (u.update.amount <= 0 || u.update.from.empty())
                return std::nullopt;
            auto& b = balances[u.chain];
            auto it = b.find({u.update.from, u.update.asset});
            if (it == b.end() || it->second < u.update.amount)
                return std::nullopt;
            fold(b, u.update);
            drop_zeros(b);
        }
    }
    return balances;
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::pending: return "PENDING";
    }
    return "?";
}

Simulation::Simulation(Scenario scenario, std::uint64_t seed, RunOptions options)
    : scenario_(std::move(scenario)),
      seed_(seed),
      options_(options),
      protocol_(options.protocol.value_or(scenario_.protocol)),
      federation_(build_federation(scenario_)),
      clock_(seed) {}

RunReport Simulation::run() {
    RunReport report;
    report.scenario = scenario_.name;
    report.seed = seed_;
    report.protocol = protocol_;

    const auto initial_totals = asset_totals(audit_federation(federation_).balances);

    for (std::size_t i = 0; i < scenario_.transactions.size(); ++i) {
        if (scenario_.resolve_before && *scenario_.resolve_before == i) {
            federation_.resolve_all_forks();
            federation_.advance_epoch();
        }
        const auto& txn = scenario_.transactions[i];
        const auto plan = scenario_.failure_for(txn.id);
        validate(federation_, txn);

        const auto pre = audit_federation(federation_);
        const auto chains = txn.chains();
        const auto pre_digest = audit_digest(pre.balances, chains);
        const auto want = all_applied(pre.balances, txn);

        TxnReport row = protocol_ == Protocol::topocbt ? run_topocbt(txn, plan, report)
                                                       : run_baseline(protocol_, txn, plan);
        row.txn = txn.id;
        row.protocol = protocol_;

        if (row.crashed && !row.recovered) {
            report.txns.push_back(std::move(row));
            report.stopped_at_crash = true;
            break;
        }

        const auto post = audit_federation(federation_);
        const auto post_digest = audit_digest(post.balances, chains);
        const bool none = post_digest == pre_digest;
        const bool all = want && post_digest == audit_digest(*want, chains);
        row.atomicity = none || all ? Verdict::pass : Verdict::fail;

        const auto where = "txn " + std::to_string(txn.id) + ": ";
        for (const auto& p : post.problems)
            report.violations.push_back(where + p);
        for (const auto& [id, chain] : federation_.chains())
            if (auto check = chain.verify_hash_chain(); !check.ok)
                report.violations.push_back(where + "hash chain broken at " +
                                            to_string(*check.first_violation));
        if (asset_totals(post.balances) != initial_totals)
            report.violations.push_back(where + "asset totals changed");

        if (protocol_ == Protocol::topocbt) {
            if (row.atomicity == Verdict::fail)
                report.violations.push_back(where + "partial state observed");
            if (row.status == "Committed" && !all)
                report.violations.push_back(where + "reported Committed but updates are missing");
            if (row.status == "Aborted" && !none)
                report.violations.push_back(where + "reported Aborted but state changed");
            if (row.status == "Pending")
                report.violations.push_back(where + "left pending");
            if (federation_.locks_held() != 0)
                report.violations.push_back(where + std::to_string(federation_.locks_held()) +
                                            " locks still held");
            try {
                validate_wal(wal_.records());
            } catch (const WalError& e) {
                report.violations.push_back(where + e.what());
            }
        } else if (protocol_ == Protocol::ac3wn) {
            if (auto check = witness_.chain().verify_hash_chain(); !check.ok)
                report.violations.push_back(where + "witness chain broken");
            if (row.partial_commit)
                report.violations.push_back(where + "ac3wn partially committed");
        } else if (row.blocked) {
            report.violations.push_back(where + "ac2s blocked");
        }
        report.txns.push_back(std::move(row));
    }

    const auto final_view = audit_federation(federation_);
    std::vector<ChainId> all_chains;
    for (const auto& [id, chain] : federation_.chains())
        all_chains.push_back(id);
    report.final_balances = final_view.balances;
    report.final_digest = audit_digest(final_view.balances, all_chains);
    for (const auto& v : report.violations)
        spdlog::warn("{} seed {}: {}", scenario_.name, seed_, v);
    return report;
}

TxnReport Simulation::run_topocbt(const CrossChainTransaction& txn, const FailurePlan& plan,
                                  RunReport& report) {
    TxnReport row;
    const BuildOptions build{scenario_.mode, scenario_.window};

    // The engine works on the complex without this transaction; it must hand
    // it back unchanged once the simplex is torn down.
    TaggedComplex topology = build_federation_complex(federation_, {txn}, build);
    if (options_.compute_betti)
        row.betti_pre = betti_numbers(topology.complex());
    topology.teardown(txn.id);
    const SimplicialComplex expected = topology.complex();
    if (options_.compute_betti)
        row.betti_post = betti_numbers(expected);

    TxnOutcome out;
    if (options_.stop_at_crash) {
        Engine engine(federation_, wal_, &topology, scenario_.mode);
        out = engine.execute(txn, plan);
    } else {
        out = topocbt_execute(federation_, wal_, txn, plan, &topology, scenario_.mode);
    }

    row.status = to_string(out.status);
    row.applied_updates = out.applied_updates;
    row.messages = out.messages;
    row.primitive_ops = out.primitive_ops;
    row.crashed = out.crashed;
    row.recovered = out.recovered;

    const std::uint64_t t0 = clock_.now();
    for (std::size_t k = 0; k < out.messages; ++k)
        clock_.send();
    row.ticks = clock_.now() - t0;

    // Residual space: undo records are reclaimable once the terminal record
    // is durable, which leaves one fixed-size record per transaction.
    for (const auto& r : wal_.records())
        if (r.txn == txn.id && r.terminal())
            row.space_bytes = encode_record(r).size();

    if (!(out.crashed && !out.recovered)) {
        if (topology.transactions().contains(txn.id) || !(topology.complex() == expected))
            report.violations.push_back("txn " + std::to_string(txn.id) +
                                        ": topology not restored after teardown");
    }
    return row;
}

TxnReport Simulation::run_baseline(Protocol protocol, const CrossChainTransaction& txn,
                                   const FailurePlan& plan) {
    TxnReport row;
    if (options_.compute_betti) {
        TaggedComplex topology =
            build_federation_complex(federation_, {txn}, {scenario_.mode, scenario_.window});
        row.betti_pre = betti_numbers(topology.complex());
        topology.teardown(txn.id);
        row.betti_post = betti_numbers(topology.complex());
    }

    BaselineOutcome out;
    if (protocol == Protocol::ac2s)
        out = ac2s_execute(federation_, txn, plan, clock_, scenario_.baseline).outcome;
    else
        out = ac3wn_execute(federation_, witness_, txn, plan, clock_, scenario_.baseline);

    row.status = to_string(out.status);
    row.applied_updates = out.applied_updates;
    row.messages = out.messages;
    row.primitive_ops = out.primitive_ops;
    row.space_bytes = out.space_bytes;
    row.ticks = out.ticks;
    row.worse_off = out.worse_off;
    row.partial_commit = out.status == BaselineStatus::partial_commit;
    row.blocked = out.status == BaselineStatus::blocked;
    return row;
}

RunReport run_scenario(const Scenario& scenario, std::uint64_t seed, const RunOptions& options) {
    return Simulation(scenario, seed, options).run();
}

void write_report(std::ostream& out, const RunReport& report) {
    out << "txn,protocol,scenario,seed,status,applied_updates,messages,primitive_ops,"
           "space_bytes,ticks,worse_off,betti_pre,betti_post,atomicity\n";
    for (const auto& r : report.txns) {
        out << r.txn << ',' << to_string(r.protocol) << ',' << report.scenario << ','
            << report.seed << ',' << r.status << ',' << r.applied_updates << ',' << r.messages
            << ',' << r.primitive_ops << ',' << r.space_bytes << ',' << r.ticks << ','
            << join(r.worse_off) << ',' << betti_field(r.betti_pre) << ','
            << betti_field(r.betti_post) << ',' << to_string(r.atomicity) << '\n';
    }
    if (report.stopped_at_crash)
        out << "# stopped at crash\n";
    for (const auto& v : report.violations)
        out << "# violation " << v << '\n';
    for (const auto& [chain, balances] : report.final_balances)
        for (const auto& [key, amount] : balances)
            out << "# balance " << chain << ' ' << key.first << ' ' << key.second << ' '
                << amount << '\n';
    out << "# digest " << to_hex(report.final_digest) << '\n';
}

ComparisonTable compare_protocols(const std::vector<Scenario>& scenarios,
                                  const std::vector<std::uint64_t>& seeds) {
    ComparisonTable table;
    for (auto p : {Protocol::topocbt, Protocol::ac2s, Protocol::ac3wn})
        table.summary[p];
    for (const auto& sc : scenarios) {
        for (auto seed : seeds) {
            for (auto p : {Protocol::topocbt, Protocol::ac2s, Protocol::ac3wn}) {
                RunOptions opts;
                opts.protocol = p;
                opts.compute_betti = false;
                const auto report = run_scenario(sc, seed, opts);
                auto& sum = table.summary[p];
                for (const auto& r : report.txns) {
                    table.rows.push_back({p, sc.name, seed, r.status, r.messages,
                                          r.primitive_ops, r.space_bytes, r.worse_off});
                    ++sum.runs;
                    sum.committed += r.status == "Committed";
                    sum.aborted += r.status == "Aborted";
                    sum.partial_commits += r.partial_commit;
                    sum.blocked += r.blocked;
                    sum.atomicity_failures += r.atomicity == Verdict::fail;
                }
                for (const auto& v : report.violations)
                    table.violations.push_back(to_string(p) + " " + sc.name + " seed " +
                                               std::to_string(seed) + ": " + v);
            }
        }
    }
    return table;
}

std::vector<Scenario> load_scenario_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw std::runtime_error("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".scn")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<Scenario> out;
    for (const auto& f : files) {
        std::ifstream in(f);
        try {
            auto sc = parse_scenario(in);
            if (sc.name == "unnamed")
                sc.name = f.stem().string();
            out.push_back(std::move(sc));
        } catch (const ParseError& e) {
            throw ParseError(e.line, e.field, f.filename().string() + ": " +
                                                  std::string(e.what()));
        }
    }
    return out;
}

void write_comparison(std::ostream& out, const ComparisonTable& table) {
    out << "protocol,scenario,seed,status,messages,primitive_ops,space_bytes,worse_off\n";
    for (const auto& r : table.rows)
        out << to_string(r.protocol) << ',' << r.scenario << ',' << r.seed << ',' << r.status
            << ',' << r.messages << ',' << r.primitive_ops << ',' << r.space_bytes << ','
            << join(r.worse_off) << '\n';
    for (const auto& [p, s] : table.summary)
        out << "# summary " << to_string(p) << " runs=" << s.runs << " committed=" << s.committed
            << " aborted=" << s.aborted << " partial_commits=" << s.partial_commits
            << " blocked=" << s.blocked << " atomicity=" << (s.atomic() ? "yes" : "no")
            << " nonblocking=" << (s.nonblocking() ? "yes" : "no") << '\n';
    for (const auto& v : table.violations)
        out << "# violation " << v << '\n';
}

BettiSnapshot betti_report(const Scenario& scenario, std::size_t at) {
    if (at > scenario.transactions.size())
        throw std::out_of_range("event " + std::to_string(at) + " beyond the " +
                                std::to_string(scenario.transactions.size()) +
                                " transactions of scenario " + scenario.name);
    const auto federation = build_federation(scenario);
    std::vector<CrossChainTransaction> in_flight(scenario.transactions.begin(),
                                                 scenario.transactions.begin() +
                                                     static_cast<std::ptrdiff_t>(at));
    BettiSnapshot snap{build_federation_complex(federation, in_flight,
                                                {scenario.mode, scenario.window}),
                       {}};
    snap.betti = betti_numbers(snap.complex.complex());
    return snap;
}

Scenario grid_scenario(std::size_t n, std::size_t m) {
    if (n < 2)
        throw std::invalid_argument("grid needs at least two chains");
    Scenario sc;
    sc.name = "grid-n" + std::to_string(n) + "-m" + std::to_string(m);
    auto party = [](std::size_t i) { return "P" + std::to_string(i); };
    auto asset = [](std::size_t i) { return "A" + std::to_string(i); };

    CrossChainTransaction txn;
    txn.id = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto id = static_cast<ChainId>(i + 1);
        sc.chains.push_back({id, "chain" + std::to_string(id), 1, 2, {},
                             {{party(i), asset(i), static_cast<Amount>(m + 1)}}});
        txn.parties.push_back(party(i));
        txn.blocks.push_back({id, 1, 0});
    }
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t a = k % n;
        const std::size_t b = (k + 1) % n;
        const BlockRef ra{static_cast<ChainId>(a + 1), 1, 0};
        const BlockRef rb{static_cast<ChainId>(b + 1), 1, 0};
        SubTransaction sub;
        sub.face = {std::min(ra, rb), std::max(ra, rb)};
        sub.updates = {{ra.chain, {party(a), party(b), asset(a), 1}},
                       {rb.chain, {party(b), party(a), asset(b), 1}}};
        txn.sub_transactions.push_back(std::move(sub));
    }
    sc.transactions.push_back(std::move(txn));
    return sc;
}

}  // namespace topocbt
