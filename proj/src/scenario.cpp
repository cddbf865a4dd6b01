#include "topocbt/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace topocbt {

namespace {

struct Entry {
    std::size_t line;
    std::string key;
    std::string value;
};

struct Section {
    std::size_t line;
    std::string name;
    std::vector<Entry> entries;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    for (std::string w; in >> w;)
        out.push_back(w);
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
T number(const Entry& e, std::string_view text) {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ParseError(e.line, e.key, "expected a number, got '" + std::string(text) + "'");
    return v;
}

bool boolean(const Entry& e) {
    if (e.value == "true" || e.value == "1")
        return true;
    if (e.value == "false" || e.value == "0")
        return false;
    throw ParseError(e.line, e.key, "expected true or false");
}

std::vector<Section> sections(std::istream& in) {
    std::vector<Section> out;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(lineno, "section", "unterminated header");
            out.push_back({lineno, trim(std::string_view(line).substr(1, line.size() - 2)), {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(lineno, line, "expected key = value");
        if (out.empty())
            throw ParseError(lineno, trim(line.substr(0, eq)), "entry outside a section");
        out.back().entries.push_back(
            {lineno, trim(std::string_view(line).substr(0, eq)),
             trim(std::string_view(line).substr(eq + 1))});
    }
    return out;
}

BlockRef parse_block(const Entry& e, const std::string& token) {
    const auto at = token.find('@');
    if (at == std::string::npos)
        throw ParseError(e.line, e.key, "block '" + token + "' must be chain@height[/branch]");
    const auto slash = token.find('/', at);
    BlockRef ref;
    ref.chain = number<ChainId>(e, std::string_view(token).substr(0, at));
    ref.height = number<Height>(
        e, std::string_view(token).substr(at + 1, slash == std::string::npos ? std::string::npos
                                                                             : slash - at - 1));
    if (slash != std::string::npos)
        ref.branch = number<BranchLabel>(e, std::string_view(token).substr(slash + 1));
    return ref;
}

void parse_scenario_section(const Section& s, Scenario& sc) {
    for (const auto& e : s.entries) {
        try {
            if (e.key == "name")
                sc.name = e.value;
            else if (e.key == "mode")
                sc.mode = parse_topology_mode(e.value);
            else if (e.key == "protocol")
                sc.protocol = parse_protocol(e.value);
            else if (e.key == "resolve_before")
                sc.resolve_before = number<std::size_t>(e, e.value);
            else if (e.key == "window")
                sc.window = number<Height>(e, e.value);
            else if (e.key == "timelock")
                sc.baseline.timelock = number<std::uint64_t>(e, e.value);
            else if (e.key == "horizon_factor")
                sc.baseline.horizon_factor = number<std::uint64_t>(e, e.value);
            else
                throw ParseError(e.line, e.key, "unknown key in [scenario]");
        } catch (const std::invalid_argument& ex) {
            throw ParseError(e.line, e.key, ex.what());
        }
    }
}

ChainSpec parse_chain(const Section& s) {
    ChainSpec c;
    bool has_id = false;
    for (const auto& e : s.entries) {
        if (e.key == "id") {
            c.id = number<ChainId>(e, e.value);
            has_id = true;
        } else if (e.key == "name") {
            c.name = e.value;
        } else if (e.key == "replicas") {
            c.replicas = number<std::uint32_t>(e, e.value);
            if (c.replicas == 0)
                throw ParseError(e.line, e.key, "must be >= 1");
        } else if (e.key == "length") {
            c.length = number<Height>(e, e.value);
        } else if (e.key == "fork") {
            auto w = words(e.value);
            if (w.empty() || w.size() > 3)
                throw ParseError(e.line, e.key, "expected <height> [branches] [length]");
            ForkSpec f;
            f.height = number<Height>(e, w[0]);
            if (w.size() > 1)
                f.branches = number<std::uint32_t>(e, w[1]);
            if (w.size() > 2)
                f.length = number<Height>(e, w[2]);
            if (f.height == 0 || f.branches == 0 || f.length == 0)
                throw ParseError(e.line, e.key, "height, branches and length must be >= 1");
            c.forks.push_back(f);
        } else if (e.key == "balance") {
            auto w = words(e.value);
            if (w.size() != 3)
                throw ParseError(e.line, e.key, "expected <party> <asset> <amount>");
            BalanceSpec b{w[0], w[1], number<Amount>(e, w[2])};
            if (b.amount <= 0)
                throw ParseError(e.line, e.key, "amount must be positive");
            c.balances.push_back(std::move(b));
        } else {
            throw ParseError(e.line, e.key, "unknown key in [chain]");
        }
    }
    if (!has_id)
        throw ParseError(s.line, "id", "[chain] requires an id");
    for (const auto& f : c.forks)
        if (f.height > c.length)
            throw ParseError(s.line, "fork", "fork height beyond chain length");
    return c;
}

CrossChainTransaction parse_txn(const Section& s) {
    CrossChainTransaction t;
    bool has_id = false;
    bool has_blocks = false;
    for (const auto& e : s.entries) {
        if (e.key == "id") {
            t.id = number<TxnId>(e, e.value);
            has_id = true;
        } else if (e.key == "parties") {
            t.parties = words(e.value);
        } else if (e.key == "blocks") {
            for (const auto& w : words(e.value))
                t.blocks.push_back(parse_block(e, w));
            has_blocks = true;
        } else if (e.key == "sub") {
            if (!has_blocks)
                throw ParseError(e.line, e.key, "blocks must be declared before sub");
            const auto colon = e.value.find(':');
            SubTransaction sub;
            for (const auto& w : words(e.value.substr(0, colon))) {
                const auto chain = number<ChainId>(e, w);
                bool found = false;
                for (const auto& b : t.blocks) {
                    if (b.chain == chain) {
                        sub.face.push_back(b);
                        found = true;
                    }
                }
                if (!found)
                    throw ParseError(e.line, e.key, "chain " + w + " has no transaction block");
            }
            if (colon != std::string::npos) {
                for (const auto& part : split(e.value.substr(colon + 1), ';')) {
                    if (part.empty())
                        continue;
                    auto w = words(part);
                    if (w.size() != 5)
                        throw ParseError(e.line, e.key,
                                         "update must be <chain> <from> <to> <asset> <amount>");
                    sub.updates.push_back(
                        {number<ChainId>(e, w[0]), {w[1], w[2], w[3], number<Amount>(e, w[4])}});
                }
            }
            t.sub_transactions.push_back(std::move(sub));
        } else {
            throw ParseError(e.line, e.key, "unknown key in [txn]");
        }
    }
    if (!has_id)
        throw ParseError(s.line, "id", "[txn] requires an id");
    try {
        validate_shape(t);
    } catch (const TxnError& ex) {
        throw ParseError(s.line, "txn", ex.what());
    }
    return t;
}

void parse_failure(const Section& s, Scenario& sc) {
    std::optional<TxnId> txn;
    std::string kind;
    std::optional<std::size_t> sub;
    std::optional<PartyId> party;
    CrashPoint crash;
    const Entry* kind_entry = nullptr;
    for (const auto& e : s.entries) {
        if (e.key == "txn")
            txn = number<TxnId>(e, e.value);
        else if (e.key == "kind") {
            kind = e.value;
            kind_entry = &e;
        } else if (e.key == "sub") {
            sub = number<std::size_t>(e, e.value);
            if (*sub == 0)
                throw ParseError(e.line, e.key, "sub-transactions are numbered from 1");
        } else if (e.key == "party")
            party = e.value;
        else if (e.key == "records")
            crash.records = number<std::size_t>(e, e.value);
        else if (e.key == "after_actions")
            crash.after_actions = boolean(e);
        else
            throw ParseError(e.line, e.key, "unknown key in [failure]");
    }
    if (!txn)
        throw ParseError(s.line, "txn", "[failure] requires a txn");
    if (!kind_entry)
        throw ParseError(s.line, "kind", "[failure] requires a kind");

    auto& plan = sc.failures[*txn];
    auto need_sub = [&] {
        if (!sub)
            throw ParseError(kind_entry->line, "sub", kind + " requires sub");
        return *sub - 1;
    };
    auto need_party = [&] {
        if (!party)
            throw ParseError(kind_entry->line, "party", kind + " requires party");
        return *party;
    };
    if (kind == "update_failure")
        plan.sub_failures[need_sub()] = SubFailure::update_failure;
    else if (kind == "crash_before_commit")
        plan.sub_failures[need_sub()] = SubFailure::crash_before_commit;
    else if (kind == "crash_after_undo")
        plan.sub_failures[need_sub()] = SubFailure::crash_after_undo;
    else if (kind == "crash_at")
        plan.crash = crash;
    else if (kind == "walk_away")
        plan.walk_away.insert(need_party());
    else if (kind == "late")
        plan.late.insert(need_party());
    else if (kind == "vote_abort")
        plan.vote_abort.insert(need_party());
    else if (kind == "witness_crash")
        plan.coordinator = CoordinatorCrash::after_prepare;
    else
        throw ParseError(kind_entry->line, "kind", "unknown failure kind '" + kind + "'");
}

}  // namespace

std::string to_string(Protocol p) {
    switch (p) {
    case Protocol::topocbt: return "topocbt";
    case Protocol::ac2s: return "ac2s";
    case Protocol::ac3wn: return "ac3wn";
    }
    return "?";
}

Protocol parse_protocol(const std::string& s) {
    if (s == "topocbt")
        return Protocol::topocbt;
    if (s == "ac2s")
        return Protocol::ac2s;
    if (s == "ac3wn")
        return Protocol::ac3wn;
    throw std::invalid_argument("unknown protocol '" + s + "'");
}

FailurePlan Scenario::failure_for(TxnId txn) const {
    auto it = failures.find(txn);
    return it == failures.end() ? FailurePlan{} : it->second;
}

Scenario parse_scenario(std::istream& in) {
    Scenario sc;
    for (const auto& s : sections(in)) {
        if (s.name == "scenario")
            parse_scenario_section(s, sc);
        else if (s.name == "chain")
            sc.chains.push_back(parse_chain(s));
        else if (s.name == "txn")
            sc.transactions.push_back(parse_txn(s));
        else if (s.name == "failure")
            parse_failure(s, sc);
        else
            throw ParseError(s.line, s.name, "unknown section");
    }

    std::set<ChainId> chain_ids;
    for (const auto& c : sc.chains)
        if (!chain_ids.insert(c.id).second)
            throw ParseError(0, "chain", "duplicate chain id " + std::to_string(c.id));
    std::set<TxnId> txn_ids;
    for (const auto& t : sc.transactions) {
        if (!txn_ids.insert(t.id).second)
            throw ParseError(0, "txn", "duplicate txn id " + std::to_string(t.id));
        for (const auto& b : t.blocks)
            if (!chain_ids.contains(b.chain))
                throw ParseError(0, "txn", "txn " + std::to_string(t.id) +
                                               " references unknown chain " +
                                               std::to_string(b.chain));
    }
    for (const auto& [id, plan] : sc.failures)
        if (!txn_ids.contains(id))
            throw ParseError(0, "failure", "failure for unknown txn " + std::to_string(id));
    return sc;
}

Scenario load_scenario(const std::string& source) {
    if (source == "car-trading")
        return car_trading_scenario();
    std::ifstream in(source);
    if (!in)
        throw std::runtime_error("cannot open scenario '" + source + "'");
    return parse_scenario(in);
}

Scenario car_trading_scenario() {
    Scenario sc;
    sc.name = "car-trading";
    sc.chains = {
        {1, "ethereum", 1, 3, {}, {{"Alice", "ETH", 10}}},
        {2, "bitcoin", 1, 3, {}, {{"Bob", "BTC", 1}}},
        {3, "car-titles", 1, 3, {}, {{"Cindy", "title", 1}}},
    };
    CrossChainTransaction t;
    t.id = 1;
    t.parties = {"Alice", "Bob", "Cindy"};
    t.blocks = {{1, 3, 0}, {2, 3, 0}, {3, 3, 0}};
    t.sub_transactions = {
        {{{1, 3, 0}, {2, 3, 0}},
         {{1, {"Alice", "Bob", "ETH", 10}}, {2, {"Bob", "Alice", "BTC", 1}}}},
        {{{2, 3, 0}, {3, 3, 0}},
         {{2, {"Alice", "Cindy", "BTC", 1}}, {3, {"Cindy", "Alice", "title", 1}}}},
    };
    sc.transactions.push_back(std::move(t));
    return sc;
}

Federation build_federation(const Scenario& scenario) {
    Federation fed;
    for (const auto& spec : scenario.chains) {
        std::vector<AssetUpdate> mint;
        for (const auto& b : spec.balances)
            mint.push_back({"", b.party, b.asset, b.amount});
        auto& chain = fed.add_chain(Chain(spec.id, spec.replicas, std::move(mint)));

        auto forks = spec.forks;
        std::stable_sort(forks.begin(), forks.end(),
                         [](const ForkSpec& a, const ForkSpec& b) { return a.height < b.height; });
        std::size_t next_fork = 0;
        for (Height h = 1; h <= spec.length; ++h) {
            // Spawn every branch first so they all hang off the main branch.
            std::vector<BranchLabel> opened;
            while (next_fork < forks.size() && forks[next_fork].height == h) {
                for (std::uint32_t i = 0; i < forks[next_fork].branches; ++i)
                    opened.emplace_back(chain.spawn_fork(h));
                for (std::size_t i = opened.size() - forks[next_fork].branches; i < opened.size();
                     ++i)
                    for (Height k = 0; k < forks[next_fork].length; ++k)
                        chain.append_block(opened[i], {});
                ++next_fork;
            }
            chain.append_block(0, {});
        }
    }
    return fed;
}

}  // namespace topocbt
