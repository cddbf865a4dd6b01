// Command-line driver: run scenarios, inspect topology, compare protocols,
// fit complexity and demonstrate crash recovery.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "topocbt/fit.hpp"
#include "topocbt/harness.hpp"

using namespace topocbt;

namespace {

struct CliError : std::runtime_error {
    CliError(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind(std::move(kind)) {}
    std::string kind;
};

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("topocbt");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("TOPOCBT_LOG")) {
        auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to "off"; only honour that when asked.
        if (level != spdlog::level::off || std::string_view(env) == "off")
            spdlog::set_level(level);
    }
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CliError("usage", "bad seed '" + item + "'");
        }
    }
    if (seeds.empty())
        throw CliError("usage", "no seeds given");
    return seeds;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw CliError("io", "cannot write " + path);
    fn(out);
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CliError("io", "cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"Topological cross-chain transaction simulator"};
    app.require_subcommand(1);

    std::string scenario_src, out_path, wal_path, protocol_name, complex_path, scenario_dir,
        seeds_text = "1", grid_text;
    std::uint64_t seed = 1;
    std::size_t at = 0;
    bool stop_at_crash = false;

    auto* run = app.add_subcommand("run", "Run a scenario and emit a CSV report");
    run->add_option("--scenario", scenario_src, "Scenario file or built-in name")->required();
    run->add_option("--seed", seed, "Simulation seed");
    run->add_option("--protocol", protocol_name, "topocbt, ac2s or ac3wn");
    run->add_option("--out", out_path, "Report path (default stdout)");
    run->add_option("--wal", wal_path, "Write the WAL to this file");
    run->add_flag("--stop-at-crash", stop_at_crash, "Leave a crashed node unrecovered");

    auto* betti = app.add_subcommand("betti", "Betti numbers of a federation or complex");
    auto* betti_scn = betti->add_option("--scenario", scenario_src, "Scenario file");
    betti->add_option("--at", at, "Number of transactions in flight");
    auto* betti_cx = betti->add_option("--complex", complex_path, "Complex file");
    betti->add_option("--out", out_path, "Write the complex here (tags to <out>.tags)");
    betti_scn->excludes(betti_cx);

    auto* compare = app.add_subcommand("compare", "Run every protocol over a scenario set");
    compare->add_option("--scenario-dir", scenario_dir, "Directory of .scn files")->required();
    compare->add_option("--seeds", seeds_text, "Comma-separated seeds");
    compare->add_option("--out", out_path, "Table path (default stdout)");

    auto* fit = app.add_subcommand("fit", "Fit operation counts over an (n, m) grid");
    fit->add_option("--grid", grid_text, "n_max,m_max")->required();

    auto* rec = app.add_subcommand("recover", "Recover a crashed scenario from its WAL");
    rec->add_option("--wal", wal_path, "WAL written by run --stop-at-crash")->required();
    rec->add_option("--scenario", scenario_src, "Scenario that produced the WAL")->required();
    rec->add_option("--seed", seed, "Seed used for the crashed run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*run) {
            RunOptions opts;
            if (!protocol_name.empty()) {
                try {
                    opts.protocol = parse_protocol(protocol_name);
                } catch (const std::invalid_argument& e) {
                    throw CliError("usage", e.what());
                }
            }
            opts.stop_at_crash = stop_at_crash;
            Simulation sim(load_scenario(scenario_src), seed, opts);
            const auto report = sim.run();
            with_output(out_path, [&](std::ostream& o) { write_report(o, report); });
            if (!wal_path.empty()) {
                with_output(wal_path, [&](std::ostream& o) {
                    const auto bytes = sim.wal().encode();
                    o.write(reinterpret_cast<const char*>(bytes.data()),
                            static_cast<std::streamsize>(bytes.size()));
                });
            }
            if (!report.ok()) {
                std::cerr << "error: invariant: " << report.violations.front() << '\n';
                return 1;
            }
            return 0;
        }

        if (*betti) {
            if (!complex_path.empty()) {
                std::ifstream in(complex_path);
                if (!in)
                    throw CliError("io", "cannot read " + complex_path);
                const auto cx = read_complex(in);
                std::cout << to_string(betti_numbers(cx)) << '\n';
                return 0;
            }
            if (scenario_src.empty())
                throw CliError("usage", "betti needs --scenario or --complex");
            const auto snap = betti_report(load_scenario(scenario_src), at);
            std::cout << to_string(snap.betti) << '\n';
            if (!out_path.empty()) {
                std::ofstream cx(out_path), tags(out_path + ".tags");
                if (!cx || !tags)
                    throw CliError("io", "cannot write " + out_path);
                write_tagged(cx, tags, snap.complex);
            }
            return 0;
        }

        if (*compare) {
            const auto table =
                compare_protocols(load_scenario_dir(scenario_dir), parse_seeds(seeds_text));
            with_output(out_path, [&](std::ostream& o) { write_comparison(o, table); });
            if (!table.violations.empty()) {
                std::cerr << "error: invariant: " << table.violations.front() << '\n';
                return 1;
            }
            return 0;
        }

        if (*fit) {
            const auto comma = grid_text.find(',');
            std::size_t n_max = 0, m_max = 0;
            try {
                if (comma == std::string::npos)
                    throw std::invalid_argument(grid_text);
                n_max = std::stoul(grid_text.substr(0, comma));
                m_max = std::stoul(grid_text.substr(comma + 1));
            } catch (const std::exception&) {
                throw CliError("usage", "--grid expects n_max,m_max");
            }
            const auto verdict = complexity_fit(n_max, m_max);
            write_fit(std::cout, verdict);
            return verdict.pass() ? 0 : 1;
        }

        if (*rec) {
            const auto records = decode_wal(read_bytes(wal_path));
            RunOptions opts;
            opts.protocol = Protocol::topocbt;
            opts.stop_at_crash = true;
            opts.compute_betti = false;
            Simulation sim(load_scenario(scenario_src), seed, opts);
            const auto report = sim.run();
            if (std::vector<WalRecord>(sim.wal().records().begin(), sim.wal().records().end()) !=
                records)
                throw CliError("wal", "log does not match a replay of the scenario");

            Wal wal(records);
            auto& fed = sim.federation();
            const auto before = fed.state_digest();
            const auto first = recover(fed, wal);
            const auto after = fed.state_digest();
            const auto wal_size = wal.size();
            const auto second = recover(fed, wal);
            const bool idempotent = fed.state_digest() == after && wal.size() == wal_size &&
                                    second.compensation_blocks == 0 &&
                                    second.aborts_appended.empty();

            std::cout << "crashed " << (report.stopped_at_crash ? "yes" : "no") << '\n';
            std::cout << "rolled_back";
            for (auto t : first.rolled_back)
                std::cout << ' ' << t;
            std::cout << "\nundo_records_applied " << first.undo_records_applied
                      << "\ncompensation_blocks " << first.compensation_blocks
                      << "\naborts_appended " << first.aborts_appended.size()
                      << "\nlocks_cleared " << first.locks_cleared
                      << "\ndigest_before " << to_hex(before) << "\ndigest_after "
                      << to_hex(after) << "\nidempotent " << (idempotent ? "yes" : "no") << '\n';
            return idempotent ? 0 : 1;
        }
    } catch (const CliError& e) {
        std::cerr << "error: " << e.kind << ": " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: parse: " << e.what() << '\n';
        return 2;
    } catch (const WalError& e) {
        std::cerr << "error: wal: " << e.what() << '\n';
        return 2;
    } catch (const TxnError& e) {
        std::cerr << "error: txn: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: range: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: argument: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
