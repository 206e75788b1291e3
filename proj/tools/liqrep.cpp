#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "liqrep/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Liquidity-aware replication experiments"};
    app.set_version_flag("--version", liqrep::kVersion);
    app.require_subcommand(1);

    liqrep::RunOptions opts;
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    const std::map<std::string, std::string> about = {
        {"simulate", "simulate (S, U, V, RV) paths"},
        {"ledger", "cash ledger of random strategies, direct vs decomposed"},
        {"swaps", "variance swap prices and psi matrix status along paths"},
        {"bsde", "solve the quadratic BSDE for one position size"},
        {"replicate", "replication cost curve H0(x) and its small-x limit"},
        {"arbitrage-test", "mean gains of a family of closed strategies"}};
    for (const auto& name : liqrep::subcommands()) {
        CLI::App* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("--config", config, "scenario file (INI sections, key = value)");
        sub->add_option("--set", opts.overrides, "override section.key=value (repeatable)");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--threads", opts.threads, "worker threads; outputs do not depend on it")
            ->check(CLI::Range(1u, 1024u));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    CLI::App* used = app.get_subcommands().front();
    opts.subcommand = used->get_name();
    if (used->count("--config")) opts.config_path = config;
    if (used->count("--out")) opts.out_dir = out;
    if (used->count("--seed")) opts.seed = seed;
    return liqrep::run(opts, std::cout, std::cerr);
}
