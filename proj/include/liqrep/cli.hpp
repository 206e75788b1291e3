#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "liqrep/scenario.hpp"
#include "liqrep/strategy.hpp"

namespace liqrep {

inline constexpr const char* kVersion = "liqrep 1.0.0";

const std::vector<std::string>& subcommands();

struct RunOptions {
    std::string subcommand;
    std::optional<std::string> config_path;
    std::vector<std::string> overrides;  // key=value, applied after the file
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;  // never written to outputs
};

/// File, then --set, then --seed / --out; the subcommand becomes run.experiment.
ScenarioConfig resolve_config(const RunOptions& options);

/// Runs one experiment and writes its files into `out`. Throws liqrep::Error.
void run_experiment(const std::string& subcommand, const ScenarioConfig& config, unsigned threads,
                    const std::filesystem::path& out, std::ostream& log);

/// Exit codes: 0 success, 2 validation failure, 3 numerical failure (an
/// error.txt lands in the output directory when it can be created).
int run(const RunOptions& options, std::ostream& log, std::ostream& err);

/// Piecewise-constant random holdings drawn from a counter-based stream:
/// at each node the position is redrawn with probability trade_prob.
Strategy random_strategy(std::size_t n_paths, std::size_t nodes, std::uint64_t seed, double trade_prob,
                         double max_position, bool with_swaps);

/// Deterministic closed stock profiles (n_steps + 1 entries, last one 0):
/// windows long and short, a sine and a ramp, with growing amplitude.
std::vector<std::vector<double>> arbitrage_family(std::size_t n_steps, std::size_t count);

}  // namespace liqrep
