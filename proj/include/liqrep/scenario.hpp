#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "liqrep/bsde_engine.hpp"
#include "liqrep/market_model.hpp"
#include "liqrep/portfolio_ledger.hpp"
#include "liqrep/variance_swap.hpp"

namespace liqrep {

enum class ValueKind { Real, Integer, Boolean, Choice, Text };

struct KeySpec {
    std::string section;
    std::string name;
    std::string default_value;
    ValueKind kind;
    std::vector<std::string> choices;  // Choice only

    std::string dotted() const { return section + "." + name; }
};

/// Flat INI-style scenario: `[section]` headers and `key = value` lines,
/// `#` or `;` starting a comment line. Every value is kept in a normalized
/// text form, so parse(serialize()) reproduces the same text.
class ScenarioConfig {
public:
    static const std::vector<KeySpec>& keys();

    /// All defaults.
    ScenarioConfig();

    /// Throws ParseError (with line number) on syntax errors, unknown
    /// sections/keys, duplicates or malformed values.
    static ScenarioConfig parse(std::istream& in);
    static ScenarioConfig parse_string(const std::string& text);
    static ScenarioConfig load(const std::string& path);

    /// Sets `section.key`; throws ParseError for unknown keys or bad values.
    void set(const std::string& dotted, const std::string& value);
    /// `section.key=value`
    void apply_override(const std::string& assignment);

    const std::string& get(const std::string& dotted) const;
    double real(const std::string& dotted) const;
    std::int64_t integer(const std::string& dotted) const;
    bool boolean(const std::string& dotted) const;

    std::string serialize() const;

    /// Throws ValidationError naming the violated invariant for the experiment.
    void validate(const std::string& experiment) const;

    ModelParams model() const;
    TimeGrid grid() const;
    BsdeConfig bsde(unsigned threads) const;
    Payoff payoff() const;
    SwapLiquidity swap_liquidity() const;
    SwapSpec swap_spec(int i) const;
    std::vector<double> x_grid() const;
    std::size_t n_paths() const;
    std::uint64_t seed() const;

    bool operator==(const ScenarioConfig& o) const { return values_ == o.values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace liqrep
