#include "liqrep/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "liqrep/error.hpp"

namespace liqrep {

const std::vector<KeySpec>& ScenarioConfig::keys() {
    using K = ValueKind;
    static const std::vector<KeySpec> k = {
        {"run", "experiment", "replicate", K::Choice,
         {"simulate", "ledger", "swaps", "bsde", "replicate", "arbitrage-test"}},
        {"run", "n_paths", "10000", K::Integer, {}},
        {"run", "seed", "1", K::Integer, {}},
        {"run", "out_dir", "out", K::Text, {}},
        {"run", "path_output", "16", K::Integer, {}},

        {"model", "gamma", "0.5", K::Real, {}},
        {"model", "eta", "0.02", K::Real, {}},
        {"model", "alpha", "-1", K::Real, {}},
        {"model", "a", "-0.02", K::Real, {}},
        {"model", "epsilon", "1", K::Real, {}},
        {"model", "lambda_impact", "0.5", K::Real, {}},
        {"model", "gamma_map", "identity", K::Choice, {"identity", "square"}},
        {"model", "phi_scale", "0.5", K::Real, {}},
        {"model", "phi_power", "1", K::Real, {}},
        {"model", "theta_scale", "0.5", K::Real, {}},
        {"model", "theta_power", "1", K::Real, {}},
        {"model", "s0", "100", K::Real, {}},
        {"model", "u0", "0.02", K::Real, {}},
        {"model", "v0", "0.02", K::Real, {}},
        {"model", "rho_su", "-0.5", K::Real, {}},
        {"model", "rho_sv", "-0.3", K::Real, {}},
        {"model", "rho_uv", "0.2", K::Real, {}},

        {"grid", "horizon", "1", K::Real, {}},
        {"grid", "n_steps", "64", K::Integer, {}},
        {"grid", "maturity1", "1.25", K::Real, {}},
        {"grid", "maturity2", "1.5", K::Real, {}},

        {"swaps", "strike1", "0.04", K::Real, {}},
        {"swaps", "strike2", "0.04", K::Real, {}},
        {"swaps", "depth1", "0.0001", K::Real, {}},
        {"swaps", "depth2", "0.0001", K::Real, {}},
        {"swaps", "lambda1", "0.5", K::Real, {}},
        {"swaps", "lambda2", "0.5", K::Real, {}},

        {"payoff", "kind", "clipped_call", K::Choice, {"clipped_call", "identity", "constant"}},
        {"payoff", "strike", "100", K::Real, {}},
        {"payoff", "cap", "30", K::Real, {}},
        {"payoff", "level", "1", K::Real, {}},

        {"bsde", "stop_level", "100", K::Real, {}},
        {"bsde", "payoff_cap", "1000", K::Real, {}},
        {"bsde", "basis_degree", "2", K::Integer, {}},
        {"bsde", "picard_iters", "5", K::Integer, {}},
        {"bsde", "picard_tol", "1e-08", K::Real, {}},
        {"bsde", "min_paths", "0", K::Integer, {}},
        {"bsde", "ridge", "1e-08", K::Real, {}},
        {"bsde", "x", "1", K::Real, {}},

        {"replicate", "x0", "8", K::Real, {}},
        {"replicate", "x_count", "4", K::Integer, {}},
        {"replicate", "fd_points", "3", K::Integer, {}},

        {"ledger", "trade_swaps", "false", K::Boolean, {}},
        {"ledger", "trade_prob", "0.3", K::Real, {}},
        {"ledger", "max_position", "3", K::Real, {}},

        {"arbitrage", "strategies", "20", K::Integer, {}},
        {"arbitrage", "stop_loss", "50", K::Real, {}},
        {"arbitrage", "admissible_bound", "100", K::Real, {}},
    };
    return k;
}

namespace {

const KeySpec* find_key(const std::string& dotted) {
    for (const auto& k : ScenarioConfig::keys())
        if (k.dotted() == dotted) return &k;
    return nullptr;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorCode::ParseError, msg); }

std::string normalize(const KeySpec& k, const std::string& raw) {
    const std::string v = trim(raw);
    const char* first = v.data();
    const char* last = v.data() + v.size();
    switch (k.kind) {
        case ValueKind::Real: {
            double x = 0.0;
            auto [p, ec] = std::from_chars(first, last, x);
            if (ec != std::errc() || p != last || !std::isfinite(x))
                parse_fail(k.dotted() + " expects a finite number, got '" + v + "'");
            char buf[64];
            auto r = std::to_chars(buf, buf + sizeof buf, x);
            return std::string(buf, r.ptr);
        }
        case ValueKind::Integer: {
            std::int64_t x = 0;
            auto [p, ec] = std::from_chars(first, last, x);
            if (ec != std::errc() || p != last) parse_fail(k.dotted() + " expects an integer, got '" + v + "'");
            return std::to_string(x);
        }
        case ValueKind::Boolean:
            if (v == "true" || v == "1" || v == "yes") return "true";
            if (v == "false" || v == "0" || v == "no") return "false";
            parse_fail(k.dotted() + " expects true or false, got '" + v + "'");
        case ValueKind::Choice:
            for (const auto& c : k.choices)
                if (c == v) return v;
            parse_fail(k.dotted() + " has no option '" + v + "'");
        case ValueKind::Text:
            if (v.empty()) parse_fail(k.dotted() + " must not be empty");
            return v;
    }
    return v;
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ValidationError, msg); }

}  // namespace

ScenarioConfig::ScenarioConfig() {
    for (const auto& k : keys()) values_[k.dotted()] = normalize(k, k.default_value);
}

void ScenarioConfig::set(const std::string& dotted, const std::string& value) {
    const KeySpec* k = find_key(dotted);
    if (!k) parse_fail("unknown key '" + dotted + "'");
    values_[dotted] = normalize(*k, value);
}

void ScenarioConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) parse_fail("override '" + assignment + "' is not of the form key=value");
    set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

ScenarioConfig ScenarioConfig::parse(std::istream& in) {
    ScenarioConfig cfg;
    std::map<std::string, int> seen;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (t.front() == '[') {
            if (t.back() != ']') parse_fail(where + "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            bool known = false;
            for (const auto& k : keys()) known = known || k.section == section;
            if (!known) parse_fail(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) parse_fail(where + "expected key = value");
        if (section.empty()) parse_fail(where + "key outside of any section");
        const std::string dotted = section + "." + trim(t.substr(0, eq));
        if (seen.count(dotted))
            parse_fail(where + "duplicate key '" + dotted + "' (first on line " +
                       std::to_string(seen[dotted]) + ")");
        seen[dotted] = lineno;
        try {
            cfg.set(dotted, t.substr(eq + 1));
        } catch (const Error& e) {
            parse_fail(where + std::string(e.what()).substr(std::string("ParseError: ").size()));
        }
    }
    return cfg;
}

ScenarioConfig ScenarioConfig::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) parse_fail("cannot open config file '" + path + "'");
    return parse(in);
}

const std::string& ScenarioConfig::get(const std::string& dotted) const {
    const auto it = values_.find(dotted);
    if (it == values_.end()) parse_fail("unknown key '" + dotted + "'");
    return it->second;
}

double ScenarioConfig::real(const std::string& dotted) const { return std::stod(get(dotted)); }
std::int64_t ScenarioConfig::integer(const std::string& dotted) const { return std::stoll(get(dotted)); }
bool ScenarioConfig::boolean(const std::string& dotted) const { return get(dotted) == "true"; }

std::string ScenarioConfig::serialize() const {
    std::ostringstream os;
    std::string section;
    for (const auto& k : keys()) {
        if (k.section != section) {
            if (!section.empty()) os << '\n';
            section = k.section;
            os << '[' << section << "]\n";
        }
        os << k.name << " = " << get(k.dotted()) << '\n';
    }
    return os.str();
}

ModelParams ScenarioConfig::model() const {
    ModelParams p;
    p.u_rate = real("model.gamma");
    p.u_shift = real("model.eta");
    p.v_rate = real("model.alpha");
    p.v_shift = real("model.a");
    p.illiquidity = real("model.epsilon");
    p.impact_fraction = real("model.lambda_impact");
    p.depth_map = get("model.gamma_map") == "square" ? DepthMap::square() : DepthMap::identity();
    p.u_vol = {real("model.phi_scale"), real("model.phi_power")};
    p.v_vol = {real("model.theta_scale"), real("model.theta_power")};
    p.s0 = real("model.s0");
    p.u0 = real("model.u0");
    p.v0 = real("model.v0");
    p.correlation = decompose_correlation(
        correlation_matrix(real("model.rho_su"), real("model.rho_sv"), real("model.rho_uv")));
    return p;
}

TimeGrid ScenarioConfig::grid() const {
    TimeGrid g;
    g.horizon = real("grid.horizon");
    g.n_steps = static_cast<std::size_t>(integer("grid.n_steps"));
    g.maturity1 = real("grid.maturity1");
    g.maturity2 = real("grid.maturity2");
    return g;
}

BsdeConfig ScenarioConfig::bsde(unsigned threads) const {
    BsdeConfig c;
    c.stop_level = real("bsde.stop_level");
    c.payoff_cap = real("bsde.payoff_cap");
    c.basis_degree = static_cast<int>(integer("bsde.basis_degree"));
    c.picard_iters = static_cast<int>(integer("bsde.picard_iters"));
    c.picard_tol = real("bsde.picard_tol");
    c.min_paths = static_cast<std::size_t>(integer("bsde.min_paths"));
    c.ridge = real("bsde.ridge");
    c.threads = threads;
    return c;
}

Payoff ScenarioConfig::payoff() const {
    const std::string& kind = get("payoff.kind");
    if (kind == "identity") return payoff_identity();
    if (kind == "constant") return payoff_constant(real("payoff.level"));
    return payoff_clipped_call(real("payoff.strike"), real("payoff.cap"));
}

SwapLiquidity ScenarioConfig::swap_liquidity() const {
    return {real("swaps.depth1"), real("swaps.depth2"), real("swaps.lambda1"), real("swaps.lambda2")};
}

SwapSpec ScenarioConfig::swap_spec(int i) const {
    const TimeGrid g = grid();
    return i == 0 ? SwapSpec{g.maturity1, real("swaps.strike1")} : SwapSpec{g.maturity2, real("swaps.strike2")};
}

std::vector<double> ScenarioConfig::x_grid() const {
    std::vector<double> xs;
    double x = real("replicate.x0");
    for (std::int64_t i = 0; i < integer("replicate.x_count"); ++i, x *= 0.5) xs.push_back(x);
    return xs;
}

std::size_t ScenarioConfig::n_paths() const { return static_cast<std::size_t>(integer("run.n_paths")); }
std::uint64_t ScenarioConfig::seed() const { return static_cast<std::uint64_t>(integer("run.seed")); }

void ScenarioConfig::validate(const std::string& experiment) const {
    const double lam = real("model.lambda_impact");
    if (!(lam >= 0.0 && lam <= 1.0)) invalid("lambda_impact must lie in [0,1]");
    if (integer("run.n_paths") < 1) invalid("n_paths must be at least 1");
    if (integer("run.seed") < 0) invalid("seed must be non-negative");
    if (integer("grid.n_steps") < 1) invalid("n_steps must be at least 1");
    if (integer("bsde.min_paths") < 0) invalid("min_paths must be non-negative");
    if (integer("run.path_output") < 0) invalid("path_output must be non-negative");
    try {
        model().validate();
        grid().validate();
        bsde(1).validate();
        swap_liquidity().validate();
    } catch (const Error& e) {
        if (!e.is_validation()) throw;
        invalid(e.what());
    }
    if (experiment == "replicate" || experiment == "bsde") {
        if (real("model.alpha") == real("model.gamma"))
            invalid("alpha == gamma makes the swap matrix psi singular; the swap hedge is undefined");
    }
    if (experiment == "replicate") {
        if (!(real("replicate.x0") > 0.0)) invalid("x0 must be positive");
        const auto fd = integer("replicate.fd_points"), nx = integer("replicate.x_count");
        if (nx < 2) invalid("x_count must be at least 2");
        if (fd < 2 || fd > nx) invalid("fd_points must lie in [2, x_count]");
    }
    if (experiment == "ledger") {
        const double q = real("ledger.trade_prob");
        if (!(q >= 0.0 && q <= 1.0)) invalid("trade_prob must lie in [0,1]");
        if (!(real("ledger.max_position") >= 0.0)) invalid("max_position must be non-negative");
    }
    if (experiment == "arbitrage-test") {
        if (integer("arbitrage.strategies") < 1) invalid("arbitrage needs at least one strategy");
        if (!(real("arbitrage.stop_loss") > 0.0)) invalid("stop_loss must be positive");
        if (!(real("arbitrage.stop_loss") <= real("arbitrage.admissible_bound")))
            invalid("stop_loss must not exceed admissible_bound");
    }
}

}  // namespace liqrep
