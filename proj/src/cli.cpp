#include "liqrep/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "json.hpp"
#include "liqrep/bsde_engine.hpp"
#include "liqrep/error.hpp"
#include "liqrep/order_book.hpp"
#include "liqrep/portfolio_ledger.hpp"
#include "liqrep/replication_lab.hpp"
#include "liqrep/variance_swap.hpp"

namespace liqrep {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s = {"simulate", "ledger",    "swaps",
                                               "bsde",     "replicate", "arbitrage-test"};
    return s;
}

namespace {

double unit(std::uint64_t seed, std::uint64_t path, std::uint64_t node, std::uint64_t slot) {
    const std::uint64_t h = mix64(mix64(mix64(seed) ^ path) ^ (node * 8 + slot));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + file.string());
    os << text;
}

template <class Fn>
void write_with(const fs::path& file, Fn&& fn) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + file.string());
    fn(os);
}

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"stderr", e.std_error}}; }

std::size_t shown_paths(const ScenarioConfig& cfg, std::size_t n) {
    return std::min<std::size_t>(n, static_cast<std::size_t>(cfg.integer("run.path_output")));
}

void run_simulate(const ScenarioConfig& cfg, unsigned threads, const fs::path& out) {
    const PathBundle b = simulate_paths(cfg.model(), cfg.grid(), cfg.n_paths(), cfg.seed(), threads);
    write_with(out / "paths.csv", [&](std::ostream& os) { write_paths_csv(os, b); });
}

void run_ledger(const ScenarioConfig& cfg, unsigned threads, const fs::path& out) {
    const ModelParams p = cfg.model();
    const PathBundle b = simulate_paths(p, cfg.grid(), cfg.n_paths(), cfg.seed(), threads);
    const bool swaps = cfg.boolean("ledger.trade_swaps");
    const Strategy s = random_strategy(b.n_paths, b.grid.nodes(), mix64(cfg.seed() ^ 0x1ed9e5ULL),
                                       cfg.real("ledger.trade_prob"), cfg.real("ledger.max_position"),
                                       swaps);
    SwapPricePaths prices;
    if (swaps)
        prices = {swap_price_path(b, p, cfg.swap_spec(0)), swap_price_path(b, p, cfg.swap_spec(1))};
    const LedgerReport r = ledger_report(s, b, p.impact_fraction, cfg.swap_liquidity(), prices);

    write_with(out / "ledger.csv",
               [&](std::ostream& os) { write_ledger_csv(os, b, s, r, shown_paths(cfg, b.n_paths)); });

    const std::size_t n = b.grid.n_steps;
    const auto& d = r.decomposed;
    double cash = 0.0, impact = 0.0, quad = 0.0;
    for (std::size_t q = 0; q < b.n_paths; ++q) {
        cash += r.Y(q, n);
        impact += d.impact_term(q, n) + d.swap_impact(q, n);
        quad += d.quad_cost(q, n) + d.swap_quad(q, n);
    }
    const double m = static_cast<double>(b.n_paths);
    json j = {{"n_paths", b.n_paths},
              {"max_discrepancy", r.max_discrepancy()},
              {"mean_final_cash", cash / m},
              {"mean_impact_term", impact / m},
              {"mean_quadratic_cost", quad / m},
              {"trade_swaps", swaps}};
    write_text(out / "ledger_summary.json", j.dump(2) + "\n");
}

void run_swaps(const ScenarioConfig& cfg, unsigned threads, const fs::path& out) {
    const ModelParams p = cfg.model();
    const TimeGrid g = cfg.grid();
    const PathBundle b = simulate_paths(p, g, cfg.n_paths(), cfg.seed(), threads);
    const SwapSpec s1 = cfg.swap_spec(0), s2 = cfg.swap_spec(1);
    const PathMatrix G1 = swap_price_path(b, p, s1), G2 = swap_price_path(b, p, s2);

    std::size_t ok = 0, degenerate = 0, singular = 0;
    double min_scaled = INFINITY;
    const std::size_t shown = shown_paths(cfg, b.n_paths);
    std::ofstream os(out / "swap_prices.csv", std::ios::binary);
    os << "path,step,t,G1,G2,psi_det,psi_scaled_det,psi_status\n";
    for (std::size_t q = 0; q < b.n_paths; ++q)
        for (std::size_t k = 0; k < g.nodes(); ++k) {
            const MarketState st{g.t(k), b.U(q, k), b.V(q, k), b.RV(q, k), b.S(q, k)};
            const PsiMatrix psi = psi_matrix(st, p, g.maturity1, g.maturity2);
            const char* status = "ok";
            switch (psi.status) {
                case PsiStatus::Ok:
                    ++ok;
                    min_scaled = std::min(min_scaled, std::abs(psi.scaled_det()));
                    break;
                case PsiStatus::DegenerateState:
                    ++degenerate;
                    status = "degenerate_state";
                    break;
                case PsiStatus::SingularConfig:
                    ++singular;
                    status = "singular_config";
                    break;
            }
            if (q < shown)
                os << q << ',' << k << ',' << format_double(g.t(k)) << ',' << format_double(G1(q, k))
                   << ',' << format_double(G2(q, k)) << ',' << format_double(psi.det) << ','
                   << format_double(psi.scaled_det()) << ',' << status << '\n';
        }
    if (!os) throw std::runtime_error("cannot write swap_prices.csv");

    const MarketState s0{0.0, p.u0, p.v0, 0.0, p.s0};
    json j = {{"G1_0", swap_price(s0, p, s1)},
              {"G2_0", swap_price(s0, p, s2)},
              {"psi_ok_nodes", ok},
              {"psi_degenerate_nodes", degenerate},
              {"psi_singular_nodes", singular},
              {"min_abs_scaled_det", ok ? json(min_scaled) : json(nullptr)}};
    write_text(out / "swaps_summary.json", j.dump(2) + "\n");
}

void run_bsde(const ScenarioConfig& cfg, unsigned threads, const fs::path& out, std::ostream& log) {
    const ModelParams p = cfg.model();
    const BsdeConfig bc = cfg.bsde(threads);
    const PathBundle b = simulate_paths(p, cfg.grid(), cfg.n_paths(), cfg.seed(), threads);
    const Payoff h = cfg.payoff();
    const double x = cfg.real("bsde.x");

    const HatSolution hat = hat_solution(b, p, h, bc);
    const TruncatedPayoff hN = truncate_payoff(h, bc.payoff_cap);
    const auto& tau = hat.solution.tau;
    const auto terminal = terminal_condition(b, hN, x, p.impact_fraction, hat.X);
    const BsdeSolution sol =
        solve_quadratic_bsde(b, make_driver(b, p, tau, x, hN.bound), terminal, tau, bc);
    const HedgeProcess hp = hedge_from_solution(sol, b, p);
    if (!sol.smallness_holds) log << "warning: smallness condition fails for x = " << x << '\n';

    write_with(out / "bsde_diagnostics.csv", [&](std::ostream& os) { write_bsde_diagnostics_csv(os, sol); });
    const std::size_t shown = shown_paths(cfg, b.n_paths);
    write_with(out / "bsde_paths.csv", [&](std::ostream& os) {
        os << "path,step,t,Y,Z1,Z2,Z3,X,chi1,chi2\n";
        for (std::size_t q = 0; q < shown; ++q)
            for (std::size_t k = 0; k < b.grid.nodes(); ++k)
                os << q << ',' << k << ',' << format_double(b.grid.t(k)) << ','
                   << format_double(sol.Y(q, k)) << ',' << format_double(sol.Z1(q, k)) << ','
                   << format_double(sol.Z2(q, k)) << ',' << format_double(sol.Z3(q, k)) << ','
                   << format_double(hp.X(q, k)) << ',' << format_double(hp.chi1(q, k)) << ','
                   << format_double(hp.chi2(q, k)) << '\n';
    });

    const auto stopped = std::count_if(tau.begin(), tau.end(), [&](std::size_t t) { return t < b.grid.n_steps; });
    json j = {{"x", x},
              {"Y0", {{"value", sol.y0}, {"stderr", sol.y0_stderr}}},
              {"H0", {{"value", sol.y0 / x}, {"stderr", sol.y0_stderr / std::abs(x)}}},
              {"hat_Y0", {{"value", hat.y0()}, {"stderr", hat.y0_stderr()}}},
              {"degenerate_run", sol.degenerate_run},
              {"stopped_paths", stopped},
              {"lambda_sup", sol.lambda_sup},
              {"smallness_holds", sol.smallness_holds},
              {"bound_violations", sol.bound_violations},
              {"picard_contracting", sol.picard_contracting},
              {"hedge_degenerate_nodes", hp.degenerate_nodes},
              {"hedge_swap_block_zero_nodes", hp.swap_block_zero_nodes}};
    write_text(out / "bsde_summary.json", j.dump(2) + "\n");
}

void run_replicate(const ScenarioConfig& cfg, unsigned threads, const fs::path& out, std::ostream& log) {
    const ModelParams p = cfg.model();
    const TimeGrid g = cfg.grid();
    const BsdeConfig bc = cfg.bsde(threads);
    const Payoff h = cfg.payoff();
    const ReplicationReport rep =
        replication_cost_curve(p, g, h, cfg.x_grid(), cfg.n_paths(), cfg.seed(), bc,
                               static_cast<std::size_t>(cfg.integer("replicate.fd_points")));
    for (const auto& r : rep.rows)
        if (!r.smallness_holds) log << "warning: smallness condition fails for x = " << r.x << '\n';

    // independent paths for the frictionless reference value
    const Estimate mc = plain_mc_payoff(p, g, h, cfg.n_paths(), mix64(cfg.seed() ^ 0x9a1e5ULL), threads);
    json j = json::parse(rep.to_json());
    j["plain_mc"] = estimate_json(mc);
    j["H0_limit_minus_plain_mc_in_stderr"] =
        (rep.H0_limit.value - mc.value) / std::hypot(rep.H0_limit.std_error, mc.std_error);
    write_text(out / "replication.json", j.dump(2) + "\n");
    write_with(out / "replication.csv", [&](std::ostream& os) { rep.write_csv(os); });
}

void run_arbitrage(const ScenarioConfig& cfg, unsigned threads, const fs::path& out) {
    const TimeGrid g = cfg.grid();
    const auto family =
        arbitrage_family(g.n_steps, static_cast<std::size_t>(cfg.integer("arbitrage.strategies")));
    ArbitrageOptions o;
    o.stop_loss = cfg.real("arbitrage.stop_loss");
    o.admissible_bound = cfg.real("arbitrage.admissible_bound");
    o.threads = threads;
    const auto res = arbitrage_harness(family, cfg.model(), g, cfg.n_paths(), cfg.seed(), o);

    bool any = false;
    write_with(out / "arbitrage.csv", [&](std::ostream& os) {
        os << "strategy,mean_gain,stderr,violates,admissible_fraction,stopped_paths\n";
        for (std::size_t i = 0; i < res.size(); ++i) {
            any = any || res[i].violates;
            os << i << ',' << format_double(res[i].mean) << ',' << format_double(res[i].std_error) << ','
               << (res[i].violates ? 1 : 0) << ',' << format_double(res[i].admissible_fraction) << ','
               << res[i].stopped_paths << '\n';
        }
    });
    json j = {{"strategies", res.size()}, {"any_violation", any}, {"stop_loss", o.stop_loss},
              {"admissible_bound", o.admissible_bound}};
    write_text(out / "arbitrage_summary.json", j.dump(2) + "\n");
}

}  // namespace

Strategy random_strategy(std::size_t n_paths, std::size_t nodes, std::uint64_t seed, double trade_prob,
                         double max_position, bool with_swaps) {
    Strategy s = Strategy::zeros(n_paths, nodes);
    for (std::size_t p = 0; p < n_paths; ++p) {
        double x = 0.0, c1 = 0.0, c2 = 0.0;
        for (std::size_t k = 0; k < nodes; ++k) {
            if (unit(seed, p, k, 0) < trade_prob) x = max_position * (2.0 * unit(seed, p, k, 1) - 1.0);
            if (with_swaps) {
                // swap notionals in variance units
                if (unit(seed, p, k, 2) < trade_prob) c1 = 100.0 * max_position * (2.0 * unit(seed, p, k, 3) - 1.0);
                if (unit(seed, p, k, 4) < trade_prob) c2 = 100.0 * max_position * (2.0 * unit(seed, p, k, 5) - 1.0);
            }
            s.X(p, k) = x;
            s.chi1(p, k) = c1;
            s.chi2(p, k) = c2;
        }
    }
    s.close_at_end();
    return s;
}

std::vector<std::vector<double>> arbitrage_family(std::size_t n_steps, std::size_t count) {
    std::vector<std::vector<double>> fam;
    const double n = static_cast<double>(n_steps);
    for (std::size_t f = 0; f < count; ++f) {
        std::vector<double> prof(n_steps + 1, 0.0);
        const double amp = 1.0 + static_cast<double>(f / 4);
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double t = static_cast<double>(k) / n;
            switch (f % 4) {
                case 0: prof[k] = (t >= 0.125 && t < 0.5) ? amp : 0.0; break;
                case 1: prof[k] = (t >= 0.25 && t < 0.75) ? -amp : 0.0; break;
                case 2: prof[k] = amp * std::sin(2.0 * M_PI * t); break;
                default: prof[k] = amp * t; break;
            }
        }
        fam.push_back(std::move(prof));
    }
    return fam;
}

ScenarioConfig resolve_config(const RunOptions& o) {
    ScenarioConfig cfg = o.config_path ? ScenarioConfig::load(*o.config_path) : ScenarioConfig{};
    for (const auto& kv : o.overrides) cfg.apply_override(kv);
    if (o.seed) cfg.set("run.seed", std::to_string(*o.seed));
    if (o.out_dir) cfg.set("run.out_dir", *o.out_dir);
    cfg.set("run.experiment", o.subcommand);
    return cfg;
}

void run_experiment(const std::string& sub, const ScenarioConfig& cfg, unsigned threads,
                    const fs::path& out, std::ostream& log) {
    if (sub == "simulate") return run_simulate(cfg, threads, out);
    if (sub == "ledger") return run_ledger(cfg, threads, out);
    if (sub == "swaps") return run_swaps(cfg, threads, out);
    if (sub == "bsde") return run_bsde(cfg, threads, out, log);
    if (sub == "replicate") return run_replicate(cfg, threads, out, log);
    if (sub == "arbitrage-test") return run_arbitrage(cfg, threads, out);
    throw Error(ErrorCode::ValidationError, "unknown subcommand '" + sub + "'");
}

int run(const RunOptions& o, std::ostream& log, std::ostream& err) {
    if (std::find(subcommands().begin(), subcommands().end(), o.subcommand) == subcommands().end()) {
        err << "error: unknown subcommand '" << o.subcommand << "'\n";
        return 2;
    }
    ScenarioConfig cfg;
    try {
        cfg = resolve_config(o);
        cfg.validate(o.subcommand);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.is_validation() ? 2 : 3;
    }

    const fs::path out = cfg.get("run.out_dir");
    try {
        fs::create_directories(out);
        write_text(out / "resolved_config.ini", cfg.serialize());
        write_text(out / "VERSION", std::string(kVersion) + "\n");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }

    try {
        run_experiment(o.subcommand, cfg, o.threads, out, log);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        if (e.is_validation()) return 2;
        std::ofstream(out / "error.txt", std::ios::binary) << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        std::ofstream(out / "error.txt", std::ios::binary) << e.what() << '\n';
        return 3;
    }
    log << o.subcommand << ": wrote " << out.string() << '\n';
    return 0;
}

}  // namespace liqrep
