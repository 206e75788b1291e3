#include "liqrep/portfolio_ledger.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "liqrep/error.hpp"
#include "liqrep/parallel.hpp"

namespace liqrep {

void SwapLiquidity::validate() const {
    if (!(depth1 > 0.0) || !(depth2 > 0.0))
        throw Error(ErrorCode::InvalidParams, "swap depths must be positive");
    if (!(lambda1 >= 0.0 && lambda1 <= 1.0) || !(lambda2 >= 0.0 && lambda2 <= 1.0))
        throw Error(ErrorCode::InvalidParams, "swap impact fractions must lie in [0,1]");
}

namespace {

// One traded instrument: unaffected price, depth, impact fraction, holdings.
struct Leg {
    const PathMatrix* price;
    PathMatrix depth;
    double lambda;
    const PathMatrix* pos;
    double pre;
};

bool trades(const PathMatrix& pos, double pre) {
    if (pre != 0.0) return true;
    if (pos.empty()) return false;
    return std::any_of(pos.data().begin(), pos.data().end(), [](double v) { return v != 0.0; });
}

std::vector<Leg> swap_legs(const Strategy& s, const PathBundle& b, const SwapLiquidity& swaps,
                           const SwapPricePaths& prices) {
    std::vector<Leg> legs;
    const bool t1 = trades(s.chi1, s.chi1_pre);
    const bool t2 = trades(s.chi2, s.chi2_pre);
    if (!t1 && !t2) return legs;
    if (prices.empty())
        throw Error(ErrorCode::GridMismatch, "strategy trades swaps but no swap prices were given");
    if (!prices.G1.same_shape(b.S) || !prices.G2.same_shape(b.S) || !s.chi1.same_shape(b.S) ||
        !s.chi2.same_shape(b.S))
        throw Error(ErrorCode::GridMismatch, "swap inputs live on a different grid");
    legs.push_back({&prices.G1, PathMatrix(b.n_paths, b.grid.nodes(), swaps.depth1),
                    swaps.lambda1, &s.chi1, s.chi1_pre});
    legs.push_back({&prices.G2, PathMatrix(b.n_paths, b.grid.nodes(), swaps.depth2),
                    swaps.lambda2, &s.chi2, s.chi2_pre});
    return legs;
}

void check_stock_shape(const Strategy& s, const PathBundle& b) {
    if (!s.X.same_shape(b.S)) throw Error(ErrorCode::GridMismatch, "strategy grid differs from bundle");
}

void add_trade_cash(PathMatrix& Y, const PathMatrix& quote_pre, const PathMatrix& depth,
                    const PathMatrix& pos, double pre) {
    for (std::size_t p = 0; p < Y.paths(); ++p) {
        double paid = 0.0;
        double prev = pre;
        for (std::size_t k = 0; k < Y.nodes(); ++k) {
            const double dx = pos(p, k) - prev;
            paid += dx * (quote_pre(p, k) + depth(p, k) * dx);
            Y(p, k) -= paid;
            prev = pos(p, k);
        }
    }
}

struct LegTerms {
    PathMatrix gains, impact, quad, liq;
    std::vector<double> base;  // value of the carried-in holding at the node-0 quote
};

LegTerms leg_terms(const PathMatrix& price, const PathMatrix& depth, double lambda,
                   const PathMatrix& pos, double pre) {
    const std::size_t n = price.paths(), nodes = price.nodes();
    LegTerms t{PathMatrix(n, nodes), PathMatrix(n, nodes), PathMatrix(n, nodes),
               PathMatrix(n, nodes), std::vector<double>(n)};
    const ImpactedQuotePath q = impacted_quotes(price, depth, lambda, pos, pre);
    for (std::size_t p = 0; p < n; ++p) {
        double g = 0.0, imp = 0.0, quad = 0.0;
        double prev = pre;
        t.base[p] = pre * (price(p, 0) - lambda * depth(p, 0) * pre);
        for (std::size_t k = 0; k < nodes; ++k) {
            const double x = pos(p, k);
            const double dx = x - prev;
            if (k > 0) {
                g += prev * (price(p, k) - price(p, k - 1));
                imp -= lambda * prev * prev * (depth(p, k) - depth(p, k - 1));
            }
            quad -= (1.0 - lambda) * depth(p, k) * dx * dx;
            t.gains(p, k) = g;
            t.impact(p, k) = imp;
            t.quad(p, k) = quad;
            t.liq(p, k) = liquidation_value(x, q.post(p, k), depth(p, k), lambda);
            prev = x;
        }
    }
    return t;
}

void accumulate(PathMatrix& into, const PathMatrix& from) {
    for (std::size_t p = 0; p < into.paths(); ++p)
        for (std::size_t k = 0; k < into.nodes(); ++k) into(p, k) += from(p, k);
}

}  // namespace

PathMatrix cash_direct(const Strategy& strategy, const ImpactedQuotePath& quotes,
                       const PathBundle& bundle, const SwapLiquidity& swaps,
                       const SwapPricePaths& swap_prices) {
    check_stock_shape(strategy, bundle);
    if (!quotes.pre.same_shape(bundle.S))
        throw Error(ErrorCode::GridMismatch, "quote path grid differs from bundle");
    PathMatrix Y(bundle.n_paths, bundle.grid.nodes(), strategy.initial_cash);
    add_trade_cash(Y, quotes.pre, bundle.M, strategy.X, strategy.x_pre);
    for (const Leg& leg : swap_legs(strategy, bundle, swaps, swap_prices)) {
        const ImpactedQuotePath q = impacted_quotes(*leg.price, leg.depth, leg.lambda, *leg.pos, leg.pre);
        add_trade_cash(Y, q.pre, leg.depth, *leg.pos, leg.pre);
    }
    return Y;
}

DecomposedLedger cash_decomposed(const Strategy& strategy, const PathBundle& bundle, double lambda,
                                 const SwapLiquidity& swaps, const SwapPricePaths& swap_prices) {
    check_stock_shape(strategy, bundle);
    const std::size_t n = bundle.n_paths, nodes = bundle.grid.nodes();
    DecomposedLedger d;
    LegTerms stock = leg_terms(bundle.S, bundle.M, lambda, strategy.X, strategy.x_pre);
    d.gains = std::move(stock.gains);
    d.impact_term = std::move(stock.impact);
    d.quad_cost = std::move(stock.quad);
    d.liq_value = std::move(stock.liq);
    std::vector<double> base = std::move(stock.base);

    d.swap_gains = PathMatrix(n, nodes);
    d.swap_impact = PathMatrix(n, nodes);
    d.swap_quad = PathMatrix(n, nodes);
    for (const Leg& leg : swap_legs(strategy, bundle, swaps, swap_prices)) {
        LegTerms t = leg_terms(*leg.price, leg.depth, leg.lambda, *leg.pos, leg.pre);
        accumulate(d.swap_gains, t.gains);
        accumulate(d.swap_impact, t.impact);
        accumulate(d.swap_quad, t.quad);
        accumulate(d.liq_value, t.liq);
        for (std::size_t p = 0; p < n; ++p) base[p] += t.base[p];
    }

    d.Z = PathMatrix(n, nodes);
    d.Y = PathMatrix(n, nodes);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t k = 0; k < nodes; ++k) {
            const double z = d.gains(p, k) + d.impact_term(p, k) + d.quad_cost(p, k) +
                             d.swap_gains(p, k) + d.swap_impact(p, k) + d.swap_quad(p, k);
            d.Z(p, k) = z;
            d.Y(p, k) = strategy.initial_cash + base[p] + z - d.liq_value(p, k);
        }
    }
    return d;
}

double LedgerReport::max_discrepancy() const {
    double m = 0.0;
    for (double v : discrepancy) m = std::max(m, v);
    return m;
}

LedgerReport ledger_report(const Strategy& strategy, const PathBundle& bundle, double lambda,
                           const SwapLiquidity& swaps, const SwapPricePaths& swap_prices) {
    LedgerReport r;
    const ImpactedQuotePath quotes = impacted_quote_path(bundle, strategy, lambda);
    r.Y = cash_direct(strategy, quotes, bundle, swaps, swap_prices);
    r.decomposed = cash_decomposed(strategy, bundle, lambda, swaps, swap_prices);
    r.discrepancy.assign(bundle.n_paths, 0.0);
    for (std::size_t p = 0; p < bundle.n_paths; ++p) {
        for (std::size_t k = 0; k < bundle.grid.nodes(); ++k) {
            const double a = r.Y(p, k), b = r.decomposed.Y(p, k);
            const double scale = std::max({1.0, std::abs(a), std::abs(b)});
            r.discrepancy[p] = std::max(r.discrepancy[p], std::abs(a - b) / scale);
        }
    }
    return r;
}

bool check_admissible(std::span<const double> gains, double a) {
    return std::all_of(gains.begin(), gains.end(), [a](double g) { return g >= -a; });
}

std::vector<char> check_admissible(const PathMatrix& gains, double a) {
    std::vector<char> ok(gains.paths());
    for (std::size_t p = 0; p < gains.paths(); ++p) ok[p] = check_admissible(gains.row(p), a);
    return ok;
}

Strategy apply_stop_loss(const std::vector<double>& profile, const PathBundle& b, double lambda,
                         double stop_loss) {
    const std::size_t nodes = b.grid.nodes();
    if (profile.size() != nodes)
        throw Error(ErrorCode::GridMismatch, "profile length must equal the node count");
    Strategy s = Strategy::zeros(b.n_paths, nodes);
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        double z = 0.0, prev = 0.0;
        bool stopped = false;
        for (std::size_t k = 0; k < nodes; ++k) {
            if (k > 0) {
                z += prev * (b.S(p, k) - b.S(p, k - 1));
                z -= lambda * prev * prev * (b.M(p, k) - b.M(p, k - 1));
            }
            if (!stopped && z < -stop_loss) stopped = true;
            const double x = stopped ? 0.0 : profile[k];
            const double dx = x - prev;
            z -= (1.0 - lambda) * b.M(p, k) * dx * dx;
            s.X(p, k) = x;
            prev = x;
        }
    }
    return s;
}

std::vector<ArbitrageResult> arbitrage_harness(const std::vector<std::vector<double>>& profiles,
                                               const ModelParams& params, const PathBundle& bundle,
                                               const ArbitrageOptions& options) {
    if (!params.submartingale_flag())
        throw Error(ErrorCode::NotSubmartingaleParams,
                    "harness needs the identity depth map with positive drift constants");
    std::vector<ArbitrageResult> out;
    out.reserve(profiles.size());
    const std::size_t last = bundle.grid.n_steps;
    for (const auto& profile : profiles) {
        Strategy s = apply_stop_loss(profile, bundle, params.impact_fraction, options.stop_loss);
        if (profile.back() != 0.0) s.close_at_end();
        const DecomposedLedger d =
            cash_decomposed(s, bundle, params.impact_fraction, SwapLiquidity{}, SwapPricePaths{});
        ArbitrageResult r;
        // chunked sums keep the reduction order fixed
        const std::size_t nc = chunk_count(bundle.n_paths);
        std::vector<double> s1(nc), s2(nc), adm(nc), stp(nc);
        parallel_chunks(bundle.n_paths, options.threads,
                        [&](std::size_t c, std::size_t begin, std::size_t end) {
                            for (std::size_t p = begin; p < end; ++p) {
                                const double z = d.Z(p, last);
                                s1[c] += z;
                                s2[c] += z * z;
                                adm[c] += check_admissible(d.Z.row(p), options.admissible_bound);
                                bool stopped = false;
                                for (std::size_t k = 0; k < last; ++k)
                                    stopped |= s.X(p, k) != profile[k];
                                stp[c] += stopped;
                            }
                        });
        double t1 = 0.0, t2 = 0.0, ta = 0.0, ts = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            t1 += s1[c];
            t2 += s2[c];
            ta += adm[c];
            ts += stp[c];
        }
        const double n = static_cast<double>(bundle.n_paths);
        r.mean = t1 / n;
        const double var = n > 1 ? std::max(0.0, (t2 - n * r.mean * r.mean) / (n - 1.0)) : 0.0;
        r.std_error = std::sqrt(var / n);
        r.violates = r.mean - 3.0 * r.std_error > 0.0;
        r.admissible_fraction = ta / n;
        r.stopped_paths = static_cast<std::size_t>(ts);
        out.push_back(r);
    }
    return out;
}

std::vector<ArbitrageResult> arbitrage_harness(const std::vector<std::vector<double>>& profiles,
                                               const ModelParams& params, const TimeGrid& grid,
                                               std::size_t n_paths, std::uint64_t seed,
                                               const ArbitrageOptions& options) {
    if (!params.submartingale_flag())
        throw Error(ErrorCode::NotSubmartingaleParams,
                    "harness needs the identity depth map with positive drift constants");
    const PathBundle bundle = simulate_paths(params, grid, n_paths, seed, options.threads);
    return arbitrage_harness(profiles, params, bundle, options);
}

void write_ledger_csv(std::ostream& os, const PathBundle& b, const Strategy& s,
                      const LedgerReport& r, std::size_t max_paths) {
    const auto& d = r.decomposed;
    os << "path,step,t,X,chi1,chi2,Y,gains,impact_term,quad_cost,liq_value\n";
    for (std::size_t p = 0; p < std::min(b.n_paths, max_paths); ++p) {
        for (std::size_t k = 0; k < b.grid.nodes(); ++k) {
            const double c1 = s.chi1.empty() ? 0.0 : s.chi1(p, k);
            const double c2 = s.chi2.empty() ? 0.0 : s.chi2(p, k);
            os << p << ',' << k << ',' << format_double(b.grid.t(k)) << ','
               << format_double(s.X(p, k)) << ',' << format_double(c1) << ','
               << format_double(c2) << ',' << format_double(r.Y(p, k)) << ','
               << format_double(d.gains(p, k) + d.swap_gains(p, k)) << ','
               << format_double(d.impact_term(p, k) + d.swap_impact(p, k)) << ','
               << format_double(d.quad_cost(p, k) + d.swap_quad(p, k)) << ','
               << format_double(d.liq_value(p, k)) << '\n';
        }
    }
}

}  // namespace liqrep
